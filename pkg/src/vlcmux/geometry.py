"""Poses, rotations, angular-diversity receiver geometries and random user states.

Coordinate system: x/y span the room footprint, z points up. All angles are
in radians internally; degrees only appear at the config boundary.
"""

import math
from dataclasses import dataclass

import numpy as np

SQRT2 = math.sqrt(2.0)

# Measured handheld-device rotation statistics (sitting users), degrees.
# Yaw mean is tied to the device azimuth and is not listed here.
HANDHELD_YAW_STD_DEG = 3.67
HANDHELD_PITCH_MEAN_DEG = 40.78
HANDHELD_PITCH_STD_DEG = 2.39
HANDHELD_ROLL_MEAN_DEG = -0.84
HANDHELD_ROLL_STD_DEG = 2.21


@dataclass(frozen=True)
class Pose:
    """Position (m) plus unit orientation vector of an optical element."""

    position: np.ndarray
    orientation: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=float)
        ori = np.asarray(self.orientation, dtype=float)
        if pos.shape != (3,) or ori.shape != (3,):
            raise ValueError("Pose expects 3-vectors")
        norm = np.linalg.norm(ori)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"orientation must be unit length, got norm {norm!r}")
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "orientation", ori)


@dataclass(frozen=True)
class RoomConfig:
    """Room footprint and the fixed transmitter/receiver heights."""

    width: float    # m, x extent
    length: float   # m, y extent
    height: float   # m
    tx_height: float  # m, LED plane
    rx_height: float  # m, UE plane

    def __post_init__(self):
        if min(self.width, self.length, self.height) <= 0:
            raise ValueError("room dimensions must be positive")
        if not (0 < self.rx_height < self.tx_height <= self.height):
            raise ValueError("heights must satisfy 0 < rx < tx <= room height")


@dataclass(frozen=True)
class UeState:
    """Sampled user position, azimuth and device rotation angles (radians)."""

    x: float
    y: float
    azimuth: float
    beta_z: float
    beta_x: float
    beta_y: float


@dataclass(frozen=True)
class OrientationModel:
    """Device orientation statistics: fixed upward or Laplace-distributed.

    Laplace scales are the distribution parameter b = stddev / sqrt(2).
    The yaw mean is always azimuth - pi/2 and is supplied at sample time.
    """

    kind: str  # "upward" | "laplace"
    yaw_scale: float = 0.0
    pitch_mean: float = 0.0
    pitch_scale: float = 0.0
    roll_mean: float = 0.0
    roll_scale: float = 0.0

    def __post_init__(self):
        if self.kind not in ("upward", "laplace"):
            raise ValueError(f"unknown orientation model {self.kind!r}")
        if self.kind == "laplace":
            if min(self.yaw_scale, self.pitch_scale, self.roll_scale) <= 0:
                raise ValueError("Laplace scales must be positive")

    @classmethod
    def upward(cls) -> "OrientationModel":
        return cls("upward")

    @classmethod
    def handheld(cls) -> "OrientationModel":
        """Laplace model with the measured sitting-user statistics."""
        return cls(
            "laplace",
            yaw_scale=math.radians(HANDHELD_YAW_STD_DEG) / SQRT2,
            pitch_mean=math.radians(HANDHELD_PITCH_MEAN_DEG),
            pitch_scale=math.radians(HANDHELD_PITCH_STD_DEG) / SQRT2,
            roll_mean=math.radians(HANDHELD_ROLL_MEAN_DEG),
            roll_scale=math.radians(HANDHELD_ROLL_STD_DEG) / SQRT2,
        )


@dataclass(frozen=True)
class LinkGeometry:
    """Geometric quantities of one LED-to-PD link."""

    distance: float
    cos_radiant: float    # cosine at the LED
    cos_incidence: float  # cosine at the PD
    visible: bool


def rotation_matrix(beta_z: float, beta_x: float, beta_y: float) -> np.ndarray:
    """Composed device rotation R_z(beta_z) @ R_x(beta_x) @ R_y(beta_y)."""
    cz, sz = math.cos(beta_z), math.sin(beta_z)
    cx, sx = math.cos(beta_x), math.sin(beta_x)
    cy, sy = math.cos(beta_y), math.sin(beta_y)
    rz = np.array([[cz, -sz, 0.0], [sz, cz, 0.0], [0.0, 0.0, 1.0]])
    rx = np.array([[1.0, 0.0, 0.0], [0.0, cx, -sx], [0.0, sx, cx]])
    ry = np.array([[cy, 0.0, sy], [0.0, 1.0, 0.0], [-sy, 0.0, cy]])
    return rz @ rx @ ry


def orient_pd(body_orientation: np.ndarray, ue: UeState) -> np.ndarray:
    """Rotate a body-frame PD orientation into the room frame."""
    return rotation_matrix(ue.beta_z, ue.beta_x, ue.beta_y) @ np.asarray(body_orientation, float)


def pr_orientations(n_pd: int, elevation: float) -> np.ndarray:
    """Body-frame PD orientations of a pyramid receiver, shape (n_pd, 3).

    All detectors share the elevation angle; azimuths are spaced uniformly
    starting at zero.
    """
    if n_pd < 1:
        raise ValueError("need at least one detector")
    if not 0 <= elevation <= math.pi / 2:
        raise ValueError("elevation must be in [0, pi/2]")
    n = np.arange(n_pd)
    omega = 2.0 * np.pi * n / n_pd
    st, ct = math.sin(elevation), math.cos(elevation)
    return np.column_stack([np.cos(omega) * st, np.sin(omega) * st, np.full(n_pd, ct)])


def hr_orientations(n_pd: int) -> np.ndarray:
    """Body-frame PD orientations of a hemispheric receiver, shape (n_pd, 3).

    Elevations follow arccos(s_n) with s_n = 1 - 2(n-1)/(2*n_pd-1); azimuths
    follow a spiral increment of 3.6 / sqrt(2*n_pd*(1-s_n^2)), wrapped mod 2pi.
    """
    if n_pd < 1:
        raise ValueError("need at least one detector")
    out = np.empty((n_pd, 3))
    omega = 0.0
    for n in range(1, n_pd + 1):
        s = 1.0 - 2.0 * (n - 1) / (2.0 * n_pd - 1.0)
        theta = math.acos(s)
        if n > 1:
            omega = (omega + 3.6 / math.sqrt(2.0 * n_pd * (1.0 - s * s))) % (2.0 * math.pi)
        out[n - 1] = (math.cos(omega) * math.sin(theta),
                      math.sin(omega) * math.sin(theta),
                      s)
    return out


@dataclass(frozen=True)
class ReceiverGeometry:
    """Angular-diversity receiver: pyramid ("pr") or hemispheric ("hr")."""

    kind: str
    n_pd: int
    elevation: float = 0.0  # radians, pyramid only

    def __post_init__(self):
        if self.kind not in ("pr", "hr"):
            raise ValueError(f"unknown receiver kind {self.kind!r}")

    def body_orientations(self) -> np.ndarray:
        if self.kind == "pr":
            return pr_orientations(self.n_pd, self.elevation)
        return hr_orientations(self.n_pd)


def _laplace_icdf(u: float, mean: float, scale: float) -> float:
    # Inverse CDF from one uniform draw; clamp keeps log finite at u = 0.
    v = u - 0.5
    return mean - scale * math.copysign(1.0, v) * math.log(max(1.0 - 2.0 * abs(v), 1e-300))


def sample_ue(rng: np.random.Generator, room: RoomConfig, model: OrientationModel) -> UeState:
    """Draw one user state: uniform position/azimuth, model-driven rotations."""
    x = rng.uniform(0.0, room.width)
    y = rng.uniform(0.0, room.length)
    azimuth = 2.0 * math.pi * (1.0 - rng.random())  # in (0, 2*pi]
    yaw_mean = azimuth - math.pi / 2.0
    if model.kind == "upward":
        return UeState(x, y, azimuth, yaw_mean, 0.0, 0.0)
    beta_z = _laplace_icdf(rng.random(), yaw_mean, model.yaw_scale)
    beta_x = _laplace_icdf(rng.random(), model.pitch_mean, model.pitch_scale)
    beta_y = _laplace_icdf(rng.random(), model.roll_mean, model.roll_scale)
    return UeState(x, y, azimuth, beta_z, beta_x, beta_y)


def link_geometry(led: Pose, pd: Pose) -> LinkGeometry:
    """Distance, radiant/incidence cosines and visibility of one link."""
    diff = pd.position - led.position  # LED -> PD
    distance = float(np.linalg.norm(diff))
    if distance == 0.0:
        raise ValueError("LED and PD positions coincide; link is degenerate")
    cos_radiant = float(np.dot(led.orientation, diff)) / distance
    cos_incidence = float(np.dot(pd.orientation, -diff)) / distance
    visible = cos_radiant > 0.0 and cos_incidence > 0.0
    return LinkGeometry(distance, cos_radiant, cos_incidence, visible)


def link_arrays(led_positions: np.ndarray, led_orientations: np.ndarray,
                pd_position: np.ndarray, pd_orientations: np.ndarray):
    """Vectorized link geometry for collocated PDs.

    Returns (distance, cos_radiant, cos_incidence, visible) arrays of shape
    (n_pd, n_led).
    """
    led_positions = np.asarray(led_positions, float)
    diff = pd_position[None, :] - led_positions  # (n_led, 3), LED -> PD
    dist = np.linalg.norm(diff, axis=1)
    if np.any(dist == 0.0):
        raise ValueError("a PD coincides with an LED position")
    cos_rad = np.einsum("ij,ij->i", np.asarray(led_orientations, float), diff) / dist
    cos_inc = -(np.asarray(pd_orientations, float) @ diff.T) / dist[None, :]
    n_pd = pd_orientations.shape[0]
    dist = np.broadcast_to(dist[None, :], (n_pd, dist.size))
    cos_rad = np.broadcast_to(cos_rad[None, :], cos_inc.shape)
    visible = (cos_rad > 0.0) & (cos_inc > 0.0)
    return dist, cos_rad, cos_inc, visible
