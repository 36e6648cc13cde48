"""Strategy parameterisations mapped to complete scene configurations.

Three configuration families share one scene container:

* sd    - division in space: distinct LED positions and tilted detectors,
          one shared wide optical channel.
* wd    - division in wavelength: co-located LEDs at the room centre,
          upward detectors, disjoint spectral slots (with or without MIMO
          processing).
* scwd  - spatial clusters, each internally divided by wavelength.

Empirical builders reproduce the reference parameter choices; the lower
level *_scene builders take explicit parameters so a search can drive them.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import FrontEndModel
from .constants import LAMBDA_MAX, LAMBDA_MIN
from .geometry import ReceiverGeometry, RoomConfig
from .link import NoiseModel
from .spectra import FilterSpec, LedSpectrum, ResponsivityModel

VISIBLE_BAND = (LAMBDA_MIN, LAMBDA_MAX)

# Empirical angular defaults shared by the sd and scwd families
EMPIRICAL_HALF_POWER_SEMIANGLE = math.radians(60.0)
EMPIRICAL_FOV_COEFFICIENT = 1.4738
EMPIRICAL_PD_ELEVATION = math.radians(40.0)

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))

MAX_ELEMENTS = 16


@dataclass(frozen=True)
class SystemParams:
    """Strategy-independent system parameters."""

    room: RoomConfig
    frontend: FrontEndModel
    noise: NoiseModel
    total_power: float        # W, split equally over LEDs
    clipping_level: float
    gap_db: float
    pd_area: float            # m^2
    quantum_efficiency: float
    filter_index: float = 2.0
    filter_transmittance: float = 1.0
    band: tuple = VISIBLE_BAND

    def __post_init__(self):
        if self.total_power <= 0:
            raise ValueError("total optical power must be positive")
        if self.pd_area <= 0:
            raise ValueError("PD area must be positive")


@dataclass(frozen=True)
class StrategyConfig:
    """Parsed strategy selection: family, element count and free parameters."""

    kind: str                 # "sd" | "wd" | "scwd"
    elements: int
    receiver_kind: str = "pr"
    pd_elevation: float = EMPIRICAL_PD_ELEVATION  # rad, pyramid receivers only
    processing: bool = True   # wd only
    clusters: Optional[int] = None  # scwd; None means best over L
    half_power_semiangle: float = EMPIRICAL_HALF_POWER_SEMIANGLE
    fov_coefficient: float = EMPIRICAL_FOV_COEFFICIENT

    def __post_init__(self):
        if self.kind not in ("sd", "wd", "scwd"):
            raise ValueError(f"unknown strategy {self.kind!r}")
        if self.receiver_kind not in ("pr", "hr"):
            raise ValueError(f"unknown receiver kind {self.receiver_kind!r}")
        if not 1 <= self.elements <= MAX_ELEMENTS:
            raise ValueError(f"element count must be in 1..{MAX_ELEMENTS}")
        if self.clusters is not None and not 1 <= self.clusters <= self.elements:
            raise ValueError("cluster count must be in 1..elements")

    def receiver(self, n: int) -> ReceiverGeometry:
        """Receiver geometry over n detectors (or detector clusters)."""
        if self.receiver_kind == "pr":
            return ReceiverGeometry("pr", n, self.pd_elevation)
        return ReceiverGeometry("hr", n)


@dataclass(frozen=True)
class ClusterPlan:
    """Partition of elements into clusters plus within-cluster wavelength slots."""

    n_clusters: int
    sizes: tuple                 # elements per cluster
    element_cluster: tuple       # 1-based cluster index per element
    element_wavelength: tuple    # 1-based wavelength slot per element


@dataclass(frozen=True)
class SceneConfig:
    """Full transmitter/receiver description consumed by the channel builder."""

    room: RoomConfig
    led_positions: np.ndarray        # (n_led, 3) m
    led_orientations: np.ndarray     # (n_led, 3) unit
    led_spectra: tuple               # LedSpectrum per LED
    led_powers: np.ndarray           # (n_led,) W
    half_power_semiangle: float      # rad
    fov_coefficient: float
    pd_area: float                   # m^2
    pd_body_orientations: np.ndarray  # (n_pd, 3) unit, body frame
    filters: tuple                   # FilterSpec per PD
    responsivity: ResponsivityModel
    band: tuple
    frontend: FrontEndModel
    clipping_level: float
    noise: NoiseModel
    gap_db: float
    total_power: float
    mimo_processing: bool = True

    @property
    def n_led(self) -> int:
        return self.led_positions.shape[0]

    @property
    def n_pd(self) -> int:
        return self.pd_body_orientations.shape[0]

    def validate(self):
        if self.n_led != len(self.led_spectra) or self.n_led != self.led_powers.size:
            raise ValueError("per-LED field lengths disagree")
        if self.n_pd != len(self.filters):
            raise ValueError("per-PD field lengths disagree")
        x, y = self.led_positions[:, 0], self.led_positions[:, 1]
        if np.any(x < 0) or np.any(x > self.room.width) \
                or np.any(y < 0) or np.any(y > self.room.length):
            raise ValueError("LED positions outside the room footprint")
        if abs(float(self.led_powers.sum()) - self.total_power) > 1e-9 * self.total_power:
            raise ValueError("per-LED powers do not sum to the total power")
        if self.fov_coefficient < 1:
            raise ValueError("FoV coefficient must be >= 1")


def layout_positions(n: int, room: RoomConfig) -> np.ndarray:
    """Deterministic 2D LED layout, shape (n, 2).

    Single element at the room centre, four at the quarter points, otherwise
    a golden-angle sunflower of radius min(W, L)/3 about the centre.
    """
    if not 1 <= n <= MAX_ELEMENTS:
        raise ValueError(f"layout supports 1..{MAX_ELEMENTS} elements")
    w, l = room.width, room.length
    cx, cy = w / 2.0, l / 2.0
    if n == 1:
        return np.array([[cx, cy]])
    if n == 4:
        return np.array([[w / 4.0, l / 4.0], [3.0 * w / 4.0, l / 4.0],
                         [w / 4.0, 3.0 * l / 4.0], [3.0 * w / 4.0, 3.0 * l / 4.0]])
    radius = min(w, l) / 3.0
    i = np.arange(1, n + 1)
    r = radius * np.sqrt(i / n)
    theta = i * GOLDEN_ANGLE
    return np.column_stack([cx + r * np.cos(theta), cy + r * np.sin(theta)])


def wavelength_plan(n_slots: int, band=VISIBLE_BAND):
    """Equal-width spectral slots: per-slot centres and the common width."""
    if n_slots < 1:
        raise ValueError("need at least one wavelength slot")
    width = (band[1] - band[0]) / n_slots
    centers = band[0] + (np.arange(1, n_slots + 1) - 0.5) * width
    return centers, width


def cluster_plan(n_elements: int, n_clusters: int) -> ClusterPlan:
    """Partition elements into near-equal clusters and assign wavelength slots.

    Cluster sizes differ by at most one; the walk assigns elements to
    clusters in order, numbering wavelength slots 1..M_l within each cluster.
    """
    if not 1 <= n_clusters <= n_elements:
        raise ValueError("cluster count must be in 1..elements")
    base, extra = divmod(n_elements, n_clusters)
    sizes = tuple(base + 1 if l <= extra else base for l in range(1, n_clusters + 1))
    clusters, slots = [], []
    l = 1
    cum = sizes[0]
    for i in range(1, n_elements + 1):
        if i > cum:
            l += 1
            cum += sizes[l - 1]
        clusters.append(l)
        slots.append(i - cum + sizes[l - 1])
    return ClusterPlan(n_clusters, sizes, tuple(clusters), tuple(slots))


def _assemble_scene(params: SystemParams, xy: np.ndarray, led_centers: np.ndarray,
                    filter_centers: np.ndarray, filter_width: float,
                    pd_orientations: np.ndarray, half_power: float,
                    fov_coefficient: float, processing: bool) -> SceneConfig:
    n = xy.shape[0]
    positions = np.column_stack([xy, np.full(n, params.room.tx_height)])
    orientations = np.tile([0.0, 0.0, -1.0], (n, 1))
    spectra = tuple(LedSpectrum(float(c)) for c in led_centers)
    filters = tuple(FilterSpec(float(c), float(filter_width),
                               params.filter_index, params.filter_transmittance)
                    for c in filter_centers)
    powers = np.full(n, params.total_power / n)
    scene = SceneConfig(
        room=params.room,
        led_positions=positions,
        led_orientations=orientations,
        led_spectra=spectra,
        led_powers=powers,
        half_power_semiangle=half_power,
        fov_coefficient=fov_coefficient,
        pd_area=params.pd_area,
        pd_body_orientations=np.asarray(pd_orientations, float),
        filters=filters,
        responsivity=ResponsivityModel(params.quantum_efficiency),
        band=params.band,
        frontend=params.frontend,
        clipping_level=params.clipping_level,
        noise=params.noise,
        gap_db=params.gap_db,
        total_power=params.total_power,
        mimo_processing=processing,
    )
    scene.validate()
    return scene


def sd_scene(params: SystemParams, xy: np.ndarray, receiver: ReceiverGeometry,
             half_power: float, fov_coefficient: float) -> SceneConfig:
    """Space-division scene with explicit LED coordinates and angles."""
    n = xy.shape[0]
    centers, width = wavelength_plan(1, params.band)
    led_centers = np.full(n, centers[0])
    return _assemble_scene(params, xy, led_centers, led_centers, width,
                           receiver.body_orientations(), half_power,
                           fov_coefficient, True)


def wd_scene(params: SystemParams, led_centers: np.ndarray,
             filter_centers: np.ndarray, filter_width: float,
             processing: bool) -> SceneConfig:
    """Wavelength-division scene: centre-stacked LEDs, upward detectors."""
    n = led_centers.size
    cx, cy = params.room.width / 2.0, params.room.length / 2.0
    xy = np.tile([cx, cy], (n, 1))
    upward = np.tile([0.0, 0.0, 1.0], (n, 1))
    return _assemble_scene(params, xy, led_centers, filter_centers, filter_width,
                           upward, EMPIRICAL_HALF_POWER_SEMIANGLE,
                           EMPIRICAL_FOV_COEFFICIENT, processing)


def scwd_scene(params: SystemParams, n_elements: int, cluster_xy: np.ndarray,
               slot_led_centers: np.ndarray, slot_filter_centers: np.ndarray,
               filter_width: float, receiver: ReceiverGeometry,
               half_power: float, fov_coefficient: float) -> SceneConfig:
    """Clustered scene: per-element values follow the cluster-to-element map."""
    n_clusters = cluster_xy.shape[0]
    plan = cluster_plan(n_elements, n_clusters)
    if len(slot_led_centers) < max(plan.element_wavelength):
        raise ValueError("not enough wavelength slots for the largest cluster")
    cluster_orient = receiver.body_orientations()
    c_idx = np.array(plan.element_cluster) - 1
    m_idx = np.array(plan.element_wavelength) - 1
    xy = cluster_xy[c_idx]
    led_centers = np.asarray(slot_led_centers)[m_idx]
    filter_centers = np.asarray(slot_filter_centers)[m_idx]
    pd_orients = cluster_orient[c_idx]
    return _assemble_scene(params, xy, led_centers, filter_centers, filter_width,
                           pd_orients, half_power, fov_coefficient, True)


def _receiver(kind: str, n: int) -> ReceiverGeometry:
    if kind == "pr":
        return ReceiverGeometry("pr", n, EMPIRICAL_PD_ELEVATION)
    return ReceiverGeometry("hr", n)


def empirical_sd(n_elements: int, params: SystemParams,
                 receiver_kind: str = "pr") -> SceneConfig:
    """Reference space-division configuration."""
    xy = layout_positions(n_elements, params.room)
    return sd_scene(params, xy, _receiver(receiver_kind, n_elements),
                    EMPIRICAL_HALF_POWER_SEMIANGLE, EMPIRICAL_FOV_COEFFICIENT)


def empirical_wd(n_elements: int, params: SystemParams,
                 processing: bool = True) -> SceneConfig:
    """Reference wavelength-division configuration: uniform spectral slots."""
    centers, width = wavelength_plan(n_elements, params.band)
    return wd_scene(params, centers, centers.copy(), width, processing)


def empirical_scwd(n_elements: int, n_clusters: int, params: SystemParams,
                   receiver_kind: str = "pr") -> SceneConfig:
    """Reference clustered configuration: sd layout over clusters, wd slots within."""
    plan = cluster_plan(n_elements, n_clusters)
    cluster_xy = layout_positions(n_clusters, params.room)
    centers, width = wavelength_plan(max(plan.sizes), params.band)
    return scwd_scene(params, n_elements, cluster_xy, centers, centers.copy(),
                      width, _receiver(receiver_kind, n_clusters),
                      EMPIRICAL_HALF_POWER_SEMIANGLE, EMPIRICAL_FOV_COEFFICIENT)


def scwd_best_over_l(n_elements: int, evaluate) -> tuple:
    """Evaluate an L-indexed rate callable for L = 1..n and keep the best.

    Ties break toward fewer clusters. Returns (best_l, best_rate).
    """
    best_l, best_rate = None, -math.inf
    for l in range(1, n_elements + 1):
        rate = evaluate(l)
        if rate > best_rate:
            best_l, best_rate = l, rate
    return best_l, best_rate
