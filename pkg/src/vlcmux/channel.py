"""Per-subcarrier MIMO channel tensor assembly.

The continuous link response factors into the LoS Lambertian gain (which
carries the spectral overlap integral at the link's incidence angle), the
squared RRC pulse spectrum, first-order LED and PD low-pass sections and the
propagation delay. Matched-filter sampling folds the response with period
1/T_s; the band-limited pulse leaves only the l = 0 and l = 1 alias terms.

Subcarrier 0 carries no data; its entry is set to the DC bias path value so
photocurrent bookkeeping can read it off the tensor.
"""

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .constants import SPEED_OF_LIGHT
from .geometry import LinkGeometry, UeState, link_arrays, rotation_matrix
from .spectra import spectral_gain_matrix

if TYPE_CHECKING:  # pragma: no cover
    from .strategies import SceneConfig


@dataclass(frozen=True)
class FrontEndModel:
    """OFDM numerology plus LED/PD bandwidths and pulse roll-off."""

    led_bandwidth: float   # Hz, 3 dB
    pd_bandwidth: float    # Hz, 3 dB
    rolloff: float         # RRC alpha
    symbol_period: float   # s
    fft_size: int
    cp_length: int

    def __post_init__(self):
        k = self.fft_size
        if k < 4 or (k & (k - 1)) != 0:
            raise ValueError("FFT size must be a power of two (>= 4)")
        if not 0 < self.cp_length < k:
            raise ValueError("cyclic prefix must be in (0, fft_size)")
        if self.symbol_period <= 0:
            raise ValueError("symbol period must be positive")
        if not 0 <= self.rolloff <= 1:
            raise ValueError("roll-off must be in [0, 1]")
        if self.led_bandwidth <= 0 or self.pd_bandwidth <= 0:
            raise ValueError("3 dB bandwidths must be positive")

    @property
    def n_data(self) -> int:
        """Number of data-bearing subcarriers K/2 - 1."""
        return self.fft_size // 2 - 1

    @property
    def signalling_bandwidth(self) -> float:
        return 1.0 / (2.0 * self.symbol_period)


@dataclass(frozen=True)
class ElectroOpticMap:
    """Driving-circuit scale and DC bias for one LED (symmetric clipping)."""

    scale: float       # W per unit signal
    bias: float        # W
    avg_power: float   # W
    clip_level: float  # signal std units


def eo_map(avg_power: float, clip_level: float) -> ElectroOpticMap:
    """Map average optical power and clip level to drive scale and bias.

    With symmetric clipping at +-kappa and zero minimum optical level the
    peaks map to [0, 2*p_avg], giving scale p_avg/kappa and bias p_avg.
    """
    if avg_power <= 0 or clip_level <= 0:
        raise ValueError("average power and clip level must be positive")
    return ElectroOpticMap(avg_power / clip_level, avg_power, avg_power, clip_level)


@dataclass(frozen=True)
class ChannelTensor:
    """Complex channel matrices H[k], shape (fft_size, n_pd, n_led)."""

    values: np.ndarray

    @property
    def fft_size(self) -> int:
        return self.values.shape[0]

    def data_subcarriers(self) -> np.ndarray:
        """Slice k = 1 .. K/2 - 1."""
        return self.values[1:self.fft_size // 2]


def rrc_gain(f, alpha: float, symbol_period: float):
    """Normalised root-raised-cosine amplitude spectrum, G(0) = 1."""
    af = np.abs(np.asarray(f, dtype=float))
    f_lo = (1.0 - alpha) / (2.0 * symbol_period)
    f_hi = (1.0 + alpha) / (2.0 * symbol_period)
    out = np.zeros(af.shape)
    out[af <= f_lo] = 1.0
    if alpha > 0:
        mid = (af > f_lo) & (af < f_hi)
        out[mid] = np.sqrt(0.5 * (1.0 + np.cos(
            math.pi * symbol_period / alpha * (af[mid] - f_lo))))
    return out if out.ndim else float(out)


def front_end_gain(f, f_3db: float):
    """Single-pole low-pass response 1 / (1 + j f / f_3db)."""
    if f_3db <= 0:
        raise ValueError("3 dB frequency must be positive")
    return 1.0 / (1.0 + 1j * np.asarray(f, dtype=float) / f_3db)


def lambertian_order(half_power_semiangle: float) -> float:
    """Emission order from the half-power semiangle (radians)."""
    if not 0 < half_power_semiangle < math.pi / 2:
        raise ValueError("half-power semiangle must be in (0, pi/2)")
    return -1.0 / math.log2(math.cos(half_power_semiangle))


def los_baseband_gain(link: LinkGeometry, m_led: float, m_fov: float,
                      pd_area: float, spectral: float) -> float:
    """Frequency-flat LoS gain of one link in A per unit signal power."""
    if not link.visible:
        return 0.0
    return (m_led + 1.0) * pd_area / (2.0 * math.pi * link.distance ** 2) \
        * link.cos_radiant ** m_led * link.cos_incidence ** m_fov * spectral


def _scene_link_state(scene: "SceneConfig", ue: UeState):
    """LoS gain matrix and distances for one user state, shapes (n_pd, n_led)."""
    rot = rotation_matrix(ue.beta_z, ue.beta_x, ue.beta_y)
    pd_orient = scene.pd_body_orientations @ rot.T
    pd_pos = np.array([ue.x, ue.y, scene.room.rx_height])
    dist, cos_rad, cos_inc, vis = link_arrays(
        scene.led_positions, scene.led_orientations, pd_pos, pd_orient)
    spectral = spectral_gain_matrix(
        scene.led_spectra, scene.filters, scene.responsivity,
        cos_inc, vis, band=scene.band)
    m_led = lambertian_order(scene.half_power_semiangle)
    geo = (m_led + 1.0) * scene.pd_area / (2.0 * math.pi * dist ** 2)
    gain = np.where(
        vis,
        geo * np.power(cos_rad, m_led, where=vis, out=np.zeros_like(cos_rad))
        * np.power(cos_inc, scene.fov_coefficient, where=vis, out=np.zeros_like(cos_inc))
        * spectral,
        0.0)
    return gain, dist


def scene_response(scene: "SceneConfig", ue: UeState):
    """Channel tensor plus per-PD average photocurrent in one pass.

    The LoS gain matrix (with its spectral integrals) is the expensive part
    and feeds both outputs, so the Monte Carlo loop computes it once.
    """
    scene.validate()
    fe = scene.frontend
    gain, dist = _scene_link_state(scene, ue)
    drive = np.array([eo_map(p, scene.clipping_level).scale for p in scene.led_powers])
    bias = np.asarray(scene.led_powers, dtype=float)

    k = np.arange(fe.fft_size)
    f0 = k / (fe.fft_size * fe.symbol_period)
    f1 = f0 - 1.0 / fe.symbol_period  # l = 1 alias
    resp0 = (rrc_gain(f0, fe.rolloff, fe.symbol_period) ** 2
             * front_end_gain(f0, fe.led_bandwidth)
             * front_end_gain(f0, fe.pd_bandwidth))
    resp1 = (rrc_gain(f1, fe.rolloff, fe.symbol_period) ** 2
             * front_end_gain(f1, fe.led_bandwidth)
             * front_end_gain(f1, fe.pd_bandwidth))

    tau = dist / SPEED_OF_LIGHT
    phase0 = np.exp(-2j * math.pi * f0[:, None, None] * tau[None, :, :])
    phase1 = np.exp(-2j * math.pi * f1[:, None, None] * tau[None, :, :])
    h = (drive[None, None, :] * gain[None, :, :]
         * (resp0[:, None, None] * phase0 + resp1[:, None, None] * phase1))
    # DC carries no data; store the bias path for photocurrent accounting.
    h[0] = bias[None, :] * gain
    return ChannelTensor(h), gain @ bias


def subcarrier_channel(scene: "SceneConfig", ue: UeState) -> ChannelTensor:
    """Assemble H[k] for k = 0 .. K-1 at one user state."""
    return scene_response(scene, ue)[0]


def dc_photocurrent(scene: "SceneConfig", ue: UeState) -> np.ndarray:
    """Average photocurrent per PD (A): bias through the DC link gains."""
    gain, _ = _scene_link_state(scene, ue)
    return gain @ np.asarray(scene.led_powers, dtype=float)
