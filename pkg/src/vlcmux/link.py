"""Clipping statistics, receiver noise, SVD multiplexing, SNR and rate.

The per-stream SNR keeps all four terms of the detection model: desired
signal, clipping noise, inter-stream interference and receiver noise. With
exact SVD precoding/post-detection the interference term vanishes to
numerical precision, but it is computed anyway so identity processing (WDM
without MIMO processing) runs through the same path.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf, erfc

from .constants import BOLTZMANN, ELECTRON_CHARGE


@dataclass(frozen=True)
class ClippingStats:
    """Bussgang decomposition of symmetric clipping on unit-variance Gaussian input."""

    clip_top: float
    clip_bottom: float
    attenuation: float   # eta
    noise_var: float     # sigma_clip^2
    mean_clipped: float


@dataclass(frozen=True)
class NoiseModel:
    """Shot + thermal receiver noise parameters."""

    load_resistance: float  # ohm
    temperature: float      # K
    bandwidth: float        # Hz, signalling bandwidth 1/(2 T_s)

    def __post_init__(self):
        if min(self.load_resistance, self.temperature, self.bandwidth) <= 0:
            raise ValueError("noise model parameters must be positive")


@dataclass(frozen=True)
class MultiplexSet:
    """Per-subcarrier precoders (n_led, n_streams), detectors (n_streams, n_pd)
    and descending singular values."""

    precoders: np.ndarray        # (n_sub, n_led, n_streams)
    detectors: np.ndarray        # (n_sub, n_streams, n_pd)
    singular_values: np.ndarray  # (n_sub, n_streams)


@dataclass(frozen=True)
class SnrGrid:
    """Linear per-stream, per-subcarrier SNRs with the power allocation used."""

    gamma: np.ndarray  # (n_streams, n_data)
    power_alloc: float


def _std_normal_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def _std_normal_tail(x: float) -> float:
    return 0.5 * erfc(x / math.sqrt(2.0))


def clipping_stats(kappa: float) -> ClippingStats:
    """Attenuation and noise variance of symmetric clipping at +-kappa.

    eta = Phi(k) - Phi(-k); the clipped second moment is
    eta - 2k phi(k) + 2k^2 Q(k); the Bussgang noise variance is the excess
    over eta^2. The clipped mean is zero by symmetry.
    """
    if kappa <= 0:
        raise ValueError("clip level must be positive")
    q = _std_normal_tail(kappa)
    eta = float(erf(kappa / math.sqrt(2.0)))
    second_moment = eta - 2.0 * kappa * _std_normal_pdf(kappa) + 2.0 * kappa * kappa * q
    return ClippingStats(kappa, -kappa, eta, second_moment - eta * eta, 0.0)


def receiver_noise(photocurrent: float, model: NoiseModel) -> float:
    """Receiver noise variance in A^2: shot term plus thermal floor."""
    if photocurrent < 0:
        raise ValueError("photocurrent must be nonnegative")
    shot = 2.0 * ELECTRON_CHARGE * photocurrent * model.bandwidth
    thermal = 4.0 * BOLTZMANN * model.temperature * model.bandwidth / model.load_resistance
    return shot + thermal


def svd_multiplexers(h_data: np.ndarray, n_streams: int) -> MultiplexSet:
    """SVD precoders/detectors for a stack of channel matrices (n_sub, n_pd, n_led)."""
    h_data = np.asarray(h_data)
    if not np.all(np.isfinite(h_data.view(float))):
        raise ValueError("channel matrices contain non-finite entries")
    n_pd, n_led = h_data.shape[-2:]
    if n_streams > min(n_pd, n_led):
        raise ValueError("stream count exceeds min(n_pd, n_led)")
    u, s, vh = np.linalg.svd(h_data, full_matrices=False)
    precoders = vh.conj().transpose(0, 2, 1)[:, :, :n_streams]
    detectors = u.conj().transpose(0, 2, 1)[:, :n_streams, :]
    return MultiplexSet(precoders, detectors, s[:, :n_streams])


def identity_multiplexers(h_data: np.ndarray, n_streams: int) -> MultiplexSet:
    """Identity precoding/post-detection (no MIMO processing)."""
    n_sub, n_pd, n_led = h_data.shape
    if n_streams > min(n_pd, n_led):
        raise ValueError("stream count exceeds min(n_pd, n_led)")
    eye_f = np.broadcast_to(np.eye(n_led, n_streams), (n_sub, n_led, n_streams)).copy()
    eye_w = np.broadcast_to(np.eye(n_streams, n_pd), (n_sub, n_streams, n_pd)).copy()
    diag = np.abs(np.diagonal(h_data, axis1=1, axis2=2)[:, :n_streams])
    return MultiplexSet(eye_f.astype(complex), eye_w.astype(complex), diag)


def snr_grid(h_data: np.ndarray, mux: MultiplexSet, clip: ClippingStats,
             noise_var: np.ndarray, power_alloc: float) -> SnrGrid:
    """Per-stream SNR on every data subcarrier.

    h_data: (n_sub, n_pd, n_led); noise_var: per-PD receiver noise (A^2).
    """
    noise_var = np.asarray(noise_var, dtype=float)
    if clip.noise_var <= 0 and not np.any(noise_var > 0):
        raise ValueError("SNR undefined: clipping and receiver noise are all zero")
    w, f = mux.detectors, mux.precoders
    eta2 = clip.attenuation ** 2

    a = w @ h_data @ f                      # (n_sub, I, I)
    a_pow = np.abs(a) ** 2
    diag = np.einsum("kii->ki", a_pow)      # (n_sub, I)
    signal = eta2 * diag * power_alloc
    interference = eta2 * power_alloc * (a_pow.sum(axis=2) - diag)

    w_pow = np.abs(w) ** 2                  # (n_sub, I, n_pd)
    h_row_pow = (np.abs(h_data) ** 2).sum(axis=2)   # (n_sub, n_pd)
    clip_term = clip.noise_var * np.einsum("kin,kn->ki", w_pow, h_row_pow)
    rx_term = w_pow @ noise_var             # (n_sub, I)

    gamma = signal / (clip_term + interference + rx_term)
    if not np.all(np.isfinite(gamma)):
        raise ValueError("non-finite SNR encountered")
    return SnrGrid(gamma.T.copy(), power_alloc)


def uniform_power_allocation(fft_size: int) -> float:
    """Uniform allocation q = K / (K - 2) keeping unit time-domain variance."""
    return fft_size / (fft_size - 2)


def achievable_rate(grid: SnrGrid, gap_linear: float, symbol_period: float,
                    fft_size: int, cp_length: int) -> float:
    """Aggregate rate in bits/s over all streams and data subcarriers."""
    if gap_linear < 1:
        raise ValueError("linear gap factor must be >= 1")
    bits = np.log2(1.0 + grid.gamma / gap_linear).sum()
    return float(bits / (symbol_period * (fft_size + cp_length)))


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)
