"""Wavelength-domain models and the spectral overlap integral.

Covers the LED power spectral density (double-Gaussian, erf-normalised),
the linear-in-wavelength PD responsivity, the angle-dependent brick-wall
optical filter, and their overlap integral

    gain(psi) = integral R(lam) * S(lam) * G(lam, psi) dlam

evaluated by composite trapezoid on a fixed 0.25 nm grid with the filter
passband edges inserted as extra nodes, so the brick-wall discontinuity is
handled exactly. Wavelengths are metres internally, nanometres only at the
config boundary.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.special import erf

from .constants import (
    BOLTZMANN,
    ELECTRON_CHARGE,
    JUNCTION_TEMPERATURE,
    LAMBDA_MAX,
    LAMBDA_MIN,
    PLANCK,
    SPEED_OF_LIGHT,
)

VISIBLE_BAND = (LAMBDA_MIN, LAMBDA_MAX)
QUAD_STEP = 0.25e-9  # m, default trapezoid spacing

SQRT5 = math.sqrt(5.0)


def delta_lambda_half(lambda_c: float) -> float:
    """Spectral shape parameter of an LED with central wavelength lambda_c.

    Thermal-broadening model: coefficient 5.5 up to (and including) 560 nm,
    2.5 above.
    """
    if lambda_c <= 0:
        raise ValueError("central wavelength must be positive")
    coeff = 5.5 if lambda_c <= 560e-9 else 2.5
    return coeff * BOLTZMANN * JUNCTION_TEMPERATURE * lambda_c ** 2 / (PLANCK * SPEED_OF_LIGHT)


@dataclass(frozen=True)
class LedSpectrum:
    """LED central wavelength plus the derived shape parameter."""

    lambda_c: float
    delta_half: float = 0.0  # derived, do not set

    def __post_init__(self):
        # femtometre slack absorbs ulp noise from unit conversions
        if not LAMBDA_MIN - 1e-15 <= self.lambda_c <= LAMBDA_MAX + 1e-15:
            raise ValueError("LED central wavelength outside the visible band")
        object.__setattr__(self, "delta_half", delta_lambda_half(self.lambda_c))


@dataclass(frozen=True)
class FilterSpec:
    """Thin-film bandpass filter: centre/width at normal incidence."""

    lambda_c: float
    width: float
    index: float = 2.0          # effective refraction index
    transmittance: float = 1.0  # in-band transmittance

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError("filter width must be positive")
        if self.index < 1:
            raise ValueError("effective index must be >= 1")
        if not 0 < self.transmittance <= 1:
            raise ValueError("transmittance must be in (0, 1]")


@dataclass(frozen=True)
class ResponsivityModel:
    """PD responsivity eta_q * q * lambda / (h * c)."""

    quantum_efficiency: float

    def __post_init__(self):
        if not 0 <= self.quantum_efficiency <= 1:
            raise ValueError("quantum efficiency must be in [0, 1]")


def _psd_value(lam, lambda_c: float, delta: float):
    u = (np.asarray(lam, float) - lambda_c) / delta
    num = (2.0 / math.sqrt(math.pi)) * np.exp(-u * u) \
        + (4.0 / math.sqrt(math.pi)) * np.exp(-5.0 * u * u)
    den = delta * ((2.0 + SQRT5) / SQRT5
                   + erf(lambda_c / delta)
                   + (2.0 / SQRT5) * erf(SQRT5 * lambda_c / delta))
    return num / den


def led_psd(lam, spectrum: LedSpectrum):
    """Normalised LED spectral intensity (1/m); integrates to one."""
    return _psd_value(lam, spectrum.lambda_c, spectrum.delta_half)


def responsivity(lam, model: ResponsivityModel):
    """PD responsivity in A/W at wavelength lam."""
    return model.quantum_efficiency * ELECTRON_CHARGE * np.asarray(lam, float) \
        / (PLANCK * SPEED_OF_LIGHT)


def passband_edges(spec: FilterSpec, psi: float) -> tuple:
    """Filter passband (left, right) in metres at incidence angle psi.

    Both edges move to shorter wavelengths as psi grows.
    """
    if not 0 <= psi < math.pi / 2:
        raise ValueError("incidence angle must be in [0, pi/2)")
    s = math.sin(psi)
    shrink = math.sqrt(1.0 - s * s / (spec.index * spec.index))
    half = spec.width / 2.0
    return ((spec.lambda_c - half) * shrink, (spec.lambda_c + half) * shrink)


def filter_transmittance(lam, psi: float, spec: FilterSpec):
    """Brick-wall filter transmittance at wavelength lam, incidence psi."""
    lo, hi = passband_edges(spec, psi)
    lam = np.asarray(lam, float)
    inside = (lam >= lo) & (lam <= hi)
    return np.where(inside, spec.transmittance, 0.0) if lam.ndim else \
        (spec.transmittance if inside else 0.0)


def _band_grid(band, step):
    lo, hi = band
    if not hi > lo:
        raise ValueError("band upper edge must exceed lower edge")
    n_cells = max(1, int(math.ceil((hi - lo) / step - 1e-12)))
    return np.linspace(lo, hi, n_cells + 1)


def _segment_integral(grid, values, cum, wa, wb, a, b):
    """Trapezoid of a grid-sampled integrand over [a, b] within the grid.

    wa/wb are the exact integrand values at a and b; equivalent to inserting
    a and b as additional grid nodes.
    """
    ia = np.searchsorted(grid, a, side="left")
    ib = np.searchsorted(grid, b, side="right") - 1
    if ia > ib:  # no grid node inside [a, b]
        return 0.5 * (wa + wb) * (b - a)
    left = 0.5 * (wa + values[ia]) * (grid[ia] - a)
    right = 0.5 * (values[ib] + wb) * (b - grid[ib])
    return left + (cum[ib] - cum[ia]) + right


def spectral_gain(led: LedSpectrum, filt: FilterSpec, resp: ResponsivityModel,
                  psi: float, band=VISIBLE_BAND, step: float = QUAD_STEP) -> float:
    """Overlap integral of responsivity, LED spectrum and filter at angle psi."""
    lo, hi = passband_edges(filt, psi)
    a, b = max(lo, band[0]), min(hi, band[1])
    if a >= b:
        return 0.0
    grid = _band_grid(band, step)
    values = responsivity(grid, resp) * led_psd(grid, led)
    cum = cumulative_trapezoid(values, grid, initial=0.0)
    wa = responsivity(a, resp) * led_psd(a, led)
    wb = responsivity(b, resp) * led_psd(b, led)
    return filt.transmittance * float(_segment_integral(grid, values, cum, wa, wb, a, b))


def spectral_gain_matrix(led_spectra, filters, resp: ResponsivityModel,
                         cos_incidence: np.ndarray, visible: np.ndarray,
                         band=VISIBLE_BAND, step: float = QUAD_STEP) -> np.ndarray:
    """Per-link overlap integrals, shape (n_pd, n_led).

    Same quadrature as spectral_gain, batched: the grid-sampled integrand and
    its cumulative trapezoid are shared per LED; only the two edge cells are
    evaluated per link. Invisible links get zero.
    """
    n_pd, n_led = cos_incidence.shape
    grid = _band_grid(band, step)
    resp_grid = responsivity(grid, resp)
    values = np.stack([resp_grid * led_psd(grid, s) for s in led_spectra])
    cums = cumulative_trapezoid(values, grid, axis=1, initial=0.0)

    lam_c = np.array([f.lambda_c for f in filters])
    half_w = np.array([f.width for f in filters]) / 2.0
    g_t = np.array([f.transmittance for f in filters])
    idx = np.array([f.index for f in filters])

    cos_i = np.clip(cos_incidence, 0.0, 1.0)
    sin2 = 1.0 - cos_i * cos_i
    shrink = np.sqrt(1.0 - sin2 / (idx * idx)[:, None])  # (n_pd, n_led)
    a = np.maximum(((lam_c - half_w)[:, None]) * shrink, band[0])
    b = np.minimum(((lam_c + half_w)[:, None]) * shrink, band[1])

    out = np.zeros((n_pd, n_led))
    mask = visible & (a < b)
    if not mask.any():
        return out
    r_idx, t_idx = np.nonzero(mask)
    af, bf = a[mask], b[mask]
    lc = np.array([led_spectra[t].lambda_c for t in t_idx])
    dh = np.array([led_spectra[t].delta_half for t in t_idx])
    wa = responsivity(af, resp) * _psd_value(af, lc, dh)
    wb = responsivity(bf, resp) * _psd_value(bf, lc, dh)

    ia = np.searchsorted(grid, af, side="left")
    ib = np.searchsorted(grid, bf, side="right") - 1
    vals = np.empty_like(af)
    narrow = ia > ib
    if narrow.any():
        vals[narrow] = 0.5 * (wa[narrow] + wb[narrow]) * (bf[narrow] - af[narrow])
    wide = ~narrow
    if wide.any():
        iw, bw = ia[wide], ib[wide]
        tw = t_idx[wide]
        left = 0.5 * (wa[wide] + values[tw, iw]) * (grid[iw] - af[wide])
        right = 0.5 * (values[tw, bw] + wb[wide]) * (bf[wide] - grid[bw])
        vals[wide] = left + (cums[tw, bw] - cums[tw, iw]) + right
    out[r_idx, t_idx] = g_t[r_idx] * vals
    return out
