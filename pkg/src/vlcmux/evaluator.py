"""Monte Carlo estimation of the average achievable rate.

Each sample draws one user state from a per-sample generator seeded by
(master seed, sample index), so the pose sequence depends only on the seed,
the room and the orientation model. Strategy variants evaluated with the
same seed therefore see identical poses (common random numbers), which makes
paired comparisons low-variance and search objectives deterministic.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import scene_response
from .geometry import OrientationModel, UeState, sample_ue
from .link import (
    achievable_rate,
    clipping_stats,
    db_to_linear,
    identity_multiplexers,
    receiver_noise,
    snr_grid,
    svd_multiplexers,
    uniform_power_allocation,
)
from .strategies import (
    SceneConfig,
    StrategyConfig,
    SystemParams,
    cluster_plan,
    empirical_sd,
    empirical_wd,
    empirical_scwd,
    layout_positions,
    scwd_best_over_l,
    scwd_scene,
    sd_scene,
    wavelength_plan,
    wd_scene,
)


@dataclass(frozen=True)
class McConfig:
    """Monte Carlo sample count, master seed and orientation model."""

    n_samples: int
    seed: int
    orientation: OrientationModel

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("need at least one Monte Carlo sample")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")


@dataclass(frozen=True)
class RateEstimate:
    """Mean rate, its standard error, and optionally the raw samples."""

    mean: float
    stderr: float
    n_samples: int
    samples: Optional[np.ndarray] = None


@dataclass(frozen=True)
class SweepRow:
    elements: int
    variant: str
    mean: float
    stderr: float
    n_samples: int
    seed: int
    best_clusters: Optional[int] = None


def pose_for_sample(seed: int, index: int, room, orientation: OrientationModel) -> UeState:
    """Deterministic user state for one (seed, sample index) pair."""
    rng = np.random.default_rng([seed, index])
    return sample_ue(rng, room, orientation)


def evaluate_scene(scene: SceneConfig, ue: UeState) -> float:
    """Single-pose achievable rate: channel, multiplexers, SNR, rate."""
    fe = scene.frontend
    tensor, photocurrents = scene_response(scene, ue)
    h_data = tensor.data_subcarriers()
    n_streams = min(scene.n_led, scene.n_pd)
    if scene.mimo_processing:
        mux = svd_multiplexers(h_data, n_streams)
    else:
        mux = identity_multiplexers(h_data, n_streams)
    noise_var = np.array([receiver_noise(float(i), scene.noise) for i in photocurrents])
    clip = clipping_stats(scene.clipping_level)
    grid = snr_grid(h_data, mux, clip, noise_var, uniform_power_allocation(fe.fft_size))
    return achievable_rate(grid, db_to_linear(scene.gap_db),
                           fe.symbol_period, fe.fft_size, fe.cp_length)


def average_rate(scene: SceneConfig, mc: McConfig, threads: int = 1,
                 keep_samples: bool = False) -> RateEstimate:
    """Monte Carlo mean rate with normal-approximation standard error.

    Bit-identical for a fixed seed regardless of the thread count: samples
    are independent and are reduced in ascending index order.
    """
    def one(index: int) -> float:
        ue = pose_for_sample(mc.seed, index, scene.room, mc.orientation)
        try:
            return evaluate_scene(scene, ue)
        except Exception as exc:
            raise RuntimeError(f"rate evaluation failed at sample {index}: {exc}") from exc

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rates = np.fromiter(pool.map(one, range(mc.n_samples)), dtype=float,
                                count=mc.n_samples)
    else:
        rates = np.fromiter((one(i) for i in range(mc.n_samples)), dtype=float,
                            count=mc.n_samples)
    mean = float(rates.mean())
    stderr = float(rates.std(ddof=1) / math.sqrt(mc.n_samples)) if mc.n_samples > 1 else 0.0
    return RateEstimate(mean, stderr, mc.n_samples, rates if keep_samples else None)


def paired_difference(a: RateEstimate, b: RateEstimate):
    """Mean and standard error of the per-sample difference a - b (CRN pairs)."""
    if a.samples is None or b.samples is None or a.samples.size != b.samples.size:
        raise ValueError("paired comparison needs retained samples of equal size")
    d = a.samples - b.samples
    stderr = float(d.std(ddof=1) / math.sqrt(d.size)) if d.size > 1 else 0.0
    return float(d.mean()), stderr


def _variant_estimate(variant: str, n_elements: int, params: SystemParams,
                      receiver_kind: str, mc: McConfig, threads: int,
                      keep_samples: bool = False):
    """Evaluate one (variant, element count) cell. Returns (estimate, best_l)."""
    if variant == "sd":
        scene = empirical_sd(n_elements, params, receiver_kind)
        return average_rate(scene, mc, threads, keep_samples), None
    if variant == "wd":
        scene = empirical_wd(n_elements, params, processing=True)
        return average_rate(scene, mc, threads, keep_samples), None
    if variant == "wd-noproc":
        scene = empirical_wd(n_elements, params, processing=False)
        return average_rate(scene, mc, threads, keep_samples), None
    if variant == "scwd":
        estimates = {}

        def rate_for(l: int) -> float:
            scene = empirical_scwd(n_elements, l, params, receiver_kind)
            estimates[l] = average_rate(scene, mc, threads, keep_samples)
            return estimates[l].mean

        best_l, _ = scwd_best_over_l(n_elements, rate_for)
        return estimates[best_l], best_l
    raise ValueError(f"unknown variant {variant!r}")


def sweep_elements(variants, element_counts, params: SystemParams,
                   receiver_kind: str, mc: McConfig, threads: int = 1):
    """Evaluate every (element count, variant) cell with common random numbers.

    Returns a list of SweepRow in element-major, variant order.
    """
    rows = []
    for n in element_counts:
        for variant in variants:
            estimate, best_l = _variant_estimate(
                variant, n, params, receiver_kind, mc, threads)
            rows.append(SweepRow(n, variant, estimate.mean, estimate.stderr,
                                 mc.n_samples, mc.seed, best_l))
    return rows


def scene_for_strategy(strategy: StrategyConfig, params: SystemParams,
                       clusters: Optional[int] = None) -> SceneConfig:
    """Concrete scene for a strategy config (scwd needs an explicit cluster count)."""
    n = strategy.elements
    if strategy.kind == "sd":
        return sd_scene(params, layout_positions(n, params.room), strategy.receiver(n),
                        strategy.half_power_semiangle, strategy.fov_coefficient)
    if strategy.kind == "wd":
        centers, width = wavelength_plan(n, params.band)
        return wd_scene(params, centers, centers.copy(), width, strategy.processing)
    n_clusters = clusters if clusters is not None else strategy.clusters
    if n_clusters is None:
        raise ValueError("scwd needs an explicit cluster count to build one scene")
    plan = cluster_plan(n, n_clusters)
    centers, width = wavelength_plan(max(plan.sizes), params.band)
    return scwd_scene(params, n, layout_positions(n_clusters, params.room),
                      centers, centers.copy(), width, strategy.receiver(n_clusters),
                      strategy.half_power_semiangle, strategy.fov_coefficient)
