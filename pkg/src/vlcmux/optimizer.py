"""Bounded derivative-free maximisation with a search/poll direct-search loop.

The loop keeps the mesh-adaptive skeleton: a cheap search stage proposes a
few low-discrepancy candidates in a small box around the incumbent (stepping
in for the surrogate-model stage of the full algorithm); when the search
fails, an axis-aligned poll at the poll size decides the iteration. A
successful poll doubles both sizes, an unsuccessful iteration halves them,
and the run stops once the poll size drops below threshold or the iteration
budget is spent. Variables are normalised to [0, 1] internally; every
candidate is projected into the bounds before evaluation.
"""

import math
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np
from scipy.stats import qmc

from .evaluator import McConfig, average_rate
from .strategies import (
    EMPIRICAL_FOV_COEFFICIENT,
    EMPIRICAL_HALF_POWER_SEMIANGLE,
    EMPIRICAL_PD_ELEVATION,
    SystemParams,
    cluster_plan,
    layout_positions,
    scwd_scene,
    sd_scene,
    wavelength_plan,
    wd_scene,
)
from .geometry import ReceiverGeometry

OPEN_INTERVAL_INSET = 1e-3  # fraction of the range used to close open bounds
MAX_FOV_COEFFICIENT = 10.0


@dataclass(frozen=True)
class Bounds:
    """Box constraints plus the plausible sub-box used for start points."""

    lower: np.ndarray
    upper: np.ndarray
    plausible_lower: np.ndarray = None
    plausible_upper: np.ndarray = None

    def __post_init__(self):
        lo = np.asarray(self.lower, float)
        hi = np.asarray(self.upper, float)
        plo = lo if self.plausible_lower is None else np.asarray(self.plausible_lower, float)
        phi = hi if self.plausible_upper is None else np.asarray(self.plausible_upper, float)
        if not (lo.shape == hi.shape == plo.shape == phi.shape):
            raise ValueError("bound vectors must share one shape")
        if np.any(hi <= lo):
            raise ValueError("upper bounds must exceed lower bounds")
        if np.any(plo < lo) or np.any(phi > hi) or np.any(phi < plo):
            raise ValueError("plausible bounds must nest inside the bounds")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "plausible_lower", plo)
        object.__setattr__(self, "plausible_upper", phi)

    @property
    def dim(self) -> int:
        return self.lower.size


@dataclass(frozen=True)
class OptimizerOptions:
    max_iterations: int = 200
    poll_threshold: float = 1e-6
    mesh_init: float = 2.0 ** -10
    poll_init: float = 1.0
    n_search: int = 8
    sufficient_rel: float = 1e-6


@dataclass(frozen=True)
class TraceEntry:
    iteration: int
    stage: str       # "init" | "search" | "poll"
    mesh_size: float
    poll_size: float
    best_value: float


@dataclass(frozen=True)
class OptimizeResult:
    x: np.ndarray
    value: float
    trace: tuple
    n_evals: int


@dataclass(frozen=True)
class Problem:
    """Objective plus bounds; empirical_start seeds one multi-start run."""

    objective: Callable
    bounds: Bounds
    empirical_start: Optional[np.ndarray] = None
    names: tuple = ()


class ObjectiveError(RuntimeError):
    """Objective evaluation failed; carries the trace collected so far."""

    def __init__(self, message: str, trace):
        super().__init__(message)
        self.trace = tuple(trace)


def _sufficient(new: float, incumbent: float, rel: float) -> bool:
    return new > incumbent + rel * abs(incumbent)


def optimize(objective: Callable, bounds: Bounds,
             options: OptimizerOptions = OptimizerOptions(),
             x0: Optional[np.ndarray] = None, seed=0) -> OptimizeResult:
    """Maximise the objective over the bounds from one start point."""
    rng = np.random.default_rng(seed)
    lo, hi = bounds.lower, bounds.upper
    span = hi - lo
    dim = bounds.dim
    trace: List[TraceEntry] = []
    n_evals = 0

    def evaluate(z: np.ndarray) -> float:
        nonlocal n_evals
        # clip in raw units as well: lo + 1.0 * span can exceed hi by one ulp
        x = np.clip(lo + np.clip(z, 0.0, 1.0) * span, lo, hi)
        n_evals += 1
        try:
            return float(objective(x))
        except Exception as exc:
            raise ObjectiveError(f"objective failed at x={x!r}: {exc}", trace) from exc

    if x0 is None:
        z = (bounds.plausible_lower - lo) / span \
            + rng.random(dim) * (bounds.plausible_upper - bounds.plausible_lower) / span
    else:
        z = (np.asarray(x0, float) - lo) / span
    z = np.clip(z, 0.0, 1.0)

    mesh = options.mesh_init
    poll = options.poll_init
    inc_val = evaluate(z)
    best_z, best_val = z.copy(), inc_val
    trace.append(TraceEntry(0, "init", mesh, poll, best_val))
    sobol = qmc.Sobol(d=dim, scramble=True, seed=rng)

    n_iter = 0
    while n_iter < options.max_iterations and poll > options.poll_threshold:
        stage = "search"
        success = False
        poll_success = False
        for cand in sobol.random(options.n_search):
            z_new = np.clip(z + (2.0 * cand - 1.0) * 4.0 * mesh, 0.0, 1.0)
            v = evaluate(z_new)
            if _sufficient(v, inc_val, options.sufficient_rel):
                z, inc_val = z_new, v
                success = True
                break
        if not success:
            stage = "poll"
            best_poll_val, best_poll_z = -math.inf, None
            for i in range(dim):
                for sign in (1.0, -1.0):
                    z_new = z.copy()
                    z_new[i] = min(max(z_new[i] + sign * poll, 0.0), 1.0)
                    v = evaluate(z_new)
                    if v > best_poll_val:
                        best_poll_val, best_poll_z = v, z_new
            if _sufficient(best_poll_val, inc_val, options.sufficient_rel):
                z, inc_val = best_poll_z, best_poll_val
                success = poll_success = True
        if success:
            if poll_success:
                mesh *= 2.0
                poll *= 2.0
        else:
            mesh *= 0.5
            poll *= 0.5
        if inc_val > best_val:
            best_val, best_z = inc_val, z.copy()
        n_iter += 1
        trace.append(TraceEntry(n_iter, stage, mesh, poll, best_val))

    x_best = np.clip(lo + np.clip(best_z, 0.0, 1.0) * span, lo, hi)
    return OptimizeResult(x_best, best_val, tuple(trace), n_evals)


def multi_start(problem: Problem, n_starts: int, seed: int,
                options: OptimizerOptions = OptimizerOptions(),
                include_empirical: bool = False) -> OptimizeResult:
    """Best result over independently seeded starts in the plausible box."""
    if n_starts < 1:
        raise ValueError("need at least one start")
    starts = [None] * n_starts
    if include_empirical:
        if problem.empirical_start is None:
            raise ValueError("problem has no empirical start point")
        starts.insert(0, problem.empirical_start)
    best = None
    for idx, x0 in enumerate(starts):
        result = optimize(problem.objective, problem.bounds, options,
                          x0=x0, seed=[seed, idx])
        if best is None or result.value > best.value:
            best = result
    return best


def _rate_objective(scene_from_x: Callable, params: SystemParams, mc: McConfig,
                    threads: int = 1) -> Callable:
    def objective(x: np.ndarray) -> float:
        return average_rate(scene_from_x(x), mc, threads=threads).mean
    return objective


def problem_sd(n_elements: int, params: SystemParams, mc: McConfig,
               receiver_kind: str = "pr", threads: int = 1) -> Problem:
    """Space-division search: LED coordinates, semiangle, FoV (+ PD elevation).

    Variable order: x_1..x_I, y_1..y_I, half-power semiangle, FoV coefficient
    [, PD elevation for pyramid receivers]. Angles in radians, lengths in m.
    """
    room = params.room
    eps = OPEN_INTERVAL_INSET
    phi_max = math.radians(60.0)
    lo = [room.width * eps] * n_elements + [room.length * eps] * n_elements \
        + [phi_max * eps, 1.0]
    hi = [room.width * (1 - eps)] * n_elements + [room.length * (1 - eps)] * n_elements \
        + [phi_max, MAX_FOV_COEFFICIENT]
    if receiver_kind == "pr":
        lo.append(0.0)
        hi.append(math.pi / 2.0)
    bounds = Bounds(np.array(lo), np.array(hi))

    def scene_from_x(x):
        xy = np.column_stack([x[:n_elements], x[n_elements:2 * n_elements]])
        phi, m_fov = x[2 * n_elements], x[2 * n_elements + 1]
        if receiver_kind == "pr":
            receiver = ReceiverGeometry("pr", n_elements, x[2 * n_elements + 2])
        else:
            receiver = ReceiverGeometry("hr", n_elements)
        return sd_scene(params, xy, receiver, phi, m_fov)

    xy0 = layout_positions(n_elements, room)
    x_emp = list(xy0[:, 0]) + list(xy0[:, 1]) \
        + [EMPIRICAL_HALF_POWER_SEMIANGLE, EMPIRICAL_FOV_COEFFICIENT]
    names = [f"led_x_{i}_m" for i in range(1, n_elements + 1)] \
        + [f"led_y_{i}_m" for i in range(1, n_elements + 1)] \
        + ["half_power_semiangle_rad", "fov_coefficient"]
    if receiver_kind == "pr":
        x_emp.append(EMPIRICAL_PD_ELEVATION)
        names.append("pd_elevation_rad")
    return Problem(_rate_objective(scene_from_x, params, mc, threads), bounds,
                   np.array(x_emp), tuple(names))


def problem_wd(n_elements: int, params: SystemParams, mc: McConfig,
               processing: bool = True, threads: int = 1) -> Problem:
    """Wavelength-division search: LED centres, filter centres, filter width.

    Variable order: led_c_1..I, of_c_1..I, width. Wavelengths in metres.
    """
    band = params.band
    band_width = band[1] - band[0]
    eps = OPEN_INTERVAL_INSET
    lo = np.array([band[0]] * (2 * n_elements) + [band_width * eps])
    hi = np.array([band[1]] * (2 * n_elements) + [band_width])
    bounds = Bounds(lo, hi)

    def scene_from_x(x):
        return wd_scene(params, x[:n_elements], x[n_elements:2 * n_elements],
                        x[2 * n_elements], processing)

    centers, width = wavelength_plan(n_elements, band)
    x_emp = np.concatenate([centers, centers, [width]])
    names = [f"led_center_{i}_m" for i in range(1, n_elements + 1)] \
        + [f"filter_center_{i}_m" for i in range(1, n_elements + 1)] \
        + ["filter_width_m"]
    return Problem(_rate_objective(scene_from_x, params, mc, threads), bounds, x_emp,
                   tuple(names))


def problem_scwd(n_elements: int, n_clusters: int, params: SystemParams,
                 mc: McConfig, receiver_kind: str = "pr", threads: int = 1) -> Problem:
    """Clustered search at fixed cluster count.

    Variable order: x_1..x_L, y_1..y_L, led_c_1..M, of_c_1..M, half-power
    semiangle, FoV coefficient [, PD elevation], filter width; M = ceil(I/L).
    """
    room = params.room
    band = params.band
    band_width = band[1] - band[0]
    eps = OPEN_INTERVAL_INSET
    n_slots = max(cluster_plan(n_elements, n_clusters).sizes)
    phi_max = math.radians(60.0)
    lo = [room.width * eps] * n_clusters + [room.length * eps] * n_clusters \
        + [band[0]] * (2 * n_slots) + [phi_max * eps, 1.0]
    hi = [room.width * (1 - eps)] * n_clusters + [room.length * (1 - eps)] * n_clusters \
        + [band[1]] * (2 * n_slots) + [phi_max, MAX_FOV_COEFFICIENT]
    if receiver_kind == "pr":
        lo.append(0.0)
        hi.append(math.pi / 2.0)
    lo.append(band_width * eps)
    hi.append(band_width)
    bounds = Bounds(np.array(lo), np.array(hi))
    i_theta = 2 * n_clusters + 2 * n_slots + 2

    def scene_from_x(x):
        xy = np.column_stack([x[:n_clusters], x[n_clusters:2 * n_clusters]])
        led_c = x[2 * n_clusters:2 * n_clusters + n_slots]
        of_c = x[2 * n_clusters + n_slots:2 * n_clusters + 2 * n_slots]
        phi = x[2 * n_clusters + 2 * n_slots]
        m_fov = x[2 * n_clusters + 2 * n_slots + 1]
        if receiver_kind == "pr":
            receiver = ReceiverGeometry("pr", n_clusters, x[i_theta])
            width = x[i_theta + 1]
        else:
            receiver = ReceiverGeometry("hr", n_clusters)
            width = x[i_theta]
        return scwd_scene(params, n_elements, xy, led_c, of_c, width,
                          receiver, phi, m_fov)

    xy0 = layout_positions(n_clusters, room)
    centers, width = wavelength_plan(n_slots, band)
    x_emp = list(xy0[:, 0]) + list(xy0[:, 1]) + list(centers) + list(centers) \
        + [EMPIRICAL_HALF_POWER_SEMIANGLE, EMPIRICAL_FOV_COEFFICIENT]
    names = [f"cluster_x_{l}_m" for l in range(1, n_clusters + 1)] \
        + [f"cluster_y_{l}_m" for l in range(1, n_clusters + 1)] \
        + [f"led_center_{m}_m" for m in range(1, n_slots + 1)] \
        + [f"filter_center_{m}_m" for m in range(1, n_slots + 1)] \
        + ["half_power_semiangle_rad", "fov_coefficient"]
    if receiver_kind == "pr":
        x_emp.append(EMPIRICAL_PD_ELEVATION)
        names.append("pd_elevation_rad")
    x_emp.append(width)
    names.append("filter_width_m")
    return Problem(_rate_objective(scene_from_x, params, mc, threads), bounds,
                   np.array(x_emp), tuple(names))
