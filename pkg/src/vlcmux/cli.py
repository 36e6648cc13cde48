"""Command-line front-end: eval, sweep, optimize and channel dumps.

All outputs are plain CSV (plus an optional static SVG for sweeps) written
under --out-dir. Runs are deterministic for a fixed seed; on any failure the
files created by the current invocation are removed and the exit status is
nonzero.
"""

import argparse
import math
import os
import sys
from dataclasses import replace

from .channel import subcarrier_channel
from .evaluator import (
    McConfig,
    average_rate,
    scene_for_strategy,
    sweep_elements,
)
from .geometry import UeState
from .optimizer import multi_start, problem_scwd, problem_sd, problem_wd
from .scenario import Scenario, ScenarioError, load_scenario
from .strategies import scwd_best_over_l

VARIANTS = ("sd", "wd", "wd-noproc", "scwd")


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return "" if value is None else str(value)


def _write_rows(path: str, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _rate_csv(path: str, rows, with_clusters: bool):
    header = ["I", "variant", "mean_bps", "stderr_bps", "n_mc", "seed"]
    if with_clusters:
        header.append("L_star")
    _write_rows(path, header, rows)


def _parse_elements(text: str):
    out = []
    for token in text.split(","):
        token = token.strip()
        if "-" in token:
            lo, hi = token.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif token:
            out.append(int(token))
    if not out or any(not 1 <= n <= 16 for n in out):
        raise ScenarioError(f"element list {text!r} must stay within 1..16")
    return out


def cmd_eval(scenario: Scenario, args, out, created):
    """Average rate of the scenario's strategy; prints and writes one CSV row."""
    strategy, params, mc = scenario.strategy, scenario.params, scenario.mc
    if strategy.kind == "scwd" and strategy.clusters is None:
        estimates = {}

        def rate_for(l):
            est = average_rate(scene_for_strategy(strategy, params, clusters=l),
                               mc, args.threads)
            estimates[l] = est
            return est.mean

        best_l, _ = scwd_best_over_l(strategy.elements, rate_for)
        estimate = estimates[best_l]
    else:
        best_l = strategy.clusters
        estimate = average_rate(scene_for_strategy(strategy, params), mc, args.threads)
    variant = "wd-noproc" if strategy.kind == "wd" and not strategy.processing \
        else strategy.kind
    path = os.path.join(out, "rate.csv")
    created.append(path)
    row = [strategy.elements, variant, estimate.mean, estimate.stderr,
           mc.n_samples, mc.seed]
    if strategy.kind == "scwd":
        row.append(best_l)
    _rate_csv(path, [row], with_clusters=strategy.kind == "scwd")
    cluster_note = f" L*={best_l}" if strategy.kind == "scwd" else ""
    print(f"{variant} I={strategy.elements}{cluster_note}: "
          f"{estimate.mean / 1e6:.3f} +/- {estimate.stderr / 1e6:.3f} Mbps "
          f"(n={mc.n_samples}, seed={mc.seed})")


def cmd_sweep(scenario: Scenario, args, out, created):
    """Rate-vs-element-count table over strategy variants, CRN paired."""
    variants = [v.strip() for v in args.variants.split(",") if v.strip()]
    for v in variants:
        if v not in VARIANTS:
            raise ScenarioError(f"unknown variant {v!r}; pick from {', '.join(VARIANTS)}")
    counts = _parse_elements(args.elements)
    rows = sweep_elements(variants, counts, scenario.params,
                          scenario.strategy.receiver_kind, scenario.mc, args.threads)
    path = os.path.join(out, "sweep.csv")
    created.append(path)
    with_clusters = "scwd" in variants
    table = []
    for r in rows:
        row = [r.elements, r.variant, r.mean, r.stderr, r.n_samples, r.seed]
        if with_clusters:
            row.append(r.best_clusters)
        table.append(row)
    _rate_csv(path, table, with_clusters)
    if args.plot:
        plot_path = os.path.join(out, "sweep.svg")
        created.append(plot_path)
        _plot_sweep(rows, plot_path)
    print(f"wrote {len(table)} rows to {path}")


def _plot_sweep(rows, path: str):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "vlcmux"
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for variant in sorted({r.variant for r in rows}):
        pts = sorted((r.elements, r.mean, r.stderr) for r in rows if r.variant == variant)
        x = [p[0] for p in pts]
        y = [p[1] / 1e6 for p in pts]
        err = [p[2] / 1e6 for p in pts]
        ax.errorbar(x, y, yerr=err, marker="o", capsize=2, label=variant)
    ax.set_xlabel("number of elements")
    ax.set_ylabel("average achievable rate [Mbps]")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)


def cmd_optimize(scenario: Scenario, args, out, created):
    """Multi-start parameter search for the scenario's strategy family."""
    strategy, params = scenario.strategy, scenario.params
    mc = McConfig(scenario.optimizer_samples, scenario.mc.seed, scenario.orientation)
    options = scenario.optimizer_options
    seed = scenario.mc.seed
    if strategy.kind == "sd":
        problems = [(None, problem_sd(strategy.elements, params, mc,
                                      strategy.receiver_kind, args.threads))]
    elif strategy.kind == "wd":
        problems = [(None, problem_wd(strategy.elements, params, mc,
                                      strategy.processing, args.threads))]
    else:
        cluster_counts = [strategy.clusters] if strategy.clusters is not None \
            else list(range(1, strategy.elements + 1))
        problems = [(l, problem_scwd(strategy.elements, l, params, mc,
                                     strategy.receiver_kind, args.threads))
                    for l in cluster_counts]

    best = best_problem = best_l = None
    for l, problem in problems:
        result = multi_start(problem, scenario.optimizer_starts, seed, options,
                             include_empirical=True)
        if best is None or result.value > best.value:
            best, best_problem, best_l = result, problem, l

    trace_path = os.path.join(out, "optimize_trace.csv")
    created.append(trace_path)
    _write_rows(trace_path, ["iter", "stage", "delta_m", "delta_p", "best_value"],
                [[t.iteration, t.stage, t.mesh_size, t.poll_size, t.best_value]
                 for t in best.trace])

    report_path = os.path.join(out, "optimized.yaml")
    created.append(report_path)
    lines = ["optimized:"]
    lines.append(f"  strategy: {strategy.kind}")
    lines.append(f"  elements: {strategy.elements}")
    if best_l is not None:
        lines.append(f"  clusters: {best_l}")
    lines.append(f"  rate_bps: {best.value!r}")
    lines.append(f"  samples: {mc.n_samples}")
    lines.append(f"  seed: {seed}")
    lines.append("  parameter_names:")
    for name in best_problem.names:
        lines.append(f"    - {name}")
    lines.append("  parameters:")
    for v in best.x:
        lines.append(f"    - {float(v)!r}")
    with open(report_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"best rate {best.value / 1e6:.3f} Mbps "
          f"({best.n_evals} objective evaluations); report in {report_path}")


def cmd_channel(scenario: Scenario, args, out, created):
    """Dump the channel tensor at an explicit user pose (no sampling)."""
    strategy, params = scenario.strategy, scenario.params
    if strategy.kind == "scwd" and strategy.clusters is None:
        raise ScenarioError("channel dump needs strategy.clusters set to a number")
    room = params.room
    if not (0.0 <= args.ue_x <= room.width and 0.0 <= args.ue_y <= room.length):
        raise ScenarioError(f"UE position ({args.ue_x}, {args.ue_y}) outside the "
                            f"{room.width} x {room.length} m footprint")
    scene = scene_for_strategy(strategy, params)
    azimuth = math.radians(args.ue_azimuth_deg)
    yaw = math.radians(args.ue_yaw_deg) if args.ue_yaw_deg is not None \
        else azimuth - math.pi / 2.0
    ue = UeState(args.ue_x, args.ue_y, azimuth, yaw,
                 math.radians(args.ue_pitch_deg), math.radians(args.ue_roll_deg))
    tensor = subcarrier_channel(scene, ue)
    k_size, n_pd, n_led = tensor.values.shape
    path = os.path.join(out, "channel.csv")
    created.append(path)
    rows = []
    for k in range(k_size):
        for nr in range(n_pd):
            for nt in range(n_led):
                v = tensor.values[k, nr, nt]
                rows.append([k, nr, nt, float(v.real), float(v.imag)])
    _write_rows(path, ["k", "n_r", "n_t", "re", "im"], rows)
    print(f"wrote {len(rows)} rows to {path}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vlcmux",
        description="VLC MIMO-OFDM joint multiplexing simulator and configuration search")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the scenario Monte Carlo seed")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads for Monte Carlo samples")
    parser.add_argument("--out-dir", default=".", help="output directory")
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="average achievable rate of one scenario")
    p_eval.add_argument("scenario")
    p_eval.set_defaults(func=cmd_eval)

    p_sweep = sub.add_parser("sweep", help="rate vs number of elements per variant")
    p_sweep.add_argument("scenario")
    p_sweep.add_argument("--elements", default="1-16",
                         help="element counts, e.g. 1-16 or 1,2,4,8,16")
    p_sweep.add_argument("--variants", default="sd,wd,wd-noproc,scwd")
    p_sweep.add_argument("--plot", action="store_true", help="also write sweep.svg")
    p_sweep.set_defaults(func=cmd_sweep)

    p_opt = sub.add_parser("optimize", help="multi-start configuration search")
    p_opt.add_argument("scenario")
    p_opt.set_defaults(func=cmd_optimize)

    p_ch = sub.add_parser("channel", help="dump the channel tensor at a fixed pose")
    p_ch.add_argument("scenario")
    p_ch.add_argument("--ue-x", type=float, required=True, help="UE x (m)")
    p_ch.add_argument("--ue-y", type=float, required=True, help="UE y (m)")
    p_ch.add_argument("--ue-azimuth-deg", type=float, default=90.0)
    p_ch.add_argument("--ue-yaw-deg", type=float, default=None,
                      help="defaults to azimuth - 90")
    p_ch.add_argument("--ue-pitch-deg", type=float, default=0.0)
    p_ch.add_argument("--ue-roll-deg", type=float, default=0.0)
    p_ch.set_defaults(func=cmd_channel)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    created = []
    try:
        scenario = load_scenario(args.scenario)
        if args.seed is not None:
            if args.seed < 0:
                raise ScenarioError("--seed must be nonnegative")
            scenario = replace(scenario, mc=replace(scenario.mc, seed=args.seed))
        os.makedirs(args.out_dir, exist_ok=True)
        args.func(scenario, args, args.out_dir, created)
        return 0
    except (ScenarioError, ValueError, RuntimeError) as exc:
        for path in created:
            if os.path.exists(path):
                os.remove(path)
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
