"""Command-line experiment runner.

Subcommands: sweep, threshold, pdf, compare, coverage.  Exit codes are 0 on
success, 1 on model errors (unachievable targets, baseline domain errors) and
2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import (
    HandoverTiming,
    ProbabilityTargets,
    threshold_m,
    threshold_n,
    traversal_time_cdf,
    traversal_time_pdf,
)
from .baselines import compare_models, write_comparison_csv
from .coverage import (
    PathLossModel,
    contour_radius,
    rss_trace_along_contour,
    write_contour_csv,
    write_trace_csv,
)
from .csvio import fmt, write_csv
from .errors import ModelError
from .geometry import CellRadiusModel, generate_boundary, time_support, write_boundary_csv
from .montecarlo import SimConfig, sweep_velocity, write_sweep_csv
from .svgplot import line_chart

PROG = "amoebic-ho"

# Maps library parameter names carried by ModelError.param onto CLI flags.
PARAM_FLAGS = {
    "p_u_target": "--target-pu",
    "p_f_target": "--target-pf",
    "velocity": "--v-grid",
    "p": "--contours",
}


class UsageError(Exception):
    pass


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("expected at least one value")
    return vals


def _common_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("model parameters")
    g.add_argument("--mu-r", type=float, default=100.0, help="mean cell radius, m")
    g.add_argument("--sigma-r", type=float, default=10.0, help="cell radius std. dev., m")
    g.add_argument("--tau-a", type=float, default=1.0, help="handover-in latency, s")
    g.add_argument("--tau-d", type=float, default=1.0, help="handover-out latency, s")
    g.add_argument("--target-pu", type=float, default=0.02, help="unnecessary-handover target")
    g.add_argument("--target-pf", type=float, default=0.01, help="handover-failure target")
    g = p.add_argument_group("simulation")
    g.add_argument("--v-grid", type=_float_list, default=[5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
                   help="comma-separated velocities, m/s; the first is the design velocity")
    g.add_argument("--vmin", type=float, default=None, help="sampled-mode minimum speed, m/s")
    g.add_argument("--vmax", type=float, default=None, help="sampled-mode maximum speed, m/s")
    g.add_argument("--iterations", type=int, default=1_000_000)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    g.add_argument("--radius-mode", choices=["fixed", "resampled"], default="resampled")
    g.add_argument("--velocity-mode", choices=["grid", "sampled"], default="grid")
    g = p.add_argument_group("output")
    g.add_argument("--out", default=None, help="output directory (default: ./out)")
    g.add_argument("--plot", action="store_true", help="also write SVG plots")
    g.add_argument("--config", default=None, help="flat 'key = value' file; flags win")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog=PROG, description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("sweep", parents=[common], help="P_u / P_f versus velocity")

    p = sub.add_parser("threshold", parents=[common], help="print thresholds N and M")
    _add_geometry_flags(p)

    p = sub.add_parser("pdf", parents=[common], help="tabulate the dwell-time PDF and CDF")
    _add_geometry_flags(p)
    p.add_argument("--points", type=int, default=201, help="grid size over the time support")

    sub.add_parser("compare", parents=[common], help="proposed model vs. baseline thresholds")

    p = sub.add_parser("coverage", parents=[common], help="coverage contours, RSS traces, boundary")
    p.add_argument("--contours", type=_float_list, default=[0.5, 0.8, 0.9])
    p.add_argument("--trace-p", type=_float_list, default=None,
                   help="contour probabilities to emit RSS traces for")
    p.add_argument("--trace-points", type=int, default=360)
    p.add_argument("--boundary-points", type=int, default=360)
    p.add_argument("--smoothing", type=int, default=9)
    p.add_argument("--pl-d0", type=float, default=40.0, help="path loss at d0, dB")
    p.add_argument("--d0", type=float, default=1.0, help="reference distance, m")
    p.add_argument("--beta", type=float, default=3.5, help="path-loss exponent")
    p.add_argument("--sigma-sh", type=float, default=6.0, help="shadowing std. dev., dB")
    p.add_argument("--tx-power", type=float, default=20.0, help="dBm")
    p.add_argument("--sensitivity", type=float, default=-90.0, help="dBm")
    return parser


def _add_geometry_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--r1", type=float, default=None, help="entry radius, m (required)")
    p.add_argument("--r2", type=float, default=None, help="exit radius, m (required)")
    p.add_argument("--v", type=float, default=None, help="speed, m/s (required)")


def read_config(path: str) -> dict[str, str]:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.lstrip("-").replace("_", "-")] = value
    return out


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not args.config:
        return args
    sub = parser._subparsers._group_actions[0].choices[args.command]
    actions = {a.option_strings[0].lstrip("-"): a for a in sub._actions if a.option_strings}
    defaults = {}
    try:
        entries = read_config(args.config)
    except OSError as exc:
        sub.error(f"cannot read config: {exc}")
    except UsageError as exc:
        sub.error(str(exc))
    for key, value in entries.items():
        action = actions.get(key)
        if action is None or key == "config":
            sub.error(f"unknown config key {key!r}")
        if isinstance(action, argparse._StoreTrueAction):
            defaults[action.dest] = value.lower() in ("1", "true", "yes", "on")
        else:
            defaults[action.dest] = value
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def _validate(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    sub = parser._subparsers._group_actions[0].choices[args.command]
    for name in ("target_pu", "target_pf"):
        val = getattr(args, name)
        if not 0 <= val <= 1:
            sub.error(f"--{name.replace('_', '-')} must lie in [0, 1], got {val}")
    for name in ("tau_a", "tau_d", "mu_r"):
        if not getattr(args, name) > 0:
            sub.error(f"--{name.replace('_', '-')} must be positive")
    if args.sigma_r < 0 or args.mu_r - 4 * args.sigma_r <= 0:
        sub.error("--sigma-r must be non-negative with mu_r - 4*sigma_r > 0")
    if any(v <= 0 for v in args.v_grid):
        sub.error("--v-grid values must be positive")
    if args.iterations < 1:
        sub.error("--iterations must be at least 1")
    if args.threads < 1:
        sub.error("--threads must be at least 1")
    if not 0 <= args.seed < 2**64:
        sub.error("--seed must be a 64-bit unsigned integer")
    vmin = args.vmin if args.vmin is not None else min(args.v_grid)
    vmax = args.vmax if args.vmax is not None else max(args.v_grid)
    if not 0 < vmin <= vmax:
        sub.error("need 0 < --vmin <= --vmax")
    args.vmin, args.vmax = vmin, vmax
    if args.command in ("threshold", "pdf"):
        for name in ("r1", "r2", "v"):
            val = getattr(args, name)
            if val is None:
                sub.error(f"the following arguments are required: --{name}")
            if not val > 0:
                sub.error(f"--{name} must be positive")
    if args.command == "pdf" and args.points < 2:
        sub.error("--points must be at least 2")
    if args.command == "coverage":
        for p in args.contours + (args.trace_p or []):
            if not 0 < p < 1:
                sub.error(f"coverage probabilities must lie in (0, 1), got {p}")
        if args.sigma_sh < 0 or args.d0 <= 0 or args.beta <= 0:
            sub.error("need --sigma-sh >= 0, --d0 > 0, --beta > 0")
        if args.trace_points < 1 or args.boundary_points < 8:
            sub.error("need --trace-points >= 1 and --boundary-points >= 8")
        if not 0 <= args.smoothing < args.boundary_points:
            sub.error("--smoothing must lie in [0, --boundary-points)")


def _sim_config(args: argparse.Namespace) -> SimConfig:
    return SimConfig(
        radius_model=CellRadiusModel(args.mu_r, args.sigma_r),
        timing=HandoverTiming(args.tau_a, args.tau_d),
        targets=ProbabilityTargets(args.target_pu, args.target_pf),
        velocity_grid=tuple(args.v_grid),
        iterations=args.iterations,
        seed=args.seed,
        v_min=args.vmin,
        v_max=args.vmax,
        radius_mode=args.radius_mode,
        velocity_mode=args.velocity_mode,
    )


def _out_dir(args: argparse.Namespace) -> Path:
    out = Path(args.out if args.out is not None else "out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def write_manifest(out: Path, args: argparse.Namespace, artifacts: list[Path],
                   started: float) -> Path:
    params = {k: v for k, v in sorted(vars(args).items())}
    path = out / f"{args.command}_manifest.json"
    manifest = {
        "command": args.command,
        "parameters": params,
        "seed": args.seed,
        "artifacts": [str(p) for p in artifacts],
        "version": __version__,
        "duration_s": time.perf_counter() - started,
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def cmd_sweep(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    config = _sim_config(args)
    points = sweep_velocity(config, workers=args.threads)
    out = _out_dir(args)
    artifacts = [out / "sweep.csv"]
    write_sweep_csv(artifacts[0], points)
    if args.plot:
        vs = [p.velocity for p in points]
        for key, label, target in (
            ("u", "Probability of unnecessary handover", args.target_pu),
            ("f", "Probability of handover failure", args.target_pf),
        ):
            path = out / f"sweep_p{key}.svg"
            line_chart(
                path,
                {
                    "analytic": (vs, [getattr(p, f"p_{key}_analytic") for p in points]),
                    "empirical": (vs, [getattr(p, f"p_{key}_empirical") for p in points]),
                },
                title=f"{label} vs velocity", xlabel="velocity (m/s)", ylabel=f"P_{key}",
                hline=target,
            )
            artifacts.append(path)
    write_manifest(out, args, artifacts, started)
    return 0


def cmd_threshold(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    timing = HandoverTiming(args.tau_a, args.tau_d)
    targets = ProbabilityTargets(args.target_pu, args.target_pf)
    n = threshold_n(targets, timing, args.r1, args.r2, args.v)
    m = threshold_m(targets, timing, args.r1, args.r2, args.v)
    print(f"N={fmt(n)} M={fmt(m)}")
    if args.out is not None:
        write_manifest(_out_dir(args), args, [], started)
    return 0


def cmd_pdf(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    sup = time_support(args.r1, args.r2, args.v)
    t = np.linspace(sup.t_min, sup.t_max, args.points)
    pdf = traversal_time_pdf(t, args.r1, args.r2, args.v)
    cdf = traversal_time_cdf(t, args.r1, args.r2, args.v)
    out = _out_dir(args)
    path = out / "pdf.csv"
    write_csv(path, ["t_s", "pdf", "cdf"], zip(t, pdf, cdf))
    write_manifest(out, args, [path], started)
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    rows = compare_models(_sim_config(args), workers=args.threads)
    out = _out_dir(args)
    artifacts = [out / "comparison.csv"]
    write_comparison_csv(artifacts[0], rows)
    for r in rows:
        if r.error:
            print(f"warning: {r.model} at v={fmt(r.velocity)}: {r.error}", file=sys.stderr)
    if args.plot:
        series = {}
        for r in rows:
            xs, ys = series.setdefault(r.model, ([], []))
            xs.append(r.velocity)
            ys.append(r.pu_empirical)
        path = out / "comparison.svg"
        line_chart(path, series, title="Unnecessary handover: model comparison",
                   xlabel="velocity (m/s)", ylabel="empirical P_u", hline=args.target_pu)
        artifacts.append(path)
    write_manifest(out, args, artifacts, started)
    return 0


def cmd_coverage(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    model = PathLossModel(
        pl_d0=args.pl_d0, d0=args.d0, beta=args.beta, sigma_sh=args.sigma_sh,
        tx_power=args.tx_power, sensitivity=args.sensitivity,
    )
    out = _out_dir(args)
    artifacts = [out / "contours.csv"]
    write_contour_csv(artifacts[0], [(p, contour_radius(model, p)) for p in args.contours])
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(args.seed)))
    for p in args.trace_p or []:
        path = out / f"trace_p{fmt(p)}.csv"
        write_trace_csv(path, rss_trace_along_contour(model, p, args.trace_points, rng))
        artifacts.append(path)
    boundary = generate_boundary(
        CellRadiusModel(args.mu_r, args.sigma_r), args.boundary_points, args.smoothing, rng
    )
    path = out / "boundary.csv"
    write_boundary_csv(path, boundary)
    artifacts.append(path)
    write_manifest(out, args, artifacts, started)
    return 0


COMMANDS = {
    "sweep": cmd_sweep,
    "threshold": cmd_threshold,
    "pdf": cmd_pdf,
    "compare": cmd_compare,
    "coverage": cmd_coverage,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _apply_config(parser, argv)
        _validate(args, parser)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except ModelError as exc:
        flag = PARAM_FLAGS.get(exc.param or "", exc.param)
        where = f" [{flag}]" if flag else ""
        print(f"{PROG} {args.command}: error{where}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
