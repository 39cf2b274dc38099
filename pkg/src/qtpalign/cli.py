"""Command-line front end.

Exit codes: 0 success, 2 argument error, 3 invalid input object, 4 failed
verification. Every file written with ``--out`` gets a sibling
``<out>.manifest.json`` recording the command, its parameters, the tool
version and a timestamp.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .aligned import MARGIN_NAMES, GridSpec, build_dqtp, rca_from_spherical, scan_region
from .channels import WERNER_CSV_HEADER, werner_feasible
from .errors import QtpError
from .metrics import (
    METRICS,
    TRACE,
    Lebedev,
    MonteCarlo,
    avg_fidelity_closed,
    fidelity_deviation_closed,
    sphere_average,
    trace_fidelity_gap,
)
from .protocol import Protocol, induced_channel, is_aligned
from .verify import run_all

EXIT_OK = 0
EXIT_ARGS = 2
EXIT_INVALID = 3
EXIT_VERIFY = 4

SCAN_HEADER = ["r1", "r2", "r3", *MARGIN_NAMES[:4], "feasible", *MARGIN_NAMES[4:]]
AVERAGE_HEADER = ["protocol_id", "metric", "mean", "std_dev", "mc_error", "samples", "seed"]


class InvalidInput(Exception):
    """Input file could not be turned into a valid object."""


def _write(out: str | None, text: str, command: str, params: dict) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    path.write_text(text, encoding="utf-8")
    manifest = {
        "command": command,
        "parameters": params,
        "tool_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "output": path.name,
    }
    Path(f"{out}.manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(x) -> str:
    return repr(float(x))


def _load_protocol(path: str) -> Protocol:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return Protocol.from_dict(data)
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise InvalidInput(f"{path}: {exc}") from exc


def _sampler(args):
    if args.quadrature is not None:
        return Lebedev(args.quadrature)
    return MonteCarlo(n=args.samples, seed=args.seed)


def _rca(args) -> np.ndarray:
    return rca_from_spherical(args.rca_norm, args.theta, args.phi)


def _check_s(parser, s: float) -> None:
    if not 0 < s <= 1:
        parser.error(f"--s must lie in (0, 1], got {s}")


def cmd_scan(args, parser) -> int:
    _check_s(parser, args.s)
    if args.steps < 2:
        parser.error("--steps must be at least 2")
    if args.rca_norm < 0:
        parser.error("--rca-norm must be non-negative")
    grid = GridSpec(args.min, args.max, args.steps) if args.min < args.max else None
    if grid is None:
        parser.error("--min must be below --max")
    rca = _rca(args)
    result = scan_region(args.s, rca, grid, emit_all=args.all)
    rows = [
        [_fmt(r) for r in node]
        + [_fmt(x) for x in m[:4]]
        + [int(f)]
        + [_fmt(x) for x in m[4:]]
        for node, m, f in zip(result.nodes, result.margins, result.feasible)
    ]
    params = {
        "s": args.s,
        "rca_norm": args.rca_norm,
        "theta": args.theta,
        "phi": args.phi,
        "r_c_a": rca.tolist(),
        "grid": {"min": args.min, "max": args.max, "steps": args.steps},
        "all": args.all,
        "feasible_nodes": result.n_feasible,
        "total_nodes": result.total_nodes,
    }
    _write(args.out, _csv(SCAN_HEADER, rows), "scan", params)
    print(f"feasible nodes: {result.n_feasible} / {result.total_nodes}", file=sys.stderr)
    return EXIT_OK


def cmd_eval(args, parser) -> int:
    p = _load_protocol(args.protocol)
    ch = induced_channel(p)
    try:
        factors = is_aligned(p)
    except QtpError:
        factors = None
    rule = Lebedev(args.quadrature or 74)
    gap = trace_fidelity_gap(p, rule)
    trace = sphere_average(p, TRACE, rule)
    report = {
        "avg_fidelity": float(avg_fidelity_closed(ch)),
        "fidelity_deviation": fidelity_deviation_closed(ch),
        "aligned_factors": factors,
        "trace_distance_average": trace.mean,
        "trace_distance_deviation": trace.std_dev,
        "trace_fidelity_gap": gap.mean,
        "quadrature_points": gap.samples,
        "induced_channel": {"c": ch.c.reshape(9).tolist(), "v": ch.v.tolist()},
    }
    _write(args.out, json.dumps(report, indent=2) + "\n", "eval", {"protocol": args.protocol, "quadrature": rule.order})
    return EXIT_OK


def cmd_average(args, parser) -> int:
    if args.quadrature is None and args.samples < 2:
        parser.error("--samples must be at least 2")
    p = _load_protocol(args.protocol)
    sampler = _sampler(args)
    metrics = METRICS if args.metric == "both" else (args.metric,)
    pid = Path(args.protocol).stem
    seed = "" if isinstance(sampler, Lebedev) else args.seed
    rows = []
    for metric in metrics:
        avg = sphere_average(p, metric, sampler)
        rows.append([pid, metric, _fmt(avg.mean), _fmt(avg.std_dev), _fmt(avg.mc_error), avg.samples, seed])
    params = {
        "protocol": args.protocol,
        "metric": args.metric,
        "samples": args.samples,
        "seed": args.seed,
        "quadrature": args.quadrature,
    }
    _write(args.out, _csv(AVERAGE_HEADER, rows), "average", params)
    return EXIT_OK


def cmd_build_dqtp(args, parser) -> int:
    _check_s(parser, args.s)
    r_d = np.array(args.rd) if args.rd else -np.sqrt(args.s) * np.ones(3)
    try:
        p = build_dqtp(r_d, _rca(args), args.s)
    except QtpError as exc:
        raise InvalidInput(str(exc)) from exc
    params = {"s": args.s, "r_d": r_d.tolist(), "rca_norm": args.rca_norm, "theta": args.theta, "phi": args.phi}
    _write(args.out, json.dumps(p.to_dict(), indent=2) + "\n", "build-dqtp", params)
    return EXIT_OK


def cmd_verify(args, parser) -> int:
    if args.n < 1:
        parser.error("--n must be positive")
    results = run_all(seed=args.seed, n=args.n, sabotage=args.sabotage)
    for r in results:
        print(r.line())
    ok = all(r.passed for r in results)
    print("all suites passed" if ok else "verification FAILED")
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_werner(args, parser) -> int:
    if args.p_steps < 1 or args.s_steps < 1:
        parser.error("grid steps must be positive")
    if not (-1 / 3 <= args.p_min < args.p_max <= 1):
        parser.error("p range must satisfy -1/3 <= p-min < p-max <= 1")
    if not (0 < args.s_min < args.s_max <= 1):
        parser.error("s range must satisfy 0 < s-min < s-max <= 1")
    p_axis = np.linspace(args.p_min, args.p_max, args.p_steps)
    s_axis = np.linspace(args.s_min, args.s_max, args.s_steps)
    rows = []
    for s in s_axis:
        ps = set(p_axis.tolist())
        if not args.grid_only:
            # the uncorrelated point and the standard-measurement boundary rarely sit on the grid
            ps.update(x for x in (np.sqrt(s), s) if args.p_min <= x <= args.p_max)
        for p in sorted(ps):
            case = werner_feasible(p, s)
            rows.append([_fmt(case.p), _fmt(case.s), _fmt(case.p_prime), _fmt(case.polynomial), case.classification.value])
    params = {
        "p": [args.p_min, args.p_max, args.p_steps],
        "s": [args.s_min, args.s_max, args.s_steps],
        "grid_only": args.grid_only,
    }
    _write(args.out, _csv(WERNER_CSV_HEADER, rows), "werner", params)
    return EXIT_OK


def _add_rca(sp) -> None:
    sp.add_argument("--rca-norm", type=float, default=0.0, help="norm of Alice's canonical marginal")
    sp.add_argument("--theta", type=float, default=0.0, help="polar angle of the marginal (radians)")
    sp.add_argument("--phi", type=float, default=0.0, help="azimuth of the marginal (radians)")


def _add_sampling(sp) -> None:
    sp.add_argument("--samples", type=int, default=100_000, help="Monte Carlo sample count")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument(
        "--quadrature",
        type=int,
        choices=(6, 26, 74),
        default=None,
        help="use a Lebedev rule with this many points instead of Monte Carlo",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qtpalign", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("scan", help="feasibility of aligned deterministic protocols on an r_d grid")
    sp.add_argument("--s", type=float, required=True, help="alignment factor in (0, 1]")
    _add_rca(sp)
    sp.add_argument("--steps", type=int, default=101, help="grid nodes per axis")
    sp.add_argument("--min", type=float, default=-1.0)
    sp.add_argument("--max", type=float, default=1.0)
    sp.add_argument("--all", action="store_true", help="emit infeasible nodes too")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_scan)

    sp = sub.add_parser("eval", help="fidelity report for a protocol JSON file")
    sp.add_argument("protocol")
    sp.add_argument("--quadrature", type=int, choices=(6, 26, 74), default=None)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("average", help="sphere averages of the distance measures")
    sp.add_argument("protocol")
    sp.add_argument("--metric", choices=(*METRICS, "both"), default="both")
    _add_sampling(sp)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_average)

    sp = sub.add_parser("build-dqtp", help="write a deterministic aligned protocol as JSON")
    sp.add_argument("--s", type=float, required=True)
    sp.add_argument("--rd", type=float, nargs=3, metavar=("R1", "R2", "R3"), help="default: -sqrt(s) (1, 1, 1)")
    _add_rca(sp)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_build_dqtp)

    sp = sub.add_parser("verify", help="run the differential oracle suites")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--n", type=int, default=100, help="suite size")
    sp.add_argument("--sabotage", action="store_true", help="inject a fault; the run must fail")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("werner", help="classify Werner resource / Werner POVM protocols")
    sp.add_argument("--p-min", type=float, default=-1 / 3)
    sp.add_argument("--p-max", type=float, default=1.0)
    sp.add_argument("--p-steps", type=int, default=200)
    sp.add_argument("--s-min", type=float, default=0.005)
    sp.add_argument("--s-max", type=float, default=1.0)
    sp.add_argument("--s-steps", type=int, default=200)
    sp.add_argument("--grid-only", action="store_true", help="skip the extra p = sqrt(s) and p = s rows")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_werner)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except InvalidInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
