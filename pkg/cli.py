#!/usr/bin/env python3
"""
Command-line surface: phase boundaries, minorants, classifications,
witnesses, ERG phase grids, Glauber runs and the property suites.

CSV outputs (full float precision):
  boundary        r,p_critical,gamma
  minorant        x,curve,minorant,tangent
  erg-phase       beta1,beta2,kind,u_star,u_star2
  erg-trajectory  beta2,u_star,u_star2,in_region
  sample-erg      step,edge_density,hom_density   (parameters in PATH.meta)

Grids are written start:stop:num (inclusive linspace) or as a comma list.
Exit codes: 0 success, 1 verification failure, 2 usage or domain error.
"""

import argparse
import csv
import io
import logging
import sys
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from config import DEFAULT_SEED, VERIFY_SAMPLES
from erg import classify as classify_erg
from erg import phase_plot_data, region_trajectory, u_star_trajectory
from exceptions import PhaseDiagramError
from graphs import is_bipartite, read_edge_list
from hypergraph import build_hyper_break_witness, classify_upper_tail_hyper, read_hyperedge_list
from minorant import boundary_curve, double_tangent, minorant_value
from phase import (
    build_break_witness,
    classify_spectral,
    classify_upper_tail,
    dumps_witness,
    lower_tail_checkerboard,
    lower_tail_sidorenko_note,
)
from rate_fn import curve_value
from sampler import empirical_cut_distance_to_constant, erg_glauber, run_metadata, trajectory_csv
from schemas import ErgKind, ErgModel, GammaCurve, McmcRun, PhaseClassification
from verify import SUITES, run_suites

logger = logging.getLogger(__name__)

SVG_WIDTH, SVG_HEIGHT, SVG_MARGIN = 640, 480, 48
SVG_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]
KIND_COLORS = {
    ErgKind.SYMMETRIC_UNIQUE: "#1f77b4",
    ErgKind.SYMMETRIC_TWO_PHASE: "#000000",
    ErgKind.BREAKING: "#d62728",
    ErgKind.INDETERMINATE: "#bbbbbb",
}


# Argument types
def _open_unit(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"{text} is not in (0, 1)")
    return value


def _closed_unit(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"{text} is not in [0, 1]")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0.0:
        raise argparse.ArgumentTypeError(f"{text} is not positive")
    return value


def _degree(text: str) -> int:
    value = int(text)
    if value < 2:
        raise argparse.ArgumentTypeError("degree must be at least 2")
    return value


def _count(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"{text} is not a positive integer")
    return value


def _nonnegative(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"{text} is negative")
    return value


def parse_grid(text: str) -> List[float]:
    """'start:stop:num' or 'a,b,c'."""
    try:
        if ":" in text:
            start, stop, num = text.split(":")
            if int(num) < 1:
                raise ValueError("num must be positive")
            return np.linspace(float(start), float(stop), int(num)).tolist()
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}: {e}")


# Output helpers
def _csv_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if value is None else repr(value) if isinstance(value, float) else value for value in row])
    return buffer.getvalue()


def _scale(values: Sequence[float], lo: float, hi: float, start: float, stop: float) -> List[float]:
    span = hi - lo if hi > lo else 1.0
    return [start + (v - lo) / span * (stop - start) for v in values]


def _bounds(values: Sequence[float]) -> Tuple[float, float]:
    finite = [v for v in values if v is not None and np.isfinite(v)]
    return (min(finite), max(finite)) if finite else (0.0, 1.0)


def svg_plot(
    series: Sequence[Tuple[str, Sequence[float], Sequence[float]]],
    scatter_colors: Optional[Sequence[str]] = None,
    x_label: str = "x",
    y_label: str = "y",
) -> str:
    """Polylines (or one colored scatter when scatter_colors is given) in a fixed viewport."""
    x_lo, x_hi = _bounds([x for _, xs, _ in series for x in xs])
    y_lo, y_hi = _bounds([y for _, _, ys in series for y in ys])
    left, right = SVG_MARGIN, SVG_WIDTH - SVG_MARGIN
    top, bottom = SVG_MARGIN, SVG_HEIGHT - SVG_MARGIN
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" '
        f'viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}">',
        f'<rect x="{left}" y="{top}" width="{right - left}" height="{bottom - top}" fill="none" stroke="#444"/>',
        f'<text x="{(left + right) / 2}" y="{SVG_HEIGHT - 12}" text-anchor="middle">{x_label} [{x_lo:.4g}, {x_hi:.4g}]</text>',
        f'<text x="14" y="{(top + bottom) / 2}" transform="rotate(-90 14 {(top + bottom) / 2})" '
        f'text-anchor="middle">{y_label} [{y_lo:.4g}, {y_hi:.4g}]</text>',
    ]
    for index, (label, xs, ys) in enumerate(series):
        points = [(x, y) for x, y in zip(xs, ys) if y is not None and np.isfinite(y)]
        px = _scale([x for x, _ in points], x_lo, x_hi, left, right)
        py = _scale([y for _, y in points], y_lo, y_hi, bottom, top)
        if scatter_colors is not None:
            for x, y, color in zip(px, py, scatter_colors):
                parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="2" fill="{color}"/>')
            continue
        color = SVG_COLORS[index % len(SVG_COLORS)]
        coordinates = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(px, py))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coordinates}"><title>{label}</title></polyline>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _format(args) -> str:
    if args.format:
        return args.format
    return "svg" if args.out and args.out.endswith(".svg") else "csv"


def _emit(text: str, out: Optional[str]):
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    Path(out).write_text(text)
    logger.info(f"✅ Wrote {out}")


def _print_classification(result: PhaseClassification):
    print(result.verdict.value)
    if result.rate is not None:
        print(f"rate={result.rate!r}")
    if result.witness is not None:
        w = result.witness
        print(f"witness: epsilon={w.epsilon!r} t={w.t_value!r} > {w.target_t!r}, h_p={w.hp_value!r} < {w.target_hp!r}")
    if result.certificate is not None:
        c = result.certificate
        print(f"certificate: norm={c.operator_norm!r} > r={c.r!r}, h_p={c.hp_value!r} < {c.target_hp!r}, verified={c.verified}")
    if result.note:
        print(result.note)


# Subcommands
def cmd_boundary(args) -> int:
    r_grid = np.linspace(0.0, 1.0, args.grid + 2)[1:-1].tolist()
    rows = boundary_curve(float(args.d), r_grid)
    if _format(args) == "svg":
        text = svg_plot([(f"d={args.d}", [row.r for row in rows], [row.p_critical for row in rows])], x_label="r", y_label="p")
    else:
        text = _csv_text(["r", "p_critical", "gamma"], [(row.r, row.p_critical, row.gamma) for row in rows])
    _emit(text, args.out)
    return 0


def cmd_minorant(args) -> int:
    c = GammaCurve(p=args.p, gamma=args.gamma)
    tangent = double_tangent(c)
    xs = np.linspace(0.0, 1.0, args.grid).tolist()
    curve = np.atleast_1d(curve_value(c, xs)).tolist()
    lower = np.atleast_1d(minorant_value(c, xs, tangent)).tolist()
    line = [None if tangent is None else tangent.slope * x + tangent.intercept for x in xs]
    if tangent is not None:
        logger.info(f"double tangent touches at q={tangent.q_lo:.6g} and q={tangent.q_hi:.6g}")
    if _format(args) == "svg":
        series = [("curve", xs, curve), ("minorant", xs, lower)]
        if tangent is not None:
            series.append(("tangent", xs, line))
        text = svg_plot(series, x_label="x", y_label="h_p(x^(1/gamma))")
    else:
        text = _csv_text(["x", "curve", "minorant", "tangent"], list(zip(xs, curve, lower, line)))
    _emit(text, args.out)
    return 0


def cmd_classify(args) -> int:
    H = read_edge_list(args.graph) if args.graph else None
    _print_classification(classify_upper_tail(args.d, args.p, args.r, H))
    return 0


def cmd_witness(args) -> int:
    witness = build_break_witness(read_edge_list(args.graph), args.p, args.r)
    _emit(dumps_witness(witness), args.out)
    return 0


def cmd_spectral_classify(args) -> int:
    _print_classification(classify_spectral(args.p, args.r))
    return 0


def cmd_erg_classify(args) -> int:
    model = ErgModel(H=read_edge_list(args.graph), alpha=args.alpha, beta1=args.beta1, beta2=args.beta2)
    result = classify_erg(model)
    print(result.kind.value)
    print("u_star=" + ",".join(repr(u) for u in result.u_star))
    print(f"psi={result.psi!r}")
    if result.beta2_interval is not None:
        print(f"beta2_interval={result.beta2_interval[0]!r},{result.beta2_interval[1]!r}")
    if result.case:
        print(f"case={result.case}")
    return 0


def cmd_erg_phase(args) -> int:
    cells = phase_plot_data(read_edge_list(args.graph), args.alpha, args.b1grid, args.b2grid)
    if _format(args) == "svg":
        text = svg_plot(
            [("cells", [cell.beta1 for cell in cells], [cell.beta2 for cell in cells])],
            scatter_colors=[KIND_COLORS[cell.kind] for cell in cells],
            x_label="beta1",
            y_label="beta2",
        )
    else:
        rows = [(cell.beta1, cell.beta2, cell.kind.value, cell.u_star, cell.u_star2) for cell in cells]
        text = _csv_text(["beta1", "beta2", "kind", "u_star", "u_star2"], rows)
    _emit(text, args.out)
    return 0


def cmd_erg_trajectory(args) -> int:
    if args.d is None:
        points = u_star_trajectory(args.beta1, args.gamma, args.b2grid)
    else:
        points = region_trajectory(args.beta1, args.gamma, args.d, args.b2grid)
    if _format(args) == "svg":
        text = svg_plot([("u*", [pt.beta2 for pt in points], [pt.u_star for pt in points])], x_label="beta2", y_label="u*")
    else:
        rows = [(pt.beta2, pt.u_star, pt.u_star2, pt.in_region) for pt in points]
        text = _csv_text(["beta2", "u_star", "u_star2", "in_region"], rows)
    _emit(text, args.out)
    return 0


def cmd_sample_erg(args) -> int:
    run = McmcRun(
        n=args.n,
        kind=args.kind,
        cycle_length=args.cycle_length,
        alpha=args.alpha,
        beta1=args.beta1,
        beta2=args.beta2,
        steps=args.steps,
        burn_in=args.burn_in,
        thinning=args.thinning,
        seed=args.seed,
    )
    run = erg_glauber(run)
    _emit(trajectory_csv(run), args.out)
    if args.out and args.out != "-":
        _emit(run_metadata(run), args.out + ".meta")
    return 0


def cmd_hyper_classify(args) -> int:
    H = read_hyperedge_list(args.hypergraph) if args.hypergraph else None
    _print_classification(classify_upper_tail_hyper(args.d, args.k, args.p, args.r, H))
    return 0


def cmd_hyper_witness(args) -> int:
    witness = build_hyper_break_witness(read_hyperedge_list(args.hypergraph), args.p, args.r)
    keys = ["k", "d", "epsilon", "r1", "r2", "s", "t_value", "target_t", "hp_value", "target_hp"]
    text = _csv_text(keys, [[getattr(witness, key) for key in keys]])
    text += "weights\n" + ",".join(repr(w) for w in witness.kernel.weights) + "\n"
    _emit(text, args.out)
    return 0


def cmd_verify(args) -> int:
    results = run_suites(args.suite, samples=args.samples, seed=args.seed)
    for result in results:
        status = "ok" if result.passed else "FAILED"
        print(f"{result.name}: {status} ({result.violations}/{result.checked})")
    if all(result.passed for result in results):
        logger.info("🎉 All property suites passed!")
        return 0
    return 1


def cmd_lower_tail(args) -> int:
    H = read_edge_list(args.graph)
    if is_bipartite(H) is not None:
        result = lower_tail_sidorenko_note(H, args.p, args.r)
    else:
        result = lower_tail_checkerboard(args.p, args.r, H)
    _print_classification(result)
    return 0


def cmd_cut_distance(args) -> int:
    estimate = empirical_cut_distance_to_constant(read_edge_list(args.graph), args.u, seed=args.seed)
    print(f"cut_distance={estimate.lower_bound!r}")
    print(f"exact={estimate.exact}")
    return 0


def _add_output(parser: argparse.ArgumentParser, required: bool = False):
    parser.add_argument("--out", required=required, help="output path ('-' for stdout)")
    parser.add_argument("--format", choices=["csv", "svg"], help="defaults to svg for *.svg paths, else csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cli.py", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter
    )
    sub = parser.add_subparsers(dest="command", required=True)
    def add(name: str, handler: Callable, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(handler=handler)
        return p

    p = add("boundary", cmd_boundary, "critical p against r for the degree-d region")
    p.add_argument("--d", type=_degree, required=True)
    p.add_argument("--grid", type=_count, default=400)
    _add_output(p)

    p = add("minorant", cmd_minorant, "gamma-curve, its convex minorant and the double tangent")
    p.add_argument("--p", type=_open_unit, required=True)
    p.add_argument("--gamma", type=_positive_float, required=True)
    p.add_argument("--grid", type=_count, default=401)
    _add_output(p)

    p = add("classify", cmd_classify, "upper-tail phase of a d-regular H at (p, r)")
    p.add_argument("--d", type=_degree, required=True)
    p.add_argument("--p", type=_open_unit, required=True)
    p.add_argument("--r", type=_open_unit, required=True)
    p.add_argument("--graph", help="edge-list file of H")

    p = add("witness", cmd_witness, "three-block break witness for a d-regular graph")
    p.add_argument("--p", type=_open_unit, required=True)
    p.add_argument("--r", type=_open_unit, required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--out")

    p = add("spectral-classify", cmd_spectral_classify, "upper tail of the spectral radius")
    p.add_argument("--p", type=_open_unit, required=True)
    p.add_argument("--r", type=_open_unit, required=True)

    p = add("erg-classify", cmd_erg_classify, "phase of an exponential random graph model")
    p.add_argument("--graph", required=True)
    p.add_argument("--alpha", type=_positive_float, required=True)
    p.add_argument("--beta1", type=float, required=True)
    p.add_argument("--beta2", type=float, required=True)

    p = add("erg-phase", cmd_erg_phase, "classification over a (beta1, beta2) grid")
    p.add_argument("--graph", required=True)
    p.add_argument("--alpha", type=_positive_float, required=True)
    p.add_argument("--b1grid", type=parse_grid, required=True)
    p.add_argument("--b2grid", type=parse_grid, required=True)
    _add_output(p)

    p = add("erg-trajectory", cmd_erg_trajectory, "maximizer u* along a beta2 grid")
    p.add_argument("--beta1", type=float, required=True)
    p.add_argument("--gamma", type=_positive_float, required=True)
    p.add_argument("--b2grid", type=parse_grid, required=True)
    p.add_argument("--d", type=_degree, help="also flag membership of (p, u*) in the degree-d region")
    _add_output(p)

    p = add("sample-erg", cmd_sample_erg, "single-edge Glauber dynamics")
    p.add_argument("--n", type=_count, required=True)
    p.add_argument("--kind", choices=["triangle", "cycle"], default="triangle")
    p.add_argument("--cycle-length", type=_count)
    p.add_argument("--alpha", type=_positive_float, default=1.0)
    p.add_argument("--beta1", type=float, required=True)
    p.add_argument("--beta2", type=float, required=True)
    p.add_argument("--steps", type=_nonnegative, required=True)
    p.add_argument("--burn-in", type=_nonnegative)
    p.add_argument("--thinning", type=_count)
    p.add_argument("--seed", type=_nonnegative, default=DEFAULT_SEED)
    p.add_argument("--out")

    p = add("hyper-classify", cmd_hyper_classify, "upper tail for a d-regular k-uniform hypergraph")
    p.add_argument("--d", type=_degree, required=True)
    p.add_argument("--k", type=_degree, required=True)
    p.add_argument("--p", type=_open_unit, required=True)
    p.add_argument("--r", type=_open_unit, required=True)
    p.add_argument("--hypergraph", help="hyperedge-list file of H")

    p = add("hyper-witness", cmd_hyper_witness, "break witness on a k-kernel")
    p.add_argument("--p", type=_open_unit, required=True)
    p.add_argument("--r", type=_open_unit, required=True)
    p.add_argument("--hypergraph", required=True)
    p.add_argument("--out")

    p = add("verify", cmd_verify, "property suites; exit 1 on any violation")
    p.add_argument("--suite", choices=sorted(SUITES) + ["all"], default="all")
    p.add_argument("--samples", type=_count, default=VERIFY_SAMPLES)
    p.add_argument("--seed", type=_nonnegative, default=DEFAULT_SEED)

    p = add("lower-tail", cmd_lower_tail, "lower tail of t(H, G(n, p)) <= r^e(H)")
    p.add_argument("--p", type=_open_unit, required=True)
    p.add_argument("--r", type=_open_unit, required=True)
    p.add_argument("--graph", required=True)

    p = add("cut-distance", cmd_cut_distance, "cut distance of a graph to the constant u")
    p.add_argument("--graph", required=True)
    p.add_argument("--u", type=_closed_unit, required=True)
    p.add_argument("--seed", type=_nonnegative, default=DEFAULT_SEED)

    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.handler(args)
    except (PhaseDiagramError, ValidationError, OSError) as e:
        logger.error(f"❌ {args.command}: {e}")
        return 2


if __name__ == "__main__":
    sys.exit(run())
