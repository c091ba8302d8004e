"""Command line front end: tilings, orbits, renormalization traces and the
polyhedral verification suite.

Exit codes: 0 pass, 1 verification or completeness failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

from .exact import format_rational, parse_rational

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

PERIOD_COLORS = (
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
)
SHAPE_COLORS = {"square": "#4e79a7", "octagon": "#e15759", "triangle": "#59a14f", "other": "#bab0ac"}


class UsageError(Exception):
    pass


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"not a rational number: {text!r}") from exc


def _emit(doc: dict, path: str | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=False) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# ---------------------------------------------------------------- rendering

def _num(x) -> str:
    return format(float(x), ".12g")


def render_svg(tiling, color_by: str = "period", stroke_width: float = 0.004,
               viewport: tuple | None = None) -> str:
    """One <polygon> per tile; y is flipped so the picture reads like the plane."""
    s = tiling.s
    if viewport is None:
        viewport = (-1 - s, -s, 1 + s, s)
    x0, y0, x1, y1 = (Fraction(v) for v in viewport)
    w, h = x1 - x0, y1 - y0
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'viewBox="{_num(x0)} {_num(-y1)} {_num(w)} {_num(h)}" '
        f'width="{_num(800)}" height="{_num(800 * h / w)}">',
        f'<title>{escape(f"tiling s={format_rational(s)}")}</title>',
        f'<g transform="scale(1,-1)" stroke="#000000" stroke-width="{_num(stroke_width)}">',
    ]
    for tile in tiling.tiles:
        if color_by == "shape":
            fill = SHAPE_COLORS[tile.shape.value]
        else:
            fill = PERIOD_COLORS[tile.period % len(PERIOD_COLORS)]
        pts = " ".join(f"{_num(x)},{_num(y)}" for x, y in tile.polygon.vertices)
        out.append(f'<polygon points="{pts}" fill="{fill}" data-period="{tile.period}"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- commands

def cmd_tiling(args) -> int:
    from .tiling import coverage_stats, tiling_for, tiling_to_json

    s = _rational(args.s)
    if s <= 0:
        raise UsageError("s must be positive")
    if args.grid is not None and args.grid < 0:
        raise UsageError("--grid must be non-negative")
    t = tiling_for(s, seed_grid=args.grid or 0)
    doc = tiling_to_json(t)
    doc["tile_count"] = len(t.tiles)
    doc["uncovered_area"] = format_rational(t.uncovered_area())
    try:
        lam, left, bottom = coverage_stats(t)
        doc["coverage"] = {"left_region": format_rational(lam), "left_edge": format_rational(left),
                           "bottom_edge": format_rational(bottom)}
    except (ValueError, TypeError):
        doc["coverage"] = None
    if args.json:
        _emit(doc, args.json)
    if args.svg:
        Path(args.svg).write_text(render_svg(t, color_by=args.color))
    periods = sorted({tile.period for tile in t.tiles})
    print(f"s={format_rational(s)} tiles={len(t.tiles)} complete={t.complete} "
          f"covered={format_rational(t.covered_area)} of {format_rational(4 * s)} periods={periods}",
          file=sys.stderr if not args.json else sys.stdout)
    if not args.json and not args.svg:
        _emit(doc, None)
    return EXIT_OK if t.complete else EXIT_FAIL


def cmd_orbit(args) -> int:
    from .pet import build_system, orbit, orbit_to_json, OrbitStatus

    s = _rational(args.s)
    if s <= 0:
        raise UsageError("s must be positive")
    parts = args.point.split(",")
    if len(parts) != 2:
        raise UsageError("--point expects x,y")
    p = (_rational(parts[0]), _rational(parts[1]))
    sys_ = build_system(s)
    if not sys_.F1.contains(p):
        raise UsageError("point lies outside X")
    if args.max_steps < 1:
        raise UsageError("--max-steps must be at least 1")
    o = orbit(sys_, p, args.max_steps)
    _emit(orbit_to_json(o), args.json)
    return EXIT_FAIL if o.status is OrbitStatus.HIT_BOUNDARY else EXIT_OK


def renorm_report(s: Fraction, depth: int) -> dict:
    from .renorm import continued_fraction, oddly_even, renorm_trace

    trace = renorm_trace(s, depth)
    last = trace[-1][1]
    if last == 0:
        terminal = "zero"
    elif last == Fraction(1, 2):
        terminal = "half"
    else:
        terminal = None
    stages = []
    for _, v in trace:
        stages.append("triangle" if v == 0 else "square" if v <= Fraction(1, 2) else "octagon")
    cf = continued_fraction(s)
    return {
        "s": format_rational(s),
        "trace": [[n, format_rational(v)] for n, v in trace],
        "stages": stages,
        "terminal": terminal,
        "continued_fraction": list(cf.terms),
        "oddly_even": oddly_even(cf),
    }


def cmd_renorm(args) -> int:
    s = _rational(args.s)
    if not 0 < s < 1:
        raise UsageError("s must lie in (0, 1)")
    if args.depth < 0:
        raise UsageError("--depth must be non-negative")
    _emit(renorm_report(s, args.depth), args.json)
    return EXIT_OK


VERIFY_TARGETS = ("partition",) + tuple(f"calc{i}" for i in range(1, 9)) + ("all",)


def cmd_verify(args) -> int:
    from . import bundle, calculations

    target = args.target
    if target not in VERIFY_TARGETS:
        raise UsageError(f"unknown target {target!r}")
    if args.fixtures is not None and not Path(args.fixtures, "partition.json").is_file():
        raise UsageError(f"no partition.json under {args.fixtures}")
    system = bundle.load_fixtures(args.fixtures)
    names = VERIFY_TARGETS[:-1] if target == "all" else (target,)
    reports = []
    for name in names:
        if name == "partition":
            rep = bundle.verify_partition(system)
            doc = {"calc": "partition", **rep.to_json()}
        else:
            doc = calculations.run(name, system).to_json()
        reports.append(doc)
        mark = "PASS" if doc["passed"] else "FAIL"
        print(f"{mark} {name}", file=sys.stderr)
        for c in doc["checks"]:
            if not c["passed"]:
                print(f"  failing check: {c['name']}", file=sys.stderr)
    ok = all(r["passed"] for r in reports)
    out = reports[0] if len(reports) == 1 else {"passed": ok, "reports": reports}
    _emit(out, args.json)
    return EXIT_OK if ok else EXIT_FAIL


def _interval(text: str) -> tuple[Fraction, Fraction]:
    parts = text.strip().strip("[]()").split(",")
    if len(parts) != 2:
        raise UsageError("interval must look like [p/q,r/t]")
    a, b = (_rational(p.strip()) for p in parts)
    if not (Fraction(1, 4) <= a < b <= 2):
        raise UsageError("interval must satisfy 1/4 <= a < b <= 2")
    return a, b


def cmd_derive_partition(args) -> int:
    from . import bundle

    a, b = _interval(args.interval)
    grid = args.grid if args.grid is not None else 20
    if grid < 1:
        raise UsageError("--grid must be positive")
    dp = bundle.derive_partition((a, b), grid_density=(grid, max(1, grid // 4)))
    system = bundle.load_fixtures()
    shipped = [p for p in system.pieces if p.polytope.z_range()[0] >= a * bundle.SCALE
               and p.polytope.z_range()[1] <= b * bundle.SCALE]
    match = bundle.match_pieces(dp.pieces, shipped)
    doc = {
        "interval": [format_rational(a), format_rational(b)],
        "piece_count": len(dp.pieces),
        "volume_fill": dp.volume_ok,
        "samples": dp.samples,
        "pieces": [
            {"vector": list(p.vector.as_tuple()),
             "vertices": sorted([[format_rational(c) for c in v] for v in p.polytope.vertices])}
            for p in dp.pieces
        ],
        "diff": {
            "matched": sorted(match["matched"]),
            "unmatched_derived": [list(p.vector.as_tuple()) for p in match["unmatched_derived"]],
            "missing_fixtures": match["missing_fixtures"],
        },
    }
    if (a, b) == (Fraction(1, 2), Fraction(1)):
        doc["printed_beta_diff"] = bundle.printed_beta_diff(dp.pieces)
    _emit(doc, args.json)
    print(f"interval=[{format_rational(a)},{format_rational(b)}] pieces={len(dp.pieces)} "
          f"volume_fill={dp.volume_ok} matched={len(match['matched'])} "
          f"unmatched={len(match['unmatched_derived'])}", file=sys.stderr)
    return EXIT_OK if dp.volume_ok else EXIT_FAIL


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dlpet", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("tiling", help="compute the periodic tiling at rational s")
    t.add_argument("--s", required=True)
    t.add_argument("--grid", type=int, default=None, help="seed grid size")
    t.add_argument("--svg")
    t.add_argument("--json")
    t.add_argument("--color", choices=("period", "shape"), default="period")
    t.set_defaults(func=cmd_tiling)

    o = sub.add_parser("orbit", help="trace the orbit of a point")
    o.add_argument("--s", required=True)
    o.add_argument("--point", required=True, help="x,y as rationals")
    o.add_argument("--max-steps", type=int, default=10000)
    o.add_argument("--json")
    o.set_defaults(func=cmd_orbit)

    r = sub.add_parser("renorm", help="renormalization trace of s")
    r.add_argument("--s", required=True)
    r.add_argument("--depth", type=int, default=20)
    r.add_argument("--json")
    r.set_defaults(func=cmd_renorm)

    v = sub.add_parser("verify", help="run the partition check or a calculation")
    v.add_argument("target", help="partition, calc1..calc8 or all")
    v.add_argument("--fixtures", help="directory holding partition.json etc.")
    v.add_argument("--json")
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("derive-partition", help="rebuild the maximal domains over an interval")
    d.add_argument("interval", help="e.g. [1/4,1/2]")
    d.add_argument("--grid", type=int, default=None, help="coarsest grid step (420-scaled units)")
    d.add_argument("--json")
    d.set_defaults(func=cmd_derive_partition)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
