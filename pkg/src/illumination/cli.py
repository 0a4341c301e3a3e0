"""Command-line front end.

Every subcommand prints one JSON document (sorted keys, shortest round-trip
floats, exact rationals as ``"num/den"`` strings) unless ``--text`` is given.
Exit codes: 0 success, 1 usage or parse error or missing certificate,
2 evaluation or domain error.  Errors are reported as a single line on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from . import __version__
from .convexity import NoCertificateError, analyze, require_verdict
from .engine import (
    DEFAULT_SAMPLES,
    IlluminationResult,
    OnGraphError,
    QueryPoint,
    illumination_index,
)
from .exactpoly import IsolatingInterval, Line, as_rational, multiple_tangent_lines
from .expr import EvaluationError, ParseError
from .function import Function
from .thetalines import VerticalLine, count_normals, count_theta_lines, explore_theta

SCHEMA_VERSION = "1"
CSV_HEADER = ("x", "y", "index", "method", "flags")
THREADS_ENV = "ILLUMINATION_THREADS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- serialization ----------------------------------------------------------


def _plain(obj):
    """Convert to JSON-ready values; exact rationals become strings."""
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(obj, (bool, str)) or obj is None:
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(doc) -> str:
    return json.dumps(_plain(doc), sort_keys=True, indent=2, allow_nan=False)


def _line_doc(line):
    if isinstance(line, VerticalLine):
        return {"vertical": True, "x": line.x}
    return {"slope": line.slope, "intercept": line.intercept, "exact": line.exact}


def _abscissa_doc(a):
    if isinstance(a, IsolatingInterval):
        if a.is_exact:
            return {"value": a.lo, "approx": float(a.lo)}
        return {"interval": [a.lo, a.hi], "approx": float(a)}
    return {"approx": float(a)}


def result_doc(res: IlluminationResult, with_lines: bool) -> dict:
    doc = {
        "index": res.index,
        "method": res.method,
        "rule": res.verdict,
        "diagnostics": list(res.diagnostics),
    }
    if with_lines:
        doc["lines"] = [
            {
                "line": _line_doc(g[0].line),
                "tangencies": [
                    dict(_abscissa_doc(r.abscissa), side=r.side, multiplicity=r.multiplicity) for r in g
                ],
            }
            for g in res.groups
        ]
    return doc


# -- argument helpers -------------------------------------------------------


def parse_point(text: str) -> QueryPoint:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"point must be S,T, got {text!r}")
    try:
        return QueryPoint(as_rational(parts[0].strip()), as_rational(parts[1].strip()))
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad point {text!r}: {exc}") from None


def _numbers(text: str, n: int, what: str) -> list[Fraction]:
    parts = text.split(",")
    if len(parts) != n:
        raise UsageError(f"{what} needs {n} comma-separated numbers, got {text!r}")
    try:
        return [as_rational(p.strip()) for p in parts]
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad {what} {text!r}: {exc}") from None


def parse_window(text: Optional[str], s) -> Optional[tuple[float, float]]:
    """``W`` (half-width around s) or ``LO,HI``."""
    if text is None:
        return None
    if "," in text:
        lo, hi = (float(v) for v in _numbers(text, 2, "window"))
    else:
        (w,) = (float(v) for v in _numbers(text, 1, "window"))
        lo, hi = float(s) - w, float(s) + w
    if not lo < hi:
        raise UsageError("window must be non-empty")
    return lo, hi


def _function(args) -> Function:
    return Function(args.fn)


def _query_doc(args, fn: Function, point: Optional[QueryPoint], **extra) -> dict:
    doc = {"function": fn.text}
    if point is not None:
        doc["point"] = [as_rational(point.s), as_rational(point.t)]
    doc.update(extra)
    return doc


# -- region grids -----------------------------------------------------------


@dataclass
class RegionCell:
    x: Fraction
    y: Fraction
    index: Optional[int]
    method: str
    flags: tuple


@dataclass
class RegionGrid:
    rect: tuple
    res: tuple
    cells: list  # row-major from (xmin, ymin): y outer, x inner

    def rows(self):
        for c in self.cells:
            yield (
                format(float(c.x), ".17g"),
                format(float(c.y), ".17g"),
                "" if c.index is None else str(c.index),
                c.method,
                ";".join(c.flags),
            )

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        w.writerows(self.rows())
        return buf.getvalue()


def _cell(fn: Function, x: Fraction, y: Fraction, method: str, samples: int) -> RegionCell:
    try:
        res = illumination_index(fn, QueryPoint(x, y), method=method, samples=samples)
    except OnGraphError:
        return RegionCell(x, y, None, "", ("on-graph",))
    except NoCertificateError:
        return RegionCell(x, y, None, "", ("no-certificate",))
    except (EvaluationError, ArithmeticError, ValueError) as exc:
        return RegionCell(x, y, None, "", (f"error:{type(exc).__name__}",))
    flags = []
    for d in res.diagnostics:
        tag = d.split(":", 1)[0]
        if tag in ("boundary", "window-truncation") and tag not in flags:
            flags.append(tag)
    if any(d.startswith("numeric scan found") for d in res.diagnostics):
        flags.append("numeric-disagrees")
    return RegionCell(x, y, res.index, res.method, tuple(flags))


def region_grid(f, rect, res, method: str = "auto", samples: int = DEFAULT_SAMPLES, jobs: int = 1) -> RegionGrid:
    """Index at the centre of each cell of an ``nx`` by ``ny`` grid over ``rect``."""
    fn = f if isinstance(f, Function) else Function(f)
    xmin, xmax, ymin, ymax = (as_rational(v) for v in rect)
    nx, ny = (int(v) for v in res)
    if nx < 2 or ny < 2:
        raise ValueError("resolution must be at least 2x2")
    if not (xmin < xmax and ymin < ymax):
        raise ValueError("rectangle must be non-degenerate")
    hx, hy = (xmax - xmin) / nx, (ymax - ymin) / ny
    centres = [
        (xmin + (i + Fraction(1, 2)) * hx, ymin + (j + Fraction(1, 2)) * hy)
        for j in range(ny)
        for i in range(nx)
    ]
    work = lambda c: _cell(fn, c[0], c[1], method, samples)  # noqa: E731
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            cells = list(pool.map(work, centres))
    else:
        cells = [work(c) for c in centres]
    return RegionGrid((xmin, xmax, ymin, ymax), (nx, ny), cells)


# -- subcommands ------------------------------------------------------------


def _cmd_index(args, with_lines: bool):
    fn = _function(args)
    P = parse_point(args.point)
    window = parse_window(args.window, P.s)
    res = illumination_index(fn, P, args.method, window, args.samples, args.assume_convex)
    query = _query_doc(args, fn, P, method=args.method, window=window, samples=args.samples)
    return query, result_doc(res, with_lines)


def _cmd_classify(args):
    fn = _function(args)
    P = parse_point(args.point)
    if fn.polynomial is None and fn.value(float(P.s)) == float(P.t):
        raise OnGraphError("point lies on the graph")
    verdict = require_verdict(fn, P.s, P.t, args.assume_convex)
    an = analyze(fn, args.assume_convex)
    asym = an.asymptotes
    side = lambda a: _line_doc(a) if isinstance(a, Line) else a  # noqa: E731
    result = {
        "index": verdict.index,
        "rule": verdict.rule,
        "boundary": verdict.boundary,
        "kind": an.kind,
        "convexity": an.convexity.reason,
        "asymptotes": None if asym is None else {"left": side(asym.left), "right": side(asym.right)},
    }
    return _query_doc(args, fn, P), result


def _incidence_docs(records):
    return [{"abscissa": r.abscissa, "line": _line_doc(r.line), "kind": r.kind} for r in records]


def _cmd_normals(args):
    fn = _function(args)
    P = parse_point(args.point)
    window = parse_window(args.window, P.s)
    out = count_normals(fn, P, window, args.samples)
    result = {"count": out.count, "normals": _incidence_docs(out.records), "diagnostics": out.diagnostics}
    return _query_doc(args, fn, P, window=window, samples=args.samples), result


def _cmd_theta(args):
    fn = _function(args)
    P = parse_point(args.point)
    window = parse_window(args.window, P.s)
    if args.explore:
        if args.steps < 2:
            raise UsageError("--steps must be at least 2")
        thetas = [float(v) for v in np.linspace(0.0, math.pi / 2, args.steps)]
        found = explore_theta(fn, [P], thetas, window, args.samples)
        result = {"angles": thetas, "candidates": found}
        return _query_doc(args, fn, P, window=window, samples=args.samples, explore=True), result
    if args.angle is None:
        raise UsageError("theta needs --angle or --explore")
    theta = float(args.angle)
    if not 0 <= theta <= math.pi / 2:
        raise UsageError("--angle must lie in [0, pi/2]")
    out = count_theta_lines(fn, P, theta, window, args.samples)
    result = {"count": out.count, "lines": _incidence_docs(out.records), "diagnostics": out.diagnostics}
    return _query_doc(args, fn, P, angle=theta, window=window, samples=args.samples), result


def _cmd_multitangents(args):
    fn = _function(args)
    if fn.polynomial is None:
        raise UsageError("multitangents needs a polynomial")
    records = multiple_tangent_lines(fn.polynomial)
    result = {
        "lines": [
            {"line": _line_doc(r.line), "abscissae": [float(a) for a in r.abscissae]} for r in records
        ]
    }
    return _query_doc(args, fn, None), result


def _cmd_region(args):
    fn = _function(args)
    rect = _numbers(args.rect, 4, "rect")
    res = [int(v) for v in _numbers(args.res, 2, "res")]
    if any(v < 2 for v in res):
        raise UsageError("--res needs NX,NY >= 2")
    if not (rect[0] < rect[1] and rect[2] < rect[3]):
        raise UsageError("--rect must be non-degenerate")
    jobs = args.jobs or int(os.environ.get(THREADS_ENV, "1") or 1)
    grid = region_grid(fn, rect, res, args.method, args.samples, jobs)
    text = grid.to_csv()
    if args.out == "-":
        sys.stdout.write(text)
        return None, None
    with open(args.out, "w", newline="") as fh:
        fh.write(text)
    counts: dict = {}
    for c in grid.cells:
        key = "on-graph" if c.index is None else str(c.index)
        counts[key] = counts.get(key, 0) + 1
    result = {"out": args.out, "cells": len(grid.cells), "counts": counts}
    return _query_doc(args, fn, None, rect=rect, res=res, method=args.method), result


# -- entry point ------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="illumination", description="Count tangent, normal and theta lines through a point.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, point=True, window=True):
        sp.add_argument("--fn", required=True, help="formula in x, e.g. 'x*atan(x)'")
        if point:
            sp.add_argument("--point", required=True, help="S,T; decimals or rationals like 1/2")
        if window:
            sp.add_argument("--window", help="half-width W around s, or LO,HI")
        sp.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
        sp.add_argument("--json", action="store_true", help="JSON output (the default)")
        sp.add_argument("--text", action="store_true", help="short plain-text output")
        sp.add_argument("--timing", action="store_true", help="include wall time in the output")

    for name, help_ in (("index", "illumination index"), ("tangents", "index and the tangent lines")):
        sp = sub.add_parser(name, help=help_)
        common(sp)
        sp.add_argument("--method", choices=("auto", "exact", "theorem", "numeric"), default="auto")
        sp.add_argument("--assume-convex", action="store_true")
    sp = sub.add_parser("classify", help="region verdict for certified convex functions")
    common(sp, window=False)
    sp.add_argument("--assume-convex", action="store_true")
    sp = sub.add_parser("normals", help="normal lines through the point")
    common(sp)
    sp = sub.add_parser("theta", help="lines meeting the graph at a given angle")
    common(sp)
    sp.add_argument("--angle", help="radians in [0, pi/2]")
    sp.add_argument("--explore", action="store_true", help="sweep angles and report zero counts")
    sp.add_argument("--steps", type=int, default=17)
    sp = sub.add_parser("region", help="CSV grid of indices over a rectangle")
    common(sp, point=False, window=False)
    sp.add_argument("--rect", required=True, help="XMIN,XMAX,YMIN,YMAX")
    sp.add_argument("--res", required=True, help="NX,NY")
    sp.add_argument("--out", required=True, help="CSV path, or - for stdout")
    sp.add_argument("--method", choices=("auto", "exact", "theorem", "numeric"), default="auto")
    sp.add_argument("--jobs", type=int, default=0, help=f"worker threads (or set {THREADS_ENV})")
    sp = sub.add_parser("multitangents", help="lines tangent at two or more points")
    common(sp, point=False, window=False)
    return p


_COMMANDS = {
    "index": lambda a: _cmd_index(a, with_lines=False),
    "tangents": lambda a: _cmd_index(a, with_lines=True),
    "classify": _cmd_classify,
    "normals": _cmd_normals,
    "theta": _cmd_theta,
    "region": _cmd_region,
    "multitangents": _cmd_multitangents,
}


def _fail(kind: str, exc, code: int) -> int:
    msg = " ".join(str(exc).split()) or type(exc).__name__
    print(f"error: {kind}: {msg}", file=sys.stderr)
    return code


def _text(command: str, result: dict) -> str:
    if "index" in result:
        extra = f" ({result['rule']})" if result.get("rule") else ""
        return f"{result['index']} {result.get('method', 'convex-theorem')}{extra}"
    if "count" in result:
        return str(result["count"])
    if "lines" in result:
        return str(len(result["lines"]))
    return dumps(result)


_VALUE_OPTIONS = ("--point", "--rect", "--window", "--res", "--angle")


def _join_values(argv):
    # "--rect -2,2,-1,3" would read the value as an option; glue it on
    out = []
    it = iter(argv)
    for a in it:
        if a in _VALUE_OPTIONS:
            nxt = next(it, None)
            out.append(a if nxt is None else f"{a}={nxt}")
        else:
            out.append(a)
    return out


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(_join_values(argv))
    except UsageError as exc:
        return _fail("usage", exc, 1)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    start = time.perf_counter()
    try:
        query, result = _COMMANDS[args.command](args)
    except UsageError as exc:
        return _fail("usage", exc, 1)
    except ParseError as exc:
        return _fail("parse", exc, 1)
    except NoCertificateError as exc:
        return _fail("no-certificate", exc, 1)
    except OnGraphError as exc:
        return _fail("on-graph", exc, 2)
    except (EvaluationError, ArithmeticError) as exc:
        return _fail("evaluation", exc, 2)
    except ValueError as exc:
        return _fail("domain", exc, 2)
    if result is None:
        return 0
    if args.text:
        print(_text(args.command, result))
        return 0
    doc = {"version": SCHEMA_VERSION, "command": args.command, "query": query, "result": result}
    if args.timing:
        doc["wall_time"] = time.perf_counter() - start
    print(dumps(doc))
    return 0


def main():
    sys.exit(run())
