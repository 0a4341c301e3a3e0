"""Illumination index: how many distinct tangent lines of ``f`` pass through ``P``.

The tangent at ``c`` passes through ``P = (s, t)`` exactly when
``g_s(c) = f(c) + (s - c) f'(c)`` equals ``t``, so tangencies are the roots of
``g_s - t``.  Three routes produce them:

* ``exact-poly``: for polynomials ``g_s - t`` is itself a polynomial and its
  roots are isolated with Sturm sequences.
* ``convex-theorem``: for certified convex functions with known behaviour at
  infinity the count follows from the region ``P`` lies in.
* ``numeric-scan``: bracket sign changes of ``g_s - t`` on a sample grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np
from scipy.optimize import brentq

from . import convexity
from .exactpoly import (
    IsolatingInterval,
    Line,
    Polynomial,
    as_rational,
    build_gs_poly,
    cauchy_bound,
    isolate_real_roots,
    multiple_tangent_lines,
    narrow,
    tangent_line,
)
from .function import Function, as_function

EXACT = "exact-poly"
THEOREM = "convex-theorem"
NUMERIC = "numeric-scan"

DEFAULT_HALF_WIDTH = 1000.0
DEFAULT_SAMPLES = 4096
MAX_DOUBLINGS = 4
LINE_RTOL = 1e-9
ON_GRAPH_RTOL = 1e-9
TAIL_TOL = 1e-6
TOUCH_RTOL = 1e-10
_FINE = Fraction(1, 2**48)
_TIE = Fraction(1, 10**40)


class OnGraphError(ValueError):
    """The query point lies on the graph, where the index is undefined."""


@dataclass(frozen=True)
class QueryPoint:
    s: Union[Fraction, float]
    t: Union[Fraction, float]

    def __post_init__(self):
        for v in (self.s, self.t):
            if isinstance(v, float) and not math.isfinite(v):
                raise ValueError("query point must be finite")

    @classmethod
    def of(cls, p) -> "QueryPoint":
        if isinstance(p, QueryPoint):
            return p
        if isinstance(p, str):
            parts = p.split(",")
            if len(parts) != 2:
                raise ValueError(f"expected 'S,T', got {p!r}")
            return cls(as_rational(parts[0]), as_rational(parts[1]))
        s, t = p
        conv = lambda v: v if isinstance(v, float) else as_rational(v)  # noqa: E731
        return cls(conv(s), conv(t))

    @property
    def exact(self) -> tuple[Fraction, Fraction]:
        return as_rational(self.s), as_rational(self.t)


@dataclass(frozen=True)
class TangencyRecord:
    abscissa: Union[IsolatingInterval, float]
    line: Line
    side: str
    multiplicity: int = 1

    @property
    def c(self) -> float:
        return float(self.abscissa)


@dataclass(frozen=True)
class IlluminationResult:
    index: int
    groups: tuple
    method: str
    diagnostics: tuple = ()
    verdict: Optional[str] = None

    @property
    def tangencies(self) -> list[TangencyRecord]:
        return [r for g in self.groups for r in g]

    @property
    def lines(self) -> list[Line]:
        return [g[0].line for g in self.groups]


def gs_eval(f, s: float, c: float) -> float:
    """Value at ``x = s`` of the tangent line of ``f`` at ``c``."""
    return as_function(f).gs(float(s), float(c))


def point_on_graph(f, P) -> bool:
    fn = as_function(f)
    P = QueryPoint.of(P)
    if fn.polynomial is not None:
        s, t = P.exact
        return fn.polynomial(s) == t
    fs = fn.value(float(P.s))
    return abs(float(P.t) - fs) <= ON_GRAPH_RTOL * (1 + abs(fs))


def _side(iv_lo, iv_hi, s) -> str:
    if iv_hi < s:
        return "left"
    if iv_lo > s:
        return "right"
    return "at"


# -- exact path -------------------------------------------------------------


def tangencies_exact(f, P) -> list[TangencyRecord]:
    """Tangency records from the real roots of the tangent-value polynomial."""
    fp = f if isinstance(f, Polynomial) else as_function(f).polynomial
    if fp is None:
        raise ValueError("exact path needs a polynomial")
    s, t = QueryPoint.of(P).exact
    if fp(s) == t:
        raise OnGraphError(f"({s}, {t}) lies on the graph")
    h = build_gs_poly(fp, s, t)
    out = []
    for iv in isolate_real_roots(h):
        if iv.is_exact:
            line = tangent_line(fp, iv.lo)
        else:
            while iv.lo < s < iv.hi:
                iv = narrow(h, iv, iv.width / 2)
            approx = narrow(h, iv, _FINE * max(1, abs(iv.lo), abs(iv.hi))).midpoint
            ln = tangent_line(fp, approx)
            line = Line(float(ln.slope), float(ln.intercept), exact=False)
        out.append(TangencyRecord(iv, line, _side(iv.lo, iv.hi, s), iv.multiplicity))
    return out


def _slope_estimate(fp: Polynomial, iv: IsolatingInterval, h: Optional[Polynomial]):
    """``(x, slope, bound)`` with ``|f'(root) - slope| <= bound``."""
    d1 = fp.derivative()
    if iv.is_exact:
        return iv.lo, d1(iv.lo), Fraction(0)
    fine = narrow(h, iv, _TIE) if h is not None else iv
    x = fine.midpoint
    d2 = fp.derivative(2)
    radius = abs(x) + 1
    m2 = sum(abs(c) * radius**k for k, c in enumerate(d2.coeffs))
    return x, d1(x), m2 * fine.width / 2


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, i):
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i, j):
        self.parent[self.find(j)] = self.find(i)

    def groups(self, items):
        out: dict[int, list] = {}
        for i, item in enumerate(items):
            out.setdefault(self.find(i), []).append(item)
        return sorted(out.values(), key=lambda g: g[0].c)


def _same_bitangent(fp: Polynomial, x1: Fraction, x2: Fraction) -> bool:
    for rec in multiple_tangent_lines(fp):
        hits = [any(abs(float(a) - float(x)) <= 1e-12 * (1 + abs(float(x))) for a in rec.abscissae) for x in (x1, x2)]
        if all(hits):
            return True
    return False


def dedup_lines(records: Sequence[TangencyRecord], f=None, P=None) -> list[list[TangencyRecord]]:
    """Group tangencies whose tangent lines coincide.

    Two tangents through the same point coincide exactly when their slopes
    agree.  Exact records compare slopes exactly; irrational near-ties are
    settled against the multiple tangent lines of ``f``.  Numeric records use
    a relative tolerance of 1e-9 on slope and intercept.
    """
    records = list(records)
    if not records:
        return []
    uf = _UnionFind(len(records))
    exact_mode = isinstance(records[0].abscissa, IsolatingInterval)
    if exact_mode:
        fp = f if isinstance(f, Polynomial) else as_function(f).polynomial
        h = build_gs_poly(fp, *QueryPoint.of(P).exact) if P is not None else None
        est: dict = {}

        def estimate(k):
            if k not in est:
                est[k] = _slope_estimate(fp, records[k].abscissa, h)
            return est[k]

        for i in range(len(records)):
            for j in range(i + 1, len(records)):
                # float slopes are accurate to ~1e-15, so a clear gap settles it
                mi_f, mj_f = float(records[i].line.slope), float(records[j].line.slope)
                if abs(mi_f - mj_f) > 1e-9 * (1 + abs(mi_f) + abs(mj_f)):
                    continue
                (xi, mi, bi), (xj, mj, bj) = estimate(i), estimate(j)
                if bi == 0 and bj == 0:
                    same = mi == mj
                else:
                    same = abs(mi - mj) <= bi + bj and _same_bitangent(fp, xi, xj)
                if same:
                    uf.union(i, j)
    else:
        for i in range(len(records)):
            for j in range(i + 1, len(records)):
                if records[i].line.close_to(records[j].line, LINE_RTOL):
                    uf.union(i, j)
    return uf.groups(records)


# -- numeric path -----------------------------------------------------------


@dataclass
class _SampleTable:
    c: np.ndarray
    f: np.ndarray
    df: np.ndarray
    critical: np.ndarray  # True where c is an inflection abscissa
    notes: list = field(default_factory=list)


def _sample_grid(s: float, lo: float, hi: float, samples: int) -> np.ndarray:
    if lo < s < hi:
        n_left = max(2, int(round(samples * (s - lo) / (hi - lo))))
        n_right = max(2, samples - n_left + 1)
        left = np.linspace(lo, s, n_left)
        right = np.linspace(s, hi, n_right)
        return np.concatenate([left, right[1:]])
    return np.linspace(lo, hi, samples)


def _sign_change_roots(func, xs: np.ndarray, vs: np.ndarray) -> list[float]:
    # exact zeros are skipped so that underflowed runs (e.g. exp far left)
    # do not register; a sign change across such a run is still bracketed
    ok = np.isfinite(vs) & (vs != 0)
    xs, vs = xs[ok], vs[ok]
    idx = np.nonzero(np.sign(vs[:-1]) != np.sign(vs[1:]))[0]
    return [_refine(func, xs[i], xs[i + 1]) for i in idx]


def sign_structure(v: np.ndarray):
    """Locate roots in sampled values.

    Returns ``(zeros, brackets, flats)``: indices of isolated exact zeros,
    indices ``i`` with a strict sign change between ``i`` and ``i + 1``, and
    runs ``(i, j, crossing)`` of two or more consecutive zeros, typically
    underflow, where ``crossing`` says the signs on either side differ.
    """
    sv = np.sign(v).astype(np.int8)
    z = sv == 0
    brackets = np.nonzero(sv[:-1] * sv[1:] < 0)[0].tolist()
    zeros, flats = [], []
    idx = np.nonzero(z)[0]
    k = 0
    while k < idx.size:
        i = j = int(idx[k])
        while k + 1 < idx.size and idx[k + 1] == j + 1:
            k += 1
            j += 1
        k += 1
        if i == j:
            zeros.append(i)
            continue
        left = sv[i - 1] if i > 0 else 0
        right = sv[j + 1] if j + 1 < sv.size else 0
        flats.append((i, j, bool(left * right < 0)))
    return zeros, brackets, flats


def _refine(func, a: float, b: float) -> float:
    scale = max(1.0, abs(a), abs(b))
    return brentq(func, a, b, xtol=1e-13 * scale, rtol=4 * np.finfo(float).eps, maxiter=200)


def _table(fn: Function, s: float, lo: float, hi: float, samples: int) -> _SampleTable:
    key = ("table", s, lo, hi, samples)
    tab = fn.cache.get(key)
    if tab is not None:
        return tab
    grid = _sample_grid(s, lo, hi, samples)
    f = fn.values(grid)
    df = fn.slopes(grid)
    d2 = fn.curvatures(grid)
    infl = [d for d in _sign_change_roots(fn.curvature, grid, d2) if d != s]
    notes = []
    bad = ~(np.isfinite(f) & np.isfinite(df))
    if bad.any():
        notes.append(f"overflow: {int(bad.sum())} of {grid.size} samples non-finite and skipped")
    if infl:
        infl_arr = np.array(infl)
        c = np.concatenate([grid, infl_arr])
        f = np.concatenate([f, fn.values(infl_arr)])
        df = np.concatenate([df, fn.slopes(infl_arr)])
        crit = np.concatenate([np.zeros(grid.size, bool), np.ones(infl_arr.size, bool)])
        order = np.argsort(c, kind="stable")
        c, f, df, crit = c[order], f[order], df[order], crit[order]
    else:
        c, crit = grid, np.zeros(grid.size, bool)
    ok = np.isfinite(f) & np.isfinite(df)
    tab = _SampleTable(c[ok], f[ok], df[ok], crit[ok], notes)
    if len(fn.cache) > 512:
        for k in [k for k in fn.cache if k[0] == "table"][:256]:
            del fn.cache[k]
    fn.cache[key] = tab
    return tab


def default_window(f, P) -> tuple[float, float]:
    """``[s - 1000, s + 1000]``, or a Cauchy-bound window for polynomials."""
    fn = as_function(f)
    P = QueryPoint.of(P)
    s = float(P.s)
    if fn.polynomial is not None and fn.polynomial.degree >= 2:
        b = float(cauchy_bound(build_gs_poly(fn.polynomial, *P.exact)))
        return min(-b, s) - 1.0, max(b, s) + 1.0
    return s - DEFAULT_HALF_WIDTH, s + DEFAULT_HALF_WIDTH


def tangencies_numeric(f, P, window=None, samples: int = DEFAULT_SAMPLES):
    """Bracket and refine the roots of ``g_s(c) - t`` inside ``window``.

    Returns ``(records, diagnostics)``.  The sample grid always contains
    ``s`` and every inflection abscissa found, so each root sits in a
    monotone piece of ``g_s`` and a sign change brackets it.  Roots where
    ``g_s - t`` only touches zero are recovered at inflection abscissae.
    """
    fn = as_function(f)
    P = QueryPoint.of(P)
    s, t = float(P.s), float(P.t)
    lo, hi = window if window is not None else default_window(fn, P)
    lo, hi = float(lo), float(hi)
    if not lo < hi:
        raise ValueError("window must satisfy lo < hi")
    if samples < 64:
        raise ValueError("need at least 64 samples")
    tab = _table(fn, s, lo, hi, samples)
    diagnostics = list(tab.notes)
    with np.errstate(over="ignore", invalid="ignore"):
        c, v = tab.c, tab.f + (s - tab.c) * tab.df - t
    if c.size < 2:
        return [], diagnostics + ["window-truncation: no finite samples in window"]

    def g(x):
        return fn.value(x) + (s - x) * fn.slope(x) - t

    zeros, brackets, flats = sign_structure(v)
    roots: list[tuple[float, int]] = [(float(c[i]), 1) for i in zeros]
    bracketed = set(brackets)
    for i in brackets:
        roots.append((_refine(g, c[i], c[i + 1]), 1))
    for i, j, crossing in flats:
        diagnostics.append(f"flat: g_s - t is numerically zero on [{c[i]:.6g}, {c[j]:.6g}]")
        if crossing:
            roots.append((float(0.5 * (c[i] + c[j])), 1))
    for j in np.nonzero(tab.critical)[0]:
        if v[j] == 0 or (j - 1) in bracketed or j in bracketed:
            continue
        scale = 1 + abs(t) + abs(tab.f[j]) + abs((s - c[j]) * tab.df[j])
        if abs(v[j]) <= TOUCH_RTOL * scale:
            roots.append((float(c[j]), 2))

    for end in (0, -1):
        if abs(v[end]) <= TAIL_TOL:
            diagnostics.append(
                f"window-truncation: |g_s - t| = {abs(v[end]):.3g} at window end c = {c[end]:.6g}"
            )

    roots.sort()
    merged: list[tuple[float, int]] = []
    gap = 1e-9 * (hi - lo)
    for x, mult in roots:
        if merged and x - merged[-1][0] <= gap:
            continue
        merged.append((x, mult))

    records = []
    for x, mult in merged:
        m = fn.slope(x)
        line = Line(m, fn.value(x) - x * m, exact=False)
        side = "left" if x < s else "right" if x > s else "at"
        records.append(TangencyRecord(x, line, side, mult))
    return records, diagnostics


def _numeric_scan(fn: Function, P: QueryPoint, window, samples: int, max_doublings: int = MAX_DOUBLINGS):
    lo, hi = window if window is not None else default_window(fn, P)
    s = float(P.s)
    records, diags = tangencies_numeric(fn, P, (lo, hi), samples)
    extra = []
    for _ in range(max_doublings):
        if not any(d.startswith("window-truncation") for d in diags):
            break
        lo, hi = s - 2 * (s - lo), s + 2 * (hi - s)
        extra.append(f"window doubled to [{lo:.6g}, {hi:.6g}]")
        records, diags = tangencies_numeric(fn, P, (lo, hi), samples)
    return records, extra + diags


# -- dispatch -----------------------------------------------------------------


def illumination_index(
    f,
    P,
    method: str = "auto",
    window=None,
    samples: int = DEFAULT_SAMPLES,
    assume_convex: bool = False,
) -> IlluminationResult:
    """Number of distinct tangent lines of ``f`` through ``P``.

    ``method`` is one of ``auto``, ``exact``, ``theorem``, ``numeric``.  The
    automatic order is exact, then theorem, then numeric.  Numeric results
    are a certified lower bound; diagnostics flag possible misses.
    """
    fn = as_function(f)
    P = QueryPoint.of(P)
    if method not in ("auto", "exact", "theorem", "numeric"):
        raise ValueError(f"unknown method {method!r}")
    if point_on_graph(fn, P):
        raise OnGraphError(f"({P.s}, {P.t}) lies on the graph of {fn.text}")

    poly = fn.polynomial
    if poly is not None and poly.degree <= 1:
        return IlluminationResult(
            0, (), EXACT, ("linear function: its only tangent line is its own graph",)
        )

    if method == "exact" or (method == "auto" and poly is not None):
        if poly is None:
            raise ValueError(f"exact path needs a polynomial, got {fn.text}")
        records = tangencies_exact(poly, P)
        groups = dedup_lines(records, poly, P)
        return IlluminationResult(len(groups), tuple(tuple(g) for g in groups), EXACT)

    verdict = None
    if method == "theorem":
        verdict = convexity.require_verdict(fn, P.s, P.t, assume_convex)
    elif method == "auto":
        verdict = convexity.theorem_verdict(fn, P.s, P.t, assume_convex)

    records, diags = _numeric_scan(fn, P, window, samples)
    groups = dedup_lines(records)
    groups_t = tuple(tuple(g) for g in groups)
    if verdict is None:
        return IlluminationResult(len(groups), groups_t, NUMERIC, tuple(diags))
    if verdict.boundary:
        diags.append("boundary: t lies within 1e-9 of an asymptote value")
    if len(groups) != verdict.index:
        diags.append(f"numeric scan found {len(groups)} lines; region verdict {verdict.index} used")
    return IlluminationResult(verdict.index, groups_t, THEOREM, tuple(diags), verdict.rule)
