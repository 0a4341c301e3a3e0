"""Normal lines and theta lines through a point.

A theta line through ``P`` meets the graph at ``(c, f(c))`` and makes the
angle ``theta`` with the tangent there.  ``theta = pi/2`` gives normal lines
and ``theta = 0`` gives tangent lines.  Counting is numeric only: residuals
are bracketed on a sample grid and refined with Brent's method.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .engine import (
    DEFAULT_SAMPLES,
    MAX_DOUBLINGS,
    TOUCH_RTOL,
    OnGraphError,
    QueryPoint,
    _sample_grid,
    _sign_change_roots,
    default_window,
    point_on_graph,
    sign_structure,
)
from .exactpoly import Line, Polynomial, as_rational, build_gs_poly, cauchy_bound
from .function import Function, as_function

ANGLE_TOL = 1e-6
NEAREST_TOL = 1e-6
_DIR_TOL = 1e-9


class WindowWarning(UserWarning):
    """A windowed search hit the window edge; the answer may lie outside."""


@dataclass(frozen=True)
class VerticalLine:
    x: float

    def approx(self):
        return (math.inf, self.x)


@dataclass(frozen=True)
class IncidenceRecord:
    abscissa: float
    line: Union[Line, VerticalLine]
    kind: str  # "normal" or "theta"
    angle: float  # direction of the line, in [0, pi)

    @property
    def c(self) -> float:
        return self.abscissa


class LineCount(NamedTuple):
    count: int
    records: list
    diagnostics: list


@dataclass(frozen=True)
class ThetaQuery:
    theta: float
    f: Function
    P: QueryPoint
    window: Optional[tuple] = None
    samples: int = DEFAULT_SAMPLES

    def __post_init__(self):
        if not 0 <= self.theta <= math.pi / 2:
            raise ValueError("theta must lie in [0, pi/2]")


def normal_residual(f, P, c: float) -> float:
    """``(c - s) + f'(c) (f(c) - t)``; zero when ``P`` lies on the normal at ``c``."""
    fn = as_function(f)
    P = QueryPoint.of(P)
    c = float(c)
    return (c - float(P.s)) + fn.slope(c) * (fn.value(c) - float(P.t))


def theta_residuals(f, P, theta: float, c: float) -> tuple[float, float]:
    """Both angle-branch residuals at ``c``, scaled by ``s - c`` to stay finite.

    With ``m1 = f'(c)`` and chord slope ``m2 = (t - f(c)) / (s - c)`` these
    equal ``(s - c)`` times ``tan(theta)(1 + m1 m2) -+ (m1 - m2)``.  At
    ``c = s`` they vanish exactly when the vertical chord makes the angle
    ``theta`` with the tangent.
    """
    fn = as_function(f)
    P = QueryPoint.of(P)
    c = float(c)
    if theta >= math.pi / 2:
        r = normal_residual(fn, P, c)
        return r, r
    dx = float(P.s) - c
    dy = float(P.t) - fn.value(c)
    m1 = fn.slope(c)
    k = math.tan(theta)
    a = k * (dx + m1 * dy)
    b = m1 * dx - dy
    return a - b, a + b


def _chord_angle(fn: Function, P: QueryPoint, c: float) -> float:
    """Acute angle between the chord ``P -> (c, f(c))`` and the tangent at ``c``."""
    dx = c - float(P.s)
    dy = fn.value(c) - float(P.t)
    m1 = fn.slope(c)
    cross = abs(dx * m1 - dy)
    dot = abs(dx + m1 * dy)
    return math.atan2(cross, dot)


def _line_through(fn: Function, P: QueryPoint, c: float):
    s, t = float(P.s), float(P.t)
    dx, dy = c - s, fn.value(c) - t
    angle = math.atan2(dy, dx) % math.pi
    if abs(dx) <= _DIR_TOL * abs(dy):
        return VerticalLine(s), angle
    m = dy / dx
    return Line(m, t - m * s), angle


def _same_direction(a: float, b: float) -> bool:
    d = abs(a - b) % math.pi
    return min(d, math.pi - d) <= _DIR_TOL


def _dedup(records: list[IncidenceRecord]) -> list[IncidenceRecord]:
    out: list[IncidenceRecord] = []
    for r in sorted(records, key=lambda r: r.abscissa):
        if not any(_same_direction(r.angle, o.angle) for o in out):
            out.append(r)
    return out


def _normal_window(fn: Function, P: QueryPoint) -> tuple[float, float]:
    s = float(P.s)
    if fn.polynomial is not None:
        es, et = P.exact
        p = fn.polynomial
        n = Polynomial.x() - Polynomial.constant(es) + p.derivative() * (p - Polynomial.constant(et))
        if n.degree >= 1:
            b = float(cauchy_bound(n))
            return min(-b, s) - 1.0, max(b, s) + 1.0
    return s - 1000.0, s + 1000.0


def _theta_window(fn: Function, P: QueryPoint, theta: float) -> tuple[float, float]:
    # both residuals equal -tan(theta) N -+ (g_s - t), with N the normal residual
    if fn.polynomial is None or fn.polynomial.degree < 2:
        return default_window(fn, P)
    es, et = P.exact
    p = fn.polynomial
    k = Polynomial.constant(as_rational(math.tan(theta)))
    n = Polynomial.x() - Polynomial.constant(es) + p.derivative() * (p - Polynomial.constant(et))
    g = build_gs_poly(p, es, et)
    b = max(float(cauchy_bound(r)) for r in (k * n + g, k * n - g) if r.degree >= 1)
    s = float(P.s)
    return min(-b, s) - 1.0, max(b, s) + 1.0


def _scan_grid(fn: Function, P: QueryPoint, window, samples: int) -> np.ndarray:
    """Window grid plus a dense patch around ``P`` and the inflection abscissae."""
    s = float(P.s)
    lo, hi = window
    grid = _sample_grid(s, lo, hi, samples)
    with np.errstate(all="ignore"):
        reach = abs(float(P.t) - fn.value(s)) + 1.0
    if not math.isfinite(reach):
        reach = 1.0
    near = np.linspace(max(lo, s - reach), min(hi, s + reach), samples)
    d2 = fn.curvatures(grid)
    infl = _sign_change_roots(fn.curvature, grid, d2)
    return np.unique(np.concatenate([grid, near, np.array(infl, dtype=float)]))


def _roots(func, xs: np.ndarray, vs: np.ndarray) -> list[float]:
    ok = np.isfinite(vs)
    xs, vs = xs[ok], vs[ok]
    zeros, brackets, flats = sign_structure(vs)
    found = [float(xs[i]) for i in zeros]
    for i in brackets:
        found.append(brentq(func, xs[i], xs[i + 1], xtol=1e-14 * max(1.0, abs(xs[i])), maxiter=200))
    found += [float(0.5 * (xs[i] + xs[j])) for i, j, crossing in flats if crossing]
    return found


def _check_off_graph(fn: Function, P: QueryPoint):
    if point_on_graph(fn, P):
        raise OnGraphError(f"({P.s}, {P.t}) lies on the graph of {fn.text}")


def nearest_point(f, P, window=None, samples: int = DEFAULT_SAMPLES) -> float:
    """Abscissa of a point of the graph closest to ``P`` within ``window``.

    Warns with :class:`WindowWarning` when the minimum sits at a window edge.
    """
    fn = as_function(f)
    P = QueryPoint.of(P)
    _check_off_graph(fn, P)
    s, t = float(P.s), float(P.t)
    lo, hi = window if window is not None else _normal_window(fn, P)
    xs = _scan_grid(fn, P, (lo, hi), samples)
    with np.errstate(all="ignore"):
        dist = (xs - s) ** 2 + (fn.values(xs) - t) ** 2
    dist = np.where(np.isfinite(dist), dist, np.inf)
    i = int(np.argmin(dist))
    if i == 0 or i == xs.size - 1:
        warnings.warn(f"nearest point found at window edge c = {xs[i]:.6g}", WindowWarning, stacklevel=2)
        return float(xs[i])
    a, b = float(xs[i - 1]), float(xs[i + 1])

    def resid(c):
        return (c - s) + fn.slope(c) * (fn.value(c) - t)

    ra, rb = resid(a), resid(b)
    if ra == 0:
        return a
    if rb == 0:
        return b
    if ra < 0 < rb:
        return brentq(resid, a, b, xtol=1e-15 * max(1.0, abs(a)), maxiter=200)
    res = minimize_scalar(
        lambda c: (c - s) ** 2 + (fn.value(c) - t) ** 2, bounds=(a, b), method="bounded",
        options={"xatol": 1e-12},
    )
    return float(res.x)


def count_normals(f, P, window=None, samples: int = DEFAULT_SAMPLES) -> LineCount:
    """Distinct normal lines of ``f`` through ``P``."""
    fn = as_function(f)
    P = QueryPoint.of(P)
    _check_off_graph(fn, P)
    s, t = float(P.s), float(P.t)
    window = window if window is not None else _normal_window(fn, P)
    xs = _scan_grid(fn, P, window, samples)
    with np.errstate(all="ignore"):
        vs = (xs - s) + fn.slopes(xs) * (fn.values(xs) - t)

    def resid(c):
        return (c - s) + fn.slope(c) * (fn.value(c) - t)

    diagnostics = []
    records = []
    for c in _roots(resid, xs, vs):
        line, angle = _line_through(fn, P, c)
        records.append(IncidenceRecord(c, line, "normal", angle))
    if not records:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", WindowWarning)
            c = nearest_point(fn, P, window, samples)
        diagnostics += [str(w.message) for w in caught]
        diagnostics.append("no sign change found; nearest point appended")
        line, angle = _line_through(fn, P, c)
        records.append(IncidenceRecord(c, line, "normal", angle))
    records = _dedup(records)
    return LineCount(len(records), records, diagnostics)


def count_theta_lines(f, P, theta: float, window=None, samples: int = DEFAULT_SAMPLES) -> LineCount:
    """Distinct lines through ``P`` meeting the graph at angle ``theta``.

    Both residual branches are scanned; a zero is kept only when the acute
    angle between chord and tangent really equals ``theta`` (within 1e-6),
    which discards zeros belonging to the supplementary angle.
    """
    q = ThetaQuery(float(theta), as_function(f), QueryPoint.of(P), window, samples)
    fn, P, theta = q.f, q.P, q.theta
    if theta == math.pi / 2:
        return count_normals(fn, P, window, samples)
    _check_off_graph(fn, P)
    s, t = float(P.s), float(P.t)
    window = window if window is not None else _theta_window(fn, P, theta)
    xs = _scan_grid(fn, P, window, samples)
    k = math.tan(theta)
    with np.errstate(all="ignore"):
        fv, dv = fn.values(xs), fn.slopes(xs)
        dx, dy = s - xs, t - fv
        a = k * (dx + dv * dy)
        b = dv * dx - dy
    diagnostics = []
    candidates = []
    for sign in (1, -1):
        def branch(c, sign=sign):
            ddx, ddy, m1 = s - c, t - fn.value(c), fn.slope(c)
            return k * (ddx + m1 * ddy) - sign * (m1 * ddx - ddy)

        with np.errstate(all="ignore"):
            vs = a - sign * b
        candidates += _roots(branch, xs, vs)
        for end in (0, -1):
            if np.isfinite(vs[end]) and abs(vs[end]) <= 1e-6:
                diagnostics.append(f"window-truncation: residual {abs(vs[end]):.3g} at window end c = {xs[end]:.6g}")
    if theta == 0:
        # double roots of the tangent residual sit at inflection abscissae
        d2 = fn.curvatures(xs)
        for c in _sign_change_roots(fn.curvature, xs, d2):
            g = fn.value(c) + (s - c) * fn.slope(c)
            scale = 1 + abs(t) + abs(fn.value(c)) + abs((s - c) * fn.slope(c))
            if abs(g - t) <= TOUCH_RTOL * scale:
                candidates.append(c)

    records = []
    for c in candidates:
        if abs(_chord_angle(fn, P, c) - theta) > ANGLE_TOL:
            continue
        line, angle = _line_through(fn, P, c)
        records.append(IncidenceRecord(c, line, "theta", angle))
    records = _dedup(records)
    return LineCount(len(records), records, diagnostics)


def explore_theta(f, points, thetas, window=None, samples: int = DEFAULT_SAMPLES) -> list[dict]:
    """Sweep angles and points, reporting queries with no theta line found.

    Each zero count is retried with the window doubled up to four times
    before it is reported.  Reports are candidates only: the scan is windowed.
    """
    fn = as_function(f)
    out = []
    for P in points:
        P = QueryPoint.of(P)
        if point_on_graph(fn, P):
            continue
        for theta in thetas:
            win = window
            res = count_theta_lines(fn, P, theta, win, samples)
            tries = 0
            while res.count == 0 and tries < MAX_DOUBLINGS:
                lo, hi = win if win is not None else default_window(fn, P)
                s = float(P.s)
                win = (s - 2 * (s - lo), s + 2 * (hi - s))
                res = count_theta_lines(fn, P, theta, win, samples)
                tries += 1
            if res.count == 0:
                out.append(
                    {
                        "point": (P.s, P.t),
                        "theta": theta,
                        "window": win,
                        "diagnostics": ["candidate counterexample: no theta line found in window"] + res.diagnostics,
                    }
                )
    return out
