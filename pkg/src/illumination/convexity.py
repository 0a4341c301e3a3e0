"""Convex functions: asymptote detection, growth certificates and region verdicts.

For a convex ``f`` the number of tangents through ``P = (s, t)`` below the
graph is decided by the limits of ``g_s`` at both ends, which in turn are
fixed by the behaviour of ``f`` at infinity: an oblique asymptote ``L``
pulls ``g_s`` towards ``L(s)``, while growth with ``x f''(x)`` bounded away
from zero sends ``g_s`` to ``-inf``.  The classifiers here turn those facts
into counts; :func:`analyze` gathers the certificates they need.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

from .exactpoly import (
    Line,
    NonnegativityCertificate,
    Polynomial,
    as_rational,
    is_convex_poly,
    is_nonnegative,
    poly_gcd,
    sturm_count,
)
from .expr import EvaluationError, Expr, X, as_polynomial, as_rational_pair, poly_to_expr
from .function import Function, as_function

SUPERLINEAR = "superlinear"
UNDETERMINED = "undetermined"

Side = Union[Line, str]

FIT_RADII = (1e2, 1e3, 1e4)
FIT_TOL = 1e-4
BOUNDARY_TOL = 1e-9


class NoCertificateError(ValueError):
    """The theorem path was requested but its hypotheses are not certified."""


@dataclass(frozen=True)
class RationalFunction:
    """``p(x) / q(x)`` in lowest terms, defined on the whole real line."""

    p: Polynomial
    q: Polynomial

    def __post_init__(self):
        if self.q.is_zero():
            raise ZeroDivisionError("zero denominator")
        g = poly_gcd(self.p, self.q) if not self.p.is_zero() else self.q.monic()
        p, q = self.p, self.q
        if g.degree > 0:
            p, q = p.exact_div(g), q.exact_div(g)
        scale = 1 / q.lc
        object.__setattr__(self, "p", p * scale)
        object.__setattr__(self, "q", q * scale)
        if q.degree > 0 and sturm_count(self.q) > 0:
            raise ValueError(f"denominator {self.q} has a real root; not defined on the real line")

    def __call__(self, x):
        return self.p(x) / self.q(x)

    def to_expr(self) -> Expr:
        return Expr("div", (poly_to_expr(self.p), poly_to_expr(self.q)))

    def curvature_numerator(self) -> Polynomial:
        """``N`` with ``R'' = N / q**3``."""
        p, q = self.p, self.q
        dp, dq = p.derivative(), q.derivative()
        return q * q * dp.derivative() - p * q * dq.derivative() - 2 * dp * dq * q + 2 * p * dq * dq


@dataclass(frozen=True)
class ExpPolynomial:
    """``p(x) * exp(q(x))`` with ``p != 0`` and ``deg q >= 1``."""

    p: Polynomial
    q: Polynomial

    def __post_init__(self):
        if self.p.is_zero():
            raise ValueError("p must be non-zero")
        if self.q.degree < 1:
            raise ValueError("q must have degree >= 1")

    def to_expr(self) -> Expr:
        e = Expr("exp", (poly_to_expr(self.q),))
        if self.p == Polynomial((1,)):
            return e
        return Expr("mul", (poly_to_expr(self.p), e))

    def curvature_factor(self) -> Polynomial:
        """``W`` with ``f'' = W * exp(q)``."""
        p, q = self.p, self.q
        dp, dq = p.derivative(), q.derivative()
        return p * dq * dq + 2 * dp * dq + p * dq.derivative() + dp.derivative()


@dataclass(frozen=True)
class AsymptoteInfo:
    left: Side
    right: Side
    provenance: str
    residuals: tuple = ()


@dataclass(frozen=True)
class GrowthCertificate:
    """Signs of ``lim x f''(x)``: ``left`` certifies a negative limit at
    ``-inf``, ``right`` a positive limit at ``+inf``."""

    left: bool
    right: bool
    reason: str

    @property
    def certified(self) -> bool:
        return self.left and self.right

    def __bool__(self):
        return self.certified


@dataclass(frozen=True)
class ConvexityCertificate:
    holds: bool
    reason: str
    provenance: str

    def __bool__(self):
        return self.holds


@dataclass(frozen=True)
class Analysis:
    kind: str
    form: object
    convexity: ConvexityCertificate
    asymptotes: AsymptoteInfo
    growth: GrowthCertificate


@dataclass(frozen=True)
class Verdict:
    index: int
    rule: str
    boundary: bool = False


# -- structure recognition ----------------------------------------------


def _mul_factors(e: Expr) -> list[Expr]:
    if e.op == "mul":
        return _mul_factors(e.args[0]) + _mul_factors(e.args[1])
    return [e]


def _as_exp_polynomial(e: Expr) -> Optional[ExpPolynomial]:
    sign = 1
    while e.op == "neg":
        sign, e = -sign, e.args[0]
    p = Polynomial((sign,))
    q = Polynomial()
    seen_exp = False
    for factor in _mul_factors(e):
        if factor.op == "exp":
            arg = as_polynomial(factor.args[0])
            if arg is None:
                return None
            q = q + arg
            seen_exp = True
            continue
        poly = as_polynomial(factor)
        if poly is None:
            return None
        p = p * poly
    if not seen_exp or p.is_zero() or q.degree < 1:
        return None
    return ExpPolynomial(p, q)


def _is_x_atan_x(e: Expr) -> bool:
    if e.op != "mul":
        return False
    a, b = e.args
    atan_x = Expr("atan", (X,))
    return (a == X and b == atan_x) or (a == atan_x and b == X)


def recognize(fn: Function):
    """``(kind, form)`` for the structured families the theorems cover."""
    if fn.structure is not None and not isinstance(fn.structure, Polynomial):
        s = fn.structure
        return ("rational" if isinstance(s, RationalFunction) else "exp-polynomial"), s
    if fn.polynomial is not None:
        return "polynomial", fn.polynomial
    pair = as_rational_pair(fn.expr)
    if pair is not None and not pair[1].is_zero():
        try:
            r = RationalFunction(*pair)
        except ValueError:
            return "general", None
        if r.q.degree == 0:
            return "polynomial", r.p
        return "rational", r
    ep = _as_exp_polynomial(fn.expr)
    if ep is not None:
        return "exp-polynomial", ep
    if _is_x_atan_x(fn.expr):
        return "x-atan-x", None
    return "general", None


# -- asymptotes -------------------------------------------------------------

_HALF_PI = math.pi / 2


def _fit_side(fn: Function, sign: int):
    """Numeric tail fit on one side: ``(Line | SUPERLINEAR | UNDETERMINED, residual)``."""
    lines, residuals, growth = [], [], []
    try:
        for r in FIT_RADII:
            x = sign * r
            m = fn.slope(x)
            b = fn.value(x) - m * x
            far = 2 * x
            residuals.append(abs(fn.value(far) - (m * far + b)))
            lines.append((m, b))
            growth.append(x * fn.curvature(x))
    except (EvaluationError, OverflowError):
        return UNDETERMINED, math.inf
    finite = all(math.isfinite(v) for pair in lines for v in pair) and all(
        math.isfinite(v) for v in residuals
    )
    if finite:
        decreasing = all(b <= a for a, b in zip(residuals, residuals[1:]))
        if decreasing and residuals[-1] <= FIT_TOL:
            m, b = lines[-1]
            return Line(m, b, exact=False), residuals[-1]
    # growth evidence: x f''(x) keeps the required sign and does not shrink
    if all(not math.isnan(g) and sign * g > 0 for g in growth):
        mags = [abs(g) for g in growth]
        if all(b >= a for a, b in zip(mags, mags[1:])) and mags[-1] > 10:
            return SUPERLINEAR, math.inf
    return UNDETERMINED, residuals[-1] if residuals else math.inf


def detect_asymptotes(f) -> AsymptoteInfo:
    """Behaviour of ``f`` at both ends: an oblique asymptote, superlinear growth, or unknown."""
    fn = as_function(f)
    kind, form = recognize(fn)
    if kind == "polynomial":
        if form.degree <= 1:
            c = form.coeffs + (0,) * (2 - len(form.coeffs))
            line = Line(as_rational(c[1]), as_rational(c[0]), exact=True)
            return AsymptoteInfo(line, line, "exact-rational-division")
        return AsymptoteInfo(SUPERLINEAR, SUPERLINEAR, "exact-rational-division")
    if kind == "rational":
        quot = form.p // form.q
        if quot.degree <= 1:
            c = quot.coeffs + (0,) * (2 - len(quot.coeffs))
            line = Line(as_rational(c[1]), as_rational(c[0]), exact=True)
            return AsymptoteInfo(line, line, "exact-rational-division")
        return AsymptoteInfo(SUPERLINEAR, SUPERLINEAR, "exact-rational-division")
    if kind == "exp-polynomial":
        zero = Line(0, 0, exact=True)
        left = zero if form.q.sign_at_infinity(-1) < 0 else SUPERLINEAR
        right = zero if form.q.sign_at_infinity(1) < 0 else SUPERLINEAR
        return AsymptoteInfo(left, right, "structural-certificate")
    if kind == "x-atan-x":
        return AsymptoteInfo(
            Line(-_HALF_PI, -1.0), Line(_HALF_PI, -1.0), "structural-certificate"
        )
    left, rl = _fit_side(fn, -1)
    right, rr = _fit_side(fn, 1)
    return AsymptoteInfo(left, right, "numeric-fit", (rl, rr))


# -- growth certificates ----------------------------------------------------


def rational_growth_check(r: RationalFunction) -> GrowthCertificate:
    """Certify ``lim x R''(x) = -inf`` at ``-inf`` and ``+inf`` at ``+inf``."""
    if r.q.degree > 0 and sturm_count(r.q) > 0:
        raise ValueError("denominator has a real root; not defined on the real line")
    m, n = r.p.degree, r.q.degree
    a_m, b_n = r.p.lc, r.q.lc

    def reject(why):
        return GrowthCertificate(False, False, why)

    if m <= n:
        return reject("horizontal asymptote (deg p <= deg q)")
    if m == n + 1:
        return reject("oblique asymptote on both sides (deg p = deg q + 1)")
    if n % 2:
        return reject("odd denominator degree")
    if m % 2:
        return reject("odd numerator degree")
    if (m - n) * (m - n - 1) * a_m / b_n <= 0:
        return reject("leading curvature term is negative")
    return GrowthCertificate(True, True, f"deg p = {m}, deg q = {n}, positive leading curvature")


def _sided_growth(w: Polynomial, expo: Optional[Polynomial]) -> tuple[bool, bool]:
    """Growth flags for ``f'' = w * exp(expo)`` (``expo=None`` means no exponential)."""
    if w.is_zero():
        return False, False
    flags = []
    for side in (-1, 1):
        if expo is not None and expo.sign_at_infinity(side) < 0:
            flags.append(False)
            continue
        flags.append(side * w.sign_at_infinity(side) == side)
    return flags[0], flags[1]


def exppoly_growth_check(g: ExpPolynomial) -> GrowthCertificate:
    """Certify ``lim x f''(x)`` for ``f = p exp(q)`` on each side.

    On a side where ``q -> -inf`` the function decays to zero and
    ``x f''(x) -> 0``, so only sides with ``q -> +inf`` can be certified.
    """
    left, right = _sided_growth(g.curvature_factor(), g.q)
    n, m = g.q.degree, g.p.degree
    b_n, a_m = g.q.lc, g.p.lc
    if b_n < 0:
        why = "negative leading exponent coefficient: f decays where q -> -inf"
    elif n % 2:
        why = "odd exponent degree: f decays to 0 at -inf"
    elif (2 * n + m - 2) % 2:
        why = "f'' changes sign at -inf (2n + m - 2 odd)"
    elif a_m <= 0:
        why = "negative leading coefficient of p"
    else:
        why = f"b_n > 0, 2n + m - 2 = {2 * n + m - 2} even, a_m > 0"
    return GrowthCertificate(left, right, why)


def polynomial_growth_check(f: Polynomial) -> GrowthCertificate:
    left, right = _sided_growth(f.derivative(2), None)
    return GrowthCertificate(left, right, "polynomial second derivative at infinity")


def _numeric_growth(fn: Function, info: AsymptoteInfo) -> GrowthCertificate:
    return GrowthCertificate(
        info.left == SUPERLINEAR, info.right == SUPERLINEAR, "numeric tail evidence"
    )


# -- analysis ---------------------------------------------------------------


def analyze(f, assume_convex: bool = False) -> Analysis:
    """Convexity certificate, asymptotes and growth flags for ``f`` (cached)."""
    fn = as_function(f)
    key = ("analysis", bool(assume_convex))
    if key in fn.cache:
        return fn.cache[key]
    kind, form = recognize(fn)
    info = detect_asymptotes(fn)
    if kind == "polynomial":
        cert = is_convex_poly(form)
        convex = ConvexityCertificate(cert.holds, cert.reason, "exact-rational-division")
        growth = polynomial_growth_check(form)
    elif kind == "rational":
        sign_q = 1 if form.q.lc > 0 else -1
        cert = is_nonnegative(form.curvature_numerator() * sign_q)
        convex = ConvexityCertificate(cert.holds, cert.reason, "exact-rational-division")
        growth = rational_growth_check(form)
    elif kind == "exp-polynomial":
        cert = is_nonnegative(form.curvature_factor())
        convex = ConvexityCertificate(cert.holds, cert.reason, "structural-certificate")
        growth = exppoly_growth_check(form)
    elif kind == "x-atan-x":
        convex = ConvexityCertificate(True, "f'' = 2/(1+x^2)^2 > 0", "structural-certificate")
        growth = GrowthCertificate(False, False, "oblique asymptotes on both sides")
    else:
        convex = ConvexityCertificate(
            bool(assume_convex),
            "asserted by caller" if assume_convex else "no symbolic convexity decision",
            "user-supplied" if assume_convex else "none",
        )
        growth = _numeric_growth(fn, info)
    if assume_convex and not convex.holds and kind != "general":
        convex = ConvexityCertificate(True, "asserted by caller", "user-supplied")
    result = Analysis(kind, form, convex, info, growth)
    fn.cache[key] = result
    return result


# -- region classifiers -------------------------------------------------------


def classify_two_asymptotes(fs, l1s, l2s, t) -> int:
    """Tangent count for convex ``f`` with two distinct oblique asymptotes."""
    lo, hi = min(l1s, l2s), max(l1s, l2s)
    if t > fs:
        return 0
    if hi < t < fs:
        return 2
    if l1s != l2s and lo < t <= hi:
        return 1
    return 0


def classify_one_asymptote(fs, ls, t) -> int:
    """Tangent count for convex ``f`` with one asymptote and growth on the other side."""
    if t > fs:
        return 0
    if ls < t < fs:
        return 2
    return 1


def classify_superlinear(fs, t) -> int:
    """Tangent count for convex ``f`` growing superlinearly at both ends."""
    return 2 if t < fs else 0


def _near(a, b) -> bool:
    if isinstance(a, float) or isinstance(b, float):
        return abs(float(a) - float(b)) <= BOUNDARY_TOL * (1 + abs(float(b)))
    return False


def exact_value(analysis: Analysis, fn: Function, s):
    """``f(s)`` exactly when the structure allows it, else as a float."""
    if analysis.kind in ("polynomial", "rational") and not isinstance(s, float):
        return analysis.form(as_rational(s))
    return fn.value(float(s))


def theorem_verdict(f, s, t, assume_convex: bool = False) -> Optional[Verdict]:
    """Region verdict for ``P = (s, t)`` or ``None`` when no theorem applies."""
    fn = as_function(f)
    an = analyze(fn, assume_convex)
    if not an.convexity:
        return None
    if an.kind == "polynomial" and an.form.degree <= 1:
        return None
    fs = exact_value(an, fn, s)
    left, right = an.asymptotes.left, an.asymptotes.right
    if t > fs:
        return Verdict(0, "convex:above-graph")
    if isinstance(left, Line) and isinstance(right, Line):
        if left == right or (left.approx() == right.approx()):
            return None
        l1s, l2s = left(s), right(s)
        k = classify_two_asymptotes(fs, l1s, l2s, t)
        rule = {2: "two-asymptotes:above-both", 1: "two-asymptotes:between", 0: "two-asymptotes:below-both"}[k]
        return Verdict(k, rule, _near(t, l1s) or _near(t, l2s))
    if isinstance(left, Line) and right == SUPERLINEAR and an.growth.right:
        ls = left(s)
    elif isinstance(right, Line) and left == SUPERLINEAR and an.growth.left:
        ls = right(s)
    elif left == SUPERLINEAR and right == SUPERLINEAR and an.growth.certified:
        return Verdict(classify_superlinear(fs, t), "superlinear:below-graph")
    else:
        return None
    k = classify_one_asymptote(fs, ls, t)
    rule = "one-asymptote:above" if k == 2 else "one-asymptote:below"
    return Verdict(k, rule, _near(t, ls))


def require_verdict(f, s, t, assume_convex: bool = False) -> Verdict:
    v = theorem_verdict(f, s, t, assume_convex)
    if v is None:
        fn = as_function(f)
        an = analyze(fn, assume_convex)
        if not an.convexity:
            raise NoCertificateError(f"no convexity certificate for {fn.text}: {an.convexity.reason}")
        raise NoCertificateError(f"no asymptote/growth certificate for {fn.text}")
    return v
