"""Exact univariate polynomials over the rationals.

Everything here works on :class:`fractions.Fraction` coefficients so that root
counts and tangency abscissae can be certified rather than estimated.  Real
roots are counted with Sturm sequences and isolated by bisection starting from
the Cauchy bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional, Sequence

DEFAULT_EPS = Fraction(1, 10**12)


def as_rational(value) -> Fraction:
    """Convert ``value`` to an exact :class:`Fraction`.

    Floats are read through their shortest decimal representation, so ``0.1``
    becomes ``1/10`` rather than the binary value closest to it.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r} has no rational form")
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    return Fraction(value)


def _sign(v) -> int:
    return (v > 0) - (v < 0)


class Polynomial:
    """Immutable polynomial with rational coefficients, lowest power first."""

    __slots__ = ("coeffs", "_hash", "_float_coeffs", "_ints")

    def __init__(self, coeffs: Iterable = ()):
        cs = [as_rational(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(cs)
        self._hash = hash(self.coeffs)
        self._float_coeffs = None
        self._ints = None

    @classmethod
    def x(cls) -> "Polynomial":
        return cls((0, 1))

    @classmethod
    def constant(cls, c) -> "Polynomial":
        return cls((c,))

    @classmethod
    def from_roots(cls, roots: Iterable, lead=1) -> "Polynomial":
        p = cls((lead,))
        for r in roots:
            p = p * cls((-as_rational(r), 1))
        return p

    @property
    def degree(self) -> int:
        """Degree, with ``-1`` for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def lc(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return len(self.coeffs) <= 1

    def __call__(self, v):
        if isinstance(v, float):
            if self._float_coeffs is None:
                self._float_coeffs = tuple(float(c) for c in self.coeffs)
            acc = 0.0
            for c in reversed(self._float_coeffs):
                acc = acc * v + c
            return acc
        acc = Fraction(0) if not isinstance(v, (int, Fraction)) else 0
        for c in reversed(self.coeffs):
            acc = acc * v + c
        return acc if isinstance(acc, Fraction) else Fraction(acc)

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs == Polynomial((other,)).coeffs
        return NotImplemented

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Polynomial([{', '.join(str(c) for c in self.coeffs)}])"

    def __str__(self):
        if not self.coeffs:
            return "0"
        terms = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            mag = abs(c)
            if k == 0:
                body = str(mag)
            else:
                power = "x" if k == 1 else f"x^{k}"
                if mag == 1:
                    body = power
                elif mag.denominator == 1:
                    body = f"{mag}*{power}"
                else:
                    body = f"({mag})*{power}"
            if not terms:
                terms.append(("-" if c < 0 else "") + body)
            else:
                terms.append((" - " if c < 0 else " + ") + body)
        return "".join(terms)

    @staticmethod
    def _coerce(other) -> "Polynomial":
        if isinstance(other, Polynomial):
            return other
        return Polynomial((other,))

    def __add__(self, other):
        other = self._coerce(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (n - len(other.coeffs))
        return Polynomial(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            k = as_rational(other)
            return Polynomial(c * k for c in self.coeffs)
        if not self.coeffs or not other.coeffs:
            return Polynomial()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Polynomial(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = Polynomial((1,))
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __divmod__(self, other):
        other = self._coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        lc = other.lc
        if len(rem) - 1 < dq:
            return Polynomial(), self
        quot = [Fraction(0)] * (len(rem) - dq)
        for k in range(len(rem) - 1, dq - 1, -1):
            c = rem[k] / lc
            quot[k - dq] = c
            if c:
                for j, b in enumerate(other.coeffs):
                    rem[k - dq + j] -= c * b
        return Polynomial(quot), Polynomial(rem[:dq])

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def exact_div(self, other) -> "Polynomial":
        q, r = divmod(self, other)
        if not r.is_zero():
            raise ArithmeticError(f"{other} does not divide {self}")
        return q

    def derivative(self, k: int = 1) -> "Polynomial":
        cs = list(self.coeffs)
        for _ in range(k):
            cs = [i * c for i, c in enumerate(cs)][1:]
        return Polynomial(cs)

    def monic(self) -> "Polynomial":
        if self.is_zero():
            return self
        return self * (1 / self.lc)

    def primitive(self) -> tuple[int, ...]:
        """Integer coefficients of the primitive part with positive lead."""
        if self.is_zero():
            return ()
        den = 1
        for c in self.coeffs:
            den = den * c.denominator // math.gcd(den, c.denominator)
        ints = [int(c * den) for c in self.coeffs]
        g = 0
        for v in ints:
            g = math.gcd(g, v)
        ints = [v // g for v in ints]
        if ints[-1] < 0:
            ints = [-v for v in ints]
        return tuple(ints)

    def sign_at(self, v) -> int:
        if isinstance(v, float):
            return _sign(self(v))
        if self.is_zero():
            return 0
        # homogeneous Horner on the integer form: sign of v**n * p(u/v) for v > 0
        if self._ints is None:
            lc_sign = _sign(self.lc)
            self._ints = tuple(lc_sign * c for c in self.primitive())
        v = Fraction(v)
        u, w = v.numerator, v.denominator
        acc, wp = 0, 1
        for c in reversed(self._ints):
            acc = acc * u + c * wp
            wp *= w
        return _sign(acc)

    def sign_at_infinity(self, direction: int) -> int:
        """Sign of the polynomial as x goes to ``direction * infinity``."""
        if self.is_zero():
            return 0
        s = _sign(self.lc)
        if direction < 0 and self.degree % 2 == 1:
            s = -s
        return s


def poly_gcd(p: Polynomial, q: Polynomial) -> Polynomial:
    """Monic greatest common divisor (zero if both inputs are zero)."""
    a, b = p, q
    while not b.is_zero():
        a, b = b, a % b
        if not b.is_zero():
            b = b.monic()
    return a.monic()


def squarefree_decomposition(p: Polynomial) -> tuple[Fraction, list[tuple[Polynomial, int]]]:
    """Yun's algorithm.

    Returns ``(content, [(g_1, 1), (g_2, 2), ...])`` with monic, pairwise
    coprime, square-free ``g_i`` such that ``p = content * prod g_i**i``.
    Factors equal to 1 are omitted.
    """
    if p.is_zero():
        raise ValueError("square-free decomposition of the zero polynomial")
    content = p.lc
    if p.degree == 0:
        return content, []
    dp = p.derivative()
    a = poly_gcd(p, dp)
    b = p.exact_div(a).monic()
    c = dp.exact_div(a) * (1 / p.lc)
    d = c - b.derivative()
    out = []
    i = 1
    while b.degree > 0:
        g = poly_gcd(b, d)
        if g.degree > 0:
            out.append((g, i))
        b = b.exact_div(g)
        c = d.exact_div(g)
        d = c - b.derivative()
        i += 1
    return content, out


@lru_cache(maxsize=4096)
def squarefree_part(p: Polynomial) -> Polynomial:
    if p.is_zero():
        raise ValueError("square-free part of the zero polynomial")
    if p.degree <= 0:
        return Polynomial((1,))
    return p.exact_div(poly_gcd(p, p.derivative())).monic()


@lru_cache(maxsize=4096)
def sturm_sequence(p: Polynomial) -> tuple[Polynomial, ...]:
    seq = [p, p.derivative()]
    while not seq[-1].is_zero():
        r = -(seq[-2] % seq[-1])
        if r.is_zero():
            break
        seq.append(r * (1 / abs(r.lc)))
    if seq[-1].is_zero():
        seq.pop()
    return tuple(seq)


def _variations(signs: Iterable[int]) -> int:
    count = 0
    last = 0
    for s in signs:
        if s == 0:
            continue
        if last and s != last:
            count += 1
        last = s
    return count


def _variations_at(seq: Sequence[Polynomial], v) -> int:
    if v is None or v == math.inf:
        return _variations(q.sign_at_infinity(1) for q in seq)
    if v == -math.inf:
        return _variations(q.sign_at_infinity(-1) for q in seq)
    return _variations(q.sign_at(v) for q in seq)


def _bound_arg(v, default):
    if v is None:
        return default
    if isinstance(v, float) and math.isinf(v):
        return v
    return as_rational(v)


def sturm_count(h: Polynomial, lo=None, hi=None) -> int:
    """Number of distinct real roots of ``h`` in ``(lo, hi]``.

    ``None`` (or an infinite float) stands for the corresponding infinity.
    """
    if h.is_zero():
        raise ValueError("root count of the zero polynomial")
    p = squarefree_part(h)
    if p.degree <= 0:
        return 0
    lo = _bound_arg(lo, -math.inf)
    hi = _bound_arg(hi, math.inf)
    if lo != -math.inf and hi != math.inf and lo >= hi:
        return 0
    seq = sturm_sequence(p)
    return _variations_at(seq, lo) - _variations_at(seq, hi)


def cauchy_bound(p: Polynomial) -> Fraction:
    """Every real root r of ``p`` satisfies ``|r| < 1 + max |a_k / a_n|``."""
    if p.degree <= 0:
        return Fraction(1)
    lc = p.lc
    return 1 + max(abs(c / lc) for c in p.coeffs[:-1])


@dataclass(frozen=True)
class IsolatingInterval:
    """Either an exact root (``lo == hi``) or an open interval holding one root."""

    lo: Fraction
    hi: Fraction
    multiplicity: int = 1

    @property
    def is_exact(self) -> bool:
        return self.lo == self.hi

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def __float__(self):
        return float(self.midpoint)

    def __str__(self):
        if self.is_exact:
            return str(self.lo)
        return f"({self.lo}, {self.hi})"


def _dyadic_between(a: Fraction, b: Fraction) -> Fraction:
    """A point with power-of-two denominator within a quarter width of the midpoint."""
    d = b - a
    k = max(0, d.denominator.bit_length() - d.numerator.bit_length() + 3)
    scale = 1 << k
    mid = a + d / 2
    return Fraction(round(mid * scale), scale)


def _float_bracket(p: Polynomial, a: Fraction, b: Fraction, sa: int):
    """Shrink ``(a, b)`` to a few ulps using float bisection, verified exactly.

    Falls back to the original interval when rounding makes the float
    estimate unreliable.
    """
    lo, hi = float(a), float(b)
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
        return a, b
    flo = p(lo)
    if not math.isfinite(flo):
        return a, b
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        fm = p(mid)
        if not math.isfinite(fm):
            return a, b
        if (fm > 0) == (flo > 0) and fm != 0:
            lo, flo = mid, fm
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    eps = max(abs(x), 1.0) * 2.0**-50
    na, nb = Fraction(x - eps), Fraction(x + eps)
    if not (a < na < nb < b):
        return a, b
    if p.sign_at(na) == sa and p.sign_at(nb) == -sa:
        return na, nb
    return a, b


def _bisect_signs(p: Polynomial, a: Fraction, b: Fraction, width: Fraction):
    """Shrink ``(a, b)`` around the single simple root of ``p``.

    Requires ``p(a)`` and ``p(b)`` non-zero with opposite signs.  Returns an
    exact root as ``(r, r)`` if a midpoint hits it.
    """
    sa = p.sign_at(a)
    if b - a > width:
        a, b = _float_bracket(p, a, b, sa)
    while b - a > width:
        m = _dyadic_between(a, b)
        sm = p.sign_at(m)
        if sm == 0:
            return m, m
        if sm == sa:
            a = m
        else:
            b = m
    return a, b


def _isolate_squarefree(p: Polynomial) -> list[tuple[Fraction, Fraction]]:
    seq = sturm_sequence(p)
    bound = cauchy_bound(p)
    cache: dict = {}

    def var(v):
        if v not in cache:
            cache[v] = _variations_at(seq, v)
        return cache[v]

    found: list[tuple[Fraction, Fraction]] = []
    stack = [(-bound, bound)]
    while stack:
        a, b = stack.pop()
        n = var(a) - var(b)
        if n == 0:
            continue
        if n == 1:
            if p(b) == 0:
                found.append((b, b))
                continue
            # root lies in (a, b); move a off any neighbouring root
            while p(a) == 0:
                m = (a + b) / 2
                if p(m) == 0:
                    a, b = m, m
                    break
                if var(a) - var(m) == 1:
                    b = m
                else:
                    a = m
            found.append((a, b))
            continue
        m = (a + b) / 2
        stack.append((m, b))
        stack.append((a, m))
    return found


def _detect_rational(p: Polynomial, a: Fraction, b: Fraction):
    """Return the exact root in ``(a, b)`` if it is rational, else a narrowed interval.

    A rational root ``u/v`` of ``p`` has ``v`` dividing the leading coefficient
    ``N`` of the primitive integer form, and distinct fractions with
    denominators at most ``N`` are at least ``1/N**2`` apart, so narrowing the
    interval below ``1/(2 N**2)`` leaves a single candidate.
    """
    if a == b:
        return a, b
    if p.degree == 1:
        r = -p.coeffs[0] / p.coeffs[1]
        return r, r
    n_lead = p.primitive()[-1]
    a, b = _bisect_signs(p, a, b, Fraction(1, 2 * n_lead * n_lead))
    if a == b:
        return a, b
    cand = ((a + b) / 2).limit_denominator(n_lead)
    if a < cand < b and p(cand) == 0:
        return cand, cand
    return a, b


def isolate_real_roots(h: Polynomial) -> list[IsolatingInterval]:
    """Isolating intervals for every distinct real root of ``h``, sorted.

    Each interval records the multiplicity of its root in ``h``.  Rational
    roots come back as point intervals.
    """
    if h.is_zero():
        raise ValueError("cannot isolate roots of the zero polynomial")
    _, factors = squarefree_decomposition(h)
    if not factors:
        return []
    p = Polynomial((1,))
    for g, _k in factors:
        p = p * g
    out = []
    for a, b in _isolate_squarefree(p):
        a, b = _detect_rational(p, a, b)
        mult = 1
        for g, k in factors:
            if a == b:
                hit = g(a) == 0
            else:
                hit = g.sign_at(a) * g.sign_at(b) < 0
            if hit:
                mult = k
                break
        out.append(IsolatingInterval(a, b, mult))
    out.sort(key=lambda iv: iv.lo)
    return out


def refine_root(h: Polynomial, iv: IsolatingInterval, eps=DEFAULT_EPS) -> Fraction:
    """A rational within ``eps`` of the root isolated by ``iv``."""
    if iv.is_exact:
        return iv.lo
    eps = as_rational(eps)
    p = squarefree_part(h)
    a, b = iv.lo, iv.hi
    if p(a) == 0:
        return a
    if p(b) == 0:
        return b
    if p.sign_at(a) == p.sign_at(b):
        raise ValueError(f"interval {iv} does not bracket a root of {h}")
    a, b = _bisect_signs(p, a, b, 2 * eps)
    return (a + b) / 2


def narrow(h: Polynomial, iv: IsolatingInterval, width) -> IsolatingInterval:
    """Shrink ``iv`` to at most ``width`` while keeping it isolating."""
    if iv.is_exact or iv.width <= width:
        return iv
    p = squarefree_part(h)
    a, b = _bisect_signs(p, iv.lo, iv.hi, as_rational(width))
    return IsolatingInterval(a, b, iv.multiplicity)


# -- tangent-value polynomial ---------------------------------------------


def build_gs_poly(f: Polynomial, s, t) -> Polynomial:
    """Coefficients of ``f(c) + (s - c) f'(c) - t`` as a polynomial in ``c``."""
    n = f.degree
    if n < 2:
        raise ValueError("tangent-value polynomial needs degree >= 2")
    s = as_rational(s)
    t = as_rational(t)
    a = f.coeffs
    out = [a[0] + s * a[1] - t]
    for k in range(1, n):
        out.append(s * (k + 1) * a[k + 1] - (k - 1) * a[k])
    out.append(-(n - 1) * a[n])
    return Polynomial(out)


def gs_limit_signs(f: Polynomial, s) -> tuple[float, float]:
    """Limits of ``g_s(c)`` as ``c -> -inf`` and ``c -> +inf``."""
    h = build_gs_poly(f, s, 0)
    return (h.sign_at_infinity(-1) * math.inf, h.sign_at_infinity(1) * math.inf)


def gs_critical_points(f: Polynomial, s) -> list[IsolatingInterval]:
    """Local-extremum abscissae of ``g_s``.

    ``g_s'(c) = (s - c) f''(c)`` so the extrema are its roots of odd
    multiplicity: ``c = s`` unless ``s`` is an inflection abscissa, plus every
    inflection abscissa other than ``s``.
    """
    dg = build_gs_poly(f, s, 0).derivative()
    if dg.is_zero():
        return []
    _, factors = squarefree_decomposition(dg)
    odd = Polynomial((1,))
    for g, k in factors:
        if k % 2 == 1:
            odd = odd * g
    if odd.degree <= 0:
        return []
    return isolate_real_roots(odd)


# -- convexity ------------------------------------------------------------


@dataclass(frozen=True)
class NonnegativityCertificate:
    holds: bool
    reason: str
    polynomial: Polynomial

    def __bool__(self):
        return self.holds


def is_nonnegative(p: Polynomial) -> NonnegativityCertificate:
    """Decide ``p(x) >= 0`` for all real x exactly."""
    if p.is_zero():
        return NonnegativityCertificate(True, "identically zero", p)
    if p.degree == 0:
        ok = p.lc > 0
        return NonnegativityCertificate(ok, f"constant {p.lc}", p)
    if p.lc < 0:
        return NonnegativityCertificate(False, "negative leading coefficient", p)
    if p.degree % 2 == 1:
        return NonnegativityCertificate(False, "odd degree", p)
    _, factors = squarefree_decomposition(p)
    for g, k in factors:
        if k % 2 == 1 and sturm_count(g) > 0:
            roots = isolate_real_roots(g)
            return NonnegativityCertificate(
                False, f"sign change near x = {float(roots[0]):.6g}", p
            )
    return NonnegativityCertificate(True, "no real root of odd multiplicity", p)


def is_convex_poly(f: Polynomial) -> NonnegativityCertificate:
    """Certificate for ``f'' >= 0`` on the whole real line."""
    return is_nonnegative(f.derivative(2))


# -- multiple tangent lines ---------------------------------------------


@dataclass(frozen=True)
class Line:
    """``y = slope * x + intercept``."""

    slope: object
    intercept: object
    exact: bool = False

    def __call__(self, x):
        return self.slope * x + self.intercept

    def approx(self) -> tuple[float, float]:
        return float(self.slope), float(self.intercept)

    def close_to(self, other: "Line", rtol: float = 1e-9) -> bool:
        if self.exact and other.exact:
            return self.slope == other.slope and self.intercept == other.intercept
        m1, b1 = self.approx()
        m2, b2 = other.approx()
        return abs(m1 - m2) <= rtol * (1 + abs(m1)) and abs(b1 - b2) <= rtol * (1 + abs(b1))


def tangent_line(f: Polynomial, c) -> Line:
    c = as_rational(c)
    slope = f.derivative()(c)
    return Line(slope, f(c) - c * slope, exact=True)


@dataclass(frozen=True)
class BitangentRecord:
    line: Line
    abscissae: tuple[IsolatingInterval, ...]


def _divided_difference(coeffs: Sequence[Fraction]) -> dict[tuple[int, int], Fraction]:
    """``(p(x) - p(y)) / (x - y)`` as a map ``(i, j) -> coeff of x^i y^j``."""
    out: dict[tuple[int, int], Fraction] = {}
    for k, a in enumerate(coeffs):
        if k == 0 or a == 0:
            continue
        for i in range(k):
            key = (i, k - 1 - i)
            out[key] = out.get(key, Fraction(0)) + a
    return out


def _specialize_x(bivar: dict, x0: Fraction, ydeg: int) -> list[Fraction]:
    cs = [Fraction(0)] * (ydeg + 1)
    for (i, j), a in bivar.items():
        cs[j] += a * x0**i
    return cs


def _det(rows: list[list[Fraction]]) -> Fraction:
    m = [r[:] for r in rows]
    n = len(m)
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        pv = m[col][col]
        det *= pv
        for r in range(col + 1, n):
            if m[r][col] != 0:
                factor = m[r][col] / pv
                row_r, row_c = m[r], m[col]
                for k in range(col, n):
                    row_r[k] -= factor * row_c[k]
    return det


def _sylvester_resultant(a: list[Fraction], b: list[Fraction]) -> Fraction:
    """Resultant of two polynomials given low-to-high with formal degrees."""
    da, db = len(a) - 1, len(b) - 1
    size = da + db
    if size == 0:
        return Fraction(1)
    rows = []
    for i in range(db):
        row = [Fraction(0)] * size
        for k, c in enumerate(reversed(a)):
            row[i + k] = c
        rows.append(row)
    for i in range(da):
        row = [Fraction(0)] * size
        for k, c in enumerate(reversed(b)):
            row[i + k] = c
        rows.append(row)
    return _det(rows)


def _interpolate(xs: Sequence[Fraction], ys: Sequence[Fraction]) -> Polynomial:
    n = len(xs)
    coef = list(ys)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - j])
    p = Polynomial((coef[-1],))
    for i in range(n - 2, -1, -1):
        p = p * Polynomial((-xs[i], 1)) + coef[i]
    return p


def bitangent_resultant(f: Polynomial) -> Polynomial:
    """Resultant in ``y`` of the two divided-difference conditions.

    Its real roots include every abscissa at which a multiple tangent line
    touches ``f``; spurious roots (inflection abscissae, complex partners)
    are filtered by the caller.
    """
    n = f.degree
    df = f.derivative()
    k = f - Polynomial.x() * df
    dd_slope = _divided_difference(df.coeffs)
    dd_icpt = _divided_difference(k.coeffs)
    da, db = n - 2, n - 1
    bound = da * db
    xs = [Fraction((i + 1) // 2 * (1 if i % 2 else -1)) for i in range(bound + 1)]
    ys = [
        _sylvester_resultant(_specialize_x(dd_slope, x0, da), _specialize_x(dd_icpt, x0, db))
        for x0 in xs
    ]
    return _interpolate(xs, ys)


@lru_cache(maxsize=256)
def multiple_tangent_lines(f: Polynomial, rtol: float = 1e-9) -> tuple[BitangentRecord, ...]:
    """All lines tangent to ``f`` at two or more distinct abscissae."""
    if f.degree <= 3 or is_convex_poly(f):
        return ()
    res = bitangent_resultant(f)
    if res.is_zero():
        raise RuntimeError(f"bitangent elimination degenerated for {f}")
    if res.degree <= 0:
        return ()
    fine = Fraction(1, 10**30)
    cands = []
    for iv in isolate_real_roots(res):
        if iv.is_exact:
            cands.append((iv, iv.lo, tangent_line(f, iv.lo)))
        else:
            iv = narrow(res, iv, fine)
            x0 = iv.midpoint
            ln = tangent_line(f, x0)
            cands.append((iv, x0, Line(float(ln.slope), float(ln.intercept), exact=False)))

    parent = list(range(len(cands)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(cands)):
        for j in range(i + 1, len(cands)):
            (_, xi, li), (_, xj, lj) = cands[i], cands[j]
            if abs(xi - xj) <= fine:
                continue
            if li.exact and lj.exact:
                same = li.slope == lj.slope and li.intercept == lj.intercept
            else:
                same = li.close_to(lj, rtol)
            if same:
                parent[find(j)] = find(i)

    groups: dict[int, list] = {}
    for i in range(len(cands)):
        groups.setdefault(find(i), []).append(cands[i])
    records = []
    for members in groups.values():
        if len(members) < 2:
            continue
        members.sort(key=lambda m: m[1])
        exact = all(m[2].exact for m in members)
        line = members[0][2]
        if not exact:
            line = Line(float(line.slope), float(line.intercept), exact=False)
        records.append(BitangentRecord(line, tuple(m[0] for m in members)))
    records.sort(key=lambda r: r.abscissae[0].lo)
    return tuple(records)
