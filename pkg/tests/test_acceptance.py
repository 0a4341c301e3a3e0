"""Acceptance suite: one test per criterion, each with its runtime limit.

Run alone with ``pytest tests/test_acceptance.py``; the terminal summary
prints one PASS/FAIL line per criterion.
"""

import math
import random
import subprocess
import sys
import time
from fractions import Fraction as F

import numpy as np
import pytest

from illumination import convexity
from illumination.engine import illumination_index, gs_eval, OnGraphError
from illumination.exactpoly import (
    Polynomial,
    build_gs_poly,
    gs_critical_points,
    is_convex_poly,
    isolate_real_roots,
    narrow,
)
from illumination.function import Function
from illumination.thetalines import count_normals

HALF_PI = math.pi / 2


class Timer:
    def __init__(self, limit):
        self.limit = limit

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        if exc[0] is None:
            assert self.elapsed < self.limit, f"took {self.elapsed:.2f}s, limit {self.limit}s"


def xatanx_region_index(s, t):
    """Index from the region formulas for x*atan(x), written out case by case."""
    if s < 0:
        if -HALF_PI * s - 1 < t < s * math.atan(s):
            return 2
        if HALF_PI * s - 1 < t <= -HALF_PI * s - 1:
            return 1
        if t <= HALF_PI * s - 1:
            return 0
    else:
        if HALF_PI * s - 1 < t < s * math.atan(s):
            return 2
        if s > 0 and -HALF_PI * s - 1 < t <= HALF_PI * s - 1:
            return 1
        if t <= -HALF_PI * s - 1:
            return 0
    return 0 if t > s * math.atan(s) else None


def exp_region_index(s, t):
    if 0 < t < math.exp(s):
        return 2
    if t <= 0:
        return 1
    return 0


def bisect(fun, a, b, tol=1e-13):
    fa = fun(a)
    while b - a > tol:
        m = (a + b) / 2
        fm = fun(m)
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return (a + b) / 2


def rand_poly(rng, degree, lo=-5, hi=5):
    coeffs = [F(rng.randint(lo, hi)) for _ in range(degree)]
    lead = 0
    while lead == 0:
        lead = rng.randint(lo, hi)
    return Polynomial(coeffs + [F(lead)])


def test_criterion_01_xatanx_fixtures():
    with Timer(1.0):
        f = Function("x*atan(x)")
        cases = {(0, F(-1, 2)): 2, (2, 0): 1, (0, -2): 0, (2, F(22, 10)): 2, (2, -5): 0}
        for (s, t), want in cases.items():
            res = illumination_index(f, (s, t))
            assert res.method == "convex-theorem"
            assert res.index == want == xatanx_region_index(float(s), float(t))
        for s in np.linspace(-3, 3, 13):
            for dt in (0.01, 0.5, 3.0):
                t = float(s * math.atan(s)) + dt
                assert illumination_index(f, (float(s), t)).index == 0


def test_criterion_02_exp_fixtures():
    with Timer(1.0):
        f = Function("exp(x)")
        res = illumination_index(f, (0, F(1, 2)))
        assert res.index == 2 == exp_region_index(0, 0.5)
        g = lambda c: math.exp(c) * (1 - c) - 0.5  # noqa: E731
        oracle = [bisect(g, -5.0, 0.0), bisect(g, 0.0, 5.0)]
        found = sorted(r.c for r in res.tangencies)
        assert len(found) == 2
        for a, b in zip(found, oracle):
            assert abs(a - b) <= 1e-6
        assert abs(oracle[0] + 1.678) < 1e-3 and abs(oracle[1] - 0.768) < 1e-3
        assert illumination_index(f, (0, -3)).index == 1
        assert illumination_index(f, (0, 2)).index == 0


def test_criterion_03_exact_fixtures():
    with Timer(1.0):
        def exact_abscissae(res):
            out = []
            for r in res.tangencies:
                assert r.abscissa.is_exact
                out.append(r.abscissa.lo)
            return sorted(out)

        r = illumination_index("x^2", (0, -1))
        assert r.index == 2 and exact_abscissae(r) == [-1, 1]
        r = illumination_index("x^3", (1, 0))
        assert r.index == 2 and exact_abscissae(r) == [0, F(3, 2)]
        assert illumination_index("x^3", (1, F(1, 2))).index == 3
        r = illumination_index("x^5", (1, 0))
        assert r.index == 2 and exact_abscissae(r) == [0, F(5, 4)]
        r = illumination_index("x^4-2*x^2", (0, -1))
        assert r.index == 1 and len(r.tangencies) == 2
        assert all(x.method == "exact-poly" for x in [r])


def _convex_poly(rng):
    # f'' = q^2 + k with k >= 0, integrated twice
    q = rand_poly(rng, rng.randint(0, 3), -3, 3)
    d2 = q * q + Polynomial([F(rng.randint(0, 2))])
    d1 = Polynomial([F(rng.randint(-3, 3))] + [c / (i + 1) for i, c in enumerate(d2.coeffs)])
    return Polynomial([F(rng.randint(-3, 3))] + [c / (i + 1) for i, c in enumerate(d1.coeffs)])


def test_criterion_04_convex_cap():
    rng = random.Random(4)
    with Timer(10.0):
        done = 0
        while done < 500:
            f = _convex_poly(rng)
            assert f.degree % 2 == 0 and f.degree <= 8
            assert is_convex_poly(f)
            s = F(rng.randint(-400, 400), 100)
            t = f(s) + F(rng.randint(-800, 800), 100)
            if t == f(s):
                continue
            assert illumination_index(f, (s, t)).index <= 2
            done += 1


def test_criterion_05_quintic_bound():
    rng = random.Random(5)
    f = Polynomial([0, 0, 0, 0, 0, 1])
    with Timer(5.0):
        done = 0
        while done < 1000:
            kind = done % 4
            s = F(rng.randint(-500, 500), 100)
            t = F(rng.randint(-5000, 5000), 100)
            if kind == 1:
                s = F(0)
            elif kind == 2:
                t = F(0)
                if s == 0:
                    continue
            if f(s) == t:
                continue
            k = illumination_index(f, (s, t)).index
            assert k <= 3
            if s == 0:
                assert k == 1
            elif t == 0:
                assert k == 2
            done += 1


def _indices_along(f, s, wanted):
    """Search t at s: beyond, between and next to the critical values of g_s.

    Returns ``{index: (s, t)}`` for the indices in ``wanted`` that were found.
    """
    h0 = build_gs_poly(f, s, 0)
    vals = []
    for iv in gs_critical_points(f, s):
        if iv.is_exact:
            vals.append(h0(iv.lo))
        else:
            x = narrow(h0.derivative(), iv, F(1, 10**12)).midpoint
            vals.append(F(float(h0(x))).limit_denominator(10**6))
    vals = sorted(set(vals))
    ts = [(a + b) / 2 for a, b in zip(vals, vals[1:])]
    if vals:
        ts += [vals[0] - 1, vals[-1] + 1] + vals
        ts += [v + d for v in vals for d in (F(1, 10**4), -F(1, 10**4))]
    else:
        ts += [F(-1), F(1)]
    found = {}
    for t in ts:
        if f(s) == t:
            continue
        k = illumination_index(f, (s, t)).index
        if k in wanted:
            found.setdefault(k, (s, t))
            if set(wanted) <= set(found):
                break
    return found


def test_criterion_06_cubic_realization():
    rng = random.Random(6)
    with Timer(5.0):
        for _ in range(20):
            f = rand_poly(rng, 3)
            d = -f.coeffs[2] / (3 * f.coeffs[3])
            s = d + 1
            crit = gs_critical_points(f, s)
            assert sorted(iv.lo for iv in crit) == sorted([s, d])
            found = _indices_along(f, s, {1, 2, 3})
            assert {1, 2, 3} <= set(found), (f, found)


def _inflection_points(f):
    out = []
    for iv in isolate_real_roots(f.derivative(2)):
        if iv.multiplicity % 2 == 1:
            x = iv.lo if iv.is_exact else narrow(f.derivative(2), iv, F(1, 10**6)).midpoint
            out.append(F(float(x)).limit_denominator(1000))
    return out


def test_criterion_07_odd_and_even_degree():
    rng = random.Random(7)
    with Timer(10.0):
        for i in range(10):
            f = rand_poly(rng, 5 if i % 2 == 0 else 7, -3, 3)
            infl = _inflection_points(f)
            assert infl
            hit = False
            for d in infl:
                for delta in (F(1), F(1, 4), F(1, 16), F(-1), F(-1, 4)):
                    if 3 in _indices_along(f, d + delta, {3}):
                        hit = True
                        break
                if hit:
                    break
            assert hit, f
        for i in range(10):
            f = rand_poly(rng, 4 if i % 2 == 0 else 6, -3, 3)
            found = {}
            for s in (F(0), F(1), F(-1), F(1, 2)):
                found.update({k: v for k, v in _indices_along(f, s, {0, 2}).items() if k not in found})
                if {0, 2} <= set(found):
                    break
            assert {0, 2} <= set(found), (f, found)


def test_criterion_08_gs_polynomial_expansion():
    rng = random.Random(8)
    with Timer(2.0):
        for _ in range(200):
            f = rand_poly(rng, rng.randint(2, 8), -9, 9)
            s = F(rng.randint(-50, 50), rng.randint(1, 9))
            t = F(rng.randint(-50, 50), rng.randint(1, 9))
            direct = f + (Polynomial([s]) - Polynomial.x()) * f.derivative() - Polynomial([t])
            assert build_gs_poly(f, s, t).coeffs == direct.coeffs


def test_criterion_09_derivative_identity():
    rng = random.Random(9)
    with Timer(2.0):
        for _ in range(100):
            f = rand_poly(rng, rng.randint(2, 9), -9, 9)
            s = F(rng.randint(-50, 50), rng.randint(1, 9))
            g = build_gs_poly(f, s, 0)
            lin = Polynomial([s]) - Polynomial.x()
            for k in range(1, 5):
                rhs = lin * f.derivative(k + 1) - Polynomial([F(k - 1)]) * f.derivative(k)
                assert g.derivative(k) == rhs


def test_criterion_10_xatanx_tail():
    f = Function("x*atan(x)")
    with Timer(0.1):
        assert abs(gs_eval(f, 0, 1e3) - (-1)) <= 1.1e-6


def test_criterion_11_normal_floor():
    rng = random.Random(11)
    with Timer(10.0):
        pool = ["x*atan(x)", "exp(x)"]
        for _ in range(200):
            choice = rng.random()
            if choice < 0.6:
                fn = Function(rand_poly(rng, rng.randint(1, 5), -4, 4))
            else:
                fn = Function(pool[rng.randint(0, 1)])
            s = rng.uniform(-4, 4)
            t = fn.value(s) + rng.choice([-1, 1]) * rng.uniform(0.05, 6)
            assert count_normals(fn, (s, t)).count >= 1
        assert count_normals("x^2", (0, 2)).count == 3
        assert count_normals("x^2", (0, -1)).count == 1


def _grid_agreement(text, asymptotes):
    f = Function(text)
    agree = total = 0
    unexplained = []
    for s in (-3 + 6 * (i + 0.5) / 100 for i in range(100)):
        for t in (-5 + 8 * (j + 0.5) / 100 for j in range(100)):
            if abs(t - f.value(s)) <= 1e-3 or any(abs(t - L(s)) <= 1e-3 for L in asymptotes):
                continue
            verdict = convexity.theorem_verdict(f, s, t)
            assert verdict is not None
            res = illumination_index(f, (s, t), method="numeric")
            total += 1
            if res.index == verdict.index:
                agree += 1
            elif not any(d.startswith("window-truncation") for d in res.diagnostics):
                unexplained.append((s, t, verdict.index, res.index))
    return agree, total, unexplained


def test_criterion_12_theorem_vs_numeric_grid():
    with Timer(15.0):
        for text, asym in (
            ("x*atan(x)", [lambda s: HALF_PI * s - 1, lambda s: -HALF_PI * s - 1]),
            ("exp(x)", [lambda s: 0.0]),
        ):
            agree, total, unexplained = _grid_agreement(text, asym)
            assert total > 9000
            assert agree >= 0.995 * total, (text, agree, total)
            assert not unexplained, unexplained[:5]


def test_criterion_13_cli_determinism(tmp_path):
    commands = [
        ["index", "--fn", "x*atan(x)", "--point", "0,-0.5"],
        ["tangents", "--fn", "x^4-2*x^2", "--point", "0,-1"],
        ["tangents", "--fn", "exp(x)", "--point", "0,1/2", "--method", "numeric"],
        ["normals", "--fn", "x^2", "--point", "0,2"],
        ["theta", "--fn", "x^3", "--point", "1,0.5", "--angle", "0.3"],
        ["multitangents", "--fn", "x^4-2*x^2"],
        ["region", "--fn", "exp(x)", "--rect", "-2,2,-1,3", "--res", "8,8", "--out", "-"],
    ]
    for cmd in commands:
        outs = [
            subprocess.run([sys.executable, "-m", "illumination", *cmd], capture_output=True, check=True).stdout
            for _ in range(2)
        ]
        assert outs[0] == outs[1] and outs[0]


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
