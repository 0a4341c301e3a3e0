import math
import random
from fractions import Fraction as F

import pytest

from illumination.engine import (
    OnGraphError,
    dedup_lines,
    gs_eval,
    illumination_index,
    point_on_graph,
    tangencies_exact,
    tangencies_numeric,
)
from illumination.exactpoly import Polynomial, is_convex_poly


def test_gs_eval_examples():
    assert math.isclose(gs_eval("x*atan(x)", 0, 1), -0.5)
    assert gs_eval("exp(x)", 0, 1) == 0.0
    for text, f in (("x^3-x", lambda x: x**3 - x), ("exp(x)", math.exp), ("x*atan(x)", lambda x: x * math.atan(x))):
        for s in (-2.0, 0.7, 3.0):
            assert gs_eval(text, s, s) == pytest.approx(f(s), rel=1e-15)


def test_point_on_graph():
    assert point_on_graph("x^2", (2, 4))
    assert not point_on_graph("x^2", (2, 3))
    assert point_on_graph("x*atan(x)", (0, 0))
    with pytest.raises(OnGraphError):
        illumination_index("x^2", (2, 4))


def test_tangencies_exact_examples():
    recs = tangencies_exact(Polynomial([0, 0, 1]), (0, -1))
    assert [r.abscissa.lo for r in recs] == [-1, 1]
    assert [(r.line.slope, r.line.intercept) for r in recs] == [(-2, -1), (2, -1)]
    recs = tangencies_exact(Polynomial([0, 0, 0, 1]), (1, 0))
    assert [(r.abscissa.lo, r.multiplicity) for r in recs] == [(0, 2), (F(3, 2), 1)]
    assert (recs[1].line.slope, recs[1].line.intercept) == (F(27, 4), F(-27, 4))
    recs = tangencies_exact(Polynomial([0, 0, 0, 0, 0, 1]), (1, 0))
    assert [(r.abscissa.lo, r.multiplicity) for r in recs] == [(0, 4), (F(5, 4), 1)]


def test_dedup_examples():
    f = Polynomial([0, 0, -2, 0, 1])
    groups = dedup_lines(tangencies_exact(f, (0, -1)), f, (0, -1))
    assert len(groups) == 1 and len(groups[0]) == 2
    g = Polynomial([0, 0, 1])
    assert len(dedup_lines(tangencies_exact(g, (0, -1)), g, (0, -1))) == 2
    assert dedup_lines([]) == []


def test_numeric_examples():
    recs, diags = tangencies_numeric("x*atan(x)", (0, F(-1, 2)), (-1e3, 1e3))
    assert [round(r.c, 9) for r in recs] == [-1.0, 1.0]
    recs, _ = tangencies_numeric("exp(x)", (0, F(1, 2)))
    assert [round(r.c, 3) for r in recs] == [-1.678, 0.768]
    recs, _ = tangencies_numeric("exp(x)", (0, 0))
    assert len(recs) == 1 and math.isclose(recs[0].c, 1.0, rel_tol=1e-10)


def test_numeric_flags_window_truncation():
    # g_0 of x*atan(x) tends to -1 in both tails, so t = -1 + 1e-7 leaves the ends within 1e-6
    _, diags = tangencies_numeric("x*atan(x)", (0, -1 + 1e-7), (-1e3, 1e3))
    assert any(d.startswith("window-truncation") for d in diags)


def test_index_examples():
    r = illumination_index("x^3", (1, F(1, 2)))
    assert r.index == 3 and r.method == "exact-poly"
    r = illumination_index("x*atan(x)", (0, -0.5))
    assert r.index == 2 and r.method == "convex-theorem"
    assert r.verdict.startswith("two-asymptotes")
    r = illumination_index("x^4-2*x^2", (0, -1))
    assert r.index == 1 and len(r.tangencies) == 2


def test_linear_has_no_tangents_through_off_points():
    assert illumination_index("3*x+1", (0, 0)).index == 0


def test_theorem_requires_certificate():
    from illumination.convexity import NoCertificateError

    with pytest.raises(NoCertificateError):
        illumination_index("x^3", (0, 1), method="theorem")
    with pytest.raises(ValueError):
        illumination_index("exp(x)", (0, 0.5), method="exact")


def test_tangency_residual():
    rng = random.Random(31)
    for _ in range(60):
        f = Polynomial([F(rng.randint(-5, 5)) for _ in range(rng.randint(3, 7))] + [F(rng.choice([-2, -1, 1, 2]))])
        s, t = rng.uniform(-3, 3), rng.uniform(-10, 10)
        for method in ("exact", "numeric"):
            res = illumination_index(f, (s, t), method=method)
            for rec in res.tangencies:
                m, b = float(rec.line.slope), float(rec.line.intercept)
                assert abs(m * s + b - t) <= 1e-8 * (1 + abs(t)) * (1 + abs(m))


def _rand_poly(rng, degree):
    return Polynomial([F(rng.randint(-5, 5)) for _ in range(degree)] + [F(rng.choice([-3, -2, -1, 1, 2, 3]))])


def test_exact_and_numeric_paths_agree():
    rng = random.Random(41)
    disagreements = []
    for i in range(500):
        f = _rand_poly(rng, rng.randint(2, 6))
        s = F(rng.randint(-300, 300), 100)
        t = f(s) + F(rng.randint(-2000, 2000), 100)
        if t == f(s):
            continue
        a = illumination_index(f, (s, t), method="exact").index
        n = illumination_index(f, (s, t), method="numeric")
        if a != n.index:
            disagreements.append((f, s, t, a, n.index, n.diagnostics))
    assert not disagreements, disagreements[:3]


def test_odd_degree_floor_and_convex_rules():
    rng = random.Random(43)
    for _ in range(150):
        f = _rand_poly(rng, rng.choice([3, 5, 7]))
        s, t = F(rng.randint(-300, 300), 100), F(rng.randint(-3000, 3000), 100)
        if f(s) != t:
            assert illumination_index(f, (s, t)).index >= 1
    for _ in range(150):
        f = _rand_poly(rng, rng.choice([2, 4, 6]))
        if not is_convex_poly(f):
            continue
        s = F(rng.randint(-300, 300), 100)
        for dt in (F(1, 7), F(5), F(-1, 7), F(-5)):
            k = illumination_index(f, (s, f(s) + dt)).index
            assert k == (0 if dt > 0 else 2)


def test_theorem_and_numeric_methods_report():
    r = illumination_index("exp(x)", (0, F(1, 2)), method="numeric")
    assert r.method == "numeric-scan" and r.index == 2
    r = illumination_index("exp(x)", (0, F(1, 2)), method="theorem")
    assert r.method == "convex-theorem" and r.index == 2 and len(r.groups) == 2
