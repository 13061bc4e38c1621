from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pentagram_lab.closure import (
    INITIAL_LINES,
    UNIT_SQUARE,
    WindowPolynomial,
    close_up,
    closure_polynomials,
    closure_window,
    propagate_ray_geometric,
    pu_inner,
    pu_polygon,
    reconstruct_lines,
    reconstruct_points,
    scaling_residual,
    solve_closure,
)
from pentagram_lab.corners import to_ray_order
from pentagram_lab.geom import Line, Point, join
from pentagram_lab.invariants import EVEN
from pentagram_lab.numerics import make_rng, valuation_estimate
from pentagram_lab.polygon import extract_corners, is_convex, random_convex_polygon

from helpers import rational_vector

F = Fraction
T, S, R = F(3, 7), F(5, 11), F(13, 17)


def test_ray_starts_at_unit_square(rng):
    pts = propagate_ray_geometric(rational_vector(rng, 10), 9)
    assert [Point(*p) for p in UNIT_SQUARE] == pts[:4]


def test_pu_ray_is_convex_heptagon():
    from pentagram_lab.polygon import ClosedPolygon

    pts = propagate_ray_geometric(pu_inner(7, F(1, 10)), 7)
    assert is_convex(ClosedPolygon(tuple(pts)))


def test_propagation_needs_values():
    with pytest.raises(ValueError):
        propagate_ray_geometric((F(1),) * 3, 7)


def _x(**vals):
    x = [F(0)] * 12
    for k, v in vals.items():
        x[int(k[1:])] = v
    return x


def test_window_examples_short():
    assert WindowPolynomial(1, 1)(_x()) == 1
    assert WindowPolynomial(1, 3)(_x(x2=T)) == 1
    assert WindowPolynomial(1, 5)(_x(x3=T)) == 1 - T
    assert WindowPolynomial(None, 3)(_x(x1=T)) == 1 - T


def test_window_1_7_literal_expansion():
    # singles x3, x5 and the triple x3 x4 x5 lie strictly inside (1, 7)
    val = WindowPolynomial(1, 7)(_x(x3=T, x4=S, x5=R))
    assert val == 1 - T + T * S * R - R


@pytest.mark.parametrize("parity", ["O", "E"])
def test_window_signs_follow_singleton_count(parity):
    # a triple has exactly one variable of the parity opposite to the singles
    single_parity = 1 if parity == "O" else 0
    for sign, vs in WindowPolynomial(None, 11, parity).terms:
        triples = sum(1 for i in vs if i % 2 != single_parity)
        singles = len(vs) - 3 * triples
        assert sign == (-1) ** singles


@pytest.mark.parametrize("k", [0, 2, 4, 6, 8])
def test_point_reconstruction_matches_geometry(rng, k):
    x = rational_vector(rng, 24)
    geo = propagate_ray_geometric(x, 5 + k // 2 + 1)
    assert reconstruct_points(x, k) == geo[4 + k // 2]


def test_point_reconstruction_examples():
    assert tuple(reconstruct_points(_x(), 0)) == (0, 1, 1)
    t = T
    p = reconstruct_points(_x(x0=t, x1=t), 0)
    assert p == Point(t * t - t, 1 - t, 1 - t + t * t)


def test_point_reconstruction_rejects_odd_k():
    with pytest.raises(ValueError):
        reconstruct_points(_x(), 1)


def test_initial_lines():
    assert Line(*INITIAL_LINES[-5]) == Line(0, 1, 0)
    sq = [Point(*p) for p in UNIT_SQUARE]
    # L_{-5} through P_{-7}, P_{-3}; L_{-1} through P_{-3}, P_1; L_3 through P_1, P_5
    assert Line(*INITIAL_LINES[-5]) == join(sq[0], sq[1])
    assert Line(*INITIAL_LINES[-1]) == join(sq[1], sq[2])
    assert Line(*INITIAL_LINES[3]) == join(sq[2], sq[3])


@pytest.mark.parametrize("k", [0, 2, 4, 6])
def test_line_reconstruction_matches_geometry(rng, k):
    x = rational_vector(rng, 24)
    geo = propagate_ray_geometric(x, 5 + k // 2 + 1)
    assert reconstruct_lines(x, k) == join(geo[3 + k // 2], geo[4 + k // 2])


@pytest.mark.parametrize("k", [0, 4, 8])
def test_scaling_relation_is_exact(rng, k):
    assert all(c == 0 for c in scaling_residual(rational_vector(rng, 24), k))


@pytest.mark.parametrize("n", range(5, 10))
def test_closure_polynomials_vanish_on_closed_polygons(n):
    v = extract_corners(random_convex_polygon(n, 17))
    vals = closure_polynomials(v)
    assert len(vals) == 2 * n
    assert all(c == 0 for c in vals)


def test_closure_polynomials_detect_twist(rng):
    assert any(c != 0 for c in closure_polynomials(rational_vector(rng, 14)))


@pytest.mark.parametrize("n", range(5, 11))
def test_closure_window_uses_consecutive_variables(n):
    assert closure_window(n).variables() == list(range(1, 2 * n - 6))


@settings(max_examples=10, deadline=None)
@given(st.integers(7, 9), st.integers(0, 2**31))
def test_solver_reproduces_close_up(n, seed):
    v = extract_corners(random_convex_polygon(n, seed))
    inner = to_ray_order(v)[: 2 * n - 8]
    assert solve_closure(n, inner) == close_up(n, inner).corners.x == v.x


def test_closure_window_is_affine_in_top_variable(rng):
    n = 8
    p = closure_window(n)
    x = list(rational_vector(rng, 2 * n - 6))
    top = 2 * n - 7
    vals = []
    for t in (F(0), F(1), F(2)):
        x[top] = t
        vals.append(p(x))
    assert vals[2] - 2 * vals[1] + vals[0] == 0


def test_close_up_domain():
    with pytest.raises(ValueError):
        close_up(6, (F(1, 2),) * 4)
    with pytest.raises(ValueError):
        close_up(7, (F(1, 2),) * 5)


def test_pu_heptagon_outer_values():
    u = F(1, 10)
    chart = pu_polygon(7, u)
    assert is_convex(chart.polygon)
    a, b, c, d, d2, c2, b2, a2 = chart.outer
    assert (a, b, c, d) == (a2, b2, c2, d2)
    for e in (b, c, d):
        assert abs(e - 1) <= 10 * u


def test_pu_leading_coefficient():
    u = F(1, 1000)
    a = pu_polygon(7, u).outer[0]
    assert F(9, 10) <= a / u**6 <= F(11, 10)


def test_pu_valuation_of_a():
    assert valuation_estimate(lambda t: pu_polygon(7, t).outer[0], F(1, 1000)) == 6


def test_pu_inner_block():
    u = F(1, 100)
    chart = pu_polygon(9, u)
    assert chart.inner == (u, u**2, u**3, u**4, u**5, u**5, u**4, u**3, u**2, u)
    assert to_ray_order(chart.corners)[:10] == chart.inner
    assert all(isinstance(c, Fraction) for p in chart.polygon.vertices for c in p)


def test_palindromic_inner_gives_symmetric_outer(rng):
    half = rational_vector(rng, 3, 1, 2**12)
    chart = close_up(7, half + half[::-1])
    a, b, c, d, d2, c2, b2, a2 = chart.outer
    assert (a, b, c, d) == (a2, b2, c2, d2)


def test_chart_json_fields():
    d = pu_polygon(7, F(1, 10)).as_dict()
    assert d["u"] == "1/10" and len(d["outer"]) == 8 and len(d["inner"]) == 6


def test_even_window_parity(rng):
    x = rational_vector(rng, 12)
    p = WindowPolynomial(None, 4, EVEN)
    # E parity: singles at even indices 0, 2 and the triple x0 x1 x2
    assert p(x) == 1 - x[0] - x[2] + x[0] * x[1] * x[2]


def test_reference_window_1_7_contradicts_geometry(rng):
    # P_17 uses O_1^7; dropping the -x5 term from it breaks agreement with the ray
    x = rational_vector(rng, 24)
    geo = propagate_ray_geometric(x, 7)[6]
    assert reconstruct_points(x, 4) == geo
    ob = WindowPolynomial(None, 7)(x)
    o1_reference = 1 - x[3] + x[3] * x[4] * x[5]
    tail = x[0] * x[1] * WindowPolynomial(3, 7)(x)
    alt = Point(ob - o1_reference + tail, ob, ob + tail)
    assert alt != geo
