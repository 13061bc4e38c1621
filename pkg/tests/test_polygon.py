import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pentagram_lab.closure import propagate_ray_geometric, pu_polygon
from pentagram_lab.corners import CornerVector, pentagram_map_coords, to_ray_order
from pentagram_lab.geom import Point, ProjectiveMap
from pentagram_lab.numerics import make_rng, random_rational
from pentagram_lab.polygon import (
    LABEL_OFFSET,
    ClosedPolygon,
    corners_array,
    extract_corners,
    is_convex,
    is_convex_array,
    monodromy_of_ray,
    normalize_frame,
    orbit_array,
    pentagram_map_geometric,
    projectively_equivalent,
    random_convex_polygon,
    ray_corners,
    regular_polygon,
)

from helpers import rational_vector

F = Fraction


def rand_map(rng):
    while True:
        try:
            return ProjectiveMap([[random_rational(rng, -9, 9, 5) for _ in range(3)] for _ in range(3)])
        except ValueError:
            continue


def _affine_corner(a, b, c, d, e):
    """x_{2i-1} at vertex c by affine parameters along line ab (independent oracle)."""

    def intersect(p, q, r, s):
        # p + t (q - p) on line pq meets line rs; solve the 2x2 system
        d1 = (q[0] - p[0], q[1] - p[1])
        d2 = (s[0] - r[0], s[1] - r[1])
        det = d1[0] * (-d2[1]) - d1[1] * (-d2[0])
        rx, ry = r[0] - p[0], r[1] - p[1]
        return (rx * (-d2[1]) - ry * (-d2[0])) / det

    t3 = intersect(a, b, c, d)
    t4 = intersect(a, b, d, e)
    t1, t2 = 0.0, 1.0
    return (t1 - t2) * (t3 - t4) / ((t1 - t3) * (t2 - t4))


def test_regular_pentagon_corners_all_equal():
    p = regular_polygon(5)
    x = extract_corners(p).x
    pts = p.affine()
    oracle = _affine_corner(*(pts[i % 5] for i in range(-2, 3)))
    assert all(abs(c - oracle) < 1e-12 for c in x)


def test_regular_pentagon_is_fixed_up_to_projective_map():
    p = regular_polygon(5)
    assert projectively_equivalent(p, pentagram_map_geometric(p), allow_relabel=True)


def test_regular_hexagon_involution():
    p = regular_polygon(6)
    q = pentagram_map_geometric(pentagram_map_geometric(p))
    assert projectively_equivalent(p, q, allow_relabel=True)


@pytest.mark.parametrize("seed", range(5))
def test_random_pentagon_fixed(seed):
    p = random_convex_polygon(5, seed)
    assert projectively_equivalent(p, pentagram_map_geometric(p), allow_relabel=True)


@pytest.mark.parametrize("seed", range(5))
def test_random_hexagon_involution(seed):
    p = random_convex_polygon(6, seed)
    q = pentagram_map_geometric(pentagram_map_geometric(p))
    # T^2 returns the hexagon with its labels shifted
    assert projectively_equivalent(p, q, allow_relabel=True)


def test_convex_heptagon_stays_convex():
    p = random_convex_polygon(7, 1)
    assert is_convex(p)
    assert is_convex(pentagram_map_geometric(p))


def test_label_offset_is_zero():
    assert LABEL_OFFSET == 0


@settings(max_examples=12, deadline=None)
@given(st.integers(5, 10), st.integers(0, 2**31))
def test_geometric_and_coordinate_maps_commute(n, seed):
    p = random_convex_polygon(n, seed)
    assert extract_corners(pentagram_map_geometric(p)) == pentagram_map_coords(extract_corners(p))


@settings(max_examples=10, deadline=None)
@given(st.integers(5, 9), st.integers(0, 2**31))
def test_corners_projectively_invariant(n, seed):
    p = random_convex_polygon(n, seed)
    m = rand_map(make_rng(seed))
    assert extract_corners(p.transformed(m)) == extract_corners(p)


@pytest.mark.parametrize("n", [5, 6, 7, 9])
def test_corner_round_trip_through_ray(n):
    p = random_convex_polygon(n, 11)
    v = extract_corners(p)
    q = ClosedPolygon(tuple(propagate_ray_geometric(to_ray_order(v), n)))
    assert extract_corners(q) == v
    assert projectively_equivalent(p, q, allow_relabel=True)


def test_closed_polygon_monodromy_is_identity():
    p = random_convex_polygon(7, 2)
    m = monodromy_of_ray(list(p.vertices) * 2, 7)
    assert m.projectively_equal(ProjectiveMap.identity())


def test_ray_corners_consistency(rng):
    n = 7
    x = rational_vector(rng, 2 * n)
    ray = propagate_ray_geometric(x + x, 2 * n + 4)
    v = ray_corners(ray, n)
    assert tuple(v.x) == tuple(CornerVector(x[-4:] + x[:-4]).x)


def test_pu_monodromy_tends_to_identity():
    # P^u with b, c scaled by (1 + u): a twisted polygon approaching P^u as u -> 0
    n = 7
    errs = []
    for u in (F(1, 10), F(1, 100), F(1, 1000)):
        c = list(pu_polygon(n, u).corners.x)
        c[1], c[2] = c[1] * (1 + u), c[2] * (1 + u)
        ray = propagate_ray_geometric(to_ray_order(c) * 2, n + 4)
        m = monodromy_of_ray(ray, n).to_float()
        s33 = m[2, 2]
        errs.append(max(abs(m[i, j] / s33 - (i == j)) for i in range(3) for j in range(3)))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-2


def test_is_convex_examples():
    assert is_convex(regular_polygon(6))
    vs = list(regular_polygon(5).vertices)
    vs[1], vs[2] = vs[2], vs[1]
    assert not is_convex(ClosedPolygon(tuple(vs)))


def test_vertex_at_infinity():
    p = ClosedPolygon((Point(1, 0, 0), Point(0, 1, 1), Point(1, 2, 1), Point(3, 1, 1), Point(2, -1, 1)))
    with pytest.raises(ValueError, match="choose different affine patch"):
        is_convex(p)


def test_equivalence_examples(rng):
    p = random_convex_polygon(7, 4)
    assert projectively_equivalent(p, p.transformed(rand_map(rng)))
    assert not projectively_equivalent(p, random_convex_polygon(7, 5), allow_relabel=True)


def test_random_polygon_is_deterministic():
    assert random_convex_polygon(7, 1) == random_convex_polygon(7, 1)
    assert is_convex(random_convex_polygon(7, 1))
    assert is_convex(random_convex_polygon(12, 3))
    for seed in range(100):
        extract_corners(random_convex_polygon(5, seed))


def test_random_polygon_is_not_conic_inscribed():
    from pentagram_lab.invariants import evaluate_invariants

    iv = evaluate_invariants(extract_corners(random_convex_polygon(7, 3)))
    assert iv.O[1] != iv.E[1]


def test_float_orbit_matches_exact_map():
    p = random_convex_polygon(7, 6)
    frames = orbit_array(p, 3)
    exact = p
    for k in range(4):
        assert np.allclose(corners_array(frames[k : k + 1])[0], [float(c) for c in extract_corners(exact).x], rtol=1e-9)
        exact = pentagram_map_geometric(exact)


def test_normalized_frame_is_centred_and_unit():
    p = random_convex_polygon(9, 2)
    f = np.array(normalize_frame([tuple(float(c) for c in v) for v in p.vertices]))
    xy = f[:, :2] / f[:, 2:]
    assert np.allclose(xy.mean(axis=0), 0, atol=1e-12)
    assert math.isclose(float(np.sqrt((xy**2).sum(axis=1).mean())), 1.0, rel_tol=1e-12)
    assert is_convex_array(f[None])[0]
