"""Closed and twisted polygons, the geometric pentagram map, corner extraction."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .corners import CornerVector
from .geom import (
    Point,
    ProjectiveMap,
    are_collinear,
    inverse_cross_ratio,
    join,
    map_from_correspondence,
    meet,
    projectively_equal,
)
from .numerics import DENOMINATOR, make_rng, value_of

# Cyclic relabelling applied after the raw diagonal intersections so that the
# geometric map matches the right-labelled coordinate formula.  Found by
# comparing both sides at n = 7 on generic rational heptagons; asserted for
# n = 5..10 in the tests.
LABEL_OFFSET = 0


@dataclass(frozen=True)
class ClosedPolygon:
    vertices: tuple

    def __post_init__(self):
        vs = tuple(v if isinstance(v, Point) else Point(*v) for v in self.vertices)
        object.__setattr__(self, "vertices", vs)
        n = len(vs)
        if n < 5:
            raise ValueError("closed polygon needs n >= 5")
        for i in range(n):
            if are_collinear(vs[i - 1], vs[i], vs[(i + 1) % n]):
                raise ValueError(f"consecutive vertices {i - 1}, {i}, {i + 1} are collinear")

    @property
    def n(self) -> int:
        return len(self.vertices)

    def v(self, i: int) -> Point:
        """Vertex v_i, 1-based and cyclic."""
        return self.vertices[(i - 1) % self.n]

    def transformed(self, m: ProjectiveMap) -> "ClosedPolygon":
        return ClosedPolygon(tuple(m(v) for v in self.vertices))

    def relabeled(self, shift: int, reflect: bool = False) -> "ClosedPolygon":
        vs = self.vertices
        if reflect:
            vs = tuple(reversed(vs))
        shift %= self.n
        return ClosedPolygon(vs[shift:] + vs[:shift])

    def affine(self) -> list[tuple[float, float]]:
        out = []
        for p in self.vertices:
            z = float(value_of(p[2]))
            if z == 0:
                raise ValueError("choose different affine patch")
            out.append((float(value_of(p[0])) / z, float(value_of(p[1])) / z))
        return out


@dataclass(frozen=True)
class TwistedRay:
    """A finite prefix of a twisted n-gon together with its monodromy."""

    n: int
    vertices: tuple
    monodromy: ProjectiveMap

    def check(self) -> bool:
        vs = self.vertices
        return all(
            projectively_equal(self.monodromy(vs[i]), vs[i + self.n])
            for i in range(len(vs) - self.n)
        )


def _raw_pentagram(vs):
    n = len(vs)
    out = []
    for i in range(n):
        d1 = join(vs[i - 1], vs[(i + 1) % n])
        d2 = join(vs[i], vs[(i + 2) % n])
        out.append(meet(d1, d2))
    return out


def pentagram_map_geometric(p: ClosedPolygon) -> ClosedPolygon:
    """Vertex i of the image is (v_{i-1} v_{i+1}) meet (v_i v_{i+2}), relabelled."""
    try:
        raw = _raw_pentagram(p.vertices)
        r = LABEL_OFFSET % p.n
        return ClosedPolygon(tuple(raw[r:] + raw[:r]))
    except ValueError as exc:
        raise ValueError("map undefined at input") from exc


def _corner_pair(vs, i):
    """(x_{2i-1}, x_{2i}) for a vertex sequence accessed as vs(i)."""
    a, b, c, d, e = vs(i - 2), vs(i - 1), vs(i), vs(i + 1), vs(i + 2)
    l_ab = join(a, b)
    odd = inverse_cross_ratio(a, b, meet(l_ab, join(c, d)), meet(l_ab, join(d, e)))
    l_ed = join(e, d)
    even = inverse_cross_ratio(e, d, meet(l_ed, join(c, b)), meet(l_ed, join(b, a)))
    return odd, even


def extract_corners(p: ClosedPolygon) -> CornerVector:
    """The 2n corner invariants x_{2i-1}, x_{2i} of a closed polygon."""
    x = []
    for i in range(1, p.n + 1):
        try:
            x.extend(_corner_pair(p.v, i))
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"corner invariant undefined at flag {2 * i - 1}") from exc
    return CornerVector(tuple(x))


def ray_corners(vertices: Sequence, n: int) -> CornerVector:
    """Corner invariants of a twisted n-gon read off a prefix of its vertices.

    Uses vertices v_1..v_{n+4} (0-based list entries 0..n+3) and reports x_5..
    x_{2n+4}, rotated back into positions 1..2n.
    """
    if len(vertices) < n + 4:
        raise ValueError("ray prefix too short")

    def vs(i):
        return vertices[i - 1]

    x = [None] * (2 * n)
    for i in range(3, n + 3):
        odd, even = _corner_pair(vs, i)
        x[(2 * i - 2) % (2 * n)] = odd
        x[(2 * i - 1) % (2 * n)] = even
    return CornerVector(tuple(x))


def monodromy_of_ray(r: TwistedRay | Sequence, n: int | None = None) -> ProjectiveMap:
    """The map taking V_1..V_4 to V_{n+1}..V_{n+4}."""
    if isinstance(r, TwistedRay):
        vertices, n = r.vertices, r.n
    else:
        vertices = r
    if n is None or len(vertices) < n + 4:
        raise ValueError("monodromy undefined")
    try:
        return map_from_correspondence(vertices[:4], vertices[n : n + 4])
    except ValueError as exc:
        raise ValueError("monodromy undefined") from exc


def is_convex(p: ClosedPolygon) -> bool:
    """All turns in the affine patch z = 1 have one strict sign."""
    pts = p.affine()
    n = len(pts)
    signs = set()
    for i in range(n):
        (x0, y0), (x1, y1), (x2, y2) = pts[i - 1], pts[i], pts[(i + 1) % n]
        c = (x1 - x0) * (y2 - y1) - (y1 - y0) * (x2 - x1)
        if c == 0:
            return False
        signs.add(c > 0)
    if len(signs) != 1:
        return False
    # reject star polygons: total turning of one full revolution
    import math

    total = 0.0
    for i in range(n):
        (x0, y0), (x1, y1), (x2, y2) = pts[i - 1], pts[i], pts[(i + 1) % n]
        a1 = math.atan2(y1 - y0, x1 - x0)
        a2 = math.atan2(y2 - y1, x2 - x1)
        d = (a2 - a1 + math.pi) % (2 * math.pi) - math.pi
        total += d
    return abs(abs(total) - 2 * math.pi) < 1e-6


def projectively_equivalent(p: ClosedPolygon, q: ClosedPolygon, allow_relabel: bool = False) -> bool:
    """Whether some projective map carries p onto q vertex by vertex."""
    if p.n != q.n:
        return False
    candidates = [q]
    if allow_relabel:
        candidates = [q.relabeled(s, r) for r in (False, True) for s in range(q.n)]
    for cand in candidates:
        try:
            m = map_from_correspondence(p.vertices[:4], cand.vertices[:4])
        except ValueError as exc:
            raise ValueError("equivalence test undefined") from exc
        if all(projectively_equal(m(v), w) for v, w in zip(p.vertices, cand.vertices)):
            return True
    return False


def regular_polygon(n: int, field: str = "f64") -> ClosedPolygon:
    """Regular n-gon on the unit circle (float coordinates)."""
    import math

    pts = [(math.cos(2 * math.pi * k / n), math.sin(2 * math.pi * k / n), 1.0) for k in range(n)]
    return ClosedPolygon(tuple(Point(*p) for p in pts))


def random_convex_polygon(n: int, seed: int, field: str = "rational") -> ClosedPolygon:
    """A convex n-gon with rational vertices, deterministic in the seed.

    Vertices start on an ellipse at sorted random parameters t = k / 2^16 of
    the rational circle parametrization.  Polygons inscribed in a conic are
    special (they satisfy O_k = E_k), so each vertex is then pushed outward
    radially by a small random rational factor; the push is halved until the
    result is convex.
    """
    if n < 5:
        raise ValueError("n must be at least 5")
    rng = make_rng(seed)
    ks: set[int] = set()
    while len(ks) < n:
        # spread parameters so the angles cover the circle
        ks.add(int(rng.integers(-4 * DENOMINATOR, 4 * DENOMINATOR + 1)))
    a = Fraction(int(rng.integers(DENOMINATOR // 2, 2 * DENOMINATOR)), DENOMINATOR)
    b = Fraction(int(rng.integers(DENOMINATOR // 2, 2 * DENOMINATOR)), DENOMINATOR)
    base = []
    for k in sorted(ks):
        t = Fraction(k, DENOMINATOR)
        den = 1 + t * t
        base.append((a * (1 - t * t) / den, b * 2 * t / den))
    push = [Fraction(int(rng.integers(1, DENOMINATOR + 1)), 8 * DENOMINATOR) for _ in range(n)]
    for halvings in range(64):
        scale = Fraction(1, 2**halvings)
        verts = [(x * (1 + scale * d), y * (1 + scale * d), Fraction(1)) for (x, y), d in zip(base, push)]
        p = ClosedPolygon(tuple(Point(*v) for v in verts))
        if is_convex(p):
            break
    else:  # pragma: no cover - the unperturbed ellipse polygon is convex
        p = ClosedPolygon(tuple(Point(x, y, Fraction(1)) for x, y in base))
    if field == "f64":
        p = ClosedPolygon(tuple(Point(*(float(c) for c in v)) for v in p.vertices))
    return p


# ---------------------------------------------------------------------------
# Float64 orbits


def _np_cross(a, b):
    return np.cross(a, b)


def _fcross(a, b):
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


def pentagram_step_floats(v: list) -> list:
    """One application of the map to a list of float vertex triples."""
    n = len(v)
    out = [
        _fcross(_fcross(v[i - 1], v[(i + 1) % n]), _fcross(v[i], v[(i + 2) % n]))
        for i in range(n)
    ]
    r = LABEL_OFFSET % n
    return out[r:] + out[:r]


def normalize_frame(v) -> list:
    """Affine patch z = 1, barycenter at the origin, whitened, unit RMS radius.

    Whitening (a Cholesky-type affine map sending the vertex covariance to a
    multiple of the identity) keeps the affine representative from
    flattening as the orbit shrinks; it preserves convexity.
    """
    n = len(v)
    pts = [(p[0] / p[2], p[1] / p[2]) for p in v]
    mx = sum(p[0] for p in pts) / n
    my = sum(p[1] for p in pts) / n
    pts = [(x - mx, y - my) for x, y in pts]
    a = sum(x * x for x, _ in pts) / n
    b = sum(x * y for x, y in pts) / n
    c = sum(y * y for _, y in pts) / n
    if a <= 0:
        raise ValueError("degenerate frame")
    det = c - b * b / a
    if det <= 0:
        raise ValueError("degenerate frame")
    sa, sd = a**0.5, det**0.5
    # covariance becomes I/2, so the RMS radius is 1
    k = 0.5**0.5
    return [(k * x / sa, k * (y - b / a * x) / sd, 1.0) for x, y in pts]


def orbit_array(p: ClosedPolygon, steps: int, power: int = 1) -> np.ndarray:
    """Frames 0..steps of the orbit under T^power, each normalized; shape (frames, n, 3).

    Stops early (returning fewer frames) if a frame degenerates.
    """
    v = normalize_frame([tuple(float(value_of(c)) for c in q) for q in p.vertices])
    frames = [v]
    for _ in range(steps):
        try:
            for _ in range(power):
                v = pentagram_step_floats(v)
            v = normalize_frame(v)
        except (ValueError, ZeroDivisionError):
            break
        frames.append(v)
    return np.array(frames)


def _np_icr(a, b, c, d):
    """Inverse cross ratio of collinear points, batched over the leading axes."""
    num = _np_cross(a, b) * _np_cross(c, d)
    den = _np_cross(a, c) * _np_cross(b, d)
    k = np.argmax(np.abs(den), axis=-1)[..., None]
    return (np.take_along_axis(num, k, -1) / np.take_along_axis(den, k, -1))[..., 0]


def corners_array(frames: np.ndarray) -> np.ndarray:
    """Corner invariants of a batch of closed polygons, shape (..., 2n)."""
    def v(s):
        return np.roll(frames, -s, axis=-2)

    # centre vertex v_i sits at offset 0; a..e are v_{i-2}..v_{i+2}
    a, b, c, d, e = v(-2), v(-1), v(0), v(1), v(2)
    l_ab = _np_cross(a, b)
    odd = _np_icr(a, b, _np_cross(l_ab, _np_cross(c, d)), _np_cross(l_ab, _np_cross(d, e)))
    l_ed = _np_cross(e, d)
    even = _np_icr(e, d, _np_cross(l_ed, _np_cross(c, b)), _np_cross(l_ed, _np_cross(b, a)))
    out = np.empty(frames.shape[:-2] + (2 * frames.shape[-2],))
    out[..., 0::2] = odd
    out[..., 1::2] = even
    return out


def is_convex_array(frames: np.ndarray) -> np.ndarray:
    """Per-frame convexity (one strict turn sign and total turning 2 pi) in the z = 1 patch."""
    xy = frames[..., :2] / frames[..., 2:3]
    e = np.roll(xy, -1, axis=-2) - xy
    turn = e[..., 0] * np.roll(e, -1, axis=-2)[..., 1] - e[..., 1] * np.roll(e, -1, axis=-2)[..., 0]
    one_sign = np.all(turn > 0, axis=-1) | np.all(turn < 0, axis=-1)
    ang = np.arctan2(e[..., 1], e[..., 0])
    d = (np.roll(ang, -1, axis=-1) - ang + np.pi) % (2 * np.pi) - np.pi
    total = np.abs(d.sum(axis=-1))
    return one_sign & (np.abs(total - 2 * np.pi) < 1e-6)
