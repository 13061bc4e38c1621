"""Projective plane primitives in homogeneous coordinates.

Points and lines are both triples; a line ``(a, b, c)`` is the set
``a*x + b*y + c*z = 0``.  All routines use plain arithmetic so they work over
``Fraction``, ``float`` and :class:`~pentagram_lab.numerics.Jet`.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .numerics import exact_cbrt, is_exact, real_cbrt, value_of

# componentwise relative tolerance for Float64 projective comparisons
FLOAT_RTOL = 1e-9
# relative size below which a Float64 determinant or cross product is degenerate
DEGENERATE_RTOL = 1e-13


def cross(a, b):
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def det3(a, b, c):
    return dot(a, cross(b, c))


def _is_zero(x, scale=None) -> bool:
    x = value_of(x)
    if is_exact(x):
        return x == 0
    if scale is None:
        return x == 0
    return abs(x) <= DEGENERATE_RTOL * scale


def _magnitude(t) -> float:
    return sum(float(value_of(c)) ** 2 for c in t) ** 0.5


class HomogeneousTriple(tuple):
    """Three coordinates up to a nonzero scale.

    Equality is projective.  Exact triples compare exactly; float triples
    compare after first-nonzero normalization with relative tolerance.
    """

    kind = "triple"

    def __new__(cls, *coords):
        if len(coords) == 1:
            coords = tuple(coords[0])
        if len(coords) != 3:
            raise ValueError("homogeneous triple needs exactly 3 coordinates")
        if all(value_of(c) == 0 for c in coords):
            raise ValueError("zero triple is not a projective element")
        return super().__new__(cls, coords)

    @property
    def coords(self):
        return tuple(self)

    def normalized(self):
        """Divide by the first nonzero coordinate."""
        for c in self:
            if value_of(c) != 0:
                return type(self)(*(x / c for x in self))
        raise AssertionError("unreachable")

    def is_exact(self) -> bool:
        return all(is_exact(c) for c in self)

    def __eq__(self, other):
        if not isinstance(other, tuple) or len(other) != 3:
            return NotImplemented
        return projectively_equal(self, other)

    def __ne__(self, other):
        eq = self.__eq__(other)
        return eq if eq is NotImplemented else not eq

    def __hash__(self):
        if self.is_exact():
            return hash((self.kind, tuple(self.normalized())))
        return hash(self.kind)

    def __repr__(self):
        return f"{type(self).__name__}{tuple(self)!r}"


class Point(HomogeneousTriple):
    kind = "point"


class Line(HomogeneousTriple):
    kind = "line"


def projectively_equal(a, b, rtol: float = FLOAT_RTOL) -> bool:
    if all(is_exact(c) for c in a) and all(is_exact(c) for c in b):
        return all(value_of(c) == 0 for c in cross(a, b))
    na = _normalize_floats(a)
    nb = _normalize_floats(b)
    if na is None or nb is None:
        return False
    return all(abs(x - y) <= rtol * max(1.0, abs(x), abs(y)) for x, y in zip(na, nb))


def _normalize_floats(t):
    vals = [float(value_of(c)) for c in t]
    m = max(abs(v) for v in vals)
    if m == 0:
        return None
    # pivot on the largest coordinate for stability
    k = max(range(3), key=lambda i: abs(vals[i]))
    return [v / vals[k] for v in vals]


def join(p, q) -> Line:
    """Line through two distinct points."""
    c = cross(p, q)
    if all(_is_zero(x, _magnitude(p) * _magnitude(q)) for x in c):
        raise ValueError("degenerate join/meet")
    return Line(*c)


def meet(l, m) -> Point:
    """Intersection point of two distinct lines."""
    c = cross(l, m)
    if all(_is_zero(x, _magnitude(l) * _magnitude(m)) for x in c):
        raise ValueError("degenerate join/meet")
    return Point(*c)


def are_collinear(a, b, c) -> bool:
    d = det3(a, b, c)
    return _is_zero(d, _magnitude(a) * _magnitude(b) * _magnitude(c))


def inverse_cross_ratio(a, b, c, d):
    """Inverse cross ratio of four collinear points or concurrent lines.

    Evaluates ``(AxB)*(CxD) / ((AxC)*(BxD))`` componentwise at a coordinate
    whose denominator is nonzero and, when a second such coordinate exists,
    checks that it gives the same value.
    """
    scale = _magnitude(a) * _magnitude(b) * _magnitude(c) * _magnitude(d)
    if not (are_collinear(a, b, c) and are_collinear(a, b, d) and are_collinear(a, c, d)):
        raise ValueError("cross ratio undefined")
    ab, cd, ac, bd = cross(a, b), cross(c, d), cross(a, c), cross(b, d)
    num = [ab[i] * cd[i] for i in range(3)]
    den = [ac[i] * bd[i] for i in range(3)]
    usable = [i for i in range(3) if not _is_zero(den[i], scale)]
    if not usable:
        raise ValueError("indeterminate, perturb input")
    exact = all(is_exact(value_of(x)) for x in den)
    if not exact:
        usable.sort(key=lambda i: -abs(float(value_of(den[i]))))
    i = usable[0]
    chi = num[i] / den[i]
    if len(usable) > 1:
        j = usable[1]
        other = num[j] / den[j]
        cv, ov = value_of(chi), value_of(other)
        if exact:
            if cv != ov:
                raise ValueError("cross ratio undefined")
        elif abs(float(cv) - float(ov)) > 1e-6 * max(1.0, abs(float(cv))):
            raise ValueError("cross ratio undefined")
    return chi


def affine_cross_ratio(t1, t2, t3, t4):
    """[t1,t2,t3,t4] for affine parameters on a line."""
    return (t1 - t2) * (t3 - t4) / ((t1 - t3) * (t2 - t4))


def bracket_coefficient(x, y, normal):
    """Coefficient of ``x`` cross ``y`` along a fixed normal of their common line.

    For points of one line, ``x cross y`` is parallel to the line; the signed
    coefficients behave like 2x2 determinants of homogeneous parameters.
    """
    return dot(cross(x, y), normal)


def solve_fourth(a, b, c, chi):
    """The point D on line(A, B, C) with [A, B, C, D] = chi."""
    normal = _line_normal(a, b, c)
    return tuple(
        bracket_coefficient(a, b, normal) * c[i] - chi * bracket_coefficient(a, c, normal) * b[i]
        for i in range(3)
    )


def solve_first(b, c, d, chi):
    """The point A on line(B, C, D) with [A, B, C, D] = chi."""
    normal = _line_normal(b, c, d)
    return tuple(
        bracket_coefficient(c, d, normal) * b[i] - chi * bracket_coefficient(b, d, normal) * c[i]
        for i in range(3)
    )


def _line_normal(a, b, c):
    n = cross(a, b)
    if all(value_of(x) == 0 for x in n):
        n = cross(a, c)
    if all(value_of(x) == 0 for x in n):
        raise ValueError("cross ratio undefined")
    return n


class ProjectiveMap:
    """A 3x3 matrix with nonzero determinant acting on the projective plane.

    Points transform by ``M v``; lines by the inverse transpose.
    """

    __slots__ = ("entries",)

    def __init__(self, entries):
        rows = tuple(tuple(r) for r in entries)
        if len(rows) != 3 or any(len(r) != 3 for r in rows):
            raise ValueError("projective map needs a 3x3 array")
        self.entries = rows
        if value_of(self.det()) == 0:
            raise ValueError("projective map must have nonzero determinant")

    @classmethod
    def identity(cls, one=Fraction(1)):
        z = one * 0
        return cls(((one, z, z), (z, one, z), (z, z, one)))

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def columns(self):
        return tuple(tuple(self.entries[i][j] for i in range(3)) for j in range(3))

    def det(self):
        r = self.entries
        return det3(r[0], r[1], r[2])

    def trace(self):
        return self.entries[0][0] + self.entries[1][1] + self.entries[2][2]

    def adjugate(self):
        c0, c1, c2 = self.columns()
        # rows of adj(M) are cross products of columns of M
        return ProjectiveMap((cross(c1, c2), cross(c2, c0), cross(c0, c1)))

    def inverse(self):
        d = self.det()
        adj = self.adjugate()
        return ProjectiveMap(tuple(tuple(x / d for x in row) for row in adj.entries))

    def transpose(self):
        return ProjectiveMap(self.columns())

    def apply(self, v):
        return tuple(dot(row, v) for row in self.entries)

    def __call__(self, p):
        if isinstance(p, Line):
            return self.apply_line(p)
        return Point(*self.apply(p))

    def apply_line(self, l) -> Line:
        # inverse transpose up to scale: adj(M)^T
        c0, c1, c2 = self.columns()
        rows = (cross(c1, c2), cross(c2, c0), cross(c0, c1))
        return Line(*(dot(col, l) for col in zip(*rows)))

    def __matmul__(self, other: "ProjectiveMap") -> "ProjectiveMap":
        cols = other.columns()
        return ProjectiveMap(
            tuple(tuple(dot(row, col) for col in cols) for row in self.entries)
        )

    def scaled(self, s):
        return ProjectiveMap(tuple(tuple(x * s for x in row) for row in self.entries))

    def normalized(self):
        """Scale so that the first nonzero entry is 1."""
        for row in self.entries:
            for x in row:
                if value_of(x) != 0:
                    return self.scaled(1 / x)
        raise AssertionError("unreachable")

    def projectively_equal(self, other: "ProjectiveMap", rtol: float = FLOAT_RTOL) -> bool:
        a = [x for row in self.normalized().entries for x in row]
        b = [x for row in other.normalized().entries for x in row]
        if all(is_exact(x) for x in a + b):
            return a == b
        return all(
            abs(float(value_of(x)) - float(value_of(y))) <= rtol * max(1.0, abs(float(value_of(y))))
            for x, y in zip(a, b)
        )

    def to_float(self):
        return ProjectiveMap(tuple(tuple(float(value_of(x)) for x in row) for row in self.entries))

    def __repr__(self):
        return f"ProjectiveMap({self.entries!r})"


def _frame_matrix(p):
    """Matrix sending the standard frame e1, e2, e3, (1,1,1) to p[0..3]."""
    p1, p2, p3, p4 = p
    for i, j, k in ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)):
        if are_collinear(p[i], p[j], p[k]):
            raise ValueError("degenerate correspondence")
    d = det3(p1, p2, p3)
    # Cramer: p4 = l1 p1 + l2 p2 + l3 p3
    l1 = det3(p4, p2, p3) / d
    l2 = det3(p1, p4, p3) / d
    l3 = det3(p1, p2, p4) / d
    cols = ([x * l1 for x in p1], [x * l2 for x in p2], [x * l3 for x in p3])
    return ProjectiveMap(tuple(tuple(cols[j][i] for j in range(3)) for i in range(3)))


def map_from_correspondence(src: Sequence, dst: Sequence) -> ProjectiveMap:
    """The projective map sending src[k] to dst[k] for k = 0..3, normalized."""
    if len(src) != 4 or len(dst) != 4:
        raise ValueError("need four source and four target points")
    a = _frame_matrix(src)
    b = _frame_matrix(dst)
    return (b @ a.inverse()).normalized()


def sl3_lift(m: ProjectiveMap) -> ProjectiveMap:
    """Rescale to determinant one by the real cube root of the determinant."""
    d = m.det()
    dv = value_of(d)
    if all(is_exact(x) for row in m.entries for x in row):
        r = exact_cbrt(dv)
        if r is None:
            raise ValueError("lift requires float field")
        return m.scaled(1 / r)
    return m.scaled(1.0 / real_cbrt(dv))
