"""Polygonal rays from corner invariants, closure variety, the P^u family.

Ray variables are zero-based: x_0, x_1, ... with the ray starting at the
positive unit square P_{-7}, P_{-3}, P_1, P_5.  In the 1-based flag labelling
of the closed polygon built from the ray, x_k sits at position k + 5.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .corners import CornerVector, coords, cyclic_shift, to_ray_order
from .geom import Line, Point, cross, join, meet, solve_first, solve_fourth
from .invariants import EVEN, ODD
from .numerics import format_scalar, value_of
from .polygon import ClosedPolygon, extract_corners

UNIT_SQUARE = (
    (Fraction(0), Fraction(0), Fraction(1)),
    (Fraction(1), Fraction(0), Fraction(1)),
    (Fraction(1), Fraction(1), Fraction(1)),
    (Fraction(0), Fraction(1), Fraction(1)),
)


def _start(x) -> list:
    one = x[0] * 0 + 1 if len(x) else Fraction(1)
    return [Point(*(c * one for c in p)) for p in UNIT_SQUARE]


def propagate_ray_geometric(x: Sequence, count: int) -> list[Point]:
    """First ``count`` vertices of the ray with corner invariants x_0, x_1, ...

    Each new vertex solves the two cross-ratio conditions for the flags at
    the preceding four vertices: x_{2j} fixes the line through the last vertex,
    x_{2j+1} fixes the new vertex on that line.
    """
    if len(x) < 2 * (count - 4):
        raise ValueError("not enough corner values for the requested vertices")
    pts = _start(x)
    for step in range(count - 4):
        a, b, c, d = pts[-4:]
        try:
            l_ab = join(a, b)
            # odd flag at b: [a, b, l_ab meet (c d), l_ab meet (d e)] = x_{2j}
            q = Point(*solve_fourth(a, b, meet(l_ab, join(c, d)), x[2 * step])).normalized()
            l_de = join(d, q)
            # even flag at d: [e, d, l_de meet (c b), l_de meet (b a)] = x_{2j+1}
            e = solve_first(d, meet(l_de, join(c, b)), q, x[2 * step + 1])
            pts.append(Point(*e).normalized())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"propagation failed at step {step}") from exc
    return pts


# ---------------------------------------------------------------------------
# Window polynomials O_a^b, E_a^b over the ray variables


def _ray_log_bracket(p: int, q: int) -> int:
    """{log x_p, log x_q} on the (non-cyclic) ray."""
    if q - p == 2:
        return -1 if p % 2 else 1
    if p - q == 2:
        return 1 if q % 2 else -1
    return 0


def _ray_vars(kind: str, i: int) -> tuple[int, ...]:
    return (i,) if kind == "single" else (i - 1, i, i + 1)


@dataclass(frozen=True)
class WindowPolynomial:
    """O_a^b (parity "O") or E_a^b (parity "E") over ray variables x_0, x_1, ...

    Sum over admissible monomials of every weight whose variables all have
    indices strictly between a and b; ``a=None`` means no lower cut.  For O
    the singles have odd index and the triples X_i = x_{i-1} x_i x_{i+1} are
    centred at even i; for E the parities swap.
    """

    a: int | None
    b: int
    parity: str = ODD

    @property
    def terms(self) -> tuple[tuple[int, tuple[int, ...]], ...]:
        return _window_terms(self.a, self.b, self.parity)

    def variables(self) -> list[int]:
        return sorted({i for _, vs in self.terms for i in vs})

    def __call__(self, x: Sequence):
        return eval_window_polynomial(self, x)


@lru_cache(maxsize=None)
def _window_terms(a, b, parity):
    lo = -1 if a is None else a
    single_parity = 1 if parity == ODD else 0
    cands = []
    for i in range(max(lo, 0), b + 1):
        kind = "single" if i % 2 == single_parity else "triple"
        vs = _ray_vars(kind, i)
        if min(vs) >= 0 and min(vs) > lo and max(vs) < b:
            cands.append((kind, vs))
    ok = [
        [sum(_ray_log_bracket(p, q) for p in u for q in v) == 0 for _, v in cands]
        for _, u in cands
    ]
    out = []

    def extend(chosen, start):
        singles = sum(1 for c in chosen if cands[c][0] == "single")
        out.append((-1 if singles % 2 else 1, tuple(sorted(i for c in chosen for i in cands[c][1]))))
        for c in range(start, len(cands)):
            if all(ok[c][d] for d in chosen):
                chosen.append(c)
                extend(chosen, c + 1)
                chosen.pop()

    extend([], 0)
    return tuple(out)


def eval_window_polynomial(p: WindowPolynomial, x: Sequence):
    """Signed sum of the window's monomials at the ray values x."""
    need = p.variables()
    if need and len(x) <= need[-1]:
        raise ValueError(f"window needs ray values up to x_{need[-1]}")
    one = x[0] * 0 + 1 if len(x) else Fraction(1)
    total = one * 0
    for s, vs in p.terms:
        m = one
        for i in vs:
            m = m * x[i]
        total = total + m if s > 0 else total - m
    return total


def _O(a, b, x):
    return eval_window_polynomial(WindowPolynomial(a, b, ODD), x)


def _E(a, b, x):
    return eval_window_polynomial(WindowPolynomial(a, b, EVEN), x)


def reconstruct_points(x: Sequence, k: int) -> Point:
    """P_{9+2k} from the window polynomials, k = 0, 2, 4, ...

    Agrees projectively with entry 4 + k/2 of :func:`propagate_ray_geometric`.
    """
    if k < 0 or k % 2:
        raise ValueError("k must be a nonnegative even integer")
    b = 3 + k
    ob = _O(None, b, x)
    tail = x[0] * x[1] * _O(3, b, x)
    coords = (ob - _O(1, b, x) + tail, ob, ob + tail)
    try:
        return Point(*coords)
    except ValueError as exc:
        raise ValueError("degenerate reconstruction") from exc


INITIAL_LINES = {
    -5: (Fraction(0), Fraction(1), Fraction(0)),
    -1: (Fraction(-1), Fraction(0), Fraction(1)),
    3: (Fraction(0), Fraction(-1), Fraction(1)),
}


def reconstruct_lines(x: Sequence, k: int) -> Line:
    """L_{7+2k} from the window polynomials, k = 0, 2, 4, ...

    L_{7+2k} is the line through P_{5+2k} and P_{9+2k}; the three lines
    before it are :data:`INITIAL_LINES`.
    """
    if k < 0 or k % 2:
        raise ValueError("k must be a nonnegative even integer")
    b = 2 + k
    eb = _E(None, b, x)
    e0 = _E(0, b, x)
    coords = (eb - e0, e0 - x[0] * _E(2, b, x), -eb)
    try:
        return Line(*coords)
    except ValueError as exc:
        raise ValueError("degenerate reconstruction") from exc


def ray_point(x: Sequence, j: int) -> tuple:
    """P_{-7+4j} as an unnormalized triple: the square for j < 4, else the formula."""
    if j < 4:
        return UNIT_SQUARE[j]
    return tuple(reconstruct_points(x, 2 * (j - 4)))


def scaling_residual(x: Sequence, k: int) -> tuple:
    """P_{5+k} x P_{9+k} + (x_1 x_3 ... x_{k/2+1}) L_{7+k} for k = 0, 4, 8, ...

    Every component is exactly zero.
    """
    if k < 0 or k % 4:
        raise ValueError("k must be a nonnegative multiple of 4")
    p = ray_point(x, 3 + k // 4)
    q = ray_point(x, 4 + k // 4)
    c = x[0] * 0 + 1
    for i in range(1, k // 2 + 2, 2):
        c = c * x[i]
    line = reconstruct_lines(x, k // 2)
    return tuple(u + c * v for u, v in zip(cross(p, q), line))


# ---------------------------------------------------------------------------
# Closure variety


def closure_window(n: int) -> WindowPolynomial:
    """O^{2n-5}; it involves exactly the 2n-7 ray variables x_1..x_{2n-7}."""
    return WindowPolynomial(None, 2 * n - 5, ODD)


def closure_polynomials(v) -> tuple:
    """O^{2n-5} evaluated on all 2n cyclic shifts of v (in ray order).

    Entry r uses ray variables x_k = flag x_{k+r+5}; all entries vanish
    exactly when v is the corner vector of a closed polygon.
    """
    x = coords(v)
    n = len(x) // 2
    p = closure_window(n)
    return tuple(p(to_ray_order(cyclic_shift(x, r))) for r in range(2 * n))


def _solve_top(p: WindowPolynomial, x: list, top: int):
    """Solve p(x) = 0 for x[top], using that p is affine in it."""
    zero = x[0] * 0
    x0 = list(x)
    x0[top] = zero
    c0 = p(x0)
    x0[top] = zero + 1
    c1 = p(x0) - c0
    if value_of(c1) == 0:
        raise ValueError("closure failed: window not solvable for its top variable")
    return -c0 / c1


def solve_closure(n: int, inner: Sequence) -> tuple:
    """Complete 2n-8 inner values to a full corner vector by solving O^{2n-5} = 0.

    ``inner`` holds flags 5..2n-4; the eight remaining flags 2n-3..2n, 1..4 are
    found one by one, each as the top variable of a shifted window.
    """
    if len(inner) != 2 * n - 8:
        raise ValueError("inner block needs 2n-8 values")
    p = closure_window(n)
    ray = list(inner) + [None] * 8
    for top in range(2 * n - 8, 2 * n):
        start = top - (2 * n - 7)  # window variable x_1 sits at ray index start + 1
        window = [ray[start + i] if 0 <= start + i else None for i in range(2 * n - 6)]
        window[0] = inner[0] * 0  # x_0 never enters O^{2n-5}
        ray[top] = _solve_top(p, window, 2 * n - 7)
    return tuple(ray[2 * n - 4 :] + ray[: 2 * n - 4])


# ---------------------------------------------------------------------------
# Chart onto closed polygons and the P^u family

# a, b, c, d are flags 1..4; d', c', b', a' are flags 2n-3..2n (offsets from 2n)
OUTER_FLAGS = (1, 2, 3, 4, -3, -2, -1, 0)


@dataclass(frozen=True)
class RayChart:
    """A closed n-gon built from its 2n-8 inner corner invariants."""

    n: int
    inner: tuple
    polygon: ClosedPolygon
    corners: CornerVector
    u: object = None

    @property
    def outer(self) -> tuple:
        """(a, b, c, d, d', c', b', a'): flags 1..4 then 2n-3..2n."""
        return tuple(self.corners.at(f) for f in OUTER_FLAGS)

    @property
    def abcd(self) -> tuple:
        return self.outer[:4]

    def as_dict(self) -> dict:
        d = {
            "n": self.n,
            "inner": [format_scalar(t) for t in self.inner],
            "outer": [format_scalar(t) for t in self.outer],
            "vertices": [[format_scalar(c) for c in p] for p in self.polygon.vertices],
        }
        if self.u is not None:
            d["u"] = format_scalar(self.u)
        return d


def close_up(n: int, inner: Sequence, u=None) -> RayChart:
    """The closed polygon made from the first n vertices of the ray with these inner values."""
    if n < 7:
        raise ValueError("close_up needs n >= 7")
    inner = tuple(inner)
    if len(inner) != 2 * n - 8:
        raise ValueError("inner block needs 2n-8 values")
    try:
        pts = propagate_ray_geometric(inner, n)
        poly = ClosedPolygon(tuple(pts))
        corners = extract_corners(poly)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError("closure failed") from exc
    return RayChart(n, inner, poly, corners, u)


def pu_inner(n: int, u) -> tuple:
    """(u, u^2, ..., u^{n-4}, u^{n-4}, ..., u^2, u)."""
    up = [u**j for j in range(1, n - 3)]
    return tuple(up + up[::-1])


def pu_polygon(n: int, u) -> RayChart:
    """The point P^u: close_up of the palindromic inner list of powers of u."""
    return close_up(n, pu_inner(n, u), u)
