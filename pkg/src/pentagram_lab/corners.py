"""Corner-coordinate dynamics on R^{2n}.

Coordinates use the 1-based flag convention x_1..x_{2n}, cyclic mod 2n,
stored 0-based: ``x[i - 1]`` holds x_i.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .numerics import gradient, value_of


@dataclass(frozen=True)
class CornerVector:
    """The 2n corner invariants of a twisted or closed n-gon."""

    x: tuple

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(self.x))
        if len(self.x) % 2 or len(self.x) < 10:
            raise ValueError("corner vector needs 2n entries with n >= 5")

    @property
    def n(self) -> int:
        return len(self.x) // 2

    def at(self, i: int):
        """x_i, 1-based and cyclic."""
        return self.x[(i - 1) % len(self.x)]

    def __len__(self):
        return len(self.x)

    def __iter__(self):
        return iter(self.x)

    def __getitem__(self, k):
        return self.x[k]


def coords(v) -> tuple:
    return v.x if isinstance(v, CornerVector) else tuple(v)


def pentagram_map_coords(v):
    """Pull-back of the corner coordinates under the (right-labelled) map.

    y_{2i-1} = x_{2i-1} (1 - x_{2i-3} x_{2i-2}) / (1 - x_{2i+1} x_{2i+2})
    y_{2i}   = x_{2i+2} (1 - x_{2i+3} x_{2i+4}) / (1 - x_{2i-1} x_{2i})
    """
    x = coords(v)
    m = len(x)

    def at(i):
        return x[(i - 1) % m]

    # q[i] = 1 - x_{2i-1} x_{2i}, i = 1..n (cyclic)
    n = m // 2
    q = {}
    for i in range(1, n + 1):
        q[i] = 1 - at(2 * i - 1) * at(2 * i)
        if value_of(q[i]) == 0:
            raise ZeroDivisionError("map undefined at input")

    def Q(i):
        return q[(i - 1) % n + 1]

    y = [None] * m
    for i in range(1, n + 1):
        y[2 * i - 2] = at(2 * i - 1) * Q(i - 1) / Q(i + 1)
        y[2 * i - 1] = at(2 * i + 2) * Q(i + 2) / Q(i)
    return CornerVector(y) if isinstance(v, CornerVector) else tuple(y)


def rescale(v, s):
    """Odd-indexed coordinates times s, even-indexed times 1/s."""
    if value_of(s) == 0:
        raise ValueError("rescaling parameter must be nonzero")
    x = coords(v)
    if isinstance(s, int):
        s = Fraction(s)
    inv = 1 / s
    y = tuple(c * s if k % 2 == 0 else c * inv for k, c in enumerate(x))
    return CornerVector(y) if isinstance(v, CornerVector) else y


def cyclic_shift(v, r: int):
    """x_i -> x_{i+r mod 2n}."""
    x = coords(v)
    r %= len(x)
    y = x[r:] + x[:r]
    return CornerVector(y) if isinstance(v, CornerVector) else y


def reverse(v):
    """x_i -> x_{2n+1-i}; exchanges the O and E families."""
    x = coords(v)
    y = tuple(reversed(x))
    return CornerVector(y) if isinstance(v, CornerVector) else y


def euler_derivative(F: Callable, v):
    """sum_i w_i x_i dF/dx_i with weights +1 on odd and -1 on even coordinates."""
    x = coords(v)
    g = gradient(F, x)
    total = x[0] * 0
    for k, (c, d) in enumerate(zip(x, g)):
        total = total + c * d if k % 2 == 0 else total - c * d
    return total


def from_vertex_convention(xs: Sequence, ys: Sequence) -> tuple:
    """(x_1, y_1, x_2, y_2, ...) in vertex convention to the flag convention."""
    out = []
    for a, b in zip(xs, ys):
        out += [a, b]
    return tuple(out)


def from_ray_index(k: int, n: int) -> int:
    """1-based flag index of the zero-based ray variable x_k.

    A polygonal ray starts at the unit square P_{-7}, P_{-3}, P_1, P_5, which
    become vertices v_1..v_4; its variable x_0 is then the flag x_5.
    """
    return (k + 4) % (2 * n) + 1


def to_ray_order(v) -> tuple:
    """Rotate a corner vector so that entry k is the ray variable x_k."""
    x = coords(v)
    return x[4:] + x[:4]
