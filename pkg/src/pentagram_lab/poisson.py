"""The invariant Poisson bracket on corner coordinates.

{x_i, x_{i+2}} = (-1)^i x_i x_{i+2} (1-based, cyclic); all other brackets of
coordinates vanish.  In log coordinates the bracket has constant integer
coefficients, which gives the exact rank computation below.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from .corners import coords, pentagram_map_coords
from .numerics import exact_rank, gradient, jet_seed, value_of


def _sign(i: int) -> int:
    """(-1)^i for the 1-based index i."""
    return -1 if i % 2 else 1


def function_gradient(F, x) -> list:
    """Gradient of F at x: polynomial objects supply their own, callables use jets."""
    if hasattr(F, "gradient"):
        return F.gradient(x)
    return gradient(F, x)


def bracket_of_gradients(gf: Sequence, gg: Sequence, x: Sequence):
    """sum_i (-1)^i x_i x_{i+2} (F_i G_{i+2} - F_{i+2} G_i) from two gradients."""
    m = len(x)
    total = x[0] * 0
    for k in range(m):
        j = (k + 2) % m
        d = gf[k] * gg[j] - gf[j] * gg[k]
        if value_of(d) == 0:
            continue
        t = x[k] * x[j] * d
        # k is 0-based, so the 1-based index is k + 1
        total = total + t if _sign(k + 1) > 0 else total - t
    return total


def bracket(F, G, at):
    """{F, G} at the corner vector ``at``."""
    x = coords(at)
    return bracket_of_gradients(function_gradient(F, x), function_gradient(G, x), x)


def coordinate(j: int) -> Callable:
    """The coordinate function x_j (1-based)."""
    return lambda v: coords(v)[j - 1]


def hamiltonian_field(F, at) -> list:
    """Components {F, x_j}, j = 1..2n, of the Hamiltonian vector field of F."""
    x = coords(at)
    m = len(x)
    g = function_gradient(F, x)
    out = []
    for j in range(m):
        # only x_{j-2} and x_{j+2} bracket nontrivially with x_j
        lo, hi = (j - 2) % m, (j + 2) % m
        # {x_lo, x_j} = (-1)^lo x_lo x_j and {x_j, x_hi} = (-1)^j x_j x_hi
        c = g[lo] * x[lo] * x[j] * _sign(lo + 1) - g[hi] * x[j] * x[hi] * _sign(j + 1)
        out.append(c)
    return out


def log_bracket_matrix(n: int) -> list[list[int]]:
    """B with {log x_i, log x_j} = B[i-1][j-1]."""
    m = 2 * n
    b = [[0] * m for _ in range(m)]
    for k in range(m):
        j = (k + 2) % m
        s = _sign(k + 1)
        b[k][j] += s
        b[j][k] -= s
    return b


def tensor_rank(n: int) -> int:
    """Rank of the Poisson tensor: 2n - 2 for odd n, 2n - 4 for even n."""
    if n < 5:
        raise ValueError("n must be at least 5")
    return exact_rank(log_bracket_matrix(n))


@dataclass(frozen=True)
class BracketReport:
    """Residuals {x_i o T, x_j o T} - {x_i, x_j} o T over all pairs i < j."""

    n: int
    residuals: tuple

    def max_abs(self):
        return max(abs(r) for r in self.residuals)

    @property
    def ok(self) -> bool:
        return all(r == 0 for r in self.residuals)


def map_jacobian(at) -> list[list]:
    """Rows are the gradients of the pulled-back coordinates x_i o T."""
    x = coords(at)
    y = pentagram_map_coords(jet_seed(x))
    zero = x[0] * 0
    return [[yi.grad.get(k, zero) for k in range(len(x))] for yi in y]


def verify_map_preserves_bracket(at) -> BracketReport:
    """Compare brackets of the pulled-back coordinates with the bracket at T(x)."""
    x = coords(at)
    n = len(x) // 2
    y = pentagram_map_coords(x)
    jac = map_jacobian(x)
    res = []
    b = log_bracket_matrix(n)
    for i in range(2 * n):
        for j in range(i + 1, 2 * n):
            lhs = bracket_of_gradients(jac[i], jac[j], x)
            rhs = y[i] * y[j] * b[i][j]
            res.append(lhs - rhs)
    return BracketReport(n, tuple(res))
