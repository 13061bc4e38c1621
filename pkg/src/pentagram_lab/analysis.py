"""Exact independence calculations on the closed-polygon variety.

Gradients of invariant combinations A_{k,+-} = O_k +- E_k are evaluated
exactly at the point P^u, and ranks are taken by fraction-free elimination.
Tangent vectors to the closed-polygon variety come from differentiating the
chart ``close_up`` with jets.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .closure import RayChart, close_up, pu_polygon
from .corners import coords, reverse
from .invariants import EVEN, ODD, half_casimir_polynomials, invariant_polynomial
from .numerics import exact_rank, jet_seed, real_cbrt, valuation_with_residual, value_of
from .poisson import function_gradient, hamiltonian_field


@dataclass(frozen=True)
class RationalMatrix:
    rows: tuple

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(tuple(r) for r in self.rows))

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), (len(self.rows[0]) if self.rows else 0)

    def rank(self) -> int:
        return exact_rank(self.rows)

    def with_row(self, row: Sequence) -> "RationalMatrix":
        return RationalMatrix(self.rows + (tuple(row),))

    def to_float(self) -> list[list[float]]:
        return [[float(value_of(c)) for c in r] for r in self.rows]


def rank(m: RationalMatrix | Sequence[Sequence]) -> int:
    return m.rank() if isinstance(m, RationalMatrix) else exact_rank(m)


@dataclass(frozen=True)
class InvariantCombination:
    """A_{k,+} = O_k + E_k or A_{k,-} = O_k - E_k; k = n gives the Casimirs.

    ``k = "h"`` selects the pair of half-weight Casimirs that exist for even n.
    """

    n: int
    k: int | str
    sign: int

    def _parts(self):
        if self.k == "h":
            return half_casimir_polynomials(self.n)
        return invariant_polynomial(self.n, self.k, ODD), invariant_polynomial(self.n, self.k, EVEN)

    def __call__(self, v):
        o, e = self._parts()
        return o(v) + e(v) if self.sign > 0 else o(v) - e(v)

    def gradient(self, v) -> list:
        o, e = self._parts()
        go, ge = o.gradient(v), e.gradient(v)
        return [a + b if self.sign > 0 else a - b for a, b in zip(go, ge)]

    @property
    def name(self) -> str:
        return f"A_{self.k},{'+' if self.sign > 0 else '-'}"


def A(n: int, k, sign: int) -> InvariantCombination:
    return InvariantCombination(n, k, sign)


def full_list(n: int) -> list[InvariantCombination]:
    """Functions whose differentials are independent at P^u (n-2 odd, n-1 even)."""
    m = n // 2
    if n % 2:
        return (
            [A(n, k, 1) for k in range(3, m + 1)]
            + [A(n, n, 1)]
            + [A(n, k, -1) for k in range(2, m + 1)]
            + [A(n, n, -1)]
        )
    return [A(n, k, s) for k, s in EVEN_FULL_LISTS.get(n, _even_guess_full(n))]


def restricted_list(n: int) -> list[InvariantCombination]:
    """Functions independent on the tangent space at P^u (n-4 odd, n-3 even)."""
    m = n // 2
    if n % 2:
        return (
            [A(n, k, -1) for k in range(3, m + 1)]
            + [A(n, k, 1) for k in range(3, m + 1)]
            + [A(n, n, 1)]
        )
    return [A(n, k, s) for k, s in EVEN_RESTRICTED_LISTS.get(n, _even_guess_restricted(n))]


def _even_guess_full(n):
    m = n // 2
    return [(k, 1) for k in range(3, m + 1)] + [(n, 1)] + [(k, -1) for k in range(2, m + 1)] + [(n, -1)]


def _even_guess_restricted(n):
    m = n // 2
    return [(k, -1) for k in range(3, m + 1)] + [(k, 1) for k in range(3, m + 1)] + [(n, 1)]


# Lists for even n found by search_even_lists at u = 1/100; for n = 8 the
# unperturbed odd-case pattern with m = n/2 already reaches both ranks.
EVEN_FULL_LISTS: dict[int, list] = {
    8: [(3, 1), (4, 1), (8, 1), (2, -1), (3, -1), (4, -1), (8, -1)],
}
EVEN_RESTRICTED_LISTS: dict[int, list] = {
    8: [(3, -1), (4, -1), (3, 1), (4, 1), (8, 1)],
}


def jacobian_full(v, funcs: Sequence) -> RationalMatrix:
    """Row k is the gradient of funcs[k] at v over all 2n coordinates."""
    x = coords(v)
    return RationalMatrix(tuple(function_gradient(f, x)) for f in funcs)


def tangent_basis(chart: RayChart) -> list[tuple]:
    """v_j = derivative of the full corner vector along inner coordinate j.

    Computed by pushing jets through the chart; the inner block of v_j is e_j.
    """
    seeds = jet_seed(chart.inner)
    jc = close_up(chart.n, seeds)
    zero = chart.inner[0] * 0
    cols = [[c.grad.get(j, zero) for c in jc.corners] for j in range(len(seeds))]
    return [tuple(col) for col in cols]


def restricted_jacobian(chart: RayChart, funcs: Sequence, basis: Sequence | None = None) -> RationalMatrix:
    """Entry (k, j) is the derivative of funcs[k] along tangent vector v_j."""
    basis = tangent_basis(chart) if basis is None else basis
    x = chart.corners.x
    rows = []
    for f in funcs:
        g = function_gradient(f, x)
        rows.append(tuple(sum((gi * vi for gi, vi in zip(g, vj)), zero_of(x)) for vj in basis))
    return RationalMatrix(rows)


def zero_of(x):
    return x[0] * 0


def level_set_dimension(n: int) -> int:
    """n - 4 for odd n, n - 5 for even n."""
    if n < 7:
        raise ValueError("n must be at least 7")
    return n - 4 if n % 2 else n - 5


def expected_ranks(n: int) -> tuple[int, int]:
    return (n - 2, n - 4) if n % 2 else (n - 1, n - 3)


# ---------------------------------------------------------------------------
# Heft diagnostics


def alpha(k: int) -> int:
    """The sequence 0, 0, 0, 2, 3, 6, 7, 10, 11, 14, 15, ... (1-based)."""
    if k < 1:
        raise ValueError("alpha is indexed from 1")
    if k <= 3:
        return 0
    return 2 * k - 6 if k % 2 == 0 else 2 * k - 7


def heft_bound(k: int) -> int:
    return sum(alpha(j) for j in range(1, k + 1))


@dataclass(frozen=True)
class HeftEntry:
    name: str
    heft: int | None
    bound: int | None
    unstable: tuple[int, ...] = ()


@dataclass(frozen=True)
class HeftReport:
    n: int
    u: Fraction
    entries: tuple[HeftEntry, ...] = field(default_factory=tuple)

    def by_name(self, name: str) -> HeftEntry:
        return next(e for e in self.entries if e.name == name)


def gradient_heft(F: InvariantCombination, n: int, u, ratio=Fraction(1, 2)) -> tuple[int | None, tuple]:
    """Minimum valuation over the nonzero gradient components of F along P^u."""
    cache: dict = {}

    def grad_at(t):
        if t not in cache:
            cache[t] = F.gradient(pu_polygon(n, t).corners.x)
        return cache[t]

    best, unstable = None, []
    for i in range(2 * n):
        if grad_at(u)[i] == 0 or grad_at(u * ratio)[i] == 0:
            continue
        val = valuation_with_residual(lambda t: grad_at(t)[i], u, ratio)
        if val.residual >= 0.1:
            unstable.append(i + 1)
        best = val.order if best is None else min(best, val.order)
    return best, tuple(unstable)


def heft_report(n: int, u) -> HeftReport:
    """Gradient hefts of every A_{k,+-} at P^u with the known bounds."""
    if n < 7 or n % 2 == 0:
        raise ValueError("heft report needs odd n >= 7")
    entries = []
    for k in list(range(1, n // 2 + 1)) + [n]:
        for s in (1, -1):
            F = A(n, k, s)
            h, unstable = gradient_heft(F, n, u)
            bound = (n - 3) * (n - 4) // 2 if k == n else heft_bound(k)
            entries.append(HeftEntry(F.name, h, bound, unstable))
    return HeftReport(n, Fraction(u), tuple(entries))


# ---------------------------------------------------------------------------
# Identities, symmetry, tangency


def rel2_residuals(v) -> tuple[float, float, float]:
    """Largest component of each differential-identity residual, relative to its largest term."""
    x = [float(value_of(c)) for c in coords(v)]
    n = len(x) // 2
    m = n // 2
    dO = [invariant_polynomial(n, k, ODD).gradient(x) for k in range(1, m + 1)]
    dE = [invariant_polynomial(n, k, EVEN).gradient(x) for k in range(1, m + 1)]
    On, En = invariant_polynomial(n, n, ODD)(x), invariant_polynomial(n, n, EVEN)(x)
    dOn = invariant_polynomial(n, n, ODD).gradient(x)
    dEn = invariant_polynomial(n, n, EVEN).gradient(x)
    co, ce = real_cbrt(On), real_cbrt(En)

    def rel(lhs_terms, rhs_terms):
        terms = lhs_terms + rhs_terms
        scale = max(abs(t[i]) for t in terms for i in range(2 * n)) or 1.0
        worst = 0.0
        for i in range(2 * n):
            d = sum(t[i] for t in lhs_terms) - sum(t[i] for t in rhs_terms)
            worst = max(worst, abs(d))
        return worst / scale

    def scaled(c, vec):
        return [c * t for t in vec]

    r1 = rel(dO, [scaled(2 * ce / co, dOn), scaled(co * co / (ce * ce), dEn)])
    r2 = rel(dE, [scaled(2 * co / ce, dEn), scaled(ce * ce / (co * co), dOn)])
    r3 = rel(
        [scaled(co * (j + 1), d) for j, d in enumerate(dE)] + [scaled(ce * (j + 1), d) for j, d in enumerate(dO)],
        [scaled(n * ce * ce * co * co / En, dEn), scaled(n * ce * ce * co * co / On, dOn)],
    )
    return r1, r2, r3


def normalized_gradient(F, v) -> list[Fraction]:
    """Gradient divided by its largest absolute entry."""
    g = function_gradient(F, coords(v))
    lam = max(abs(c) for c in g)
    if lam == 0:
        raise ValueError("gradient vanishes")
    return [c / lam for c in g]


def orthogonality_residual(n: int, u) -> Fraction:
    """Largest |<normalized grad A_{k,+}, normalized grad A_{j,-}>| at P^u.

    Coordinate reversal fixes P^u and swaps O_k with E_k, so the value is 0.
    """
    x = pu_polygon(n, u).corners.x
    if tuple(reverse(x)) != tuple(x):
        raise ValueError("point is not reversal-symmetric")
    plus = [normalized_gradient(F, x) for F in full_list(n) if F.sign > 0]
    minus = [normalized_gradient(F, x) for F in full_list(n) if F.sign < 0]
    return max(abs(sum(a * b for a, b in zip(p, q))) for p in plus for q in minus)


def tangency_holds(chart: RayChart, funcs: Sequence, basis: Sequence | None = None) -> bool:
    """Whether every Hamiltonian field of funcs lies in the span of the tangent basis."""
    basis = tangent_basis(chart) if basis is None else basis
    m = RationalMatrix(basis)
    r = m.rank()
    return all(m.with_row(hamiltonian_field(f, chart.corners.x)).rank() == r for f in funcs)


def monodromy_functions(n: int) -> list[Callable]:
    out = [invariant_polynomial(n, k, p) for p in (ODD, EVEN) for k in list(range(1, n // 2 + 1)) + [n]]
    if n % 2 == 0:
        out += list(half_casimir_polynomials(n))
    return out


# ---------------------------------------------------------------------------
# Rank reports


@dataclass(frozen=True)
class RankReport:
    n: int
    u: Fraction
    full_rank: int
    restricted_rank: int
    expected: tuple[int, int]
    tangency_ok: bool | None = None
    full_names: tuple[str, ...] = ()
    restricted_names: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        ranks = (self.full_rank, self.restricted_rank) == self.expected
        return ranks and self.tangency_ok is not False

    def as_dict(self) -> dict:
        from .numerics import format_scalar

        return {
            "n": self.n,
            "u": format_scalar(self.u),
            "full_rank": self.full_rank,
            "restricted_rank": self.restricted_rank,
            "expected": list(self.expected),
            "tangency_ok": self.tangency_ok,
            "full_list": list(self.full_names),
            "restricted_list": list(self.restricted_names),
        }


def rank_report(n: int, u=Fraction(1, 100), check_tangency: bool = True) -> RankReport:
    u = Fraction(u)
    chart = pu_polygon(n, u)
    basis = tangent_basis(chart)
    full = full_list(n)
    restr = restricted_list(n)
    fr = jacobian_full(chart.corners, full).rank()
    rr = restricted_jacobian(chart, restr, basis).rank()
    tang = tangency_holds(chart, monodromy_functions(n), basis) if check_tangency else None
    return RankReport(
        n,
        u,
        fr,
        rr,
        expected_ranks(n),
        tang,
        tuple(F.name for F in full),
        tuple(F.name for F in restr),
    )


def search_even_lists(n: int, u=Fraction(1, 100)) -> tuple[list, list]:
    """Index perturbations of the odd-case lists reaching ranks n-1 and n-3.

    Starts from the odd-case pattern with m = n/2 and, if that falls short,
    greedily adds or swaps in other A_{k,+-} (including the half-weight
    Casimir pair) until the target rank is reached.  Returns the (k, sign)
    lists.
    """
    if n % 2:
        raise ValueError("even n only")
    u = Fraction(u)
    chart = pu_polygon(n, u)
    basis = tangent_basis(chart)
    pool = [(k, s) for k in list(range(1, n // 2 + 1)) + [n, "h"] for s in (1, -1)]
    x = chart.corners.x

    def full_rank(lst):
        return jacobian_full(x, [A(n, k, s) for k, s in lst]).rank()

    def restricted_rank(lst):
        return restricted_jacobian(chart, [A(n, k, s) for k, s in lst], basis).rank()

    found = []
    for start, target, rk in (
        (_even_guess_full(n), n - 1, full_rank),
        (_even_guess_restricted(n), n - 3, restricted_rank),
    ):
        lst = [e for e in start if e in pool]
        # drop dependent members, then top up from the pool
        kept: list = []
        for e in lst:
            if rk(kept + [e]) == len(kept) + 1:
                kept.append(e)
        for e in pool:
            if len(kept) == target:
                break
            if e not in kept and rk(kept + [e]) == len(kept) + 1:
                kept.append(e)
        found.append(kept)
    return found[0], found[1]
