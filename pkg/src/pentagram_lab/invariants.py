"""Monodromy invariants O_k, E_k of the pentagram map.

Combinatorial form: alternating sums of admissible products of elementary
monomials.  Trace form: traces of the unimodular monodromy, rescaled by the
Casimirs.  Both are available and checked against each other in the tests.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .corners import coords, to_ray_order
from .numerics import real_cbrt, real_power, to_field, value_of

ODD, EVEN = "O", "E"


@dataclass(frozen=True, order=True)
class ElementaryMonomial:
    """``Single(j)`` is x_j; ``Triple(i)`` is X_i = x_{i-1} x_i x_{i+1} (1-based)."""

    kind: str
    index: int

    def variables(self, n: int) -> tuple[int, ...]:
        m = 2 * n
        if self.kind == "single":
            return ((self.index - 1) % m + 1,)
        return tuple((self.index + d - 1) % m + 1 for d in (-1, 0, 1))


def Single(j: int) -> ElementaryMonomial:
    return ElementaryMonomial("single", j)


def Triple(i: int) -> ElementaryMonomial:
    return ElementaryMonomial("triple", i)


def _log_bracket(p: int, q: int, m: int) -> int:
    """{log x_p, log x_q} for the bracket {x_i, x_{i+2}} = (-1)^i x_i x_{i+2}."""
    if (q - p) % m == 2:
        return -1 if p % 2 else 1
    if (p - q) % m == 2:
        return 1 if q % 2 else -1
    return 0


def bracket_coefficient(a: ElementaryMonomial, b: ElementaryMonomial, n: int) -> int:
    """c with {a, b} = c * a * b; every monomial bracket has this form."""
    m = 2 * n
    return sum(_log_bracket(p, q, m) for p in a.variables(n) for q in b.variables(n))


def brackets_vanish(a: ElementaryMonomial, b: ElementaryMonomial, n: int) -> bool:
    return bracket_coefficient(a, b, n) == 0


def brackets_vanish_by_pattern(a: ElementaryMonomial, b: ElementaryMonomial, n: int) -> bool:
    """The distance rules for nonzero brackets, used only as a cross-check."""
    m = 2 * n

    def d(i, j):
        return (j - i) % m

    if a.kind == "triple" and b.kind == "triple":
        return d(a.index, b.index) not in {2, m - 2, 4, m - 4}
    if a.kind == "single" and b.kind == "single":
        return d(a.index, b.index) not in {2, m - 2}
    s, t = (a, b) if a.kind == "single" else (b, a)
    return d(s.index, t.index) not in {1, 2, 3, m - 1, m - 2, m - 3}


@dataclass(frozen=True)
class AdmissibleMonomial:
    triples: tuple[int, ...]
    singles: tuple[int, ...]

    @property
    def sign(self) -> int:
        return -1 if len(self.singles) % 2 else 1

    @property
    def weight(self) -> int:
        return len(self.triples) + len(self.singles)

    def elements(self) -> list[ElementaryMonomial]:
        return [Triple(i) for i in self.triples] + [Single(j) for j in self.singles]

    def variables(self, n: int) -> tuple[int, ...]:
        out: list[int] = []
        for e in self.elements():
            out.extend(e.variables(n))
        return tuple(sorted(out))


def _candidates(n: int, parity: str) -> list[ElementaryMonomial]:
    # O: even triples with odd singles; E: the roles swapped
    t0, s0 = (2, 1) if parity == ODD else (1, 2)
    return [Triple(i) for i in range(t0, 2 * n + 1, 2)] + [Single(j) for j in range(s0, 2 * n + 1, 2)]


_cache_lock = threading.Lock()


@lru_cache(maxsize=None)
def _enumerate(n: int, k: int, parity: str) -> tuple[AdmissibleMonomial, ...]:
    cands = _candidates(n, parity)
    ok = [[brackets_vanish(a, b, n) for b in cands] for a in cands]
    out = []

    def extend(chosen: list[int], start: int):
        if len(chosen) == k:
            els = [cands[c] for c in chosen]
            out.append(
                AdmissibleMonomial(
                    tuple(e.index for e in els if e.kind == "triple"),
                    tuple(e.index for e in els if e.kind == "single"),
                )
            )
            return
        for c in range(start, len(cands)):
            if all(ok[c][d] for d in chosen):
                chosen.append(c)
                extend(chosen, c + 1)
                chosen.pop()

    extend([], 0)
    return tuple(out)


def enumerate_admissible(n: int, k: int, parity: str = ODD) -> tuple[AdmissibleMonomial, ...]:
    """All admissible monomials of weight k, deterministic order."""
    if parity not in (ODD, EVEN):
        raise ValueError("parity must be 'O' or 'E'")
    if not 0 <= k <= n // 2:
        raise ValueError(f"weight {k} out of range 0..{n // 2}")
    with _cache_lock:
        return _enumerate(n, k, parity)


class Polynomial:
    """Signed sum of monomials; each monomial is a tuple of 0-based indices."""

    __slots__ = ("terms", "nvars")

    def __init__(self, terms, nvars: int):
        self.terms = tuple((int(s), tuple(v)) for s, v in terms)
        self.nvars = nvars

    def __call__(self, x):
        x = coords(x)
        total = x[0] * 0
        for s, vs in self.terms:
            if not vs:
                total = total + s
                continue
            p = x[vs[0]]
            for i in vs[1:]:
                p = p * x[i]
            total = total + p if s > 0 else total - p
        return total

    def gradient(self, x) -> list:
        """Exact dense gradient via prefix/suffix products."""
        x = coords(x)
        zero = x[0] * 0
        g = [zero] * len(x)
        for s, vs in self.terms:
            d = len(vs)
            if d == 0:
                continue
            vals = [x[i] for i in vs]
            pre = [1] * (d + 1)
            for t in range(d):
                pre[t + 1] = pre[t] * vals[t]
            suf = 1
            for t in range(d - 1, -1, -1):
                c = pre[t] * suf
                g[vs[t]] = g[vs[t]] + c if s > 0 else g[vs[t]] - c
                suf = suf * vals[t]
        return g

    def evaluate_batch(self, X):
        """Values at each row of a float array of shape (N, 2n)."""
        import numpy as np

        X = np.asarray(X, dtype=float)
        total = np.zeros(X.shape[0])
        for s, vs in self.terms:
            total += s * (np.prod(X[:, list(vs)], axis=1) if vs else 1.0)
        return total

    def abs_scale(self, x) -> float:
        """sum of |monomial| values; the natural magnitude of the sum."""
        x = [abs(float(value_of(c))) for c in coords(x)]
        total = 0.0
        for _, vs in self.terms:
            p = 1.0
            for i in vs:
                p *= x[i]
            total += p
        return total

    def __len__(self):
        return len(self.terms)


@lru_cache(maxsize=None)
def invariant_polynomial(n: int, k: int, parity: str = ODD) -> Polynomial:
    """O_k or E_k as a polynomial in x_1..x_{2n}; k = n gives the Casimirs."""
    if k == n:
        start = 0 if parity == ODD else 1
        return Polynomial([(1, tuple(range(start, 2 * n, 2)))], 2 * n)
    terms = []
    for mono in enumerate_admissible(n, k, parity):
        terms.append((mono.sign, tuple(v - 1 for v in mono.variables(n))))
    return Polynomial(terms, 2 * n)


@lru_cache(maxsize=None)
def half_casimir_polynomials(n: int) -> tuple[Polynomial, Polynomial]:
    """For even n: prod x_{4i-1} + prod x_{4i+1} and prod x_{4i} + prod x_{4i+2}."""
    if n % 2:
        raise ValueError("half-weight Casimirs exist only for even n")
    m = 2 * n
    h = n // 2

    def prod(first):
        return tuple(sorted((first + 4 * i - 1) % m for i in range(h)))

    odd = Polynomial([(1, prod(3)), (1, prod(5))], m)
    even = Polynomial([(1, prod(4)), (1, prod(6))], m)
    return odd, even


def invariant(n: int, k: int, parity: str = ODD):
    """Callable O_k / E_k (k in 0..[n/2] or k = n) of a corner vector."""
    if k == 0:
        return lambda x: coords(x)[0] * 0 + 1
    return invariant_polynomial(n, k, parity)


def monodromy_invariants(n: int) -> list[tuple[str, object]]:
    """The n+1 (odd n) or n+2 (even n) functions O_1..O_m, O_n, E_1..E_m, E_n."""
    m = n // 2
    out = []
    for parity in (ODD, EVEN):
        for k in list(range(1, m + 1)) + [n]:
            out.append((f"{parity}_{k}", invariant_polynomial(n, k, parity)))
    return out


@dataclass(frozen=True)
class InvariantValues:
    n: int
    O: tuple
    E: tuple
    On: object
    En: object
    half_casimirs: tuple | None = None

    def as_dict(self) -> dict:
        from .numerics import format_scalar

        d = {
            "n": self.n,
            "O": [format_scalar(v) for v in self.O],
            "E": [format_scalar(v) for v in self.E],
            "On": format_scalar(self.On),
            "En": format_scalar(self.En),
        }
        if self.half_casimirs is not None:
            d["half_casimirs"] = [format_scalar(v) for v in self.half_casimirs]
        return d


def evaluate_invariants(v) -> InvariantValues:
    x = coords(v)
    n = len(x) // 2
    m = n // 2
    one = x[0] * 0 + 1
    O = (one,) + tuple(invariant_polynomial(n, k, ODD)(x) for k in range(1, m + 1))
    E = (one,) + tuple(invariant_polynomial(n, k, EVEN)(x) for k in range(1, m + 1))
    half = None
    if n % 2 == 0:
        half = tuple(p(x) for p in half_casimir_polynomials(n))
    return InvariantValues(
        n,
        O,
        E,
        invariant_polynomial(n, n, ODD)(x),
        invariant_polynomial(n, n, EVEN)(x),
        half,
    )


def trace_invariants(v) -> tuple[float, float]:
    """(tr M * O_n^{2/3} E_n^{1/3}, tr M^{-1} * O_n^{1/3} E_n^{2/3}) as floats.

    M is the unimodular monodromy in the direction V_{k+n} -> V_k, i.e. the
    inverse of :func:`~pentagram_lab.polygon.monodromy_of_ray`; with this
    direction the two values reproduce sum O_k and sum E_k.  The ray and the
    monodromy are computed in exact rationals (floats convert losslessly), so
    the only rounding is in the final real cube roots.
    """
    from .closure import propagate_ray_geometric
    from .polygon import monodromy_of_ray

    x = tuple(to_field(value_of(c), "rational") for c in coords(v))
    n = len(x) // 2
    ray = propagate_ray_geometric(to_ray_order(x), n + 4)
    forward = monodromy_of_ray(ray, n)
    det = forward.det()
    # unimodular traces: tr(F)/det^{1/3} and tr(adj F)/det^{2/3}
    tr_f = real_cbrt(forward.trace() ** 3 / det)
    tr_adj = real_cbrt(forward.adjugate().trace() ** 3 / det**2)
    On = invariant_polynomial(n, n, ODD)(x)
    En = invariant_polynomial(n, n, EVEN)(x)
    w1 = real_cbrt(On**2 * En) * tr_adj
    w2 = real_cbrt(On * En**2) * tr_f
    return w1, w2


@dataclass(frozen=True)
class IdentityReport:
    residuals: tuple[float, ...]
    On_sign: int
    En_sign: int

    def max(self) -> float:
        return max(self.residuals)


def _rel(lhs_terms, rhs_terms) -> float:
    terms = [float(t) for t in lhs_terms] + [float(t) for t in rhs_terms]
    scale = max(abs(t) for t in terms) or 1.0
    return abs(sum(float(t) for t in lhs_terms) - sum(float(t) for t in rhs_terms)) / scale


def check_closed_identities(v) -> IdentityReport:
    """Residuals of the five closed-polygon identities among O_j, E_j, O_n, E_n.

    Each residual is |lhs - rhs| divided by the largest single term.
    """
    x = tuple(float(value_of(c)) for c in coords(v))
    n = len(x) // 2
    iv = evaluate_invariants(x)
    On, En = float(iv.On), float(iv.En)
    O = [float(t) for t in iv.O]
    E = [float(t) for t in iv.E]
    V = real_power(En, 1) * real_power(On, 2)  # E^{1/3} O^{2/3}
    U = real_power(En, 2) * real_power(On, 1)  # E^{2/3} O^{1/3}
    js = range(1, len(O))
    r = (
        _rel(O, [3 * V]),
        _rel(E, [3 * U]),
        _rel([j * O[j] for j in js], [n * V]),
        _rel([j * E[j] for j in js], [n * U]),
        _rel(
            [real_power(En, 1) * j * j * O[j] for j in js],
            [real_power(On, 1) * j * j * E[j] for j in js],
        ),
    )
    return IdentityReport(r, 1 if On > 0 else -1, 1 if En > 0 else -1)
