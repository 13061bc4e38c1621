"""Scalar fields, forward-mode jets and valuation estimates.

Two ground fields are supported: exact rationals (``fractions.Fraction``)
and 64-bit floats.  Every geometric and algebraic routine in the package is
written against ordinary arithmetic operators, so it runs unchanged on
either field and on :class:`Jet` values built over them.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Callable, NamedTuple, Sequence

import numpy as np

__all__ = [
    "Fraction",
    "Jet",
    "jet_seed",
    "gradient",
    "value_of",
    "is_exact",
    "to_field",
    "parse_scalar",
    "format_scalar",
    "real_cbrt",
    "exact_cbrt",
    "real_power",
    "Valuation",
    "valuation_estimate",
    "valuation_with_residual",
    "random_rational",
    "make_rng",
    "DENOMINATOR",
    "exact_rank",
]

# Denominator for random rational samples k / DENOMINATOR.
DENOMINATOR = 2**16


class Jet:
    """A field value together with exact first partial derivatives.

    Partials are stored sparsely (seed index -> derivative); ``size`` is the
    number of seed coordinates fixed when the seeds were created.
    """

    __slots__ = ("value", "grad", "size")

    def __init__(self, value, grad=None, size=0):
        self.value = value
        self.grad = grad if grad is not None else {}
        self.size = size

    @property
    def partials(self):
        zero = self.value * 0
        return tuple(self.grad.get(i, zero) for i in range(self.size))

    def _lift(self, other):
        if isinstance(other, Jet):
            return other
        return Jet(other, {}, self.size)

    def __add__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.value + other, self.grad, self.size)
        grad = dict(self.grad)
        for i, d in other.grad.items():
            grad[i] = grad[i] + d if i in grad else d
        return Jet(self.value + other.value, grad, max(self.size, other.size))

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.value, {i: -d for i, d in self.grad.items()}, self.size)

    def __pos__(self):
        return self

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.value * other, {i: d * other for i, d in self.grad.items()}, self.size)
        a, b = self.value, other.value
        grad = {i: d * b for i, d in self.grad.items()}
        for i, d in other.grad.items():
            grad[i] = grad[i] + a * d if i in grad else a * d
        return Jet(a * b, grad, max(self.size, other.size))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            if other == 0:
                raise ZeroDivisionError("jet division by zero")
            return Jet(self.value / other, {i: d / other for i, d in self.grad.items()}, self.size)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def reciprocal(self):
        if self.value == 0:
            raise ZeroDivisionError("jet division by zero")
        inv = 1 / self.value
        scale = -inv * inv
        return Jet(inv, {i: d * scale for i, d in self.grad.items()}, self.size)

    def __pow__(self, k):
        if not isinstance(k, int):
            raise TypeError("jets support integer powers only")
        if k < 0:
            return self.reciprocal() ** (-k)
        if k == 0:
            return Jet(self.value * 0 + 1, {}, self.size)
        scale = k * self.value ** (k - 1)
        return Jet(self.value**k, {i: d * scale for i, d in self.grad.items()}, self.size)

    def __abs__(self):
        return -self if self.value < 0 else self

    # comparisons act on the value only
    def __eq__(self, other):
        return self.value == value_of(other)

    def __ne__(self, other):
        return self.value != value_of(other)

    def __lt__(self, other):
        return self.value < value_of(other)

    def __le__(self, other):
        return self.value <= value_of(other)

    def __gt__(self, other):
        return self.value > value_of(other)

    def __ge__(self, other):
        return self.value >= value_of(other)

    __hash__ = None

    def __repr__(self):
        return f"Jet({self.value!r}, {self.partials!r})"


def jet_seed(values: Sequence) -> list[Jet]:
    """Seed one jet per coordinate; the k-th jet has partials e_k."""
    values = list(values)
    if not values:
        raise ValueError("jet_seed needs at least one value")
    size = len(values)
    return [Jet(v, {k: v * 0 + 1}, size) for k, v in enumerate(values)]


def value_of(x):
    return x.value if isinstance(x, Jet) else x


def gradient(f: Callable, x: Sequence) -> list:
    """Dense gradient of ``f`` at ``x`` by forward-mode jets."""
    seeds = jet_seed(x)
    out = f(seeds)
    zero = x[0] * 0
    if not isinstance(out, Jet):
        return [zero] * len(seeds)
    return [out.grad.get(i, zero) for i in range(len(seeds))]


def is_exact(x) -> bool:
    x = value_of(x)
    return isinstance(x, (int, Rational)) and not isinstance(x, bool)


def to_field(x, field: str):
    """Coerce ``x`` into the named field ("rational" or "f64")."""
    if field == "rational":
        return Fraction(x)
    if field == "f64":
        return float(x)
    raise ValueError(f"unknown field {field!r}")


def parse_scalar(s, field: str = "rational"):
    """Parse "p/q", an integer string, or a number."""
    if isinstance(s, str):
        s = s.strip()
        if field == "rational":
            return Fraction(s)
        return float(Fraction(s)) if "/" in s else float(s)
    return to_field(s, field)


def format_scalar(x):
    """Rationals serialize as reduced "p/q" strings, floats as floats."""
    x = value_of(x)
    if isinstance(x, (int, Fraction)):
        x = Fraction(x)
        return f"{x.numerator}/{x.denominator}"
    return float(x)


def _integer_cbrt(m: int):
    """Exact integer cube root of m, or None."""
    if m < 0:
        r = _integer_cbrt(-m)
        return None if r is None else -r
    if m < 2:
        return m
    # Newton from an upper bound decreases monotonically to floor(cbrt(m))
    r = 1 << ((m.bit_length() + 2) // 3)
    while True:
        nr = (2 * r + m // (r * r)) // 3
        if nr >= r:
            break
        r = nr
    return r if r * r * r == m else None


def exact_cbrt(q) -> Fraction | None:
    """Rational cube root of a rational, or None when it is irrational."""
    q = Fraction(q)
    a = _integer_cbrt(q.numerator)
    b = _integer_cbrt(q.denominator)
    if a is None or b is None:
        return None
    return Fraction(a, b)


def real_cbrt(x) -> float:
    """Sign-preserving real cube root in Float64."""
    return float(np.cbrt(float(x)))


def real_power(x, num: int, den: int = 3):
    """x**(num/den) using the real (sign-preserving) root; den must be odd."""
    if den % 2 == 0:
        raise ValueError("real_power needs an odd root")
    if isinstance(x, Jet):
        v = real_power(x.value, num, den)
        base = float(x.value)
        scale = (num / den) * v / base
        return Jet(v, {i: float(d) * scale for i, d in x.grad.items()}, x.size)
    base = float(x)
    root = math.copysign(abs(base) ** (1.0 / den), base)
    return root**num


class Valuation(NamedTuple):
    order: int
    residual: float


def _abs_log(x) -> float:
    x = value_of(x)
    if isinstance(x, (int, Fraction)):
        x = Fraction(x)
        return math.log(abs(x.numerator)) - math.log(x.denominator)
    return math.log(abs(float(x)))


def valuation_with_residual(f: Callable, u0, ratio=Fraction(1, 2)) -> Valuation:
    """Estimate the lowest exponent of u in f(u) near u0.

    Compares |f(u0)| with |f(ratio*u0)|.  In exact arithmetic the integer is
    chosen by rational comparisons against odd powers of 1/ratio; the residual
    is the distance of the real estimate to that integer.
    """
    ratio = Fraction(ratio) if not isinstance(ratio, float) else ratio
    if not 0 < ratio < 1:
        raise ValueError("ratio must lie in (0, 1)")
    a = value_of(f(u0))
    b = value_of(f(ratio * u0))
    if a == 0 or b == 0:
        raise ValueError("valuation undefined at sample")
    real = (_abs_log(a) - _abs_log(b)) / math.log(1 / ratio)
    if is_exact(a) and is_exact(b) and isinstance(ratio, Fraction):
        q2 = (Fraction(a) / Fraction(b)) ** 2
        inv = 1 / ratio
        k = round(real)
        # q in [inv^(k-1/2), inv^(k+1/2))  <=>  q^2 in [inv^(2k-1), inv^(2k+1))
        while q2 < inv ** (2 * k - 1):
            k -= 1
        while q2 >= inv ** (2 * k + 1):
            k += 1
    else:
        k = round(real)
    return Valuation(int(k), abs(real - k))


def valuation_estimate(f: Callable, u0, ratio=Fraction(1, 2)) -> int:
    return valuation_with_residual(f, u0, ratio).order


def make_rng(seed: int) -> np.random.Generator:
    """Named, portable generator (PCG64) used for every random sample."""
    return np.random.Generator(np.random.PCG64(seed))


def random_rational(rng: np.random.Generator, lo: int = 1, hi: int = DENOMINATOR, den: int = DENOMINATOR):
    """k / den with k uniform in [lo, hi]."""
    return Fraction(int(rng.integers(lo, hi + 1)), den)


def exact_rank(rows: Sequence[Sequence]) -> int:
    """Rank of a rational matrix by fraction-free (Bareiss) elimination.

    Rows are scaled to integers first, so every intermediate is an integer.
    """
    m = []
    for r in rows:
        fr = [Fraction(value_of(c)) for c in r]
        den = math.lcm(*(c.denominator for c in fr)) if fr else 1
        m.append([int(c * den) for c in fr])
    if not m or not m[0]:
        return 0
    nrows, ncols = len(m), len(m[0])
    rank, prev = 0, 1
    for col in range(ncols):
        pivot = next((r for r in range(rank, nrows) if m[r][col] != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        p = m[rank][col]
        for r in range(rank + 1, nrows):
            f = m[r][col]
            m[r] = [(p * m[r][c] - f * m[rank][c]) // prev for c in range(ncols)]
        prev = p
        rank += 1
        if rank == nrows:
            break
    return rank
