"""Shared sampling helpers for the test modules."""

from fractions import Fraction

from pentagram_lab.numerics import DENOMINATOR, random_rational


def rational_vector(rng, length, lo=1, hi=DENOMINATOR):
    return tuple(random_rational(rng, lo, hi) for _ in range(length))


def signed_rational_vector(rng, length):
    return tuple(random_rational(rng, -DENOMINATOR, DENOMINATOR) or Fraction(1, 3) for _ in range(length))
