"""Shared oracles for the test suite.

The decimal oracle is an independent evaluation path: it goes through
Python's Decimal library (correctly rounded sqrt at high precision), not
through the package's integer-bracket machinery.
"""

from __future__ import annotations

import random
from decimal import Decimal, getcontext, ROUND_FLOOR

import pytest

from specdyn.exact import ExactReal, Quadratic, Rational, CertifiedDecimal


def oracle_value(x: ExactReal, digits: int = 200) -> Decimal:
    """High-precision Decimal rendering of an exact real, via Decimal.sqrt."""
    getcontext().prec = digits + 20
    if isinstance(x, Rational):
        return Decimal(x.p) / Decimal(x.q)
    if isinstance(x, Quadratic):
        surd = Decimal(x.d).sqrt()
        return (Decimal(x.a) + Decimal(x.b) * surd) / Decimal(x.c)
    assert isinstance(x, CertifiedDecimal) and x.is_degenerate
    return x.lo


def oracle_floor_linear(alpha: ExactReal, n: int, gamma: ExactReal,
                        digits: int = 200) -> int:
    """Brute-force decimal floor of n*alpha + gamma at the given precision."""
    getcontext().prec = digits + 20
    val = oracle_value(alpha, digits) * n + oracle_value(gamma, digits)
    return int(val.to_integral_value(rounding=ROUND_FLOOR))


def random_rational(rng: random.Random, max_den: int = 1000,
                    positive: bool = True) -> Rational:
    q = rng.randint(1, max_den)
    p = rng.randint(1 if positive else -max_den, max_den)
    return Rational(p, q)


def random_unit_rational(rng: random.Random, max_den: int = 1000) -> Rational:
    q = rng.randint(2, max_den)
    p = rng.randint(1, q - 1)
    return Rational(p, q)


@pytest.fixture
def rng() -> random.Random:
    return random.Random(0xC0FFEE)
