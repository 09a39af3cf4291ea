"""Certified real arithmetic in three representations.

Every real quantity in this package is one of:

* ``Rational`` -- p/q in lowest terms,
* ``Quadratic`` -- (a + b*sqrt(d))/c with d squarefree, decided by pure
  integer inequalities (isqrt bounds), so floors and comparisons are exact
  by construction,
* ``CertifiedDecimal`` -- an interval [lo, hi] of decimals standing for an
  unknown real, refinable on demand up to ``max_digits``.

Floors never round silently: an undecidable floor raises
:class:`~specdyn.errors.FloorAmbiguous`, an undecidable ordering raises
:class:`~specdyn.errors.CompareAmbiguous`.

Mixing rules: Rational and Quadratic over the same d combine exactly;
distinct surds, or anything touching a CertifiedDecimal, demote to a
CertifiedDecimal (sound, since the demotion brackets the exact value).
"""

from __future__ import annotations

import os
import re
from decimal import Decimal, localcontext, ROUND_FLOOR, ROUND_CEILING
from fractions import Fraction
from math import gcd, isqrt
from typing import Callable, Optional, Union

from .errors import CompareAmbiguous, FloorAmbiguous

LESS, EQUAL, GREATER = -1, 0, 1

_DEFAULT_MAX_DIGITS = 64
_ENV_MAX_DIGITS = "SPECTRA_MAX_DIGITS"


def default_max_digits() -> int:
    raw = os.environ.get(_ENV_MAX_DIGITS)
    if raw:
        try:
            value = int(raw)
        except ValueError:
            return _DEFAULT_MAX_DIGITS
        if value >= 1:
            return value
    return _DEFAULT_MAX_DIGITS


Coercible = Union["ExactReal", int, Fraction]


def _squarefree_split(d: int) -> tuple[int, int]:
    """Return (s, r) with d == s*s*r and r squarefree."""
    s, r = 1, d
    p = 2
    while p * p <= r:
        while r % (p * p) == 0:
            r //= p * p
            s *= p
        p += 1 if p == 2 else 2
    return s, r


def _sqrt_scaled_floor(b: int, d: int, scale_pow10: int) -> int:
    """Exact floor(b * sqrt(d) * 10**scale_pow10) for squarefree d >= 2."""
    if b == 0:
        return 0
    mag = isqrt(b * b * d * 10 ** (2 * scale_pow10))
    if b > 0:
        return mag
    # b*sqrt(d) is irrational, so the scaled value is never an integer.
    return -mag - 1


def _cmp_int(x: int, y: int) -> int:
    return (x > y) - (x < y)


def _ceil_div(p: int, q: int) -> int:
    return -((-p) // q)


def _dec_floor(d: Decimal) -> int:
    f = Fraction(d)
    return f.numerator // f.denominator


def _dec_scaled(value: int, scale_pow10: int) -> Decimal:
    """Exact Decimal for value * 10**-scale, immune to context precision."""
    with localcontext() as ctx:
        ctx.prec = len(str(abs(value))) + 8
        return Decimal(value).scaleb(-scale_pow10)


class ExactReal:
    """Abstract base; construct through :func:`rational`, :func:`quadratic`,
    :func:`sqrt_of`, :func:`certified` or :func:`parse_real`."""

    __slots__ = ()

    # -- representation-specific hooks -------------------------------------

    def floor(self) -> int:
        raise NotImplementedError

    def int_bracket(self, scale_pow10: int) -> tuple[int, int]:
        """(lo, hi) integers with lo <= self * 10**scale <= hi, hi - lo small."""
        raise NotImplementedError

    def _add(self, other: "ExactReal") -> "ExactReal":
        raise NotImplementedError

    def _mul(self, other: "ExactReal") -> "ExactReal":
        raise NotImplementedError

    def _invert(self) -> "ExactReal":
        raise NotImplementedError

    def __neg__(self) -> "ExactReal":
        raise NotImplementedError

    # -- shared surface -----------------------------------------------------

    @property
    def is_exact(self) -> bool:
        return True

    def frac_part(self) -> "ExactReal":
        return self - self.floor()

    def sign(self) -> int:
        return compare(self, _ZERO)

    def __abs__(self) -> "ExactReal":
        return -self if self.sign() < 0 else self

    def __add__(self, other: Coercible) -> "ExactReal":
        return self._add(_coerce(other))

    __radd__ = __add__

    def __sub__(self, other: Coercible) -> "ExactReal":
        return self._add(-_coerce(other))

    def __rsub__(self, other: Coercible) -> "ExactReal":
        return (-self)._add(_coerce(other))

    def __mul__(self, other: Coercible) -> "ExactReal":
        return self._mul(_coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other: Coercible) -> "ExactReal":
        return self._mul(_coerce(other)._invert())

    def __rtruediv__(self, other: Coercible) -> "ExactReal":
        return _coerce(other)._mul(self._invert())

    def __lt__(self, other: Coercible) -> bool:
        return compare(self, _coerce(other)) < 0

    def __le__(self, other: Coercible) -> bool:
        return compare(self, _coerce(other)) <= 0

    def __gt__(self, other: Coercible) -> bool:
        return compare(self, _coerce(other)) > 0

    def __ge__(self, other: Coercible) -> bool:
        return compare(self, _coerce(other)) >= 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, (ExactReal, int, Fraction)):
            return NotImplemented
        return compare(self, _coerce(other)) == 0

    def __ne__(self, other) -> bool:
        eq = self.__eq__(other)
        return eq if eq is NotImplemented else not eq

    def __str__(self) -> str:
        return format_real(self)


class Rational(ExactReal):
    """p/q with gcd(|p|, q) == 1 and q >= 1."""

    __slots__ = ("p", "q")

    def __init__(self, p: int, q: int = 1):
        if q == 0:
            raise ZeroDivisionError("rational with zero denominator")
        if q < 0:
            p, q = -p, -q
        g = gcd(p, q)
        if g > 1:
            p //= g
            q //= g
        self.p = p
        self.q = q

    def floor(self) -> int:
        return self.p // self.q

    def int_bracket(self, scale_pow10: int) -> tuple[int, int]:
        num = self.p * 10 ** scale_pow10
        return num // self.q, _ceil_div(num, self.q)

    def as_fraction(self) -> Fraction:
        return Fraction(self.p, self.q)

    def _add(self, other: ExactReal) -> ExactReal:
        if isinstance(other, Rational):
            return Rational(self.p * other.q + other.p * self.q, self.q * other.q)
        return other._add(self)

    def _mul(self, other: ExactReal) -> ExactReal:
        if isinstance(other, Rational):
            return Rational(self.p * other.p, self.q * other.q)
        return other._mul(self)

    def _invert(self) -> ExactReal:
        if self.p == 0:
            raise ZeroDivisionError("1/0")
        return Rational(self.q, self.p)

    def __neg__(self) -> "Rational":
        return Rational(-self.p, self.q)

    def sign(self) -> int:
        return _cmp_int(self.p, 0)

    def __hash__(self) -> int:
        return hash(Fraction(self.p, self.q))

    def __repr__(self) -> str:
        return f"Rational({self.p}, {self.q})"


class Quadratic(ExactReal):
    """(a + b*sqrt(d))/c, canonical: c >= 1, gcd(|a|,|b|,c) == 1, d squarefree,
    b != 0 (a zero surd part collapses to Rational at construction)."""

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a: int, b: int, c: int, d: int):
        self.a = a
        self.b = b
        self.c = c
        self.d = d

    def floor(self) -> int:
        # floor(x/c) == floor(floor(x)/c) for integer c >= 1
        return (self.a + _sqrt_scaled_floor(self.b, self.d, 0)) // self.c

    def int_bracket(self, scale_pow10: int) -> tuple[int, int]:
        s = 10 ** scale_pow10
        num_lo = self.a * s + _sqrt_scaled_floor(self.b, self.d, scale_pow10)
        return num_lo // self.c, _ceil_div(num_lo + 1, self.c)

    def _conjugate_parts(self) -> tuple[int, int, int]:
        return self.a, -self.b, self.c

    def _add(self, other: ExactReal) -> ExactReal:
        if isinstance(other, Rational):
            a = self.a * other.q + other.p * self.c
            return _make_quadratic(a, self.b * other.q, self.c * other.q, self.d)
        if isinstance(other, Quadratic):
            if other.d == self.d:
                a = self.a * other.c + other.a * self.c
                b = self.b * other.c + other.b * self.c
                return _make_quadratic(a, b, self.c * other.c, self.d)
            return self._demote()._add(other._demote())
        return other._add(self)

    def _mul(self, other: ExactReal) -> ExactReal:
        if isinstance(other, Rational):
            return _make_quadratic(self.a * other.p, self.b * other.p,
                                   self.c * other.q, self.d)
        if isinstance(other, Quadratic):
            if other.d == self.d:
                a = self.a * other.a + self.b * other.b * self.d
                b = self.a * other.b + self.b * other.a
                return _make_quadratic(a, b, self.c * other.c, self.d)
            return self._demote()._mul(other._demote())
        return other._mul(self)

    def _invert(self) -> ExactReal:
        # c/(a+b*sqrt(d)) = c*(a-b*sqrt(d))/(a^2-b^2 d)
        norm = self.a * self.a - self.b * self.b * self.d
        return _make_quadratic(self.c * self.a, -self.c * self.b, norm, self.d)

    def __neg__(self) -> "Quadratic":
        return Quadratic(-self.a, -self.b, self.c, self.d)

    def sign(self) -> int:
        a, b = self.a, self.b
        if a == 0:
            return _cmp_int(b, 0)
        if a > 0 and b > 0:
            return GREATER
        if a < 0 and b < 0:
            return LESS
        if a > 0:  # b < 0: sign of a - |b|sqrt(d)
            return _cmp_int(a * a, b * b * self.d)
        return _cmp_int(b * b * self.d, a * a)

    def _demote(self, digits: Optional[int] = None) -> "CertifiedDecimal":
        digits = digits or default_max_digits()

        def refine(n: int) -> tuple[Decimal, Decimal]:
            lo, hi = self.int_bracket(n)
            return _dec_scaled(lo, n), _dec_scaled(hi, n)

        lo, hi = refine(digits)
        return CertifiedDecimal(lo, hi, max_digits=digits * 8, digits=digits,
                                refiner=refine)

    def __hash__(self) -> int:
        return hash((self.a, self.b, self.c, self.d))

    def __repr__(self) -> str:
        return f"Quadratic({self.a}, {self.b}, {self.c}, {self.d})"


def _make_quadratic(a: int, b: int, c: int, d: int) -> ExactReal:
    """Canonicalize assuming d already squarefree and >= 2."""
    if c < 0:
        a, b, c = -a, -b, -c
    if b == 0:
        return Rational(a, c)
    g = gcd(gcd(abs(a), abs(b)), c)
    if g > 1:
        a //= g
        b //= g
        c //= g
    return Quadratic(a, b, c, d)


class CertifiedDecimal(ExactReal):
    """An unknown real confined to [lo, hi], refinable on demand.

    ``refiner(digits)`` recomputes bounds at the requested precision; results
    are intersected with the current interval so refinement never widens.
    """

    __slots__ = ("lo", "hi", "max_digits", "digits", "refiner")

    def __init__(self, lo: Decimal, hi: Decimal, max_digits: Optional[int] = None,
                 digits: Optional[int] = None,
                 refiner: Optional[Callable[[int], tuple[Decimal, Decimal]]] = None):
        if lo > hi:
            raise ValueError(f"certified interval inverted: [{lo}, {hi}]")
        self.lo = lo
        self.hi = hi
        self.max_digits = max_digits or default_max_digits()
        self.digits = digits if digits is not None else min(16, self.max_digits)
        self.refiner = refiner

    @property
    def is_exact(self) -> bool:
        return False

    @property
    def is_degenerate(self) -> bool:
        return self.lo == self.hi

    def bounds_at(self, digits: int) -> tuple[Decimal, Decimal]:
        if self.refiner is None or digits <= self.digits:
            return self.lo, self.hi
        lo, hi = self.refiner(digits)
        return max(lo, self.lo), min(hi, self.hi)

    def refined(self, digits: int) -> "CertifiedDecimal":
        digits = min(digits, self.max_digits)
        lo, hi = self.bounds_at(digits)
        return CertifiedDecimal(lo, hi, self.max_digits, digits, self.refiner)

    def floor(self) -> int:
        digits = self.digits
        while True:
            lo, hi = self.bounds_at(digits)
            flo = _dec_floor(lo)
            fhi = _dec_floor(hi)
            if flo == fhi or lo == hi:
                return flo
            if digits >= self.max_digits or self.refiner is None:
                raise FloorAmbiguous(lo, hi, self.max_digits)
            digits = min(digits * 2, self.max_digits)

    def int_bracket(self, scale_pow10: int) -> tuple[int, int]:
        lo, hi = self.bounds_at(scale_pow10)
        scale = 10 ** scale_pow10
        f_lo = Fraction(lo) * scale
        f_hi = Fraction(hi) * scale
        return (f_lo.numerator // f_lo.denominator,
                _ceil_div(f_hi.numerator, f_hi.denominator))

    def as_fraction_bounds(self) -> tuple[Fraction, Fraction]:
        return Fraction(self.lo), Fraction(self.hi)

    def _arith(self, other: ExactReal, op: str) -> "CertifiedDecimal":
        right = other if isinstance(other, CertifiedDecimal) else _demote_exact(other)
        max_digits = max(self.max_digits, right.max_digits)

        def combine(digits: int) -> tuple[Decimal, Decimal]:
            a_lo, a_hi = self.bounds_at(digits)
            b_lo, b_hi = right.bounds_at(digits)
            prec = digits + 8
            with localcontext() as ctx:
                ctx.prec = prec
                if op == "add":
                    ctx.rounding = ROUND_FLOOR
                    lo = a_lo + b_lo
                    ctx.rounding = ROUND_CEILING
                    hi = a_hi + b_hi
                else:  # mul
                    ctx.rounding = ROUND_FLOOR
                    lo = min(a_lo * b_lo, a_lo * b_hi, a_hi * b_lo, a_hi * b_hi)
                    ctx.rounding = ROUND_CEILING
                    hi = max(a_lo * b_lo, a_lo * b_hi, a_hi * b_lo, a_hi * b_hi)
            return lo, hi

        digits = max(self.digits, right.digits)
        lo, hi = combine(digits)
        return CertifiedDecimal(lo, hi, max_digits, digits, combine)

    def _add(self, other: ExactReal) -> ExactReal:
        return self._arith(other, "add")

    def _mul(self, other: ExactReal) -> ExactReal:
        return self._arith(other, "mul")

    def _invert(self) -> ExactReal:
        digits = self.digits
        while True:
            lo, hi = self.bounds_at(digits)
            if lo > 0 or hi < 0:
                break
            if lo == hi:  # exactly zero
                raise ZeroDivisionError("1/0 (certified)")
            if digits >= self.max_digits or self.refiner is None:
                raise CompareAmbiguous(
                    f"divisor interval [{lo}, {hi}] straddles zero at max precision")
            digits = min(digits * 2, self.max_digits)

        source = self

        def combine(n: int) -> tuple[Decimal, Decimal]:
            s_lo, s_hi = source.bounds_at(n)
            with localcontext() as ctx:
                ctx.prec = n + 8
                ctx.rounding = ROUND_FLOOR
                inv_lo = 1 / s_hi
                ctx.rounding = ROUND_CEILING
                inv_hi = 1 / s_lo
            return inv_lo, inv_hi

        lo2, hi2 = combine(digits)
        return CertifiedDecimal(lo2, hi2, self.max_digits, digits, combine)

    def __neg__(self) -> "CertifiedDecimal":
        # Decimal.__neg__ rounds at context precision; copy_negate is exact
        source = self
        refiner = None
        if source.refiner is not None:
            def refiner(n: int) -> tuple[Decimal, Decimal]:
                lo, hi = source.bounds_at(n)
                return hi.copy_negate(), lo.copy_negate()
        return CertifiedDecimal(self.hi.copy_negate(), self.lo.copy_negate(),
                                self.max_digits, self.digits, refiner)

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"CertifiedDecimal({self.lo}, {self.hi}, max_digits={self.max_digits})"


def _demote_exact(x: ExactReal, digits: Optional[int] = None) -> CertifiedDecimal:
    if isinstance(x, CertifiedDecimal):
        return x
    if isinstance(x, Quadratic):
        return x._demote(digits)
    assert isinstance(x, Rational)
    digits = digits or default_max_digits()
    source = x

    def refine(n: int) -> tuple[Decimal, Decimal]:
        lo, hi = source.int_bracket(n)
        return _dec_scaled(lo, n), _dec_scaled(hi, n)

    lo, hi = refine(digits)
    return CertifiedDecimal(lo, hi, max_digits=digits * 8, digits=digits,
                            refiner=refine)


_ZERO = Rational(0, 1)


def _coerce(value: Coercible) -> ExactReal:
    if isinstance(value, ExactReal):
        return value
    if isinstance(value, int):
        return Rational(value, 1)
    if isinstance(value, Fraction):
        return Rational(value.numerator, value.denominator)
    raise TypeError(f"cannot interpret {value!r} as an exact real")


# -- public constructors ----------------------------------------------------

def rational(p: int, q: int = 1) -> Rational:
    return Rational(p, q)


def quadratic(a: int, b: int, c: int, d: int) -> ExactReal:
    """(a + b*sqrt(d))/c, with d any positive integer (squares are folded
    into b, so quadratic(0, 1, 1, 8) == 2*sqrt(2))."""
    if d <= 0:
        raise ValueError("radicand must be positive")
    if c == 0:
        raise ZeroDivisionError("quadratic with zero denominator")
    s, r = _squarefree_split(d)
    b *= s
    if r == 1:
        return Rational(a + b, c)
    return _make_quadratic(a, b, c, r)


def sqrt_of(n: int) -> ExactReal:
    return quadratic(0, 1, 1, n)


def certified(lo, hi, max_digits: Optional[int] = None) -> CertifiedDecimal:
    return CertifiedDecimal(Decimal(str(lo)), Decimal(str(hi)), max_digits)


def from_fraction(f: Fraction) -> Rational:
    return Rational(f.numerator, f.denominator)


# -- the three spec operations ----------------------------------------------

def compare(x: Coercible, y: Coercible) -> int:
    """Total order on exactly representable values; -1, 0 or 1.

    Certified intervals are refined until the order is decided; raises
    CompareAmbiguous if they still overlap at max precision.
    """
    x = _coerce(x)
    y = _coerce(y)
    if isinstance(x, Rational) and isinstance(y, Rational):
        return _cmp_int(x.p * y.q, y.p * x.q)
    if isinstance(x, (Rational, Quadratic)) and isinstance(y, (Rational, Quadratic)):
        dx = x.d if isinstance(x, Quadratic) else None
        dy = y.d if isinstance(y, Quadratic) else None
        if dx is None or dy is None or dx == dy:
            diff = x._add(-y)
            return diff.sign()
        return _compare_brackets(x, y, hard_cap=max(default_max_digits() * 8, 512))
    # at least one certified interval
    cx = x if isinstance(x, CertifiedDecimal) else None
    cy = y if isinstance(y, CertifiedDecimal) else None
    if cx is not None and cx.is_degenerate and cx.refiner is None:
        return -compare(y, from_fraction(Fraction(cx.lo)))
    if cy is not None and cy.is_degenerate and cy.refiner is None:
        return compare(x, from_fraction(Fraction(cy.lo)))
    cap = max(c.max_digits for c in (cx, cy) if c is not None)
    return _compare_brackets(x, y, hard_cap=cap)


def _compare_brackets(x: ExactReal, y: ExactReal, hard_cap: int) -> int:
    digits = 16
    while True:
        x_lo, x_hi = x.int_bracket(digits)
        y_lo, y_hi = y.int_bracket(digits)
        if x_hi < y_lo:
            return LESS
        if x_lo > y_hi:
            return GREATER
        if x_lo == x_hi == y_lo == y_hi:
            return EQUAL
        if digits >= hard_cap:
            raise CompareAmbiguous(
                f"values indistinguishable at {hard_cap} digits: "
                f"{x!r} vs {y!r}")
        digits = min(digits * 2, hard_cap)


def floor_exact(x: Coercible) -> int:
    return _coerce(x).floor()


def floor_linear(alpha: Coercible, n: int, gamma: Coercible) -> int:
    """Exact floor(n*alpha + gamma).

    Rational/Quadratic inputs are decided by integer inequalities alone;
    CertifiedDecimal inputs refine until the floor is certain and raise
    FloorAmbiguous when max_digits is exhausted first.
    """
    alpha = _coerce(alpha)
    gamma = _coerce(gamma)
    if alpha.sign() <= 0:
        raise ValueError("floor_linear requires alpha > 0")
    return (alpha * n + gamma).floor()


def frac_part(x: Coercible) -> ExactReal:
    """x - floor(x), in [0, 1), preserving the representation class."""
    x = _coerce(x)
    return x - x.floor()


# -- text syntax --------------------------------------------------------------

_INT_RE = re.compile(r"^[+-]?\d+$")
_FRAC_RE = re.compile(r"^([+-]?\d+)/(\d+)$")
_DEC_RE = re.compile(r"^[+-]?(\d+\.\d*|\.\d+)$")
_RANGE_RE = re.compile(r"^([+-]?\d+(?:\.\d+)?)\.\.([+-]?\d+(?:\.\d+)?)$")
_SQRT_RE = re.compile(r"^([+-]?)(?:(\d+)\*)?sqrt\((\d+)\)(?:/(\d+))?$")
_QUAD_RE = re.compile(
    r"^\(?([+-]?\d+)([+-])(?:(\d+)\*)?sqrt\((\d+)\)\)?(?:/(\d+))?$")
_QUAD_SURD_FIRST_RE = re.compile(
    r"^\(?([+-]?)(?:(\d+)\*)?sqrt\((\d+)\)([+-]\d+)\)?(?:/(\d+))?$")


def parse_real(text: str) -> ExactReal:
    """Parse "p/q", "sqrt(d)", "(a+b*sqrt(d))/c" and decimal literals.

    Decimal literals become degenerate certified intervals; "lo..hi" is
    accepted for explicit intervals.
    """
    s = text.strip().replace(" ", "")
    if _INT_RE.match(s):
        return Rational(int(s), 1)
    m = _FRAC_RE.match(s)
    if m:
        return Rational(int(m.group(1)), int(m.group(2)))
    if _DEC_RE.match(s):
        d = Decimal(s)
        return CertifiedDecimal(d, d)
    m = _RANGE_RE.match(s)
    if m:
        return CertifiedDecimal(Decimal(m.group(1)), Decimal(m.group(2)))
    m = _SQRT_RE.match(s)
    if m:
        sign = -1 if m.group(1) == "-" else 1
        b = sign * int(m.group(2) or 1)
        c = int(m.group(4) or 1)
        return quadratic(0, b, c, int(m.group(3)))
    m = _QUAD_RE.match(s)
    if m:
        a = int(m.group(1))
        b = int(m.group(3) or 1)
        if m.group(2) == "-":
            b = -b
        c = int(m.group(5) or 1)
        return quadratic(a, b, c, int(m.group(4)))
    m = _QUAD_SURD_FIRST_RE.match(s)
    if m:
        sign = -1 if m.group(1) == "-" else 1
        b = sign * int(m.group(2) or 1)
        a = int(m.group(4))
        c = int(m.group(5) or 1)
        return quadratic(a, b, c, int(m.group(3)))
    raise ValueError(f"unrecognized real syntax: {text!r}")


def format_real(x: ExactReal) -> str:
    if isinstance(x, Rational):
        return str(x.p) if x.q == 1 else f"{x.p}/{x.q}"
    if isinstance(x, Quadratic):
        surd = f"sqrt({x.d})" if abs(x.b) == 1 else f"{abs(x.b)}*sqrt({x.d})"
        if x.a == 0:
            core = surd if x.b > 0 else f"-{surd}"
            return core if x.c == 1 else f"{core}/{x.c}"
        joiner = "+" if x.b > 0 else "-"
        core = f"{x.a}{joiner}{surd}"
        return core if x.c == 1 else f"({core})/{x.c}"
    assert isinstance(x, CertifiedDecimal)
    if x.is_degenerate:
        return str(x.lo)
    return f"{x.lo}..{x.hi}"


# widely used constants
PHI = quadratic(1, 1, 2, 5)
SQRT2 = sqrt_of(2)
SQRT3 = sqrt_of(3)
