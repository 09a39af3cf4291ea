"""Concrete dynamical systems and return-time machinery.

Systems: circle rotations (states are exact reals in [0,1)), symbolic
shifts (points generated by periodic, cutting-sequence, or prefix+period
rules), products, and the surjective hull that adjoins a convergent level
ladder to any system.

Membership of an orbit point in a neighborhood is decided exactly; a point
landing exactly on a ball boundary raises AmbiguousMembership instead of
being resolved by convention.  Long rotation scans run on certified integer
brackets with exact fallback, so they are as trustworthy as the naive loop.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from .errors import (AmbiguityError, AmbiguousMembership, NoPreimage,
                     NotInvertible)
from .exact import (ExactReal, Rational, compare, frac_part, parse_real,
                    format_real, _coerce)
from .windows import WindowSet

Radius = Union[ExactReal, int, Fraction]


# -- shift point rules -------------------------------------------------------

@dataclass(frozen=True)
class PeriodicRule:
    word: tuple[int, ...]

    def symbol(self, i: int) -> int:
        return self.word[i % len(self.word)]

    two_sided = True


@dataclass(frozen=True)
class SturmianRule:
    """Cutting sequence of a line of slope alpha: symbol i is
    floor((i+1)*alpha) - floor(i*alpha)."""
    alpha: ExactReal

    def symbol(self, i: int) -> int:
        return (self.alpha * (i + 1)).floor() - (self.alpha * i).floor()

    two_sided = True


@dataclass(frozen=True)
class PrefixRule:
    """Explicit finite word followed by an eventual period; one-sided."""
    prefix: tuple[int, ...]
    period: tuple[int, ...]

    def symbol(self, i: int) -> int:
        if i < 0:
            raise IndexError("prefix-rule words are one-sided")
        if i < len(self.prefix):
            return self.prefix[i]
        return self.period[(i - len(self.prefix)) % len(self.period)]

    two_sided = False


@dataclass(frozen=True)
class ShiftPoint:
    rule: Union[PeriodicRule, SturmianRule, PrefixRule]
    offset: int = 0

    def symbol(self, i: int) -> int:
        return self.rule.symbol(self.offset + i)


@dataclass(frozen=True)
class HullPoint:
    """level None is the fixed limit point; level k >= 1 sits at height 1/k."""
    level: Optional[int]
    inner: object


# -- systems -------------------------------------------------------------------

class CircleRotation:
    kind = "circle-rotation"

    def __init__(self, angle: ExactReal):
        self.angle = _coerce(angle)

    def normalize(self, x) -> ExactReal:
        return frac_part(_coerce(x))

    def step(self, x: ExactReal) -> ExactReal:
        return frac_part(x + self.angle)

    def inverse(self, x: ExactReal) -> ExactReal:
        return frac_part(x - self.angle)

    has_inverse = True

    def iterate(self, x: ExactReal, n: int) -> ExactReal:
        if n == 0:
            return x
        return frac_part(x + self.angle * n)

    def preimages(self, x: ExactReal) -> list:
        return [self.inverse(x)]

    def metric(self, x: ExactReal, y: ExactReal) -> ExactReal:
        d = abs(x - y)
        wrap = 1 - d
        return d if compare(d, wrap) <= 0 else wrap

    def metric_compare(self, x, y, r: Radius) -> int:
        return compare(self.metric(x, y), _coerce(r))

    def state_eq(self, x, y) -> bool:
        return compare(x, y) == 0

    def format_state(self, x) -> str:
        return format_real(x)


class ShiftSystem:
    kind = "shift"

    def __init__(self, alphabet_size: int):
        if alphabet_size < 1:
            raise ValueError("alphabet must be non-empty")
        self.alphabet_size = alphabet_size

    def step(self, p: ShiftPoint) -> ShiftPoint:
        return ShiftPoint(p.rule, p.offset + 1)

    @property
    def has_inverse(self) -> bool:
        return True  # partial for one-sided points; inverse() raises there

    def inverse(self, p: ShiftPoint) -> ShiftPoint:
        if not p.rule.two_sided and p.offset == 0:
            raise NotInvertible("one-sided word at its left edge")
        return ShiftPoint(p.rule, p.offset - 1)

    def iterate(self, p: ShiftPoint, n: int) -> ShiftPoint:
        if n < 0 and not p.rule.two_sided and p.offset + n < 0:
            raise NotInvertible("one-sided word cannot rewind that far")
        return ShiftPoint(p.rule, p.offset + n)

    def preimages(self, p: ShiftPoint) -> list:
        if p.rule.two_sided:
            return [ShiftPoint(p.rule, p.offset - 1)]
        if p.offset >= 1:
            return [ShiftPoint(p.rule, p.offset - 1)]
        out = []
        for s in range(self.alphabet_size):
            out.append(ShiftPoint(PrefixRule((s,) + p.rule.prefix, p.rule.period), 0))
        return out

    def first_difference(self, p: ShiftPoint, q: ShiftPoint, depth: int) -> Optional[int]:
        for j in range(depth):
            if p.symbol(j) != q.symbol(j):
                return j
        return None

    def metric_compare(self, p: ShiftPoint, q: ShiftPoint, r: Radius,
                       depth_cap: int = 4096) -> int:
        """Compare d(p, q) = 2^-j (j the first differing index) against r."""
        r = _coerce(r)
        for j in range(depth_cap):
            if p.symbol(j) != q.symbol(j):
                return compare(Rational(1, 2 ** j), r)
            if compare(Rational(1, 2 ** (j + 1)), r) < 0:
                return -1  # agreement so far already forces d < r
        raise AmbiguityError(f"shift metric undecided after {depth_cap} symbols")

    def state_eq(self, p: ShiftPoint, q: ShiftPoint, depth: int = 256) -> bool:
        return self.first_difference(p, q, depth) is None

    def format_state(self, p: ShiftPoint) -> str:
        return "".join(str(p.symbol(j)) for j in range(16)) + "..."


class ProductSystem:
    kind = "product"

    def __init__(self, left, right):
        self.left = left
        self.right = right

    def step(self, xy):
        return (self.left.step(xy[0]), self.right.step(xy[1]))

    @property
    def has_inverse(self) -> bool:
        return self.left.has_inverse and self.right.has_inverse

    def inverse(self, xy):
        return (self.left.inverse(xy[0]), self.right.inverse(xy[1]))

    def iterate(self, xy, n: int):
        return (self.left.iterate(xy[0], n), self.right.iterate(xy[1], n))

    def preimages(self, xy) -> list:
        return [(a, b) for a in self.left.preimages(xy[0])
                for b in self.right.preimages(xy[1])]

    def metric_compare(self, xy, uv, r: Radius) -> int:
        # max metric: inside iff both inside; boundary iff the max is exact
        c1 = self.left.metric_compare(xy[0], uv[0], r)
        if c1 > 0:
            return 1
        c2 = self.right.metric_compare(xy[1], uv[1], r)
        return max(c1, c2)

    def state_eq(self, xy, uv) -> bool:
        return self.left.state_eq(xy[0], uv[0]) and self.right.state_eq(xy[1], uv[1])

    def format_state(self, xy) -> str:
        return f"({self.left.format_state(xy[0])}, {self.right.format_state(xy[1])})"


class HullSystem:
    """Adjoin the convergent ladder Z = {0} u {1/n}: the original system runs
    on level 1, higher levels slide down one notch per step, and the limit
    level is fixed.  The resulting step map is total and onto."""

    kind = "hull"

    def __init__(self, inner):
        self.inner = inner

    def embed(self, a) -> HullPoint:
        return HullPoint(1, a)

    def step(self, p: HullPoint) -> HullPoint:
        if p.level is None:
            return p
        if p.level == 1:
            return HullPoint(1, self.inner.step(p.inner))
        return HullPoint(p.level - 1, p.inner)

    has_inverse = False

    def inverse(self, p: HullPoint) -> HullPoint:
        raise NotInvertible("the hull collapses levels; no single-valued inverse")

    def iterate(self, p: HullPoint, n: int) -> HullPoint:
        if n < 0:
            raise NotInvertible("the hull collapses levels; no single-valued inverse")
        if n == 0 or p.level is None:
            return p
        if n < p.level:
            return HullPoint(p.level - n, p.inner)
        return HullPoint(1, self.inner.iterate(p.inner, n - p.level + 1))

    def preimages(self, p: HullPoint) -> list:
        if p.level is None:
            return [p]
        if p.level == 1:
            inner_pre = [HullPoint(1, b) for b in self.inner.preimages(p.inner)]
            return inner_pre + [HullPoint(2, p.inner)]
        return [HullPoint(p.level + 1, p.inner)]

    def _level_gap(self, a: Optional[int], b: Optional[int]) -> Fraction:
        fa = Fraction(0) if a is None else Fraction(1, a)
        fb = Fraction(0) if b is None else Fraction(1, b)
        return abs(fa - fb)

    def metric_compare(self, p: HullPoint, q: HullPoint, r: Radius) -> int:
        cz = compare(_coerce(self._level_gap(p.level, q.level)), _coerce(r))
        ci = self.inner.metric_compare(p.inner, q.inner, r)
        return max(cz, ci)

    def state_eq(self, p: HullPoint, q: HullPoint) -> bool:
        return p.level == q.level and self.inner.state_eq(p.inner, q.inner)

    def format_state(self, p: HullPoint) -> str:
        lvl = "0" if p.level is None else f"1/{p.level}"
        return f"({lvl}, {self.inner.format_state(p.inner)})"


# -- neighborhoods ----------------------------------------------------------------

@dataclass(frozen=True)
class Ball:
    center: object
    radius: object  # ExactReal or Fraction; must be > 0


@dataclass(frozen=True)
class Cylinder:
    word: tuple[int, ...]
    offset: int = 0

    def __post_init__(self):
        if not self.word:
            raise ValueError("cylinder word must be non-empty")


@dataclass(frozen=True)
class HullSlice:
    """{level} x V inside a hull system."""
    level: Optional[int]
    inner: object


@dataclass(frozen=True)
class ProductNbhd:
    left: object
    right: object


@dataclass(frozen=True)
class Pullback:
    """T^-m U as a predicate: x belongs iff T^m x belongs to U."""
    base: object
    m: int


@dataclass(frozen=True)
class NbhdIntersection:
    parts: tuple


Neighborhood = Union[Ball, Cylinder, HullSlice, ProductNbhd, Pullback,
                     NbhdIntersection]


def nbhd_contains(sys, nbhd, state) -> bool:
    """Exact membership; raises AmbiguousMembership on a boundary hit."""
    if isinstance(nbhd, Ball):
        c = sys.metric_compare(nbhd.center, state, nbhd.radius)
        if c == 0:
            raise AmbiguousMembership(-1, "point exactly on ball boundary")
        return c < 0
    if isinstance(nbhd, Cylinder):
        return all(state.symbol(nbhd.offset + j) == s
                   for j, s in enumerate(nbhd.word))
    if isinstance(nbhd, HullSlice):
        if state.level != nbhd.level:
            return False
        return nbhd_contains(sys.inner, nbhd.inner, state.inner)
    if isinstance(nbhd, ProductNbhd):
        in_left = nbhd_contains(sys.left, nbhd.left, state[0])
        return in_left and nbhd_contains(sys.right, nbhd.right, state[1])
    if isinstance(nbhd, Pullback):
        return nbhd_contains(sys, nbhd.base, sys.iterate(state, nbhd.m))
    if isinstance(nbhd, NbhdIntersection):
        return all(nbhd_contains(sys, part, state) for part in nbhd.parts)
    raise TypeError(f"unsupported neighborhood {nbhd!r}")


# -- certified bracket scanning ------------------------------------------------------

_SCAN_SCALE = 30


class LinearMod1Tracker:
    """Certified integer brackets for v_n = n*coef + offset: yields the floor
    and a bracket for the fractional part, or None when the bracket is
    inconclusive (caller falls back to the exact path)."""

    def __init__(self, coef: ExactReal, offset: ExactReal, scale: int = _SCAN_SCALE):
        self.scale_int = 10 ** scale
        self.a_lo, self.a_hi = _coerce(coef).int_bracket(scale)
        self.b_lo, self.b_hi = _coerce(offset).int_bracket(scale)

    def at(self, n: int) -> Optional[tuple[int, int, int]]:
        v_lo = n * self.a_lo + self.b_lo
        v_hi = n * self.a_hi + self.b_hi
        k = v_lo // self.scale_int
        if v_hi // self.scale_int != k:
            return None
        base = k * self.scale_int
        return k, v_lo - base, v_hi - base


class _IntervalTest:
    """Certified strict-membership test of a scaled fractional bracket in an
    open interval (lo, hi); +1 in, -1 out, 0 unknown."""

    def __init__(self, lo: ExactReal, hi: ExactReal, scale: int = _SCAN_SCALE):
        self.lo_lo, self.lo_hi = _coerce(lo).int_bracket(scale)
        self.hi_lo, self.hi_hi = _coerce(hi).int_bracket(scale)

    def check(self, r_lo: int, r_hi: int) -> int:
        if r_lo > self.lo_hi and r_hi < self.hi_lo:
            return 1
        if r_hi < self.lo_lo or r_lo > self.hi_hi:
            return -1
        return 0


class RotationBallScanner:
    """Per-n certified test of frac(x + n*angle) in Ball(center, radius)."""

    def __init__(self, angle: ExactReal, x: ExactReal, center: ExactReal,
                 radius: Radius):
        self.tracker = LinearMod1Tracker(angle, x)
        radius = _coerce(radius)
        self.whole_space = compare(radius, Rational(1, 2)) > 0
        lo = _coerce(center) - radius
        hi = _coerce(center) + radius
        self.tests = [_IntervalTest(lo + shift, hi + shift)
                      for shift in (-1, 0, 1)]

    def check(self, n: int) -> int:
        """+1 certified inside, -1 certified outside, 0 fallback needed."""
        if self.whole_space:
            return 1
        pos = self.tracker.at(n)
        if pos is None:
            return 0
        _, r_lo, r_hi = pos
        out = True
        for test in self.tests:
            c = test.check(r_lo, r_hi)
            if c > 0:
                return 1
            if c == 0:
                out = False
        return -1 if out else 0


# -- scans -----------------------------------------------------------------------

@dataclass(frozen=True)
class ReturnScan:
    times: WindowSet
    ambiguous: tuple[int, ...]

    def require_unambiguous(self) -> WindowSet:
        if self.ambiguous:
            raise AmbiguousMembership(self.ambiguous[0],
                                      f"{len(self.ambiguous)} boundary hits in scan")
        return self.times


def iterate(sys, x, n: int):
    """n-fold application of the system map; n < 0 needs an inverse."""
    if n < 0 and not sys.has_inverse:
        raise NotInvertible(f"{sys.kind} has no inverse")
    return sys.iterate(x, n)


def _as_ball_conditions(sys, nbhd) -> Optional[list[Ball]]:
    """Rewrite a rotation neighborhood as a conjunction of plain balls.

    Rotations are isometries, so the pullback of a ball is the ball around
    the pulled-back center; intersections just concatenate conditions."""
    if not isinstance(sys, CircleRotation):
        return None
    if isinstance(nbhd, Ball):
        return [nbhd]
    if isinstance(nbhd, Pullback):
        inner = _as_ball_conditions(sys, nbhd.base)
        if inner is None:
            return None
        return [Ball(frac_part(b.center - sys.angle * nbhd.m), b.radius)
                for b in inner]
    if isinstance(nbhd, NbhdIntersection):
        out: list[Ball] = []
        for part in nbhd.parts:
            sub = _as_ball_conditions(sys, part)
            if sub is None:
                return None
            out.extend(sub)
        return out
    return None


def _multi_check(scanners: Sequence[RotationBallScanner], n: int) -> int:
    """Conjunction of certified ball checks: +1 all in, -1 some out, 0 unknown."""
    verdict = 1
    for sc in scanners:
        c = sc.check(n)
        if c < 0:
            return -1
        if c == 0:
            verdict = 0
    return verdict


def scan_return_times(sys, x, U, horizon: int) -> ReturnScan:
    """{n in [1, horizon] : T^n x in U} plus the list of boundary-ambiguous n."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    times: list[int] = []
    ambiguous: list[int] = []
    conds = _as_ball_conditions(sys, U)
    if conds is not None:
        scanners = [RotationBallScanner(sys.angle, x, b.center, b.radius)
                    for b in conds]
        for n in range(1, horizon + 1):
            c = _multi_check(scanners, n)
            if c == 0:
                try:
                    c = 1 if nbhd_contains(sys, U, sys.iterate(x, n)) else -1
                except AmbiguityError:
                    ambiguous.append(n)
                    continue
            if c > 0:
                times.append(n)
        return ReturnScan(WindowSet(tuple(times), horizon), tuple(ambiguous))
    cur = x
    for n in range(1, horizon + 1):
        cur = sys.step(cur)
        try:
            if nbhd_contains(sys, U, cur):
                times.append(n)
        except AmbiguityError:
            ambiguous.append(n)
    return ReturnScan(WindowSet(tuple(times), horizon), tuple(ambiguous))


def return_times(sys, x, U, horizon: int) -> WindowSet:
    return scan_return_times(sys, x, U, horizon).require_unambiguous()


def scan_pair_return_times(sys, x, y, U, horizon: int) -> ReturnScan:
    """Return times of the product point (x, y) into U x U."""
    conds = _as_ball_conditions(sys, U)
    if conds is not None:
        sx = [RotationBallScanner(sys.angle, x, b.center, b.radius) for b in conds]
        sy = [RotationBallScanner(sys.angle, y, b.center, b.radius) for b in conds]
        prod = ProductSystem(sys, sys)
        pu = ProductNbhd(U, U)
        times: list[int] = []
        ambiguous: list[int] = []
        for n in range(1, horizon + 1):
            cx = _multi_check(sx, n)
            if cx < 0:
                continue
            cy = _multi_check(sy, n)
            if cy < 0:
                continue
            if cx > 0 and cy > 0:
                times.append(n)
                continue
            try:
                if nbhd_contains(prod, pu, prod.iterate((x, y), n)):
                    times.append(n)
            except AmbiguityError:
                ambiguous.append(n)
        return ReturnScan(WindowSet(tuple(times), horizon), tuple(ambiguous))
    prod = ProductSystem(sys, sys)
    return scan_return_times(prod, (x, y), ProductNbhd(U, U), horizon)


def pair_return_times(sys, x, y, U, horizon: int) -> WindowSet:
    return scan_pair_return_times(sys, x, y, U, horizon).require_unambiguous()


def recurrence_check(sys, x, eps: Radius, horizon: int) -> Optional[int]:
    """Least n <= horizon with d(T^n x, x) < eps; None if the orbit never
    comes back that close within the window."""
    cur = x
    for n in range(1, horizon + 1):
        cur = sys.step(cur)
        c = sys.metric_compare(cur, x, eps)
        if c == 0:
            raise AmbiguousMembership(n, "orbit exactly at the recurrence radius")
        if c < 0:
            return n
    return None


# -- proximality diagnostics ---------------------------------------------------------

@dataclass(frozen=True)
class ProximalityReport:
    entries: tuple
    per_family: dict
    horizon: int
    neighborhood_proxy: str = "eps-ladder"

    def to_payload(self) -> dict:
        return {
            "entries": [
                {
                    "eps": e["eps"],
                    "return_times": list(e["scan"].times.elements),
                    "ambiguous": list(e["scan"].ambiguous),
                    "family_reports": [r.to_payload() for r in e["reports"]],
                }
                for e in self.entries
            ],
            "per_family": self.per_family,
            "horizon": self.horizon,
            "neighborhood_proxy": self.neighborhood_proxy,
        }


def proximality_diagnostic(sys, x, y, eps_ladder: Sequence, horizon: int,
                           families: Sequence[str] = ("inf", "ap", "ps", "pud",
                                                      "pubd", "ip-witness"),
                           family_params: Optional[dict] = None) -> ProximalityReport:
    """Joint return sets of (x, y) into shrinking balls around y, with the
    full detector battery attached per rung.

    The ladder is a finite proxy for "every neighborhood of y"; the report
    says so and never claims more than the horizon supports.
    """
    from .families import run_battery, CONSISTENT, REFUTED

    ladder = [_coerce(e) for e in eps_ladder]
    for a, b in zip(ladder, ladder[1:]):
        if compare(b, a) >= 0:
            raise ValueError("eps ladder must be strictly decreasing")
    entries = []
    per_family: dict[str, str] = {}
    for eps in ladder:
        U = Ball(y, eps)
        scan = scan_pair_return_times(sys, x, y, U, horizon)
        reports = run_battery(scan.times, families, family_params)
        entries.append({"eps": format_real(eps), "scan": scan, "reports": reports})
        for rep in reports:
            if rep.verdict == REFUTED:
                per_family[rep.family] = REFUTED
            else:
                per_family.setdefault(rep.family, CONSISTENT)
    return ProximalityReport(tuple(entries), per_family, horizon)


# -- natural extension and hull --------------------------------------------------------

def natural_extension_point(sys, x, depth: int) -> list:
    """Backward orbit (x_0, ..., x_depth) with step(x_{i+1}) == x_i: the unique
    one for invertible systems, otherwise the first preimage in the system's
    canonical order at every level."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    orbit = [x]
    cur = x
    for _ in range(depth):
        pres = sys.preimages(cur)
        if not pres:
            raise NoPreimage(f"no preimage of {cur!r}")
        cur = pres[0]
        orbit.append(cur)
    return orbit


def surjective_hull(sys, probe) -> tuple[HullSystem, HullPoint]:
    """Wrap sys in the level-ladder hull; returns the hull and the embedded
    probe (1, probe).  Return times of embedded pairs into {1} x V slices
    agree with the inner system's return times into V."""
    hull = HullSystem(sys)
    return hull, hull.embed(probe)


# -- text forms for CLI / service ------------------------------------------------------

def parse_system(spec: str):
    """"rotation:<expr>" | "sturmian:<expr>" | "periodic:<word>" |
    "prefix:<word>:<word>" """
    kind, _, rest = spec.partition(":")
    kind = kind.strip().lower()
    if kind == "rotation":
        return CircleRotation(parse_real(rest))
    if kind == "sturmian":
        return ShiftSystem(2)
    if kind == "periodic":
        word = _parse_word(rest)
        return ShiftSystem(max(word) + 1)
    if kind == "prefix":
        prefix_txt, _, period_txt = rest.partition(":")
        word = _parse_word(prefix_txt or "0") + _parse_word(period_txt or "0")
        return ShiftSystem(max(word) + 1)
    raise ValueError(f"unknown system spec {spec!r}")


def parse_state(system_spec: str, sys, text: str):
    kind = system_spec.partition(":")[0].strip().lower()
    if kind == "rotation":
        return sys.normalize(parse_real(text))
    rest = system_spec.partition(":")[2]
    offset = int(text) if text.strip() else 0
    if kind == "sturmian":
        return ShiftPoint(SturmianRule(parse_real(rest)), offset)
    if kind == "periodic":
        return ShiftPoint(PeriodicRule(_parse_word(rest)), offset)
    if kind == "prefix":
        prefix_txt, _, period_txt = rest.partition(":")
        return ShiftPoint(PrefixRule(_parse_word(prefix_txt or ""),
                                     _parse_word(period_txt or "0")), offset)
    raise ValueError(f"unknown system spec {system_spec!r}")


def _parse_word(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not text or not text.isdigit():
        raise ValueError(f"word must be a digit string, got {text!r}")
    return tuple(int(ch) for ch in text)
