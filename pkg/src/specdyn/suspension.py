"""Suspension of an invertible system over the unit-height interval.

A suspension point is (base state, height t in [0,1)); the time-s flow map
advances the height by s and applies the base map floor(s+t) times.  The
n-th iterate collapses to a single floor: base index floor(n*s+t), height
frac(n*s+t) -- this closed form is what makes horizon-10^4 scans cheap.

The lift search drives the main correspondence: given a base pair with rich
joint return times into U, it hunts for heights gamma0 whose suspension
pair returns into U x (gamma0-eps, gamma0+eps), attaching the detector
battery and checking the near-multiples containment that links suspension
return times back to the base spectrum.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .dynamics import (Ball, LinearMod1Tracker, RotationBallScanner,
                       CircleRotation, ReturnScan, _IntervalTest,
                       nbhd_contains)
from .errors import AmbiguityError, AmbiguousMembership
from .exact import ExactReal, Rational, compare, format_real, _coerce
from .windows import WindowSet


@dataclass(frozen=True)
class SuspensionPoint:
    base: object
    height: ExactReal

    def __post_init__(self):
        h = self.height
        if h.sign() < 0 or compare(h, 1) >= 0:
            raise ValueError("height must lie in [0, 1)")


def suspend_step(sys, s, p: SuspensionPoint) -> SuspensionPoint:
    """One application of the time-s flow map."""
    s = _coerce(s)
    u = s + p.height
    k = u.floor()
    return SuspensionPoint(sys.iterate(p.base, k), u - k)


def suspend_iterate(sys, s, p: SuspensionPoint, n: int) -> SuspensionPoint:
    """The n-th iterate in closed form: one floor, not n steps."""
    s = _coerce(s)
    u = s * n + p.height
    k = u.floor()
    return SuspensionPoint(sys.iterate(p.base, k), u - k)


def scan_suspension_pair(sys, s, p: SuspensionPoint, q: SuspensionPoint,
                         U, band: tuple, horizon: int) -> ReturnScan:
    """{n <= horizon : both iterates have base in U and height strictly inside
    band}; heights exactly on a band endpoint are reported as ambiguous."""
    s = _coerce(s)
    if compare(p.height, q.height) != 0:
        raise ValueError("suspension pair scans need a common starting height")
    lo, hi = (_coerce(band[0]), _coerce(band[1]))
    if compare(lo, hi) >= 0:
        raise ValueError("band must be a non-empty open interval")
    t = p.height
    times: list[int] = []
    ambiguous: list[int] = []

    fast_base = (isinstance(sys, CircleRotation) and isinstance(U, Ball)
                 and s.sign() > 0)
    tracker = LinearMod1Tracker(s, t)
    band_test = _IntervalTest(lo, hi)
    if fast_base:
        scan_p = RotationBallScanner(sys.angle, p.base, U.center, U.radius)
        scan_q = RotationBallScanner(sys.angle, q.base, U.center, U.radius)

    def exact_at(n: int) -> bool:
        u = s * n + t
        k = u.floor()
        h = u - k
        c_lo = compare(h, lo)
        c_hi = compare(h, hi)
        if c_lo == 0 or c_hi == 0:
            raise AmbiguousMembership(n, "height exactly on band endpoint")
        if c_lo < 0 or c_hi > 0:
            return False
        bp = sys.iterate(p.base, k)
        if not nbhd_contains(sys, U, bp):
            return False
        bq = sys.iterate(q.base, k)
        return nbhd_contains(sys, U, bq)

    if fast_base:
        for n in range(1, horizon + 1):
            pos = tracker.at(n)
            if pos is not None:
                k, r_lo, r_hi = pos
                in_band = band_test.check(r_lo, r_hi)
                if in_band < 0:
                    continue
                if in_band > 0:
                    cp = scan_p.check(k)
                    if cp < 0:
                        continue
                    cq = scan_q.check(k)
                    if cq < 0:
                        continue
                    if cp > 0 and cq > 0:
                        times.append(n)
                        continue
            try:
                if exact_at(n):
                    times.append(n)
            except AmbiguityError:
                ambiguous.append(n)
        return ReturnScan(WindowSet(tuple(times), horizon), tuple(ambiguous))

    # generic systems: march the base orbit alongside the height sequence
    cur_p, cur_q, cur_k = p.base, q.base, 0
    for n in range(1, horizon + 1):
        u = s * n + t
        k = u.floor()
        h = u - k
        try:
            c_lo = compare(h, lo)
            c_hi = compare(h, hi)
            if c_lo == 0 or c_hi == 0:
                raise AmbiguousMembership(n, "height exactly on band endpoint")
            while cur_k < k:
                cur_p, cur_q, cur_k = sys.step(cur_p), sys.step(cur_q), cur_k + 1
            while cur_k > k:
                cur_p, cur_q, cur_k = (sys.inverse(cur_p), sys.inverse(cur_q),
                                       cur_k - 1)
            if c_lo > 0 and c_hi < 0 and nbhd_contains(sys, U, cur_p) \
                    and nbhd_contains(sys, U, cur_q):
                times.append(n)
        except AmbiguityError:
            ambiguous.append(n)
    return ReturnScan(WindowSet(tuple(times), horizon), tuple(ambiguous))


def suspension_pair_return_times(sys, s, p: SuspensionPoint, q: SuspensionPoint,
                                 U, band: tuple, horizon: int) -> WindowSet:
    return scan_suspension_pair(sys, s, p, q, U, band, horizon).require_unambiguous()


# -- lift search -------------------------------------------------------------------

def default_gamma_grid() -> list[Rational]:
    return [Rational(k, 100) for k in range(1, 100)]


@dataclass(frozen=True)
class LiftSearchReport:
    entries: tuple
    horizon: int
    base_horizon: int
    flow_increment: str  # textual 1/alpha

    def to_payload(self) -> dict:
        return {
            "entries": [
                {
                    "gamma0": e["gamma0"],
                    "eps": e["eps"],
                    "band_clipped": e["band_clipped"],
                    "return_set_size": e["return_set_size"],
                    "rank": e["rank"],
                    "return_times": list(e["scan"].times.elements),
                    "ambiguous": list(e["scan"].ambiguous),
                    "containment_ok": e["containment_ok"],
                    "containment_failures": list(e["containment_failures"]),
                    "family_reports": [r.to_payload() for r in e["reports"]],
                }
                for e in self.entries
            ],
            "horizon": self.horizon,
            "base_horizon": self.base_horizon,
            "flow_increment": self.flow_increment,
        }


def lift_search(sys, alpha, x, y, U, eps, gamma_grid: Optional[Sequence] = None,
                horizon: int = 1000,
                families: Sequence[str] = ("inf", "ap", "ps", "pud", "pubd"),
                family_params: Optional[dict] = None) -> LiftSearchReport:
    """Suspension lift evidence per candidate height gamma0.

    For each gamma0: scans the suspension pair return set with time
    increment 1/alpha and band (gamma0-eps, gamma0+eps), runs the detector
    battery on it, and re-checks that every suspension return time k sits
    within eps*alpha of a multiple n*alpha with n in the base pair return
    set.  Entries are ordered by gamma0; ranks sort by return-set size.
    """
    from .dynamics import scan_pair_return_times
    from .families import run_battery

    alpha = _coerce(alpha)
    eps = _coerce(eps)
    if alpha.sign() <= 0 or eps.sign() <= 0:
        raise ValueError("alpha and eps must be positive")
    s = 1 / alpha
    grid = [_coerce(g) for g in (gamma_grid if gamma_grid is not None
                                 else default_gamma_grid())]
    for g in grid:
        if g.sign() <= 0 or compare(g, 1) >= 0:
            raise ValueError("gamma grid values must lie in (0, 1)")
    base_horizon = (s * horizon).floor() + 1
    base_scan = scan_pair_return_times(sys, x, y, U, base_horizon)
    A = base_scan.times
    delta_eff = eps * alpha

    entries = []
    for g in grid:
        lo, hi = g - eps, g + eps
        clipped = False
        if lo.sign() <= 0:
            lo, clipped = Rational(0), True
        if compare(hi, 1) >= 0:
            hi, clipped = Rational(1), True
        p = SuspensionPoint(x, g)
        q = SuspensionPoint(y, g)
        scan = scan_suspension_pair(sys, s, p, q, U, (lo, hi), horizon)
        failures = [k for k in scan.times.elements
                    if not _near_some_multiple(k, alpha, delta_eff, A)]
        reports = run_battery(scan.times, families, family_params)
        entries.append({
            "gamma0": format_real(g),
            "eps": format_real(eps),
            "band_clipped": clipped,
            "return_set_size": len(scan.times),
            "scan": scan,
            "reports": reports,
            "containment_ok": not failures,
            "containment_failures": failures,
        })
    order = sorted(range(len(entries)),
                   key=lambda i: (-entries[i]["return_set_size"], i))
    for rank, idx in enumerate(order, start=1):
        entries[idx]["rank"] = rank
    return LiftSearchReport(tuple(entries), horizon, base_horizon,
                            format_real(s))


def _near_some_multiple(k: int, alpha: ExactReal, delta: ExactReal,
                        A: WindowSet) -> bool:
    """Is there n in A with |k - n*alpha| < delta (strict)?"""
    lo = (k - delta) / alpha
    hi = (k + delta) / alpha
    n = lo.floor() + 1  # least integer strictly above lo (strictness drops ties)
    while compare(_coerce(n), hi) < 0:
        if n >= 1 and n in A:
            return True
        n += 1
    return False
