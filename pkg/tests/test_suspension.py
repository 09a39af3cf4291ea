import random

import pytest

from specdyn.errors import NotInvertible
from specdyn.exact import PHI, SQRT2, SQRT3, compare, rational
from specdyn.dynamics import (Ball, CircleRotation, LinearMod1Tracker,
                              NbhdIntersection, _IntervalTest)
from specdyn.suspension import (SuspensionPoint, default_gamma_grid,
                                lift_search, scan_suspension_pair,
                                suspend_iterate, suspend_step,
                                suspension_pair_return_times)

ROT = CircleRotation(SQRT2 - 1)
S_INV = 1 / SQRT2


class TestSuspendStep:
    def test_height_only_advance(self):
        p = SuspensionPoint(rational(0), rational(0))
        got = suspend_step(ROT, rational(1, 2), p)
        assert got.base == rational(0) and got.height == rational(1, 2)

    def test_wraparound_applies_base_map(self):
        p = SuspensionPoint(rational(0), rational(3, 4))
        got = suspend_step(ROT, rational(1, 2), p)
        assert got.base == ROT.step(rational(0))
        assert got.height == rational(1, 4)

    def test_quadratic_increment(self):
        p = SuspensionPoint(rational(0), rational(0))
        got = suspend_step(ROT, S_INV, p)
        assert got.base == rational(0)
        assert got.height == S_INV == SQRT2 / 2

    def test_negative_time_needs_inverse(self):
        from specdyn.dynamics import ShiftPoint, PrefixRule, ShiftSystem
        sys = ShiftSystem(2)
        p = SuspensionPoint(ShiftPoint(PrefixRule((1,), (0,)), 0), rational(0))
        with pytest.raises(NotInvertible):
            suspend_step(sys, rational(-3, 2), p)

    def test_height_validation(self):
        with pytest.raises(ValueError):
            SuspensionPoint(rational(0), rational(1))
        with pytest.raises(ValueError):
            SuspensionPoint(rational(0), rational(-1, 4))


class TestSuspendIterate:
    def test_identity_at_zero(self):
        p = SuspensionPoint(rational(1, 3), rational(1, 5))
        got = suspend_iterate(ROT, S_INV, p, 0)
        assert got.base == p.base and got.height == p.height

    def test_half_step_example(self):
        p = SuspensionPoint(rational(0), rational(0))
        got = suspend_iterate(ROT, rational(1, 2), p, 3)
        assert got.base == ROT.step(rational(0))  # floor(3/2) = 1
        assert got.height == rational(1, 2)

    def test_quadratic_example(self):
        # floor(4/sqrt2 + 1/2) = floor(3.3284...) = 3
        p = SuspensionPoint(rational(0), rational(1, 2))
        got = suspend_iterate(ROT, S_INV, p, 4)
        assert got.base == ROT.iterate(rational(0), 3)
        assert got.height == S_INV * 4 + rational(1, 2) - 3

    def test_closed_form_equals_stepping(self):
        start = SuspensionPoint(rational(1, 3), rational(1, 5))
        cur = start
        for n in range(1, 500):
            cur = suspend_step(ROT, S_INV, cur)
            closed = suspend_iterate(ROT, S_INV, start, n)
            assert compare(cur.height, closed.height) == 0
            assert ROT.state_eq(cur.base, closed.base)

    def test_semigroup_law(self):
        rng = random.Random(5)
        start = SuspensionPoint(rational(2, 7), rational(3, 11))
        for _ in range(60):
            m, n = rng.randint(0, 400), rng.randint(0, 400)
            lhs = suspend_iterate(ROT, S_INV, start, m + n)
            rhs = suspend_iterate(ROT, S_INV, suspend_iterate(ROT, S_INV, start, n), m)
            assert compare(lhs.height, rhs.height) == 0
            assert ROT.state_eq(lhs.base, rhs.base)

    def test_certified_heights_agree_within_1e9(self):
        # mixed-field increments demote heights to certified intervals; the
        # stepped and closed-form runs must then agree to 1e-9 in height and
        # exactly in base
        from specdyn.exact import parse_real
        s = SQRT2 / 2 + parse_real("0.125")   # certified, refinable
        start = SuspensionPoint(rational(0), rational(1, 5))
        cur = start
        tol = rational(1, 10 ** 9)
        for n in range(1, 60):
            cur = suspend_step(ROT, s, cur)
            closed = suspend_iterate(ROT, s, start, n)
            assert ROT.state_eq(cur.base, closed.base)
            # the difference interval hugs zero; |diff| < tol is decidable
            # even though the sign of a true zero is not
            diff = cur.height - closed.height
            assert compare(diff, tol) < 0 and compare(diff, -tol) > 0


class TestPairScans:
    def test_trivial_full_band(self):
        p = SuspensionPoint(rational(0), rational(1, 5))
        whole = Ball(rational(0), rational(3, 4))
        got = suspension_pair_return_times(ROT, S_INV, p, p, whole,
                                           (rational(0), rational(1)), 50)
        assert got.elements == tuple(range(1, 51))

    def test_integer_increment_keeps_height_constant(self):
        p = SuspensionPoint(rational(0), rational(1, 5))
        whole = Ball(rational(0), rational(3, 4))
        excl = suspension_pair_return_times(ROT, rational(1), p, p, whole,
                                            (rational(1, 2), rational(3, 4)), 50)
        assert excl.elements == ()
        incl = suspension_pair_return_times(ROT, rational(1), p, p, whole,
                                            (rational(1, 10), rational(1, 4)), 50)
        assert incl.elements == tuple(range(1, 51))

    def test_requires_common_height(self):
        with pytest.raises(ValueError):
            scan_suspension_pair(ROT, S_INV,
                                 SuspensionPoint(rational(0), rational(1, 5)),
                                 SuspensionPoint(rational(0), rational(1, 4)),
                                 Ball(rational(0), rational(1, 2)),
                                 (rational(1, 4), rational(1, 2)), 10)

    def test_band_endpoint_hit_is_ambiguous(self):
        # s = 1/4, t = 0: heights cycle 1/4, 1/2, 3/4, 0; band ends at 1/2
        p = SuspensionPoint(rational(0), rational(0))
        scan = scan_suspension_pair(CircleRotation(rational(1, 8)), rational(1, 4),
                                    p, p, Ball(rational(0), rational(3, 4)),
                                    (rational(1, 3), rational(1, 2)), 8)
        assert 2 in scan.ambiguous and 6 in scan.ambiguous

    def test_fast_path_matches_exact_reference(self):
        pA = SuspensionPoint(rational(0), rational(3, 10))
        pB = SuspensionPoint(rational(1, 50), rational(3, 10))
        U = Ball(rational(1, 4), rational(1, 5))
        band = (rational(1, 4), rational(2, 5))
        fast = scan_suspension_pair(ROT, S_INV, pA, pB, U, band, 600)
        slow = scan_suspension_pair(ROT, S_INV, pA, pB, NbhdIntersection((U,)),
                                    band, 600)
        assert fast.times.elements == slow.times.elements
        assert fast.times.elements, "config must be non-vacuous"

    def test_heights_equidistribute_on_grid_bands(self):
        # three-distance regularity: every aligned band of width 1/20 or 1/10
        # collects floor(H*w) +/- 2 height visits at H = 10^4
        H = 10 ** 4
        for s in (S_INV, PHI - 1, SQRT3 - 1):
            tracker = LinearMod1Tracker(s, rational(1, 3))
            for wden in (20, 10):
                counts = [0] * wden
                tests = [_IntervalTest(rational(j, wden), rational(j + 1, wden))
                         for j in range(wden)]
                for n in range(1, H + 1):
                    pos = tracker.at(n)
                    assert pos is not None
                    hits = [i for i, t in enumerate(tests)
                            if t.check(pos[1], pos[2]) >= 0]
                    assert len(hits) == 1
                    counts[hits[0]] += 1
                expected = H // wden
                for c in counts:
                    assert expected - 2 <= c <= expected + 2


class TestLiftSearch:
    def test_diagonal_every_gamma_rich(self):
        U = Ball(rational(0), rational(1, 4))
        rep = lift_search(ROT, SQRT2, rational(0), rational(0), U, rational(1, 10),
                          [rational(k, 10) for k in range(1, 10)], horizon=800)
        sizes = [e["return_set_size"] for e in rep.entries]
        assert all(s > 0 for s in sizes)
        assert all(e["containment_ok"] for e in rep.entries)

    def test_ranking_is_by_return_set_size(self):
        U = Ball(rational(0), rational(1, 4))
        rep = lift_search(ROT, SQRT2, rational(0), rational(1, 2), U, rational(1, 10),
                          [rational(1, 4), rational(1, 2)], horizon=400)
        ordered = sorted(rep.entries, key=lambda e: e["rank"])
        assert ordered[0]["return_set_size"] >= ordered[-1]["return_set_size"]

    def test_alpha_one_reduces_to_base_returns(self):
        # s = 1: heights stay at gamma0, inside the band; the suspension
        # return set collapses to the base pair return set
        U = Ball(rational(0), rational(1, 5))
        x = rational(0)
        rot = CircleRotation(SQRT3 - 1)
        rep = lift_search(rot, rational(1), x, x, U, rational(1, 8),
                          [rational(1, 2)], horizon=300)
        from specdyn.dynamics import pair_return_times
        base = pair_return_times(rot, x, x, U, 300)
        assert rep.entries[0]["scan"].times.elements == base.elements

    def test_default_grid_is_percent_lattice(self):
        grid = default_gamma_grid()
        assert len(grid) == 99
        assert grid[0] == rational(1, 100) and grid[-1] == rational(99, 100)

    def test_grid_validation(self):
        U = Ball(rational(0), rational(1, 4))
        with pytest.raises(ValueError):
            lift_search(ROT, SQRT2, rational(0), rational(0), U, rational(1, 10),
                        [rational(0)], horizon=10)

    def test_payload_schema(self):
        U = Ball(rational(0), rational(1, 4))
        rep = lift_search(ROT, SQRT2, rational(0), rational(0), U, rational(1, 10),
                          [rational(1, 2)], horizon=100)
        entry = rep.to_payload()["entries"][0]
        for key in ("gamma0", "return_set_size", "family_reports", "rank",
                    "containment_ok"):
            assert key in entry
