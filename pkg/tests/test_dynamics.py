import pytest

from specdyn.errors import AmbiguousMembership, NotInvertible
from specdyn.exact import (PHI, SQRT2, SQRT3, compare, floor_linear, quadratic,
                           rational)
from specdyn.dynamics import (Ball, CircleRotation, Cylinder, HullPoint,
                              HullSlice, PeriodicRule, PrefixRule,
                              ProductNbhd, ProductSystem, Pullback,
                              ShiftPoint, ShiftSystem, SturmianRule, iterate,
                              natural_extension_point, nbhd_contains,
                              pair_return_times, parse_state, parse_system,
                              proximality_diagnostic, recurrence_check,
                              return_times, scan_return_times,
                              surjective_hull)

ROT_QUARTER = CircleRotation(rational(1, 4))
ROT_SQRT2 = CircleRotation(SQRT2 - 1)


def brute_return_times(sys, x, center, radius, horizon):
    """Step-by-step scan using only the metric, as an independent oracle."""
    out = []
    cur = x
    for n in range(1, horizon + 1):
        cur = sys.step(cur)
        c = compare(sys.metric(cur, center), radius)
        assert c != 0, f"oracle hit a boundary at n={n}"
        if c < 0:
            out.append(n)
    return tuple(out)


class TestIterate:
    def test_examples(self):
        assert iterate(ROT_QUARTER, rational(0), 3) == rational(3, 4)
        assert iterate(ROT_SQRT2, rational(1, 3), 0) == rational(1, 3)
        assert iterate(ROT_SQRT2, rational(0), 5) == quadratic(-7, 5, 1, 2)

    def test_negative_iterate_uses_inverse(self):
        x = rational(1, 3)
        assert iterate(ROT_QUARTER, iterate(ROT_QUARTER, x, -2), 2) == x

    def test_closed_form_matches_stepping(self):
        cur = rational(0)
        for n in range(1, 200):
            cur = ROT_SQRT2.step(cur)
            assert iterate(ROT_SQRT2, rational(0), n) == cur

    def test_shift_one_sided_rewind_fails(self):
        sys = ShiftSystem(2)
        pt = ShiftPoint(PrefixRule((1, 0), (0,)), 0)
        with pytest.raises(NotInvertible):
            iterate(sys, pt, -1)

    def test_rotation_isometry(self, rng):
        x, y = rational(1, 7), rational(2, 5)
        base = ROT_SQRT2.metric(x, y)
        for n in (1, 5, 17, 100):
            assert ROT_SQRT2.metric(iterate(ROT_SQRT2, x, n),
                                    iterate(ROT_SQRT2, y, n)) == base


class TestReturnTimes:
    def test_periodic_example(self):
        got = return_times(ROT_QUARTER, rational(0), Ball(rational(0), rational(1, 10)), 20)
        assert got.elements == (4, 8, 12, 16, 20)

    def test_whole_space(self):
        got = return_times(ROT_SQRT2, rational(1, 3), Ball(rational(1, 3), rational(3, 4)), 9)
        assert got.elements == tuple(range(1, 10))

    def test_matches_brute_oracle(self, rng):
        for _ in range(15):
            angle = rng.choice([SQRT2 - 1, SQRT3 - 1, (PHI - 1) / 2])
            sys = CircleRotation(angle)
            x = rational(rng.randrange(0, 97), 97)
            c = rational(rng.randrange(0, 89), 89)
            r = rational(rng.randrange(1, 30), 100)
            fast = return_times(sys, x, Ball(c, r), 300)
            assert fast.elements == brute_return_times(sys, x, c, r, 300)

    def test_boundary_reported_per_n(self):
        scan = scan_return_times(ROT_QUARTER, rational(0),
                                 Ball(rational(0), rational(1, 4)), 8)
        assert scan.ambiguous == (1, 3, 5, 7)
        assert scan.times.elements == (4, 8)
        with pytest.raises(AmbiguousMembership):
            scan.require_unambiguous()

    def test_pullback_of_ball_is_shifted_ball(self):
        U = Ball(rational(1, 3), rational(1, 8))
        direct = return_times(ROT_SQRT2, rational(0), Pullback(U, 3), 400)
        stepped = return_times(ROT_SQRT2, iterate(ROT_SQRT2, rational(0), 3), U, 400)
        assert direct.elements == stepped.elements


class TestPairReturnTimes:
    def test_diagonal_equals_single(self):
        U = Ball(rational(0), rational(1, 10))
        single = return_times(ROT_QUARTER, rational(0), U, 20)
        pair = pair_return_times(ROT_QUARTER, rational(0), rational(0), U, 20)
        assert pair.elements == single.elements

    def test_separated_points_never_joint_return(self):
        U = Ball(rational(0), rational(1, 10))
        pair = pair_return_times(ROT_QUARTER, rational(0), rational(1, 2), U, 40)
        assert pair.elements == ()

    def test_equals_intersection(self, rng):
        for _ in range(10):
            angle = rng.choice([SQRT2 - 1, SQRT3 - 1])
            sys = CircleRotation(angle)
            c = rational(rng.randrange(0, 53), 53)
            r = rational(rng.randrange(5, 25), 60)
            x = rational(rng.randrange(0, 41), 41)
            y = rational(rng.randrange(0, 43), 43)
            U = Ball(c, r)
            joint = pair_return_times(sys, x, y, U, 500)
            split = return_times(sys, x, U, 500).intersect(return_times(sys, y, U, 500))
            assert joint.elements == split.elements


class TestRecurrence:
    def test_examples(self):
        assert recurrence_check(CircleRotation(rational(1, 3)), rational(0),
                                rational(1, 10), 50) == 3
        assert recurrence_check(CircleRotation(PHI - 1), rational(0),
                                rational(1, 5), 100) == 3
        assert recurrence_check(CircleRotation(rational(0)), rational(2, 7),
                                rational(1, 100), 10) == 1

    def test_no_return_within_horizon(self):
        assert recurrence_check(ROT_SQRT2, rational(0), rational(1, 1000), 3) is None

    def test_boundary_raises(self):
        with pytest.raises(AmbiguousMembership):
            recurrence_check(ROT_QUARTER, rational(0), rational(1, 4), 10)


class TestShiftSystems:
    def test_sturmian_symbols_match_floor_differences(self):
        alpha = SQRT2 - 1
        pt = ShiftPoint(SturmianRule(alpha), 0)
        zero = rational(0)
        for i in range(80):
            expected = floor_linear(alpha, i + 1, zero) - floor_linear(alpha, i, zero) \
                if i else floor_linear(alpha, 1, zero)
            assert pt.symbol(i) == expected

    def test_cylinder_membership(self):
        sys = ShiftSystem(2)
        pt = ShiftPoint(SturmianRule(SQRT2 - 1), 0)
        word = tuple(pt.symbol(j) for j in range(4))
        assert nbhd_contains(sys, Cylinder(word), pt)
        hits = return_times(sys, pt, Cylinder(word), 50)
        for n in hits.elements:
            shifted = iterate(sys, pt, n)
            assert tuple(shifted.symbol(j) for j in range(4)) == word

    def test_metric_compare_powers_of_two(self):
        sys = ShiftSystem(2)
        p = ShiftPoint(PeriodicRule((0, 1)), 0)
        q = ShiftPoint(PeriodicRule((0, 0)), 0)  # first difference at index 1
        assert sys.metric_compare(p, q, rational(1, 2)) == 0
        assert sys.metric_compare(p, q, rational(3, 4)) < 0
        assert sys.metric_compare(p, q, rational(1, 3)) > 0

    def test_periodic_preimage_is_backshift(self):
        sys = ShiftSystem(2)
        pt = ShiftPoint(PeriodicRule((0, 1, 1)), 5)
        pres = sys.preimages(pt)
        assert pres == [ShiftPoint(PeriodicRule((0, 1, 1)), 4)]

    def test_prefix_preimages_prepend_in_order(self):
        sys = ShiftSystem(3)
        pt = ShiftPoint(PrefixRule((2,), (1,)), 0)
        pres = sys.preimages(pt)
        assert [p.symbol(0) for p in pres] == [0, 1, 2]
        assert all(sys.state_eq(sys.step(p), pt) for p in pres)


class TestNaturalExtension:
    def test_rotation_example(self):
        orbit = natural_extension_point(ROT_QUARTER, rational(0), 2)
        assert orbit == [rational(0), rational(3, 4), rational(1, 2)]

    def test_backward_orbit_recovers_forward(self):
        orbit = natural_extension_point(ROT_SQRT2, rational(1, 3), 10)
        for i in range(10):
            assert ROT_SQRT2.step(orbit[i + 1]) == orbit[i]

    def test_full_shift_constant_word_fixed(self):
        sys = ShiftSystem(2)
        zero_pt = ShiftPoint(PrefixRule((), (0,)), 0)
        orbit = natural_extension_point(sys, zero_pt, 3)
        for pt in orbit:
            assert all(pt.symbol(j) == 0 for j in range(6))

    def test_hull_backward_orbit(self):
        hull, emb = surjective_hull(ROT_QUARTER, rational(0))
        orbit = natural_extension_point(hull, emb, 4)
        for i in range(4):
            assert hull.state_eq(hull.step(orbit[i + 1]), orbit[i])


class TestHull:
    def test_step_rules(self):
        hull, _ = surjective_hull(ROT_QUARTER, rational(0))
        c = rational(1, 2)
        assert hull.step(HullPoint(3, c)) == HullPoint(2, c)
        assert hull.step(HullPoint(None, c)) == HullPoint(None, c)
        assert hull.step(HullPoint(1, c)) == HullPoint(1, ROT_QUARTER.step(c))

    def test_iterate_collapses_levels(self):
        hull, _ = surjective_hull(ROT_QUARTER, rational(0))
        assert hull.iterate(HullPoint(5, rational(0)), 3) == HullPoint(2, rational(0))
        assert hull.iterate(HullPoint(5, rational(0)), 7) == \
            HullPoint(1, iterate(ROT_QUARTER, rational(0), 3))

    def test_not_invertible(self):
        hull, emb = surjective_hull(ROT_QUARTER, rational(0))
        with pytest.raises(NotInvertible):
            iterate(hull, emb, -1)

    def test_every_point_has_a_preimage(self):
        hull, _ = surjective_hull(ROT_SQRT2, rational(0))
        for p in (HullPoint(None, rational(1, 3)), HullPoint(1, rational(1, 3)),
                  HullPoint(4, rational(1, 3))):
            pres = hull.preimages(p)
            assert pres and all(hull.state_eq(hull.step(q), p) for q in pres)

    def test_return_time_equality_on_slices(self):
        sys = ROT_SQRT2
        hull, _ = surjective_hull(sys, rational(0))
        a, b = rational(1, 7), rational(8, 55)
        V = Ball(rational(1, 7), rational(1, 6))
        inner = pair_return_times(sys, a, b, V, 400)
        assert inner.elements, "config must produce joint returns"
        hullprod = ProductSystem(hull, hull)
        nbhd = ProductNbhd(HullSlice(1, V), HullSlice(1, V))
        lifted = scan_return_times(hullprod, (hull.embed(a), hull.embed(b)),
                                   nbhd, 400).require_unambiguous()
        assert lifted.elements == inner.elements

    def test_other_levels_never_visit_slice(self):
        hull, _ = surjective_hull(ROT_SQRT2, rational(0))
        V = Ball(rational(0), rational(1, 4))
        deep = HullPoint(500, rational(0))
        scan = scan_return_times(hull, deep, HullSlice(1, V), 300)
        # needs 499 steps to reach level 1; nothing before that can be inside
        assert all(n >= 500 for n in scan.times.elements)


class TestProximality:
    LADDER = [rational(1, 2), rational(1, 8), rational(1, 32)]

    def test_diagonal_is_consistent_for_inf(self):
        rep = proximality_diagnostic(ROT_SQRT2, rational(0), rational(0),
                                     self.LADDER, 400)
        assert rep.per_family["inf"] == "consistent"

    def test_separated_rotation_pair_refuted(self):
        rep = proximality_diagnostic(ROT_SQRT2, rational(0), rational(1, 2),
                                     self.LADDER, 400)
        assert rep.per_family["inf"] == "refuted-up-to-horizon"
        smallest = rep.entries[-1]
        assert len(smallest["scan"].times) == 0

    def test_shift_tail_modification_returns(self):
        sys = ShiftSystem(2)
        y = ShiftPoint(PeriodicRule((0, 1)), 0)
        x = ShiftPoint(PrefixRule((1, 1, 0, 1), (0, 1)), 0)  # same tail, edited head
        word = tuple(y.symbol(j) for j in range(3))
        hits_x = return_times(sys, x, Cylinder(word), 40)
        hits_y = return_times(sys, y, Cylinder(word), 40)
        joint = hits_x.intersect(hits_y)
        assert len(joint) >= 15  # cofinite-looking overlap past the edit

    def test_ladder_must_decrease(self):
        with pytest.raises(ValueError):
            proximality_diagnostic(ROT_SQRT2, rational(0), rational(0),
                                   [rational(1, 4), rational(1, 2)], 10)

    def test_payload(self):
        rep = proximality_diagnostic(ROT_SQRT2, rational(0), rational(0),
                                     self.LADDER, 100)
        payload = rep.to_payload()
        assert payload["neighborhood_proxy"] == "eps-ladder"
        assert payload["horizon"] == 100
        assert len(payload["entries"]) == 3


class TestParsing:
    def test_rotation_spec(self):
        sys = parse_system("rotation:sqrt(2)-1")
        assert isinstance(sys, CircleRotation)
        x = parse_state("rotation:sqrt(2)-1", sys, "3/2")
        assert x == rational(1, 2)  # normalized into [0,1)

    def test_sturmian_spec(self):
        spec = "sturmian:(sqrt(5)-1)/2"
        sys = parse_system(spec)
        pt = parse_state(spec, sys, "4")
        assert isinstance(pt.rule, SturmianRule) and pt.offset == 4

    def test_periodic_and_prefix(self):
        sys = parse_system("periodic:0110")
        assert sys.alphabet_size == 2
        pt = parse_state("periodic:0110", sys, "")
        assert pt.symbol(0) == 0 and pt.symbol(2) == 1
        pt2 = parse_state("prefix:01:10", parse_system("prefix:01:10"), "0")
        assert [pt2.symbol(i) for i in range(6)] == [0, 1, 1, 0, 1, 0]

    def test_unknown_system(self):
        with pytest.raises(ValueError):
            parse_system("torus:1/2")
