"""Exact-distribution oracles: examples, invariants, and enumeration cross-checks."""

import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from radwalk import exact
from radwalk.errors import ParameterError, PreconditionError, SupportBudgetError

HALF = Fraction(1, 2)


def enumerate_signed_sum(d):
    """Independent oracle: the signed-sum law by direct 2^k enumeration."""
    law = {}
    for signs in itertools.product((-1, 1), repeat=len(d)):
        v = sum(s * x for s, x in zip(signs, d))
        law[v] = law.get(v, Fraction(0)) + Fraction(1, 2 ** len(d))
    return law


def enumerate_walk(a):
    """Independent oracle: the 2-D walk law by direct 4^n enumeration."""
    dirs = ((1, 0), (-1, 0), (0, 1), (0, -1))
    law = {}
    for combo in itertools.product(dirs, repeat=len(a)):
        x = sum(s * c[0] for s, c in zip(a, combo))
        y = sum(s * c[1] for s, c in zip(a, combo))
        law[(x, y)] = law.get((x, y), Fraction(0)) + Fraction(1, 4 ** len(a))
    return law


class TestPmf1D:
    def test_single_step(self):
        assert exact.pmf_1d([1]).as_dict() == {-1: HALF, 1: HALF}

    def test_two_steps(self):
        assert exact.pmf_1d([1, 2]).as_dict() == {
            -3: Fraction(1, 4),
            -1: Fraction(1, 4),
            1: Fraction(1, 4),
            3: Fraction(1, 4),
        }

    def test_three_unit_steps(self):
        assert exact.pmf_1d([1, 1, 1]).as_dict() == {
            -3: Fraction(1, 8),
            -1: Fraction(3, 8),
            1: Fraction(3, 8),
            3: Fraction(1, 8),
        }

    def test_rejects_nonpositive(self):
        with pytest.raises(ParameterError):
            exact.pmf_1d([1, 0, 2])
        with pytest.raises(ParameterError):
            exact.pmf_1d([])

    def test_budget_error_states_bound(self):
        with pytest.raises(SupportBudgetError) as exc:
            exact.pmf_1d([100, 100], support_budget=10)
        assert exc.value.budget == 10
        assert exc.value.required == 401

    def test_fractional_steps_exact(self):
        law = exact.pmf_1d([HALF, Fraction(3, 2)]).as_dict()
        assert law == {
            -2: Fraction(1, 4),
            -1: Fraction(1, 4),
            1: Fraction(1, 4),
            2: Fraction(1, 4),
        }

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.integers(min_value=1, max_value=12), min_size=1, max_size=12))
    def test_matches_enumeration(self, d):
        assert exact.pmf_1d(d).as_dict() == enumerate_signed_sum(d)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.integers(min_value=1, max_value=30), min_size=1, max_size=12))
    def test_normalization_and_symmetry(self, d):
        law = exact.pmf_1d(d)
        assert sum(law.masses) == 1
        assert all(w > 0 for w in law.weights)
        as_map = law.as_dict()
        assert all(as_map[-v] == m for v, m in as_map.items())
        span = sum(d)
        assert all(-span <= v <= span for v in law.values)

    def test_export_roundtrip(self):
        law = exact.pmf_1d([1, 2, 3])
        parsed = exact.parse_pmf1d_lines(law.export_lines())
        assert parsed == {Fraction(v): m for v, m in law.as_dict().items()}


class TestPmf2D:
    def test_single_step(self):
        law = exact.pmf_2d([1]).as_dict()
        assert law == {
            (1, 0): Fraction(1, 4),
            (-1, 0): Fraction(1, 4),
            (0, 1): Fraction(1, 4),
            (0, -1): Fraction(1, 4),
        }

    def test_return_probability_two_steps(self):
        assert exact.pmf_2d([1, 1]).mass((0, 0)) == Fraction(1, 4)

    def test_return_probability_four_steps(self):
        law = exact.pmf_2d([1, 1, 1, 1])
        assert law.mass((0, 0)) == Fraction(9, 64)
        assert law.as_dict() == enumerate_walk([1, 1, 1, 1])

    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.integers(min_value=1, max_value=4), min_size=1, max_size=5))
    def test_dihedral_symmetry(self, a):
        law = exact.pmf_2d(a).as_dict()
        assert sum(law.values()) == 1
        for (x, y), m in law.items():
            assert law[(-x, y)] == m
            assert law[(x, -y)] == m
            assert law[(y, x)] == m

    def test_budget(self):
        with pytest.raises(SupportBudgetError):
            exact.pmf_2d([50, 50], support_budget=100)


class TestModProbability:
    def test_single_odd_step_mod_two(self):
        assert exact.mod_probability([1], 2, 0) == 0

    def test_two_steps_mod_three(self):
        assert exact.mod_probability([1, 2], 3, 0) == HALF

    def test_three_steps_mod_three(self):
        assert exact.mod_probability([1, 2, 3], 3, 0) == HALF

    def test_degenerate_modulus(self):
        for d in ([1], [1, 2, 3], [7, 7, 7]):
            assert exact.mod_probability(d, 1, 0) == 1

    def test_rejects_non_integer_steps(self):
        with pytest.raises(ParameterError):
            exact.mod_probability([HALF], 2, 0)

    def test_rejects_bad_residue(self):
        with pytest.raises(ParameterError):
            exact.mod_probability([1], 3, 3)

    @settings(max_examples=60, deadline=None)
    @given(
        st.lists(st.integers(min_value=1, max_value=15), min_size=1, max_size=10),
        st.integers(min_value=1, max_value=12),
    )
    def test_residue_route_matches_full_route(self, d, m):
        for residue in range(m):
            assert exact.mod_probability(d, m, residue, method="residue") == (
                exact.mod_probability(d, m, residue, method="full")
            )

    def test_profile_sums_to_one(self):
        profile = exact.mod_probability_profile(list(range(1, 17)), 16)
        assert sum(profile) == 1
        assert max(profile) == exact.mod_probability(list(range(1, 17)), 16, 0)


class TestSupPmf:
    def test_examples(self):
        assert exact.sup_pmf([1]) == HALF
        assert exact.sup_pmf([1, 1, 1]) == Fraction(3, 8)
        assert exact.sup_pmf([1, 2, 3]) == Fraction(1, 4)


class TestMaxIntervalProbability:
    def test_single_step(self):
        sup, _ = exact.max_interval_probability([1], 1)
        assert sup == HALF

    def test_four_unit_steps(self):
        sup, x = exact.max_interval_probability([1, 1, 1, 1], 1)
        assert sup == Fraction(3, 8)
        # the returned center must realize the supremum: (x-1, x+1] holds 3/8
        law = exact.pmf_1d([1, 1, 1, 1]).as_dict()
        window = sum(m for v, m in law.items() if x - 1 < v <= x + 1)
        assert window == sup

    def test_spaced_steps(self):
        sup, _ = exact.max_interval_probability([2, 2], 2)
        assert sup == HALF

    def test_requires_steps_at_least_half_width(self):
        with pytest.raises(PreconditionError):
            exact.max_interval_probability([1, 2], 2)

    def test_requires_positive_half_width(self):
        with pytest.raises(ParameterError):
            exact.max_interval_probability([1], 0)

    def test_half_open_orientation(self):
        # law of (1,): window (x-1, x+1] at x=0 contains +1 but not -1
        law = exact.pmf_1d([1]).as_dict()
        assert sum(m for v, m in law.items() if -1 < v <= 1) == HALF

    @settings(max_examples=80, deadline=None)
    @given(
        st.integers(min_value=1, max_value=3).flatmap(
            lambda D: st.tuples(
                st.just(D),
                st.lists(
                    st.integers(min_value=D, max_value=4 * D), min_size=1, max_size=16
                ),
            )
        )
    )
    def test_anti_concentration_bound_on_sampled_envelope(self, case):
        # window mass never exceeds 0.8/sqrt(m) when every step is >= D
        D, d = case
        m = len(d)
        sup, _ = exact.max_interval_probability(d, D)
        assert sup * sup * m <= Fraction(16, 25)

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.integers(min_value=2, max_value=6), min_size=1, max_size=8))
    def test_never_beats_sliding_scan(self, d):
        # independent oracle: scan all windows ending at each support point
        sup, _ = exact.max_interval_probability(d, 2)
        law = exact.pmf_1d(d).as_dict()
        best = max(
            sum(m for v, m in law.items() if s - 4 < v <= s) for s in law
        )
        assert sup == best


class TestHitProbability:
    def test_two_unit_steps(self):
        assert exact.hit_probability_2d([1, 1], (0, 0), 2) == Fraction(1, 4)

    def test_unequal_steps_cannot_cancel(self):
        assert exact.hit_probability_2d([1, 2], (0, 0), 2) == 0

    def test_horizon_zero(self):
        assert exact.hit_probability_2d([1, 1], (0, 0), 0) == 0

    def test_horizon_beyond_steps(self):
        with pytest.raises(ParameterError):
            exact.hit_probability_2d([1, 1], (0, 0), 3)

    def test_first_passage_vs_enumeration(self):
        # oracle: fraction of 4^3 paths visiting (1,0) at step >= 1
        dirs = ((1, 0), (-1, 0), (0, 1), (0, -1))
        a = [1, 1, 1]
        count = 0
        for combo in itertools.product(dirs, repeat=3):
            x = y = 0
            for s, c in zip(a, combo):
                x += s * c[0]
                y += s * c[1]
                if (x, y) == (1, 0):
                    count += 1
                    break
        assert exact.hit_probability_2d(a, (1, 0), 3) == Fraction(count, 64)

    def test_off_lattice_target(self):
        assert exact.hit_probability_2d([1, 1], (1, 1), 2) > 0
        assert exact.hit_probability_2d([2, 2], (1, 0), 2) == 0


class TestHoeffdingTail:
    def test_two_unit_steps(self):
        rep = exact.hoeffding_tail([1, 1], 2)
        assert rep.exact_tail == HALF
        assert rep.bound == pytest.approx(2 * 2.718281828459045**-1)
        assert float(rep.exact_tail) <= rep.bound

    def test_single_step_threshold_beyond_range(self):
        rep = exact.hoeffding_tail([1], 2)
        assert rep.exact_tail == 0

    def test_small_threshold_clamped(self):
        rep = exact.hoeffding_tail([1, 1], Fraction(1, 100))
        assert rep.bound_raw > 1
        assert rep.bound == 1.0

    @settings(max_examples=40, deadline=None)
    @given(
        st.lists(st.integers(min_value=1, max_value=8), min_size=1, max_size=8),
        st.integers(min_value=1, max_value=20),
    )
    def test_bound_dominates_exact_tail(self, d, t):
        rep = exact.hoeffding_tail(d, t)
        assert float(rep.exact_tail) <= rep.bound_raw + 1e-12
