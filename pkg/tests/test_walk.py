"""Walk simulation: exactness, seeding contracts, statistics, Monte Carlo."""

import io
from fractions import Fraction

import numpy as np
import pytest

from radwalk import exact, rng as rw, sequences as sq, walk as wk
from radwalk.errors import ConsistencyError, ParameterError, PositionOverflowError

CONST1 = sq.make_sequence("constant", value=1)


def find_seed_with_codes(prefix_codes, span=2000):
    """Smallest master seed whose trial-0 stream starts with the given codes."""
    want = list(prefix_codes)
    for seed in range(span):
        got = rw.direction_codes(seed, 0, len(want))
        if list(got) == want:
            return seed
    raise AssertionError("no seed found; widen the search span")


class TestSteps:
    def test_decompose_examples(self):
        assert wk.decompose_step((1, 0)) == (1, 1)
        assert wk.decompose_step((0, -1)) == (0, -1)
        assert wk.decompose_step((-1, 0)) == (1, -1)

    def test_bijection(self):
        seen = set()
        for code in range(4):
            s = wk.Step2D(code)
            pair = (s.kappa, s.eps)
            assert wk.Step2D.from_decomposition(*pair).code == code
            seen.add(pair)
        assert seen == {(0, 1), (0, -1), (1, 1), (1, -1)}

    def test_kappa_means_horizontal(self):
        for code in range(4):
            s = wk.Step2D(code)
            assert s.kappa == (1 if s.vector[0] != 0 else 0)
            assert s.eps == (s.vector[0] or s.vector[1])

    def test_sampled_step_decomposes(self):
        gen = rw.trial_generator(0, 0)
        s = wk.sample_step(gen)
        assert s.code in range(4)
        assert wk.Step2D.from_decomposition(s.kappa, s.eps) == s

    def test_invalid_direction(self):
        with pytest.raises(ParameterError):
            wk.decompose_step((1, 1))


class TestSampling:
    def test_uniformity_within_four_sigma(self):
        n = 1_000_000
        codes = rw.direction_codes(123, 0, n)
        sigma = (n * 0.25 * 0.75) ** 0.5
        for code in range(4):
            count = int((codes == code).sum())
            assert abs(count - n * 0.25) <= 4 * sigma

    def test_same_seed_same_stream(self):
        a = rw.direction_codes(7, 3, 1000)
        b = rw.direction_codes(7, 3, 1000)
        assert np.array_equal(a, b)

    def test_trials_have_distinct_streams(self):
        a = rw.direction_codes(7, 0, 64)
        b = rw.direction_codes(7, 1, 64)
        assert not np.array_equal(a, b)

    def test_scalar_draws_match_vector_draws(self):
        gen = rw.trial_generator(11, 5)
        scalar = [int(gen.integers(0, 4)) for _ in range(257)]
        assert scalar == list(rw.direction_codes(11, 5, 257))


class TestSimulate:
    def test_zero_horizon(self):
        summary = wk.simulate(CONST1, 0, 0)
        assert summary.final == wk.WalkState(0, 0, 0)

    def test_one_step_norm(self):
        for seed in range(8):
            s = wk.simulate(CONST1, 1, seed)
            assert abs(s.final.x) + abs(s.final.y) == 1

    def test_two_step_with_unequal_sizes_never_returns(self):
        seq = sq.make_sequence("explicit-list", values=[1, 2])
        for seed in range(32):
            s = wk.simulate(seq, 2, seed)
            assert abs(s.final.x) + abs(s.final.y) in (1, 3)

    def test_horizon_exceeding_explicit_list(self):
        seq = sq.make_sequence("explicit-list", values=[1, 2])
        with pytest.raises(ParameterError):
            wk.simulate(seq, 3, 0)

    def test_fast_path_matches_streaming(self):
        seq = sq.make_sequence("floor-power", gamma=Fraction(1, 2))
        for seed in range(6):
            fast = wk.simulate(seq, 50, seed)
            slow = wk.simulate(seq, 50, seed, visitor=lambda *a: None)
            assert fast.final == slow.final
            assert fast.horizontal_steps == slow.horizontal_steps

    def test_streamed_states_recompose_exactly(self):
        seq = sq.make_sequence("floor-power", gamma=1)
        summary, rec = wk.simulate_recording(seq, 200, 5)
        x = y = 0
        for n, (rn, rx, ry, a, kappa, eps) in enumerate(rec.rows, 1):
            dx = a * eps if kappa else 0
            dy = 0 if kappa else a * eps
            x += dx
            y += dy
            assert (rn, rx, ry) == (n, x, y)
        assert (summary.final.x, summary.final.y) == (x, y)

    def test_conservation_of_step_counts(self):
        summary, rec = wk.simulate_recording(CONST1, 300, 9)
        kappas = [r[4] for r in rec.rows]
        assert sum(kappas) == summary.horizontal_steps
        assert sum(kappas) + sum(1 - k for k in kappas) == 300

    def test_norm_bounded_by_step_sum(self):
        seq = sq.make_sequence("floor-power", gamma=1)
        summary = wk.simulate(seq, 100, 3)
        budget = sum(seq.prefix(100))
        assert abs(summary.final.x) + abs(summary.final.y) <= 2 * budget

    def test_fractional_steps_exact_positions(self):
        seq = sq.make_sequence("explicit-list", values=[Fraction(1, 2), Fraction(1, 2)])
        summary = wk.simulate(seq, 2, 1, policy=wk.PositionPolicy(width_bits=None))
        assert isinstance(summary.final.x, (int, Fraction))
        assert (summary.final.x + summary.final.y).denominator in (1, 2)


class TestOverflowPolicy:
    BIG = 1 << 62

    def test_checked_width_raises_with_step(self):
        seq = sq.make_sequence("explicit-list", values=[self.BIG, self.BIG, self.BIG])
        with pytest.raises(PositionOverflowError) as exc:
            wk.simulate(seq, 3, 0)
        assert 1 <= exc.value.step <= 3

    def test_promotion_keeps_exact_values(self):
        seq = sq.make_sequence("explicit-list", values=[self.BIG, self.BIG, self.BIG])
        summary = wk.simulate(seq, 3, 0, policy=wk.PositionPolicy(promote=True))
        assert abs(summary.final.x) + abs(summary.final.y) in (
            self.BIG,
            3 * self.BIG,
        )

    def test_unbounded_width(self):
        seq = sq.make_sequence("explicit-list", values=[self.BIG] * 3)
        summary = wk.simulate(seq, 3, 0, policy=wk.PositionPolicy(width_bits=None))
        assert abs(summary.final.x) <= 3 * self.BIG

    def test_narrow_width_checked_even_for_small_steps(self):
        seq = sq.make_sequence("constant", value=100)
        policy = wk.PositionPolicy(width_bits=8)  # bound 255
        found_overflow = False
        for seed in range(20):
            try:
                wk.simulate(seq, 10, seed, policy=policy)
            except PositionOverflowError as exc:
                assert 1 <= exc.step <= 10
                found_overflow = True
        assert found_overflow


class TestVisitStatistics:
    def test_zero_horizon_counts_nothing(self):
        stats = wk.visit_statistics(CONST1, 0, 0, [(0, 0)])
        st = stats.stats_for((0, 0))
        assert st.count == 0 and st.first_hit is None

    def test_forced_return(self):
        seed = find_seed_with_codes([0, 1])  # +e1 then -e1
        stats = wk.visit_statistics(CONST1, 2, seed, [(0, 0)])
        st = stats.stats_for((0, 0))
        assert st.first_hit == 2
        assert st.count == 1
        assert st.min_sq_distance == 0

    def test_unreachable_target(self):
        stats = wk.visit_statistics(CONST1, 3, 1, [(10, 10)])
        assert stats.stats_for((10, 10)).count == 0

    def test_first_le_last_when_counted(self):
        stats = wk.visit_statistics(CONST1, 500, 12, [(0, 0), (1, 0)])
        for st in stats.per_target:
            if st.count > 0:
                assert st.first_hit <= st.last_hit
            assert st.count >= 0


class TestMonteCarloReturn:
    def test_impossible_return_is_zero(self):
        seq = sq.make_sequence("explicit-list", values=[1, 2])
        est = wk.monte_carlo_return(seq, 2, 500, 4, (0, 0))
        assert est.successes == 0

    def test_single_trial_is_zero_or_one(self):
        est = wk.monte_carlo_return(CONST1, 2, 1, 9, (0, 0))
        assert est.estimate in (0.0, 1.0)

    def test_estimate_identity_and_ci(self):
        est = wk.monte_carlo_return(CONST1, 2, 4000, 10, (0, 0))
        assert est.estimate == est.successes / est.trials
        assert est.ci.low <= est.estimate <= est.ci.high

    def test_rejects_zero_trials(self):
        with pytest.raises(ParameterError):
            wk.monte_carlo_return(CONST1, 2, 0, 0, (0, 0))

    def test_reproducible_and_worker_invariant(self):
        a = wk.monte_carlo_return(CONST1, 4, 3000, 77, (0, 0), workers=1)
        b = wk.monte_carlo_return(CONST1, 4, 3000, 77, (0, 0), workers=4)
        assert a.successes == b.successes
        assert a.to_json_dict() == b.to_json_dict()

    @pytest.mark.parametrize(
        "values,horizon,target",
        [([1, 1], 2, (0, 0)), ([1, 1, 1], 3, (1, 0)), ([1, 2, 2], 3, (0, 0))],
    )
    def test_within_four_sigma_of_exact(self, values, horizon, target):
        seq = sq.make_sequence("explicit-list", values=values)
        p = exact.hit_probability_2d(values, target, horizon)
        trials = 40_000
        est = wk.monte_carlo_return(seq, horizon, trials, 2024, target)
        sigma = (float(p) * (1 - float(p)) / trials) ** 0.5
        assert abs(est.estimate - float(p)) <= 4 * sigma + 1e-12

    def test_python_fallback_for_fractional_steps(self):
        seq = sq.make_sequence("explicit-list", values=[Fraction(1, 2), Fraction(1, 2)])
        est = wk.monte_carlo_return(seq, 2, 400, 3, (0, 0))
        exact_p = exact.hit_probability_2d([Fraction(1, 2)] * 2, (0, 0), 2)
        assert abs(est.estimate - float(exact_p)) < 0.1


class TestDivisibility:
    SEQ = sq.make_sequence("explicit-list", values=[1, 1, 2, 2])

    def test_cancelling_path_divisible(self):
        seed = find_seed_with_codes([0, 1])  # +e1, -e1 puts S_2 = (0,0)
        _, rec = wk.simulate_recording(self.SEQ, 4, seed)
        dec = sq.run_length_decompose(self.SEQ, 4)
        rep = wk.divisibility_at_blocks(self.SEQ, rec, dec)
        assert [(r.block, r.value, r.time) for r in rep] == [(1, 1, 0), (2, 2, 2)]
        assert rep[0].x_divisible and rep[0].y_divisible  # everything divides 0
        assert rep[1].x_divisible and rep[1].y_divisible

    def test_non_cancelling_path_not_divisible(self):
        seed = find_seed_with_codes([0, 2])  # +e1, +e2 puts S_2 = (1,1)
        _, rec = wk.simulate_recording(self.SEQ, 4, seed)
        dec = sq.run_length_decompose(self.SEQ, 4)
        rep = wk.divisibility_at_blocks(self.SEQ, rec, dec)
        assert not rep[1].x_divisible and not rep[1].y_divisible

    def test_block_one_always_divisible(self):
        seed = find_seed_with_codes([2, 3])
        _, rec = wk.simulate_recording(self.SEQ, 4, seed)
        dec = sq.run_length_decompose(self.SEQ, 4)
        rep = wk.divisibility_at_blocks(self.SEQ, rec, dec)
        assert rep[0].x_divisible and rep[0].y_divisible

    def test_mismatched_decomposition_rejected(self):
        _, rec = wk.simulate_recording(self.SEQ, 4, 0)
        other = sq.run_length_decompose(
            sq.make_sequence("explicit-list", values=[1, 2, 2, 2]), 4
        )
        with pytest.raises(ConsistencyError):
            wk.divisibility_at_blocks(self.SEQ, rec, other)

    def test_short_trajectory_rejected(self):
        _, rec = wk.simulate_recording(self.SEQ, 1, 0)
        dec = sq.run_length_decompose(self.SEQ, 4)
        with pytest.raises(ConsistencyError):
            wk.divisibility_at_blocks(self.SEQ, rec, dec)


class TestExports:
    def test_trajectory_csv_schema(self):
        _, rec = wk.simulate_recording(CONST1, 3, 2)
        buf = io.StringIO()
        rec.export_csv(buf)
        lines = buf.getvalue().strip().splitlines()
        assert lines[0] == "n,x,y,a_n,kappa,eps"
        assert len(lines) == 4
        first = lines[1].split(",")
        assert first[0] == "1" and first[3] == "1"

    def test_summary_json_carries_seed_metadata(self):
        summary = wk.simulate(CONST1, 5, 42)
        doc = summary.to_json_dict()
        assert doc["master_seed"] == 42
        assert doc["rng_id"] == rw.RNG_ID
        assert doc["seed_rule"] == rw.SEED_RULE_ID
