"""Step-sequence families and their structural analyses."""

import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from radwalk import sequences as sq
from radwalk.errors import (
    DecompositionError,
    OverflowRefusal,
    ParameterError,
    PreconditionError,
)


class TestMakeSequence:
    def test_constant(self):
        s = sq.make_sequence("constant", value=1)
        assert [s(n) for n in (1, 5, 100)] == [1, 1, 1]

    def test_floor_power_identity(self):
        s = sq.make_sequence("floor-power", gamma=1)
        assert s(5) == 5

    def test_floor_power_sqrt(self):
        s = sq.make_sequence("floor-power", gamma=Fraction(1, 2))
        assert s(10) == 3

    def test_floor_power_is_exact_integer(self):
        s = sq.make_sequence("floor-power", gamma=Fraction(2, 3))
        for n in (1, 7, 1000, 10**6):
            a = s(n)
            assert isinstance(a, int)
            assert a**3 <= n**2 < (a + 1) ** 3

    def test_real_power_dyadic(self):
        s = sq.make_sequence("real-power", alpha=Fraction(1, 2))
        a2 = s(2)
        assert isinstance(a2, Fraction)
        assert (1 << 64) % a2.denominator == 0  # dyadic with bounded denominator
        assert abs(float(a2) - 2**0.5) < 2**-60

    def test_real_power_alpha_one(self):
        s = sq.make_sequence("real-power", alpha=1)
        assert s(7) == 7

    def test_parameter_validation(self):
        with pytest.raises(ParameterError):
            sq.make_sequence("floor-power", gamma=0)
        with pytest.raises(ParameterError):
            sq.make_sequence("real-power", alpha=Fraction(3, 2))
        with pytest.raises(ParameterError):
            sq.make_sequence("real-power", alpha=0)
        with pytest.raises(ParameterError):
            sq.make_sequence("explicit-list", values=[])
        with pytest.raises(ParameterError):
            sq.make_sequence("explicit-list", values=[1, -2])
        with pytest.raises(ParameterError):
            sq.make_sequence("no-such-family")
        with pytest.raises(ParameterError):
            sq.make_sequence("constant", value=0)

    def test_evaluation_is_pure(self):
        s = sq.make_sequence("floor-power", gamma=Fraction(3, 7))
        assert [s(13)] * 5 == [s(13) for _ in range(5)]

    def test_index_bounds(self):
        s = sq.make_sequence("explicit-list", values=[1, 2])
        with pytest.raises(ParameterError):
            s(0)
        with pytest.raises(ParameterError):
            s(3)

    @settings(max_examples=50, deadline=None)
    @given(
        st.integers(min_value=1, max_value=300),
        st.integers(min_value=1, max_value=7),
        st.integers(min_value=1, max_value=7),
    )
    def test_floor_power_root_identity(self, n, p, q):
        s = sq.make_sequence("floor-power", gamma=Fraction(p, q))
        a = s(n)
        assert a >= 1
        assert a**q <= n**p < (a + 1) ** q


class TestSerialization:
    @pytest.mark.parametrize(
        "family,params",
        [
            ("constant", {"value": 3}),
            ("floor-power", {"gamma": Fraction(1, 2)}),
            ("real-power", {"alpha": Fraction(2, 3), "precision_bits": 32}),
            ("explicit-list", {"values": [1, Fraction(5, 2), 3]}),
            ("explicit-block", {"scale": "exact"}),
        ],
    )
    def test_config_roundtrip(self, family, params):
        s = sq.make_sequence(family, **params)
        config = s.to_config()
        json.dumps(config)  # must be serializable text
        s2 = sq.sequence_from_config(config)
        assert s2.to_config() == config
        n_probe = min(4, s.length or 4)
        assert s2.prefix(n_probe) == s.prefix(n_probe)

    def test_unknown_config_key_rejected(self):
        with pytest.raises(ParameterError):
            sq.sequence_from_config({"family": "constant", "params": {}, "bogus": 1})

    def test_explicit_list_file(self, tmp_path):
        path = tmp_path / "steps.txt"
        path.write_text("# comment\n1\n2\n5/2\n", encoding="utf-8")
        s = sq.load_explicit_list(path)
        assert s.prefix(3) == [1, 2, Fraction(5, 2)]


class TestRunLengthDecompose:
    def test_example(self):
        s = sq.make_sequence("explicit-list", values=[2, 2, 3, 3, 3, 5])
        d = sq.run_length_decompose(s, 6)
        assert d.values == (2, 3, 5)
        assert d.multiplicities == (2, 3, 1)
        assert d.starts == (1, 3, 6)

    def test_single_block(self):
        s = sq.make_sequence("explicit-list", values=[1, 1, 1, 1])
        d = sq.run_length_decompose(s, 4)
        assert d.values == (1,)
        assert d.multiplicities == (4,)

    def test_error_carries_offending_index(self):
        s = sq.make_sequence("explicit-list", values=[1, 2, 1])
        with pytest.raises(DecompositionError) as exc:
            sq.run_length_decompose(s, 3)
        assert exc.value.index == 3

    def test_non_integer_rejected(self):
        s = sq.make_sequence("explicit-list", values=[1, Fraction(3, 2)])
        with pytest.raises(DecompositionError) as exc:
            sq.run_length_decompose(s, 2)
        assert exc.value.index == 2

    @settings(max_examples=80, deadline=None)
    @given(st.lists(st.integers(min_value=0, max_value=4), min_size=1, max_size=40))
    def test_roundtrip(self, increments):
        values = []
        cur = 1
        for inc in increments:
            cur += inc
            values.append(cur)
        s = sq.make_sequence("explicit-list", values=values)
        d = sq.run_length_decompose(s, len(values))
        assert d.expand() == values
        assert all(b1 < b2 for b1, b2 in zip(d.values, d.values[1:]))
        assert all(
            d.starts[j + 1] - d.starts[j] == d.multiplicities[j]
            for j in range(len(d.starts) - 1)
        )


class TestDoublingExtraction:
    def test_linear_sixteen(self):
        s = sq.make_sequence("floor-power", gamma=1)
        cert = sq.extract_doubling_subsequence(s, 16, 1)
        assert cert.indices == (1, 2, 4, 8, 16)
        assert cert.size == 5
        assert cert.ratio == Fraction(5, 4)

    def test_linear_four(self):
        s = sq.make_sequence("floor-power", gamma=1)
        cert = sq.extract_doubling_subsequence(s, 4, 1)
        assert cert.indices == (1, 2, 4)

    def test_constant_trivial(self):
        s = sq.make_sequence("constant", value=5)
        cert = sq.extract_doubling_subsequence(s, 9)
        assert cert.indices == (9,)
        assert cert.size == 1

    @pytest.mark.parametrize("p", [2, 4, 6, 10])
    def test_powers_of_two_maximal(self, p):
        s = sq.make_sequence("floor-power", gamma=1)
        cert = sq.extract_doubling_subsequence(s, 2**p)
        assert cert.size == p + 1
        assert cert.ratio == Fraction(p + 1, p)

    def test_measured_gap_default(self):
        s = sq.make_sequence("floor-power", gamma=1)
        cert = sq.extract_doubling_subsequence(s, 8)
        assert cert.gap_bound == 1

    def test_supplied_gap_checked(self):
        s = sq.make_sequence("explicit-list", values=[1, 10, 20])
        with pytest.raises(PreconditionError):
            sq.extract_doubling_subsequence(s, 3, 2)

    def test_requires_values_at_least_one(self):
        s = sq.make_sequence("explicit-list", values=[Fraction(1, 2), 1])
        with pytest.raises(PreconditionError):
            sq.extract_doubling_subsequence(s, 2)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.integers(min_value=-3, max_value=3), min_size=1, max_size=60))
    def test_certificate_always_verifies(self, increments):
        values = [1]
        for inc in increments:
            values.append(max(1, values[-1] + inc))
        s = sq.make_sequence("explicit-list", values=values)
        cert = sq.extract_doubling_subsequence(s, len(values))
        assert cert.verify(s)
        assert cert.indices[-1] == len(values)
        assert all(i < j for i, j in zip(cert.indices, cert.indices[1:]))


class TestRsMonotone:
    def test_monotone_sequence_clean(self):
        s = sq.make_sequence("floor-power", gamma=1)
        rep = sq.check_rs_monotone(s, 1, 1, 100)
        assert rep.ok
        assert rep.violations == ()
        assert rep.clean_from == 1

    def test_alternating_with_slack(self):
        s = sq.make_sequence("explicit-list", values=[1, 2] * 25)
        rep = sq.check_rs_monotone(s, 1, 2, 50)
        assert rep.ok

    def test_spike_violates(self):
        s = sq.make_sequence("explicit-list", values=[1, 1, 100, 1, 1, 1])
        rep = sq.check_rs_monotone(s, 1, 1, 6)
        assert not rep.ok
        assert (3, 4) in rep.violations
        assert rep.clean_from == 4

    def test_parameter_validation(self):
        s = sq.make_sequence("constant", value=1)
        with pytest.raises(ParameterError):
            sq.check_rs_monotone(s, Fraction(1, 2), 1, 10)
        with pytest.raises(ParameterError):
            sq.check_rs_monotone(s, 1, 1, 1)

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.integers(min_value=1, max_value=9), min_size=2, max_size=25))
    def test_unit_parameters_mean_plain_monotonicity(self, values):
        seq = sq.make_sequence("explicit-list", values=values)
        rep = sq.check_rs_monotone(seq, 1, 1, len(values))
        non_decreasing = all(a <= b for a, b in zip(values, values[1:]))
        assert rep.ok == non_decreasing

    @settings(max_examples=40, deadline=None)
    @given(
        st.lists(st.integers(min_value=1, max_value=20), min_size=2, max_size=30),
        st.fractions(min_value=1, max_value=3),
        st.fractions(min_value=1, max_value=3),
    )
    def test_matches_direct_scan(self, values, r, s_param):
        seq = sq.make_sequence("explicit-list", values=values)
        n_max = len(values)
        rep = sq.check_rs_monotone(seq, r, s_param, n_max)
        direct = tuple(
            (n, m)
            for n in range(1, n_max + 1)
            for m in range(1, n_max + 1)
            if Fraction(m) >= r * n and values[n - 1] > s_param * values[m - 1]
        )
        assert rep.violations == direct
        assert rep.ok == (not direct)


class TestBlockSequence:
    def test_sub_block_lengths(self):
        sb = sq.sub_block_length(1, 1)
        assert (sb.base, sb.exponent, sb.value) == (2, 2, 4)
        sb = sq.sub_block_length(2, 1)
        assert (sb.exponent, sb.value) == (16, 65536)
        sb = sq.sub_block_length(3, 1)
        assert sb.exponent == 512
        assert not sb.materializable
        assert sb.value is None
        with pytest.raises(OverflowRefusal) as exc:
            sb.materialize()
        assert exc.value.exponent == 512

    def test_sub_block_domain(self):
        with pytest.raises(ParameterError):
            sq.sub_block_length(2, 3)
        with pytest.raises(ParameterError):
            sq.sub_block_length(0, 0)

    def test_exact_prefix_values(self):
        s = sq.explicit_block_sequence()
        assert s.prefix(4) == [1, 1, 1, 1]
        assert s(5) == 2
        assert s(65540) == 2
        assert s(65541) == 1
        assert s(65552) == 1
        assert s(65553) == 2

    def test_streaming_matches_positional(self):
        s = sq.explicit_block_sequence(scale="scaled")
        flat = []
        for value, length in s.iter_runs():
            flat.extend([value] * length)
            if len(flat) > 300:
                break
        assert flat[:300] == s.prefix(300)

    def test_boundary_differences(self):
        b = sq.block_boundaries(3, scale="scaled")
        sub = b["sub_block_end"]
        g = sq.default_scaled_growth
        for k in (2, 3):
            for j in range(2, k + 1):
                expected = g(k, j) + (3 * k * k if j < k else 0)
                assert sub[(k, j)] - sub[(k, j - 1)] == expected

    def test_exact_boundaries(self):
        b = sq.block_boundaries(2)
        assert b["block_end"][1] == 4
        assert b["sub_block_end"][(2, 1)] == 4 + 65536 + 12
        assert b["block_end"][2] == 4 + 65536 + 12 + (1 << 32)
        # boundary gaps equal the symbolic lengths plus the 3k^2 tail
        L21 = sq.sub_block_length(2, 1).materialize()
        L22 = sq.sub_block_length(2, 2).materialize()
        sub = b["sub_block_end"]
        assert sub[(2, 1)] - b["block_end"][1] == L21 + 12
        assert sub[(2, 2)] - sub[(2, 1)] == L22

    def test_exact_positional_overflow_refusal(self):
        s = sq.explicit_block_sequence(exponent_bit_budget=16)
        assert s(65552) == 1  # block (2,1) and its tail still materialize
        with pytest.raises(OverflowRefusal):
            s(65553)  # needs L(2,2) = 2**32, whose exponent exceeds the budget

    def test_scaled_growth_must_increase(self):
        s = sq.explicit_block_sequence(scale="scaled", growth=lambda k, i: 5)
        with pytest.raises(ParameterError):
            s.prefix(30)

    def test_squared_growth_opt_in(self):
        s = sq.explicit_block_sequence(
            scale="scaled",
            growth=lambda k, i: 4 ** (k + i),
            require_squared_growth=True,
        )
        with pytest.raises(ParameterError):
            s.prefix(2000)  # 4**(k+i) grows strictly but far slower than squaring
