import math
import statistics

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from topnsigma import (
    DegenerateInputError,
    InvalidParameterError,
    RngState,
    categorical_sample,
    categorical_sample_many,
    compute_stats,
    softmax_stable,
    temperature_scale,
)

NEG_INF = float("-inf")


finite_logit_lists = st.lists(
    st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False),
    min_size=2, max_size=64,
)


class TestTemperatureScale:
    def test_divides(self):
        assert temperature_scale([2.0, 4.0], 2.0).tolist() == [1.0, 2.0]

    def test_preserves_sentinel(self):
        out = temperature_scale([3.0, NEG_INF], 0.5)
        assert out[0] == 6.0 and out[1] == NEG_INF

    def test_identity(self):
        assert temperature_scale([1.5], 1.0).tolist() == [1.5]

    @pytest.mark.parametrize("bad", [0.0, -1.0, float("nan")])
    def test_rejects_bad_temperature(self, bad):
        with pytest.raises(InvalidParameterError):
            temperature_scale([1.0, 2.0], bad)

    def test_rejects_nan_logits(self):
        with pytest.raises(InvalidParameterError):
            temperature_scale([1.0, float("nan")], 1.0)

    def test_rejects_posinf_logits(self):
        with pytest.raises(InvalidParameterError):
            temperature_scale([1.0, float("inf")], 1.0)


class TestSoftmaxStable:
    def test_symmetry(self):
        assert softmax_stable([0.0, 0.0]).tolist() == [0.5, 0.5]

    def test_overflow_guard_and_sentinel(self):
        out = softmax_stable([1000.0, 1000.0, NEG_INF])
        assert out.tolist() == [0.5, 0.5, 0.0]

    def test_hand_evaluated(self):
        # e^{ln 3} / (3 + 1) = 0.75 exactly in the shifted form
        out = softmax_stable([math.log(3), math.log(1)])
        assert out == pytest.approx([0.75, 0.25], abs=1e-15)

    def test_all_masked_degenerate(self):
        with pytest.raises(DegenerateInputError):
            softmax_stable([NEG_INF, NEG_INF])

    @given(finite_logit_lists, st.floats(min_value=-4096, max_value=4096, allow_nan=False))
    @settings(max_examples=200)
    def test_shift_invariance(self, logits, shift):
        # |shift| <= 4096 keeps ulp(l + shift) under the 1e-12 contract;
        # larger shifts quantize the logit gaps before softmax sees them
        a = softmax_stable(logits)
        b = softmax_stable(np.asarray(logits) + shift)
        assert np.max(np.abs(a - b)) <= 1e-12

    @given(finite_logit_lists, st.floats(min_value=-1e6, max_value=1e6, allow_nan=False))
    @settings(max_examples=100)
    def test_shift_invariance_large_shift(self, logits, shift):
        # tolerance scales with the representation error of the shifted input
        a = softmax_stable(logits)
        b = softmax_stable(np.asarray(logits) + shift)
        bound = max(1e-12, 64.0 * np.spacing(max(abs(shift), 1.0)))
        assert np.max(np.abs(a - b)) <= bound

    @given(finite_logit_lists)
    @settings(max_examples=200)
    def test_sums_to_one_no_nan(self, logits):
        out = softmax_stable(logits)
        assert not np.isnan(out).any()
        assert abs(out.sum() - 1.0) <= 1e-9

    def test_large_vector_no_nan(self):
        rng = np.random.default_rng(0)
        l = rng.uniform(-1e6, 1e6, 10_000)
        out = softmax_stable(l)
        assert not np.isnan(out).any()
        assert abs(out.sum() - 1.0) <= 1e-9


class TestComputeStats:
    def test_constant_vector_convention(self):
        s = compute_stats([1.0, 1.0, 1.0])
        assert (s.max, s.mean, s.std, s.sigma_distance) == (1.0, 1.0, 0.0, 0.0)

    def test_two_point(self):
        s = compute_stats([0.0, 2.0])
        assert (s.max, s.mean, s.std, s.sigma_distance) == (2.0, 1.0, 1.0, 1.0)

    def test_four_point_against_stdlib_oracle(self):
        values = [-1.0, 0.0, 1.0, 4.0]
        s = compute_stats(values)
        expect_std = statistics.pstdev(values)  # sqrt(3.5)
        assert expect_std == pytest.approx(math.sqrt(3.5), abs=1e-12)
        assert s.max == 4.0 and s.mean == 1.0
        assert s.std == pytest.approx(expect_std, abs=1e-12)
        assert s.sigma_distance == pytest.approx((4.0 - 1.0) / expect_std, abs=1e-12)

    def test_ignores_sentinels(self):
        s = compute_stats([0.0, 2.0, NEG_INF])
        assert (s.max, s.mean, s.std) == (2.0, 1.0, 1.0)

    def test_population_not_sample_std(self):
        values = [0.0, 1.0, 2.0, 3.0]
        assert compute_stats(values).std == pytest.approx(statistics.pstdev(values), abs=1e-12)
        assert compute_stats(values).std != pytest.approx(statistics.stdev(values), abs=1e-6)

    def test_degenerate_needs_two_finite(self):
        with pytest.raises(DegenerateInputError):
            compute_stats([5.0, NEG_INF])

    @given(finite_logit_lists.filter(lambda xs: statistics.pstdev(xs) > 1e-9),
           st.floats(min_value=0.01, max_value=100.0, allow_nan=False))
    @settings(max_examples=200)
    def test_sigma_distance_is_scale_free(self, logits, temperature):
        a = compute_stats(logits).sigma_distance
        b = compute_stats(np.asarray(logits) / temperature).sigma_distance
        assert abs(a - b) <= 1e-10 * max(1.0, a)


class TestCategoricalSample:
    def test_point_mass(self):
        for seed in (0, 1, 999):
            assert categorical_sample([1.0, 0.0, 0.0], RngState(seed)) == 0

    def test_determinism(self):
        a = [categorical_sample([0.75, 0.25], RngState(42)) for _ in range(50)]
        b = [categorical_sample([0.75, 0.25], RngState(42)) for _ in range(50)]
        assert a == b

    def test_same_state_same_sequence(self):
        r1, r2 = RngState(9), RngState(9)
        a = [categorical_sample([0.75, 0.25], r1) for _ in range(200)]
        b = [categorical_sample([0.75, 0.25], r2) for _ in range(200)]
        assert a == b

    def test_fair_coin_band(self):
        rng = RngState(2024)
        draws = categorical_sample_many([0.5, 0.5], rng, 100_000)
        freq = float(np.mean(draws == 0))
        assert 0.494 <= freq <= 0.506  # 3.3 sigma binomial band

    def test_million_draw_4sigma_bands(self):
        p = np.array([0.08, 0.5, 0.02, 0.4])
        n = 1_000_000
        draws = categorical_sample_many(p, RngState(7), n)
        counts = np.bincount(draws, minlength=p.size)
        for i, pi in enumerate(p):
            band = 4.0 * math.sqrt(pi * (1.0 - pi) / n)
            assert abs(counts[i] / n - pi) <= band

    def test_zero_prob_never_drawn(self):
        p = [0.5, 0.0, 0.5]
        draws = categorical_sample_many(p, RngState(3), 50_000)
        assert not np.any(draws == 1)

    def test_many_matches_repeated_single(self):
        p = [0.2, 0.3, 0.5]
        r1, r2 = RngState(11), RngState(11)
        block = categorical_sample_many(p, r1, 500)
        singles = [categorical_sample(p, r2) for _ in range(500)]
        assert block.tolist() == singles

    def test_rejects_bad_probs(self):
        with pytest.raises(InvalidParameterError):
            categorical_sample([0.5, 0.6], RngState(0))
        with pytest.raises(InvalidParameterError):
            categorical_sample([-0.1, 1.1], RngState(0))


class TestRngState:
    def test_block_equals_scalar_stream(self):
        r1, r2 = RngState(123), RngState(123)
        assert r1.uniforms(257).tolist() == [r2.next_uniform() for _ in range(257)]

    def test_uniform_range(self):
        u = RngState(5).uniforms(10_000)
        assert float(u.min()) >= 0.0 and float(u.max()) < 1.0

    def test_copy_is_independent(self):
        r = RngState(8)
        c = r.copy()
        assert r.next_uniform() == c.next_uniform()
        r.next_uniform()
        assert r.next_uniform() != c.next_uniform()
