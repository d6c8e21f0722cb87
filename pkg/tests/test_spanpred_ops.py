import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wikispan.errors import DataError
from wikispan.spanpred import (EncoderConfig, SpanDistribution, best_span,
                               distributions_from_logits, encode, init_params,
                               span_distributions, span_loss, span_score)
from wikispan.spanpred.ops import segment_log_softmax


def _dist(p_start, p_end):
    return SpanDistribution(np.asarray(p_start, dtype=np.float64),
                            np.asarray(p_end, dtype=np.float64))


class TestDistributions:
    def test_closed_form_two_position_softmax(self):
        dist = distributions_from_logits(
            np.array([0.0, math.log(3.0)]), np.array([0.0, 0.0]))
        np.testing.assert_allclose(dist.p_start, [0.25, 0.75], atol=1e-9)
        np.testing.assert_allclose(dist.p_end, [0.5, 0.5], atol=1e-9)

    def test_distributions_sum_to_one(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            n = int(rng.integers(1, 40))
            dist = distributions_from_logits(rng.normal(size=n) * 5,
                                             rng.normal(size=n) * 5)
            assert abs(dist.p_start.sum() - 1.0) < 1e-6
            assert abs(dist.p_end.sum() - 1.0) < 1e-6

    def test_softmax_is_shift_invariant(self):
        logits = np.array([1.0, 2.0, 3.0])
        a = distributions_from_logits(logits, logits)
        b = distributions_from_logits(logits + 500.0, logits - 500.0)
        np.testing.assert_allclose(a.p_start, b.p_start, atol=1e-12)
        np.testing.assert_allclose(a.p_end, b.p_end, atol=1e-12)

    def test_unequal_lengths_rejected(self):
        with pytest.raises(DataError):
            _dist(np.zeros(3), np.zeros(4))

    def test_empty_distribution_rejected(self):
        with pytest.raises(DataError):
            _dist(np.zeros(0), np.zeros(0))

    def test_segment_log_softmax_ignores_masked_positions(self):
        logits = np.array([[1.0, 50.0, 2.0]])
        seg = np.array([[1, 0, 1]], dtype=np.uint8)
        ls = segment_log_softmax(logits, seg)
        probs = np.exp(ls[0][seg[0] == 1])
        np.testing.assert_allclose(probs.sum(), 1.0, atol=1e-12)
        assert ls[0, 1] == -np.inf


class TestSpanScore:
    def test_score_is_product_of_start_and_end(self):
        dist = _dist([0.25, 0.75], [0.4, 0.6])
        assert span_score(dist, 1, 1) == pytest.approx(0.45, abs=1e-12)
        assert span_score(dist, 0, 0) == pytest.approx(0.10, abs=1e-12)
        assert span_score(dist, 0, 1) == pytest.approx(0.15, abs=1e-12)

    def test_invalid_span_rejected(self):
        dist = _dist([0.5, 0.5], [0.5, 0.5])
        with pytest.raises(DataError):
            span_score(dist, 1, 0)
        with pytest.raises(DataError):
            span_score(dist, 0, 2)


class TestBestSpan:
    def _brute(self, s, e, min_score):
        best, arg = -1.0, None
        for k in range(len(s)):
            for l in range(k, len(s)):
                w = s[k] * e[l]
                if w > best:
                    best, arg = w, (k, l)
        return arg if best >= min_score else None

    def test_simple_argmax(self):
        dist = _dist([0.8, 0.1, 0.1], [0.1, 0.1, 0.8])
        assert best_span(dist) == (0, 2)

    def test_upper_triangle_only(self):
        # unconstrained argmax is (k=1, l=0) with 0.72, but l >= k forbids
        # it; the best admissible span is (1, 1)
        dist = _dist([0.1, 0.9], [0.8, 0.2])
        assert best_span(dist) == (1, 1)

    def test_tie_breaks_to_smallest_start_then_end(self):
        dist = _dist([0.5, 0.5], [0.5, 0.5])
        assert best_span(dist) == (0, 0)

    def test_min_score_returns_none_below_threshold(self):
        dist = _dist([0.5, 0.5], [0.5, 0.5])  # best product 0.25
        assert best_span(dist, min_score=0.3) is None
        assert best_span(dist, min_score=0.25) == (0, 0)

    @given(st.integers(1, 12), st.integers(0, 2 ** 31 - 1))
    @settings(max_examples=150, deadline=None)
    def test_matches_brute_force(self, n, seed):
        rng = np.random.default_rng(seed)
        s = rng.dirichlet(np.ones(n))
        e = rng.dirichlet(np.ones(n))
        assert best_span(_dist(s, e)) == self._brute(s, e, 0.0)


class TestSpanLoss:
    def test_loss_is_negative_log_product(self):
        dist = _dist([0.25, 0.75], [0.4, 0.6])
        assert span_loss(dist, 1, 1) == pytest.approx(-math.log(0.45),
                                                      abs=1e-9)

    def test_uniform_distribution_loss_is_two_log_n(self):
        for n in (1, 2, 7, 33):
            u = np.full(n, 1.0 / n)
            dist = _dist(u, u)
            assert span_loss(dist, 0, n - 1) == pytest.approx(
                2.0 * math.log(n), abs=1e-9)

    def test_zero_probability_raises_without_clamp(self):
        dist = _dist([0.0, 1.0], [0.5, 0.5])
        with pytest.raises(DataError):
            span_loss(dist, 0, 1)

    def test_clamp_floors_probabilities(self):
        dist = _dist([0.0, 1.0], [0.5, 0.5])
        loss = span_loss(dist, 0, 1, clamp=True)
        assert loss == pytest.approx(-math.log(1e-12) - math.log(0.5),
                                     abs=1e-6)

    def test_loss_decomposes_into_start_plus_end_terms(self):
        rng = np.random.default_rng(8)
        s = rng.dirichlet(np.ones(6))
        e = rng.dirichlet(np.ones(6))
        assert span_loss(_dist(s, e), 2, 4) == pytest.approx(
            -math.log(s[2]) - math.log(e[4]), abs=1e-12)


class TestEncode:
    def _params(self):
        cfg = EncoderConfig(vocab=list("abcd ¶"), embed_dim=16, num_blocks=1,
                            num_heads=2, hidden_dim=32, max_len=64)
        return init_params(cfg)

    def test_returns_one_row_per_target_character(self):
        rows = encode(self._params(), "ab cd", "dcba", 0, 1)
        assert rows.shape == (4, 16)

    def test_span_distributions_cover_target_segment(self):
        dist = span_distributions(self._params(), "ab", "dcba", 0, 1)
        assert dist.size == 4
        assert abs(dist.p_start.sum() - 1.0) < 1e-6
        assert abs(dist.p_end.sum() - 1.0) < 1e-6

    def test_marked_position_changes_the_distribution(self):
        params = self._params()
        a = span_distributions(params, "ab cd", "dcba", 0, 1)
        b = span_distributions(params, "ab cd", "dcba", 3, 4)
        assert not np.allclose(a.p_start, b.p_start)
