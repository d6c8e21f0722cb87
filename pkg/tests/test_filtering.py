import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wikispan.errors import ConfigError, DataError
from wikispan.filtering import (FilterConfig, cosine, fallback_subword_count,
                                filter_pair_stream, length_filter,
                                similarity_filter, subword_count)
from wikispan.pairing import ParagraphPair

PAIR = ParagraphPair("a", "b", "Q1", "ja", "en")


class TestSubwordCount:
    def test_space_separated_counts_words(self):
        assert fallback_subword_count("three little words") == 3

    def test_no_space_script_counts_characters(self):
        # scripts written without word separators count non-space characters
        assert fallback_subword_count("日本語の文章") == 6
        assert fallback_subword_count("日本 語") == 3

    def test_counter_override_wins(self):
        assert subword_count("one two", counter=lambda t: 99) == 99

    def test_count_clamped_to_at_least_one(self):
        assert subword_count("x", counter=lambda t: -1) == 1

    def test_failing_counter_wrapped_as_data_error(self):
        def boom(t):
            raise RuntimeError("tokenizer crashed")
        with pytest.raises(DataError):
            subword_count("x", counter=boom)


class TestLengthBounds:
    @pytest.mark.parametrize("counts,keep", [
        ({"a": 30, "b": 158}, True),   # both ends inclusive
        ({"a": 29, "b": 100}, False),  # below minimum
        ({"a": 100, "b": 159}, False),  # above maximum
        ({"a": 30, "b": 30}, True),
        ({"a": 158, "b": 158}, True),
        ({"a": 159, "b": 29}, False),
    ])
    def test_default_boundary_decisions(self, counts, keep):
        assert length_filter(PAIR, counts, FilterConfig()) is keep

    def test_missing_count_raises(self):
        with pytest.raises(DataError):
            length_filter(PAIR, {"a": 50}, FilterConfig())

    def test_invalid_bounds_rejected(self):
        with pytest.raises(ConfigError):
            FilterConfig(min_subwords=10, max_subwords=5)


class TestCosine:
    def test_self_similarity_is_one(self):
        v = np.array([0.3, -1.2, 4.0])
        assert cosine(v, v) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_vectors_are_zero(self):
        assert cosine([1.0, 0.0], [0.0, 1.0]) == pytest.approx(0.0, abs=1e-12)

    def test_opposite_vectors_are_minus_one(self):
        assert cosine([1.0, 2.0], [-1.0, -2.0]) == pytest.approx(-1.0, abs=1e-12)

    def test_zero_vector_rejected(self):
        with pytest.raises(DataError):
            cosine([0.0, 0.0], [1.0, 0.0])

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(DataError):
            cosine([1.0, 0.0], [1.0, 0.0, 0.0])

    @given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=8),
           st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=8),
           st.floats(1e-3, 1e3))
    @settings(max_examples=200, deadline=None)
    def test_symmetry_and_scale_invariance(self, u, v, c):
        n = min(len(u), len(v))
        a, b = np.array(u[:n]), np.array(v[:n])
        if np.linalg.norm(a) < 1e-9 or np.linalg.norm(b) < 1e-9:
            return
        assert cosine(a, b) == cosine(b, a)
        assert cosine(c * a, b) == pytest.approx(cosine(a, b), abs=1e-12)


class TestSimilarityThreshold:
    def _embs(self, sim):
        # two unit vectors with exact dot product sim
        u = np.array([1.0, 0.0])
        v = np.array([sim, np.sqrt(max(0.0, 1.0 - sim * sim))])
        return {"a": u, "b": v}

    def test_above_threshold_kept(self):
        assert similarity_filter(PAIR, self._embs(0.76), FilterConfig())

    def test_exactly_at_threshold_dropped(self):
        assert not similarity_filter(PAIR, self._embs(0.75), FilterConfig())

    def test_negative_similarity_dropped(self):
        assert not similarity_filter(PAIR, self._embs(-0.2), FilterConfig())

    def test_missing_embedding_raises(self):
        with pytest.raises(DataError):
            similarity_filter(PAIR, {"a": np.array([1.0, 0.0])}, FilterConfig())


class TestStream:
    def test_counters_tally_each_decision(self):
        pairs = [ParagraphPair(s, t, "Q1", "ja", "en")
                 for s, t in (("a", "b"), ("c", "d"), ("e", "f"))]
        counts = {"a": 50, "b": 50, "c": 29, "d": 50, "e": 50, "f": 50}
        u = np.array([1.0, 0.0])
        w = np.array([0.0, 1.0])
        embs = {"a": u, "b": u, "c": u, "d": u, "e": u, "f": w}
        kept = list(filter_pair_stream(pairs, counts, embs, FilterConfig(),
                                       counters := {}))
        assert [p.src_id for p in kept] == ["a"]
        assert counters == {"kept": 1, "dropped_length": 1,
                            "dropped_similarity": 1}

    def test_length_checked_before_similarity(self):
        # embeddings missing entirely: a length-dropped pair must not
        # touch them, so no error is raised
        pairs = [ParagraphPair("a", "b", "Q1", "ja", "en")]
        out = list(filter_pair_stream(pairs, {"a": 1, "b": 1}, {},
                                      FilterConfig()))
        assert out == []
