import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import helpers
from wikispan.align import (DEFAULT_THRESHOLD, TokenAlignmentMatrix,
                            align_pair, boundaries_from_tokens,
                            extract_alignment, load_sentence_pairs,
                            map_span_to_words, symmetrize, token_prob_matrix,
                            whitespace_boundaries, write_pharaoh)
from wikispan.errors import DataError, ParseError, ValidationError
from wikispan.spanpred import EncoderConfig, TrainConfig, init_params, train


class TestBoundaries:
    def test_whitespace_boundaries_are_inclusive_spans(self):
        assert whitespace_boundaries("aa bbb c") == [(0, 1), (3, 5), (7, 7)]

    def test_multiple_spaces_and_edges(self):
        assert whitespace_boundaries("  aa   b ") == [(2, 3), (7, 7)]

    def test_boundaries_from_tokens_assume_single_space_joins(self):
        tokens = ["aa", "bbb", "c"]
        assert boundaries_from_tokens(tokens) == \
            whitespace_boundaries(" ".join(tokens))

    def test_empty_token_rejected(self):
        with pytest.raises(ValidationError):
            boundaries_from_tokens(["aa", ""])


class TestMapSpanToWords:
    BOUNDS = [(0, 1), (3, 5), (7, 10), (12, 13)]

    def test_exact_word_span(self):
        assert map_span_to_words((3, 5), self.BOUNDS) == [1]

    def test_multi_word_span(self):
        assert map_span_to_words((3, 10), self.BOUNDS) == [1, 2]

    def test_partial_word_coverage_excluded(self):
        # span covers word 1 fully but only one char of word 2
        assert map_span_to_words((3, 8), self.BOUNDS) == [1]

    def test_prefix_run_stops_at_first_gap(self):
        # words 0 and 3 fully covered, 1 and 2 not: only the run from the
        # first contained word survives
        assert map_span_to_words((0, 13), [(0, 1), (3, 5), (7, 10), (12, 13)]) \
            == [0, 1, 2, 3]
        assert map_span_to_words((0, 2), self.BOUNDS) == [0]

    def test_span_containing_no_whole_word_maps_to_nothing(self):
        assert map_span_to_words((1, 3), self.BOUNDS) == []

    def test_subword_fragment_drops_trailing_partial(self):
        # two words; span covers all of word 0 and half of word 1
        bounds = [(0, 3), (5, 10)]
        assert map_span_to_words((0, 7), bounds) == [0]

    @given(st.integers(0, 13), st.integers(0, 13))
    @settings(max_examples=100, deadline=None)
    def test_result_is_contiguous_run_of_contained_words(self, a, b):
        k, l = min(a, b), max(a, b)
        words = map_span_to_words((k, l), self.BOUNDS)
        contained = [w for w, (s, e) in enumerate(self.BOUNDS)
                     if k <= s and e <= l]
        if words:
            assert words == list(range(words[0], words[-1] + 1))
            assert words[0] == contained[0]
            assert set(words) <= set(contained)
        else:
            assert contained == []


class TestSymmetrize:
    def test_elementwise_average_with_transpose(self):
        m_xy = TokenAlignmentMatrix(np.array([[0.6, 0.0], [0.2, 1.0]]), "x->y")
        m_yx = TokenAlignmentMatrix(np.array([[0.3, 0.4], [0.0, 0.8]]), "y->x")
        sym = symmetrize(m_xy, m_yx)
        want = (m_xy.probs + m_yx.probs.T) / 2.0
        np.testing.assert_allclose(sym.probs, want, atol=1e-12)
        assert sym.probs[0, 0] == pytest.approx(0.45)

    def test_direction_swap_gives_identical_alignment(self):
        rng = np.random.default_rng(0)
        for _ in range(25):
            a = rng.random((rng.integers(1, 6), rng.integers(1, 6)))
            b = rng.random(a.shape[::-1])
            m_xy = TokenAlignmentMatrix(a, "x->y")
            m_yx = TokenAlignmentMatrix(b, "y->x")
            fwd = extract_alignment(symmetrize(m_xy, m_yx), 0.4)
            swapped = extract_alignment(symmetrize(m_yx, m_xy), 0.4)
            assert fwd == {(p, q) for q, p in swapped}

    def test_shape_mismatch_rejected(self):
        m_xy = TokenAlignmentMatrix(np.zeros((2, 3)), "x->y")
        m_yx = TokenAlignmentMatrix(np.zeros((2, 3)), "y->x")
        with pytest.raises(DataError):
            symmetrize(m_xy, m_yx)


class TestExtract:
    def test_threshold_is_strict(self):
        sym = TokenAlignmentMatrix(np.array([[0.4, 0.400001], [0.39, 1.0]]),
                                   "sym")
        assert extract_alignment(sym, 0.4) == {(0, 1), (1, 1)}

    def test_default_threshold_value(self):
        assert DEFAULT_THRESHOLD == 0.4

    def test_empty_matrix_gives_empty_alignment(self):
        sym = TokenAlignmentMatrix(np.zeros((0, 0)), "sym")
        assert extract_alignment(sym, 0.4) == set()


class TestProbMatrix:
    def _params(self):
        vocab = sorted(set("".join(helpers.SRC_WORDS + helpers.TGT_WORDS)) |
                       {" ", "¶"})
        cfg = EncoderConfig(vocab=vocab, embed_dim=16, num_blocks=1,
                            num_heads=2, hidden_dim=32, max_len=120, seed=0)
        return init_params(cfg)

    def test_matrix_shape_and_range(self):
        params = self._params()
        x, y = "aa bb cc", "qq rr ss"
        mat = token_prob_matrix(params, x, y, whitespace_boundaries(x),
                                whitespace_boundaries(y))
        assert mat.shape == (3, 3)
        assert mat.probs.min() >= 0.0 and mat.probs.max() <= 1.0
        assert mat.direction == "x->y"

    def test_batched_rows_match_row_at_a_time(self):
        # grouping words into one batch must not change any row
        params = self._params()
        x, y = "aa bb cc dd", "qq rr"
        xb, yb = whitespace_boundaries(x), whitespace_boundaries(y)
        whole = token_prob_matrix(params, x, y, xb, yb)
        for p, (i, j) in enumerate(xb):
            solo = token_prob_matrix(params, x, y, [(i, j)], yb)
            np.testing.assert_allclose(solo.probs[0], whole.probs[p],
                                       atol=1e-6)

    def test_min_score_zeroes_uncertain_rows(self):
        params = self._params()
        x, y = "aa bb", "qq rr"
        mat = token_prob_matrix(params, x, y, whitespace_boundaries(x),
                                whitespace_boundaries(y), min_score=1.0)
        assert np.all(mat.probs == 0.0)

    def test_unknown_strategy_rejected(self):
        params = self._params()
        with pytest.raises(ValidationError):
            token_prob_matrix(params, "aa", "qq", [(0, 1)], [(0, 1)],
                              strategy="viterbi")


class TestEndToEndTinyModel:
    def test_trained_model_aligns_by_lexicon(self):
        # a 10-type substitution lexicon with short sentences: a tiny model
        # learns it in seconds, and align_pair recovers the identity links
        records = helpers.make_training_records(60, seed=0, marks_per_pair=3,
                                                min_len=3, max_len=5,
                                                n_types=10)
        vocab = sorted({ch for r in records
                        for ch in r["question"] + r["context"]})
        cfg = EncoderConfig(vocab=vocab, embed_dim=32, num_blocks=1,
                            num_heads=2, hidden_dim=64, max_len=80, seed=0)
        params = init_params(cfg)
        train(params, records,
              TrainConfig(learning_rate=2e-3, warmup_steps=40,
                          total_steps=700, batch_size=16, seed=0))
        pairs = helpers.make_sentence_pairs(10, seed=99, min_len=3,
                                            max_len=5, n_types=10)
        correct = total = 0
        for src, tgt in pairs:
            got = align_pair(params, src, tgt, threshold=0.4)
            want = {(i, i) for i in range(len(src))}
            correct += len(got & want)
            total += len(want)
        assert correct / total >= 0.9


class TestSentenceIO:
    def test_load_sentence_pairs(self, tmp_path):
        path = tmp_path / "s.tsv"
        path.write_text("aa bb\tqq rr\ncc\tss tt\n")
        pairs = load_sentence_pairs(str(path))
        assert pairs == [(["aa", "bb"], ["qq", "rr"]), (["cc"], ["ss", "tt"])]

    @pytest.mark.parametrize("line", ["no tab here", "a\tb\tc", "\tonly right",
                                      "only left\t"])
    def test_malformed_lines_rejected(self, tmp_path, line):
        path = tmp_path / "bad.tsv"
        path.write_text(line + "\n")
        with pytest.raises(ParseError):
            load_sentence_pairs(str(path))

    def test_write_pharaoh_sorts_links(self, tmp_path):
        path = tmp_path / "a.txt"
        n = write_pharaoh([{(2, 1), (0, 0), (1, 3)}, set()], str(path))
        assert n == 2
        assert path.read_text() == "0-0 1-3 2-1\n\n"
