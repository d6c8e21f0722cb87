"""Word tokenizer and subword-count models."""

import pytest
from wsbridge.errors import ModelError
from wsbridge.tokenizers import Token, load_counter, word_tokens


def test_words_and_punctuation_split():
    tokens = word_tokens("Hello, world!")
    assert [t.text for t in tokens] == ["Hello", ",", "world", "!"]


def test_spans_are_inclusive_and_match_text():
    text = "The cat runs fast."
    for tok in word_tokens(text):
        assert text[tok.start:tok.end + 1] == tok.text


def test_spans_sorted_and_non_overlapping():
    tokens = word_tokens("a bb  ccc, d")
    prev_end = -1
    for tok in tokens:
        assert tok.start > prev_end
        prev_end = tok.end


def test_every_non_space_character_is_covered():
    text = "ab-cd (x) 1.5 été"
    covered = set()
    for tok in word_tokens(text):
        covered.update(range(tok.start, tok.end + 1))
    expected = {i for i, ch in enumerate(text) if not ch.isspace()}
    assert covered == expected


def test_empty_and_whitespace_only_text():
    assert word_tokens("") == []
    assert word_tokens(" \t\n") == []


def test_unicode_word_stays_one_token():
    tokens = word_tokens("café au lait")
    assert tokens[0] == Token("café", 0, 3)


def test_word_counter():
    count = load_counter("words")
    assert count("The cat runs fast.") == 5
    assert count("") == 0


def test_chunk4_counter_charges_long_words():
    count = load_counter("chunk4")
    assert count("cat") == 1
    assert count("cats") == 1
    assert count("catss") == 2          # 5 chars -> 2 chunks
    assert count("internationalization") == 5  # 20 chars -> 5 chunks
    assert count("a, b") == 3


def test_counters_deterministic():
    count = load_counter("chunk4")
    text = "Some reasonably long sentence, with punctuation."
    assert count(text) == count(text)


def test_unknown_counter_names_model():
    with pytest.raises(ModelError, match="sentencepiece-xl"):
        load_counter("sentencepiece-xl")
