"""Rule-based English part-of-speech tagging over the Universal POS set.

The ``rule-en`` tagger combines closed-class word lists, a lexicon of
frequent verb stems with inflection matching, suffix heuristics, and a
noun default.  It runs offline, byte-deterministically, and only ever
emits tags from the 17-tag Universal POS inventory.  It is not a
state-of-the-art tagger; it exists so downstream consumers get plausible,
valid POS sidecars without a model download.  Statistical taggers can be
added to the registry alongside it.
"""

from __future__ import annotations

from .errors import ModelError
from .tokenizers import Token, word_tokens

UPOS_TAGS = frozenset({
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X",
})

_DET = {
    "the", "a", "an", "this", "that", "these", "those", "each", "every",
    "either", "neither", "some", "any", "no", "another", "both", "all",
    "such",
}
_PRON = {
    "i", "you", "he", "she", "it", "we", "they", "me", "him", "her", "us",
    "them", "mine", "yours", "hers", "ours", "theirs", "myself", "yourself",
    "himself", "herself", "itself", "ourselves", "themselves", "who", "whom",
    "whose", "what", "which", "someone", "anyone", "everyone", "something",
    "anything", "everything", "nothing", "nobody", "one",
}
_ADP = {
    "in", "on", "at", "by", "for", "with", "from", "into", "onto", "over",
    "under", "between", "through", "during", "against", "about", "across",
    "behind", "beyond", "within", "without", "near", "of", "off", "up",
    "down", "around", "along", "toward", "towards", "upon", "per", "via",
}
_CCONJ = {"and", "or", "but", "nor", "yet", "plus"}
_SCONJ = {
    "if", "because", "although", "though", "while", "whereas", "unless",
    "since", "until", "when", "whenever", "after", "before", "once",
    "whether",
}
_AUX = {
    "am", "is", "are", "was", "were", "be", "been", "being", "do", "does",
    "did", "have", "has", "had", "having", "will", "would", "shall",
    "should", "can", "could", "may", "might", "must",
}
_PART = {"to", "not"}
_INTJ = {"oh", "ah", "wow", "hey", "ouch", "hello", "hi", "goodbye",
         "please", "thanks", "yeah", "hmm"}
_NUM_WORDS = {
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight",
    "nine", "ten", "eleven", "twelve", "twenty", "thirty", "forty", "fifty",
    "hundred", "thousand", "million", "billion",
}
# "one" doubles as a pronoun; numeric reading wins when ambiguous
_PRON = _PRON - _NUM_WORDS

_VERB_STEMS = {
    "run", "walk", "eat", "go", "make", "take", "see", "come", "give",
    "find", "think", "say", "tell", "ask", "work", "seem", "feel", "leave",
    "call", "put", "mean", "keep", "let", "begin", "help", "talk", "turn",
    "start", "show", "hear", "play", "move", "like", "live", "believe",
    "hold", "bring", "happen", "write", "sit", "stand", "lose", "pay",
    "meet", "include", "continue", "set", "learn", "change", "lead",
    "understand", "watch", "follow", "stop", "create", "speak", "read",
    "spend", "grow", "open", "win", "teach", "offer", "remember",
    "consider", "appear", "buy", "serve", "die", "send", "build", "stay",
    "fall", "cut", "reach", "kill", "raise", "pass", "sell", "require",
    "report", "decide", "pull", "return", "explain", "hope", "develop",
    "carry", "break", "receive", "agree", "support", "hit", "produce",
    "cover", "catch", "draw", "choose", "wait", "want", "need", "use",
    "try", "love", "jump", "sleep", "swim", "sing", "dance", "fly",
    "drive", "drink", "throw", "wear", "forget", "rise", "wake", "close",
    "add", "point", "answer", "allow", "place", "visit",
}
_IRREGULAR_VERB_FORMS = {
    "went", "got", "gotten", "said", "made", "took", "taken", "came",
    "saw", "seen", "knew", "known", "gave", "given", "found", "thought",
    "told", "became", "left", "felt", "brought", "began", "begun", "kept",
    "held", "wrote", "written", "stood", "heard", "meant", "met", "paid",
    "ran", "sat", "spoke", "spoken", "led", "grew", "grown", "lost",
    "fell", "fallen", "sent", "built", "understood", "drew", "drawn",
    "broke", "broken", "spent", "caught", "bought", "chose", "chosen",
    "ate", "eaten", "drank", "drunk", "drove", "driven", "flew", "flown",
    "forgot", "forgotten", "rose", "risen", "sang", "sung", "sold",
    "swam", "swum", "threw", "thrown", "woke", "woken", "wore", "worn",
    "won", "slept", "taught",
}
_ADJ_WORDS = {
    "good", "bad", "big", "small", "new", "old", "high", "low", "long",
    "short", "little", "great", "own", "other", "same", "different",
    "able", "early", "late", "young", "important", "few", "public",
    "sure", "real", "best", "better", "worse", "worst", "large", "nice",
    "happy", "sad", "fast", "slow", "hot", "cold", "warm", "red", "blue",
    "green", "black", "white", "full", "empty", "hard", "soft", "easy",
    "heavy", "light", "strong", "weak", "rich", "poor", "clean", "dirty",
}
_ADV_WORDS = {
    "very", "too", "also", "just", "now", "then", "here", "there",
    "always", "never", "often", "soon", "still", "already", "yet",
    "again", "quite", "rather", "almost", "together", "away", "back",
    "even", "far", "fast", "hard", "today", "tomorrow", "yesterday",
    "well", "maybe", "perhaps",
}
# "fast"/"hard" appear in both ADJ and ADV lists; the ADJ reading wins
_ADV_WORDS = _ADV_WORDS - _ADJ_WORDS

_SYM_CHARS = set("$€£¥%+<>=~^|#&*@")
_ADJ_SUFFIXES = ("ous", "ful", "ive", "able", "ible", "less", "ish")

_SENT_FINAL = {".", "!", "?"}


def _verb_by_inflection(word: str) -> bool:
    if word in _VERB_STEMS or word in _IRREGULAR_VERB_FORMS:
        return True
    for suffix in ("s", "es", "ed", "d", "ing"):
        if word.endswith(suffix) and len(word) > len(suffix):
            stem = word[: -len(suffix)]
            if stem in _VERB_STEMS:
                return True
            # consonant doubling: running -> runn -> run
            if len(stem) >= 2 and stem[-1] == stem[-2] \
                    and stem[:-1] in _VERB_STEMS:
                return True
            # final-e dropping: making -> mak -> make
            if stem + "e" in _VERB_STEMS:
                return True
    return False


def _is_number(word: str) -> bool:
    stripped = word.replace(",", "").replace(".", "")
    return stripped.isdigit() and bool(stripped)


class RuleEnglishTagger:
    """Heuristic English tagger; one UPOS tag per word token."""

    name = "rule-en"

    def tag(self, tokens: list[Token]) -> list[str]:
        tags = []
        sentence_start = True
        for tok in tokens:
            tags.append(self._tag_one(tok.text, sentence_start))
            sentence_start = tok.text in _SENT_FINAL
        assert len(tags) == len(tokens)
        assert all(t in UPOS_TAGS for t in tags)
        return tags

    def tag_text(self, text: str) -> tuple[list[Token], list[str]]:
        tokens = word_tokens(text)
        return tokens, self.tag(tokens)

    def _tag_one(self, word: str, sentence_start: bool) -> str:
        if not any(ch.isalnum() for ch in word):
            if any(ch in _SYM_CHARS for ch in word):
                return "SYM"
            return "PUNCT"
        if _is_number(word):
            return "NUM"
        lower = word.lower()
        if lower in _NUM_WORDS:
            return "NUM"
        if lower in _DET:
            return "DET"
        if lower in _PRON:
            return "PRON"
        if lower in _AUX:
            return "AUX"
        if lower in _ADP:
            return "ADP"
        if lower in _CCONJ:
            return "CCONJ"
        if lower in _SCONJ:
            return "SCONJ"
        if lower in _PART:
            return "PART"
        if lower in _INTJ:
            return "INTJ"
        if lower in _ADJ_WORDS:
            return "ADJ"
        if lower in _ADV_WORDS:
            return "ADV"
        if _verb_by_inflection(lower):
            return "VERB"
        if lower.endswith("ly") and len(lower) > 3:
            return "ADV"
        if lower.endswith(_ADJ_SUFFIXES) and len(lower) > 4:
            return "ADJ"
        if word[0].isupper() and not sentence_start:
            return "PROPN"
        return "NOUN"


_TAGGERS = {"rule-en": RuleEnglishTagger}


def load_tagger(name: str) -> RuleEnglishTagger:
    """Resolve a POS tagger by name."""
    try:
        return _TAGGERS[name]()
    except KeyError:
        raise ModelError(
            f"unknown tagger {name!r}; "
            f"available: {', '.join(sorted(_TAGGERS))}") from None
