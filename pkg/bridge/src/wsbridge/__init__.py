"""Sidecar export tool: deterministic token/paragraph embeddings, POS
tags, and subword counts in the formats the wikispan toolkit consumes."""

from .encoders import HashNgramEncoder, load_encoder
from .errors import BridgeError, DataError, ModelError
from .export import (export_paragraph_embeddings, export_pos_tags,
                     export_subword_counts, export_token_embeddings)
from .sidecar_io import InputParagraph, read_paragraphs
from .tagger import UPOS_TAGS, RuleEnglishTagger, load_tagger
from .tokenizers import Token, load_counter, word_tokens

__version__ = "0.1.0"

__all__ = [
    "BridgeError", "DataError", "ModelError",
    "HashNgramEncoder", "load_encoder",
    "RuleEnglishTagger", "UPOS_TAGS", "load_tagger",
    "Token", "word_tokens", "load_counter",
    "InputParagraph", "read_paragraphs",
    "export_token_embeddings", "export_paragraph_embeddings",
    "export_pos_tags", "export_subword_counts",
    "__version__",
]
