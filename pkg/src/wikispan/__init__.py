"""Weak-supervision word alignment toolkit.

Mines co-mention paragraph pairs from linked encyclopedia dumps,
auto-annotates partial word alignments, trains a character-level span
predictor on them, and aligns/evaluates at the word level.
"""

from .errors import (ConfigError, DataError, ParseError, ValidationError,
                     WikispanError)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "WikispanError",
    "ConfigError",
    "DataError",
    "ParseError",
    "ValidationError",
]
