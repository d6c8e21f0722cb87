"""Exception hierarchy for the sidecar export tool."""


class BridgeError(Exception):
    """Base class for all errors raised by this package."""


class ModelError(BridgeError):
    """An encoder, tagger, or tokenizer name could not be resolved."""


class DataError(BridgeError):
    """An input file is malformed or violates an invariant."""
