"""Numeric kernel backend selection.

The compiled backend is preferred when the extension module built; the
pure-numpy backend is used otherwise.  Set ``WIKISPAN_KERNELS`` to
``numpy`` or ``c`` to force a backend (``c`` raises if unavailable).
"""

from __future__ import annotations

import os

from ...errors import ConfigError
from . import numpy_backend


def _select():
    choice = os.environ.get("WIKISPAN_KERNELS", "auto").strip().lower()
    if choice not in ("auto", "c", "numpy"):
        raise ConfigError(
            f"WIKISPAN_KERNELS must be one of auto/c/numpy, got {choice!r}")
    if choice == "numpy":
        return numpy_backend
    try:
        from . import _ckernels  # type: ignore[attr-defined]
        return _ckernels
    except ImportError:
        if choice == "c":
            raise ConfigError(
                "WIKISPAN_KERNELS=c but the compiled kernel extension is not available")
        return numpy_backend


_backend = _select()

BACKEND = _backend.NAME

layer_norm_fwd = _backend.layer_norm_fwd
layer_norm_bwd = _backend.layer_norm_bwd
masked_softmax_fwd = _backend.masked_softmax_fwd
masked_softmax_bwd = _backend.masked_softmax_bwd
gelu_fwd = _backend.gelu_fwd
gelu_bwd = _backend.gelu_bwd
adam_step = _backend.adam_step
sgd_step = _backend.sgd_step

__all__ = [
    "BACKEND",
    "numpy_backend",
    "layer_norm_fwd",
    "layer_norm_bwd",
    "masked_softmax_fwd",
    "masked_softmax_bwd",
    "gelu_fwd",
    "gelu_bwd",
    "adam_step",
    "sgd_step",
]
