"""Character-level span predictor: model, training, checkpoints."""

from .checkpoint import load_checkpoint, save_checkpoint
from .config import EncoderConfig, TrainConfig
from .encoder import ModelParams, ForwardResult, forward, backward, init_params, pack_ids
from .ops import (SpanDistribution, best_span, distributions_from_logits,
                  encode, span_distributions, span_loss, span_score)
from .train import TrainExample, TrainResult, as_examples, grad_check, loss_and_grads, train

__all__ = [
    "EncoderConfig",
    "TrainConfig",
    "ModelParams",
    "ForwardResult",
    "forward",
    "backward",
    "init_params",
    "pack_ids",
    "SpanDistribution",
    "distributions_from_logits",
    "span_distributions",
    "span_score",
    "span_loss",
    "best_span",
    "encode",
    "TrainExample",
    "TrainResult",
    "as_examples",
    "train",
    "grad_check",
    "loss_and_grads",
    "save_checkpoint",
    "load_checkpoint",
    "TrainResult",
]
