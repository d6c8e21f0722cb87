"""Minibatch training loop and finite-difference gradient checking."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, DataError, ValidationError
from ..seeding import make_rng
from . import kernels as K
from .config import PAD_ID, TrainConfig
from .encoder import ModelParams, backward, forward, pack_ids
from .ops import PROB_FLOOR, segment_log_softmax

_LOG_FLOOR = math.log(PROB_FLOOR)


@dataclass(frozen=True)
class TrainExample:
    """One span-prediction example: marked source text, target text and the
    0-based inclusive gold span within the target."""

    question: str
    context: str
    start: int
    end: int


def as_examples(dataset) -> list[TrainExample]:
    """Accept TrainExample objects or dataset records with question/context/
    target_span keys (the shape produced by the dataset loader)."""
    out = []
    for rec in dataset:
        if isinstance(rec, TrainExample):
            ex = rec
        else:
            k, l = rec["target_span"]
            ex = TrainExample(rec["question"], rec["context"], int(k), int(l))
        if not (0 <= ex.start <= ex.end < len(ex.context)):
            raise ValidationError(
                f"gold span ({ex.start}, {ex.end}) out of bounds for context "
                f"of length {len(ex.context)}")
        out.append(ex)
    return out


@dataclass
class _Prepared:
    ids: np.ndarray
    y_start: int
    gold_start: int   # absolute position in the packed sequence
    gold_end: int


def _prepare(params: ModelParams, examples: list[TrainExample]):
    prepared: list[_Prepared] = []
    skipped = 0
    for ex in examples:
        try:
            ids, y_start = pack_ids(params, ex.question, ex.context)
        except DataError as err:
            if "exceeds max_len" in str(err):
                skipped += 1
                continue
            raise
        prepared.append(_Prepared(
            ids, y_start, y_start + ex.start, y_start + ex.end))
    return prepared, skipped


def _batch_arrays(prepared: list[_Prepared], idxs):
    rows = [prepared[i] for i in idxs]
    bsz = len(rows)
    lmax = max(r.ids.size for r in rows)
    ids = np.full((bsz, lmax), PAD_ID, dtype=np.int32)
    attn = np.zeros((bsz, lmax), dtype=np.uint8)
    ymask = np.zeros((bsz, lmax), dtype=np.uint8)
    gold_s = np.empty(bsz, dtype=np.int64)
    gold_e = np.empty(bsz, dtype=np.int64)
    for r, row in enumerate(rows):
        n = row.ids.size
        ids[r, :n] = row.ids
        attn[r, :n] = 1
        ymask[r, row.y_start:n] = 1
        gold_s[r] = row.gold_start
        gold_e[r] = row.gold_end
    return ids, attn, ymask, gold_s, gold_e


def _loss_and_head_grads(fwd, ymask, gold_s, gold_e, clamp: bool, step: int):
    """Mean loss (float64) plus d(loss)/d(logits) for both heads."""
    bsz = ymask.shape[0]
    rows = np.arange(bsz)
    ls_s = segment_log_softmax(fwd.start_logits, ymask)
    ls_e = segment_log_softmax(fwd.end_logits, ymask)
    gold_ls = ls_s[rows, gold_s]
    gold_le = ls_e[rows, gold_e]
    if clamp:
        gold_ls = np.maximum(gold_ls, _LOG_FLOOR)
        gold_le = np.maximum(gold_le, _LOG_FLOOR)
    loss = float(-(gold_ls + gold_le).mean())
    if not math.isfinite(loss):
        raise DataError(f"non-finite loss at step {step}")
    p_s = np.exp(ls_s)
    p_e = np.exp(ls_e)
    p_s[rows, gold_s] -= 1.0
    p_e[rows, gold_e] -= 1.0
    inv = 1.0 / bsz
    return loss, p_s * inv, p_e * inv


def loss_and_grads(params: ModelParams, example: TrainExample, clamp: bool = False):
    """Loss and full parameter gradients for a single example."""
    prepared, skipped = _prepare(params, [example])
    if skipped:
        raise DataError("example exceeds the model's max_len")
    ids, attn, ymask, gold_s, gold_e = _batch_arrays(prepared, [0])
    fwd = forward(params, ids, attn, want_cache=True)
    loss, d_s, d_e = _loss_and_head_grads(fwd, ymask, gold_s, gold_e, clamp, 0)
    grads = backward(params, fwd.cache, d_s.astype(params.dtype),
                     d_e.astype(params.dtype))
    return loss, grads


@dataclass
class TrainResult:
    params: ModelParams
    loss_curve: list[float]
    steps: int
    skipped_overlength: int


def _lr_at(cfg: TrainConfig, step: int) -> float:
    """Linear warmup to the configured rate, constant afterwards; 1-based."""
    if cfg.warmup_steps > 0 and step <= cfg.warmup_steps:
        return cfg.learning_rate * step / cfg.warmup_steps
    return cfg.learning_rate


def train(params: ModelParams, dataset, cfg: TrainConfig,
          progress=None) -> TrainResult:
    """Run the minibatch loop; updates ``params`` in place and returns it.

    ``dataset`` is a list of TrainExample or dataset records.  Examples
    longer than the model's max_len are skipped and counted.  Batch order
    is drawn from the training seed, so runs are reproducible.
    """
    examples = as_examples(dataset)
    if not examples:
        raise DataError("training dataset is empty")
    prepared, skipped = _prepare(params, examples)
    if not prepared:
        raise DataError(
            f"no trainable examples: all {skipped} exceed max_len "
            f"{params.config.max_len}")

    rng = make_rng(cfg.seed, "train-order")
    n = len(prepared)

    def index_stream():
        while True:
            for i in rng.permutation(n):
                yield int(i)

    stream = index_stream()
    use_adam = cfg.optimizer == "adam"
    if use_adam:
        m_state = params.zeros_like()
        v_state = params.zeros_like()

    loss_curve: list[float] = []
    for step in range(1, cfg.total_steps + 1):
        idxs = [next(stream) for _ in range(min(cfg.batch_size, n))]
        ids, attn, ymask, gold_s, gold_e = _batch_arrays(prepared, idxs)
        fwd = forward(params, ids, attn, want_cache=True)
        loss, d_s, d_e = _loss_and_head_grads(
            fwd, ymask, gold_s, gold_e, cfg.clamp_log_prob, step)
        grads = backward(params, fwd.cache, d_s.astype(params.dtype),
                         d_e.astype(params.dtype))
        lr = _lr_at(cfg, step)
        for name, tensor in params.tensors.items():
            g = grads[name].reshape(-1)
            p = tensor.reshape(-1)
            if use_adam:
                K.adam_step(p, g, m_state[name].reshape(-1),
                            v_state[name].reshape(-1), lr, cfg.adam_beta1,
                            cfg.adam_beta2, cfg.adam_eps, step)
            else:
                K.sgd_step(p, g, lr)
        loss_curve.append(loss)
        if progress is not None:
            progress(step, loss)
    return TrainResult(params, loss_curve, cfg.total_steps, skipped)


def grad_check(params: ModelParams, example: TrainExample, n_coords: int = 200,
               epsilon: float = 1e-5, seed: int = 0) -> dict:
    """Compare backprop against central finite differences in float64.

    Samples ``n_coords`` parameter coordinates (seeded, so repeated runs
    produce identical reports) and reports relative errors.  The relative
    error denominator is floored at 1e-5 to keep finite-difference noise
    on near-zero coordinates from dominating.
    """
    if n_coords <= 0:
        raise ConfigError("n_coords must be positive")
    p64 = params.astype(np.float64)
    loss0, grads = loss_and_grads(p64, example)

    names = list(p64.tensors)
    sizes = np.array([p64.tensors[k].size for k in names])
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    total = int(offsets[-1])
    rng = make_rng(seed, "grad-check")
    count = min(n_coords, total)
    coords = np.sort(rng.choice(total, size=count, replace=False))

    def loss_at() -> float:
        loss, _ = loss_and_grads(p64, example)
        return loss

    rel_errs = np.empty(count)
    worst = {"tensor": None, "index": None, "analytic": 0.0, "numeric": 0.0}
    for pos, flat in enumerate(coords):
        t_idx = int(np.searchsorted(offsets, flat, side="right") - 1)
        name = names[t_idx]
        local = int(flat - offsets[t_idx])
        tensor = p64.tensors[name].reshape(-1)
        orig = tensor[local]
        tensor[local] = orig + epsilon
        loss_plus = loss_at()
        tensor[local] = orig - epsilon
        loss_minus = loss_at()
        tensor[local] = orig
        numeric = (loss_plus - loss_minus) / (2 * epsilon)
        analytic = float(grads[name].reshape(-1)[local])
        rel = abs(analytic - numeric) / max(1e-5, abs(analytic) + abs(numeric))
        rel_errs[pos] = rel
        if pos == 0 or rel > rel_errs[:pos].max():
            worst = {"tensor": name, "index": local,
                     "analytic": analytic, "numeric": float(numeric)}
    return {
        "backend": K.BACKEND,
        "loss": loss0,
        "coords_checked": count,
        "max_rel_err": float(rel_errs.max()),
        "mean_rel_err": float(rel_errs.mean()),
        "worst": worst,
    }
