"""Character-level transformer encoder with hand-written backprop.

The model packs a marked source sentence and a target sentence into one
character sequence, runs a small pre-norm transformer over it, and exposes
two scalar heads producing per-position start/end logits.  Forward and
backward passes are written against the kernel backend in ``.kernels`` so
the same code runs on the compiled and the pure-numpy implementations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, DataError
from ..seeding import make_rng
from . import kernels as K
from .config import PAD_ID, SEP_ID, UNK_ID, EncoderConfig

_INIT_SCALE = 0.02


def _param_shapes(cfg: EncoderConfig) -> list[tuple[str, tuple[int, ...], str]]:
    """Canonical (name, shape, kind) list; kind in {normal, zeros, ones}."""
    d, h = cfg.embed_dim, cfg.hidden_dim
    shapes: list[tuple[str, tuple[int, ...], str]] = [
        ("tok_emb", (cfg.vocab_size, d), "normal"),
        ("pos_emb", (cfg.max_len, d), "normal"),
    ]
    for b in range(cfg.num_blocks):
        p = f"block{b}."
        shapes += [
            (p + "ln1.gamma", (d,), "ones"),
            (p + "ln1.beta", (d,), "zeros"),
            (p + "attn.wq", (d, d), "normal"),
            (p + "attn.bq", (d,), "zeros"),
            (p + "attn.wk", (d, d), "normal"),
            (p + "attn.bk", (d,), "zeros"),
            (p + "attn.wv", (d, d), "normal"),
            (p + "attn.bv", (d,), "zeros"),
            (p + "attn.wo", (d, d), "normal"),
            (p + "attn.bo", (d,), "zeros"),
            (p + "ln2.gamma", (d,), "ones"),
            (p + "ln2.beta", (d,), "zeros"),
            (p + "ffn.w1", (d, h), "normal"),
            (p + "ffn.b1", (h,), "zeros"),
            (p + "ffn.w2", (h, d), "normal"),
            (p + "ffn.b2", (d,), "zeros"),
        ]
    shapes += [
        ("final_ln.gamma", (d,), "ones"),
        ("final_ln.beta", (d,), "zeros"),
        ("start_head.w", (d,), "normal"),
        ("start_head.b", (1,), "zeros"),
        ("end_head.w", (d,), "normal"),
        ("end_head.b", (1,), "zeros"),
    ]
    return shapes


class ModelParams:
    """Named parameter tensors plus the config that shaped them."""

    def __init__(self, config: EncoderConfig, tensors: dict[str, np.ndarray]):
        self.config = config
        self.tensors = tensors
        self._char_ids: dict[str, int] | None = None

    @property
    def dtype(self) -> np.dtype:
        return self.tensors["tok_emb"].dtype

    def char_ids(self) -> dict[str, int]:
        if self._char_ids is None:
            self._char_ids = self.config.char_ids()
        return self._char_ids

    def copy(self) -> "ModelParams":
        return ModelParams(self.config, {k: v.copy() for k, v in self.tensors.items()})

    def astype(self, dtype) -> "ModelParams":
        return ModelParams(
            self.config, {k: v.astype(dtype) for k, v in self.tensors.items()})

    def num_parameters(self) -> int:
        return sum(v.size for v in self.tensors.values())

    def zeros_like(self) -> dict[str, np.ndarray]:
        return {k: np.zeros_like(v) for k, v in self.tensors.items()}


def init_params(config: EncoderConfig, dtype=np.float32) -> ModelParams:
    """Seeded initialisation: N(0, 0.02) weights, zero biases, unit LN gains."""
    rng = make_rng(config.seed, "model-init")
    tensors: dict[str, np.ndarray] = {}
    for name, shape, kind in _param_shapes(config):
        if kind == "normal":
            arr = rng.normal(0.0, _INIT_SCALE, size=shape)
        elif kind == "ones":
            arr = np.ones(shape)
        else:
            arr = np.zeros(shape)
        tensors[name] = np.ascontiguousarray(arr, dtype=dtype)
    return ModelParams(config, tensors)


def pack_ids(params: ModelParams, marked_x: str, y: str) -> tuple[np.ndarray, int]:
    """Pack [marked-X chars, SEP, Y chars] into an id sequence.

    Returns (ids int32 (L,), y_start) where the target occupies positions
    y_start .. y_start+len(y)-1.  Unknown characters map to UNK.
    """
    if not y:
        raise DataError("cannot pack an empty target text")
    total = len(marked_x) + 1 + len(y)
    if total > params.config.max_len:
        raise DataError(
            f"packed sequence length {total} exceeds max_len {params.config.max_len}")
    cmap = params.char_ids()
    ids = np.empty(total, dtype=np.int32)
    for i, ch in enumerate(marked_x):
        ids[i] = cmap.get(ch, UNK_ID)
    ids[len(marked_x)] = SEP_ID
    y_start = len(marked_x) + 1
    for i, ch in enumerate(y):
        ids[y_start + i] = cmap.get(ch, UNK_ID)
    return ids, y_start


@dataclass
class ForwardResult:
    start_logits: np.ndarray   # (B, L)
    end_logits: np.ndarray     # (B, L)
    hidden: np.ndarray         # (B, L, D) final-layer-norm output
    cache: dict | None


def forward(params: ModelParams, ids: np.ndarray, attn_mask: np.ndarray,
            want_cache: bool = False) -> ForwardResult:
    """Batched forward pass.

    ids: (B, L) int; attn_mask: (B, L) with 1 at real positions, 0 at
    padding.  Padded positions are excluded from attention as keys; their
    own outputs carry no gradient because the loss never reads them.
    """
    t = params.tensors
    cfg = params.config
    ids = np.ascontiguousarray(ids, dtype=np.int64)
    bsz, slen = ids.shape
    if slen > cfg.max_len:
        raise DataError(f"sequence length {slen} exceeds max_len {cfg.max_len}")
    if ids.min() < 0 or ids.max() >= cfg.vocab_size:
        raise DataError("token id out of range for vocabulary")
    d, nh, hd = cfg.embed_dim, cfg.num_heads, cfg.head_dim
    dtype = params.dtype
    mask = np.ascontiguousarray(attn_mask, dtype=np.uint8)
    scale = dtype.type(1.0 / math.sqrt(hd))

    x = np.ascontiguousarray(t["tok_emb"][ids] + t["pos_emb"][:slen])
    blocks: list[dict] = []
    for b in range(cfg.num_blocks):
        p = f"block{b}."
        xf1 = x.reshape(bsz * slen, d)
        a, mean1, rstd1 = K.layer_norm_fwd(xf1, t[p + "ln1.gamma"], t[p + "ln1.beta"])
        q = a @ t[p + "attn.wq"] + t[p + "attn.bq"]
        kk = a @ t[p + "attn.wk"] + t[p + "attn.bk"]
        v = a @ t[p + "attn.wv"] + t[p + "attn.bv"]
        qh = np.ascontiguousarray(q.reshape(bsz, slen, nh, hd).transpose(0, 2, 1, 3))
        kh = np.ascontiguousarray(kk.reshape(bsz, slen, nh, hd).transpose(0, 2, 1, 3))
        vh = np.ascontiguousarray(v.reshape(bsz, slen, nh, hd).transpose(0, 2, 1, 3))
        scores = np.matmul(qh, kh.transpose(0, 1, 3, 2)) * scale
        probs2 = K.masked_softmax_fwd(
            np.ascontiguousarray(scores.reshape(bsz * nh * slen, slen)),
            mask, nh * slen)
        probs = probs2.reshape(bsz, nh, slen, slen)
        ctx = np.matmul(probs, vh)
        ctxf = np.ascontiguousarray(ctx.transpose(0, 2, 1, 3)).reshape(bsz * slen, d)
        o = ctxf @ t[p + "attn.wo"] + t[p + "attn.bo"]
        x = np.ascontiguousarray(x + o.reshape(bsz, slen, d))
        xf2 = x.reshape(bsz * slen, d)
        a2, mean2, rstd2 = K.layer_norm_fwd(xf2, t[p + "ln2.gamma"], t[p + "ln2.beta"])
        h1 = np.ascontiguousarray(a2 @ t[p + "ffn.w1"] + t[p + "ffn.b1"])
        g = K.gelu_fwd(h1)
        f = g @ t[p + "ffn.w2"] + t[p + "ffn.b2"]
        x = np.ascontiguousarray(x + f.reshape(bsz, slen, d))
        if want_cache:
            blocks.append(dict(
                xf1=xf1, a=a, mean1=mean1, rstd1=rstd1, qh=qh, kh=kh, vh=vh,
                probs2=probs2, ctxf=ctxf, xf2=xf2, a2=a2, mean2=mean2,
                rstd2=rstd2, h1=h1, g=g))

    xff = x.reshape(bsz * slen, d)
    hf, meanf, rstdf = K.layer_norm_fwd(xff, t["final_ln.gamma"], t["final_ln.beta"])
    s_logits = (hf @ t["start_head.w"] + t["start_head.b"][0]).reshape(bsz, slen)
    e_logits = (hf @ t["end_head.w"] + t["end_head.b"][0]).reshape(bsz, slen)
    cache = None
    if want_cache:
        cache = dict(ids=ids, mask=mask, blocks=blocks,
                     final=(xff, hf, meanf, rstdf), shape=(bsz, slen))
    return ForwardResult(s_logits, e_logits, hf.reshape(bsz, slen, d), cache)


def _scatter_add_rows(out: np.ndarray, idx: np.ndarray, rows: np.ndarray) -> None:
    """out[idx[i]] += rows[i], deterministic and vectorised."""
    order = np.argsort(idx, kind="stable")
    sid = idx[order]
    srows = rows[order]
    starts = np.flatnonzero(np.r_[True, sid[1:] != sid[:-1]])
    sums = np.add.reduceat(srows, starts, axis=0)
    out[sid[starts]] += sums


def backward(params: ModelParams, cache: dict, dstart: np.ndarray,
             dend: np.ndarray) -> dict[str, np.ndarray]:
    """Gradients of a scalar loss given d(loss)/d(logits) for both heads."""
    t = params.tensors
    cfg = params.config
    bsz, slen = cache["shape"]
    d, nh, hd = cfg.embed_dim, cfg.num_heads, cfg.head_dim
    dtype = params.dtype
    scale = dtype.type(1.0 / math.sqrt(hd))
    grads: dict[str, np.ndarray] = {}

    ds = np.ascontiguousarray(dstart.reshape(bsz * slen), dtype=dtype)
    de = np.ascontiguousarray(dend.reshape(bsz * slen), dtype=dtype)
    xff, hf, meanf, rstdf = cache["final"]
    grads["start_head.w"] = hf.T @ ds
    grads["start_head.b"] = np.array([ds.sum()], dtype=dtype)
    grads["end_head.w"] = hf.T @ de
    grads["end_head.b"] = np.array([de.sum()], dtype=dtype)
    dhf = np.ascontiguousarray(
        np.outer(ds, t["start_head.w"]) + np.outer(de, t["end_head.w"]))
    dxf, dgam, dbet = K.layer_norm_bwd(dhf, xff, t["final_ln.gamma"], meanf, rstdf)
    grads["final_ln.gamma"] = dgam
    grads["final_ln.beta"] = dbet
    dx = dxf.reshape(bsz, slen, d)

    for b in reversed(range(cfg.num_blocks)):
        p = f"block{b}."
        c = cache["blocks"][b]
        # FFN sublayer (residual: dx flows both around and through).
        df = np.ascontiguousarray(dx.reshape(bsz * slen, d))
        grads[p + "ffn.w2"] = c["g"].T @ df
        grads[p + "ffn.b2"] = df.sum(axis=0)
        dg = np.ascontiguousarray(df @ t[p + "ffn.w2"].T)
        dh1 = K.gelu_bwd(dg, c["h1"])
        grads[p + "ffn.w1"] = c["a2"].T @ dh1
        grads[p + "ffn.b1"] = dh1.sum(axis=0)
        da2 = np.ascontiguousarray(dh1 @ t[p + "ffn.w1"].T)
        dxf2, dgam2, dbet2 = K.layer_norm_bwd(
            da2, c["xf2"], t[p + "ln2.gamma"], c["mean2"], c["rstd2"])
        grads[p + "ln2.gamma"] = dgam2
        grads[p + "ln2.beta"] = dbet2
        dx = dx + dxf2.reshape(bsz, slen, d)
        # Attention sublayer.
        do = np.ascontiguousarray(dx.reshape(bsz * slen, d))
        grads[p + "attn.wo"] = c["ctxf"].T @ do
        grads[p + "attn.bo"] = do.sum(axis=0)
        dctxf = do @ t[p + "attn.wo"].T
        dctx = np.ascontiguousarray(
            dctxf.reshape(bsz, slen, nh, hd).transpose(0, 2, 1, 3))
        probs = c["probs2"].reshape(bsz, nh, slen, slen)
        dprobs = np.matmul(dctx, c["vh"].transpose(0, 1, 3, 2))
        dvh = np.matmul(probs.transpose(0, 1, 3, 2), dctx)
        dscores = K.masked_softmax_bwd(
            np.ascontiguousarray(dprobs.reshape(bsz * nh * slen, slen)),
            c["probs2"]).reshape(bsz, nh, slen, slen) * scale
        dqh = np.matmul(dscores, c["kh"])
        dkh = np.matmul(dscores.transpose(0, 1, 3, 2), c["qh"])
        dq = np.ascontiguousarray(dqh.transpose(0, 2, 1, 3)).reshape(bsz * slen, d)
        dk = np.ascontiguousarray(dkh.transpose(0, 2, 1, 3)).reshape(bsz * slen, d)
        dv = np.ascontiguousarray(dvh.transpose(0, 2, 1, 3)).reshape(bsz * slen, d)
        a = c["a"]
        grads[p + "attn.wq"] = a.T @ dq
        grads[p + "attn.bq"] = dq.sum(axis=0)
        grads[p + "attn.wk"] = a.T @ dk
        grads[p + "attn.bk"] = dk.sum(axis=0)
        grads[p + "attn.wv"] = a.T @ dv
        grads[p + "attn.bv"] = dv.sum(axis=0)
        da = dq @ t[p + "attn.wq"].T + dk @ t[p + "attn.wk"].T + dv @ t[p + "attn.wv"].T
        dxf1, dgam1, dbet1 = K.layer_norm_bwd(
            np.ascontiguousarray(da), c["xf1"], t[p + "ln1.gamma"],
            c["mean1"], c["rstd1"])
        grads[p + "ln1.gamma"] = dgam1
        grads[p + "ln1.beta"] = dbet1
        dx = dx + dxf1.reshape(bsz, slen, d)

    dxe = dx.reshape(bsz * slen, d)
    gpos = np.zeros_like(t["pos_emb"])
    gpos[:slen] = dx.sum(axis=0)
    grads["pos_emb"] = gpos
    gtok = np.zeros_like(t["tok_emb"])
    _scatter_add_rows(gtok, cache["ids"].reshape(-1), dxe)
    grads["tok_emb"] = gtok
    return grads
