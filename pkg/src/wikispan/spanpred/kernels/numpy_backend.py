"""Pure-numpy reference implementations of the numeric kernels.

All functions accept float32 or float64 arrays and return arrays of the
same dtype.  The compiled backend in ``_ckernels`` mirrors these
signatures exactly; parity between the two is enforced by tests.
"""

from __future__ import annotations

import numpy as np

NAME = "numpy"

_GELU_C = 0.7978845608028654  # sqrt(2/pi)
_GELU_A = 0.044715


def layer_norm_fwd(x, gamma, beta, eps=1e-5):
    """Row-wise layer norm.  x: (N, D).  Returns (y, mean, rstd)."""
    mean = x.mean(axis=1)
    var = np.square(x - mean[:, None]).mean(axis=1)
    rstd = 1.0 / np.sqrt(var + np.asarray(eps, dtype=x.dtype))
    y = (x - mean[:, None]) * rstd[:, None] * gamma + beta
    return y, mean.astype(x.dtype, copy=False), rstd.astype(x.dtype, copy=False)


def layer_norm_bwd(dy, x, gamma, mean, rstd):
    """Backward pass for layer_norm_fwd.  Returns (dx, dgamma, dbeta)."""
    xhat = (x - mean[:, None]) * rstd[:, None]
    dgamma = (dy * xhat).sum(axis=0)
    dbeta = dy.sum(axis=0)
    dxhat = dy * gamma
    m1 = dxhat.mean(axis=1, keepdims=True)
    m2 = (dxhat * xhat).mean(axis=1, keepdims=True)
    dx = rstd[:, None] * (dxhat - m1 - xhat * m2)
    return dx, dgamma, dbeta


def masked_softmax_fwd(scores, mask, rows_per_group=1):
    """Softmax over the last axis restricted to positions where mask == 1.

    scores: (R, C); mask: (G, C) uint8 with R == G * rows_per_group; row r
    of scores uses mask row r // rows_per_group.  Masked entries come out
    as exact zeros.  Rows whose mask is all zero yield all-zero rows.
    """
    r, c = scores.shape
    keep = np.repeat(mask.astype(bool), rows_per_group, axis=0)
    neg = np.where(keep, scores, -np.inf)
    m = neg.max(axis=1, keepdims=True)
    # Rows that are fully masked have m == -inf; exp(nan) guards below.
    safe_m = np.where(np.isfinite(m), m, 0).astype(scores.dtype, copy=False)
    e = np.exp(scores - safe_m, where=keep, out=np.zeros_like(scores))
    denom = e.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        p = np.where(denom > 0, e / denom, 0)
    return p.astype(scores.dtype, copy=False)


def masked_softmax_bwd(dp, p):
    """Backward for masked_softmax_fwd; masked entries of p are zero, so the
    returned gradient is zero there as well."""
    inner = (dp * p).sum(axis=1, keepdims=True)
    return p * (dp - inner)


def gelu_fwd(x):
    """GELU with the tanh approximation."""
    c = np.asarray(_GELU_C, dtype=x.dtype)
    a = np.asarray(_GELU_A, dtype=x.dtype)
    half = np.asarray(0.5, dtype=x.dtype)
    t = np.tanh(c * (x + a * x * x * x))
    return half * x * (1 + t)


def gelu_bwd(dy, x):
    c = np.asarray(_GELU_C, dtype=x.dtype)
    a = np.asarray(_GELU_A, dtype=x.dtype)
    half = np.asarray(0.5, dtype=x.dtype)
    three_a = np.asarray(3 * _GELU_A, dtype=x.dtype)
    u = c * (x + a * x * x * x)
    t = np.tanh(u)
    du = c * (1 + three_a * x * x)
    return dy * (half * (1 + t) + half * x * (1 - t * t) * du)


def adam_step(param, grad, m, v, lr, beta1, beta2, eps, step):
    """In-place Adam update with bias correction; step is 1-based."""
    one = param.dtype.type(1)
    b1 = param.dtype.type(beta1)
    b2 = param.dtype.type(beta2)
    m *= b1
    m += (one - b1) * grad
    v *= b2
    v += (one - b2) * grad * grad
    c1 = param.dtype.type(1.0 - beta1 ** step)
    c2 = param.dtype.type(1.0 - beta2 ** step)
    mhat = m / c1
    vhat = v / c2
    param -= param.dtype.type(lr) * mhat / (np.sqrt(vhat) + param.dtype.type(eps))


def sgd_step(param, grad, lr):
    """In-place plain SGD update."""
    param -= param.dtype.type(lr) * grad
