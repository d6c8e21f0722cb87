# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled numeric kernels.

Signature-compatible with ``numpy_backend``; accumulations run in double
precision internally, results are cast back to the input dtype.
"""

import numpy as np

from libc.math cimport exp, tanh, sqrt

NAME = "c"

ctypedef fused floating:
    float
    double

cdef double _GELU_C = 0.7978845608028654
cdef double _GELU_A = 0.044715


cdef inline object _dtype_of(floating[:, ::1] x):
    if floating is float:
        return np.float32
    return np.float64


def layer_norm_fwd(floating[:, ::1] x, floating[::1] gamma, floating[::1] beta,
                   double eps=1e-5):
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1]
    dtype = np.float32 if floating is float else np.float64
    y_arr = np.empty((n, d), dtype=dtype)
    mean_arr = np.empty(n, dtype=dtype)
    rstd_arr = np.empty(n, dtype=dtype)
    cdef floating[:, ::1] y = y_arr
    cdef floating[::1] mean = mean_arr
    cdef floating[::1] rstd = rstd_arr
    cdef Py_ssize_t i, j
    cdef double acc, mu, var, rs, diff
    for i in range(n):
        acc = 0
        for j in range(d):
            acc += x[i, j]
        mu = acc / d
        var = 0
        for j in range(d):
            diff = x[i, j] - mu
            var += diff * diff
        var /= d
        rs = 1.0 / sqrt(var + eps)
        mean[i] = <floating> mu
        rstd[i] = <floating> rs
        for j in range(d):
            y[i, j] = <floating> (((x[i, j] - mu) * rs) * gamma[j] + beta[j])
    return y_arr, mean_arr, rstd_arr


def layer_norm_bwd(floating[:, ::1] dy, floating[:, ::1] x, floating[::1] gamma,
                   floating[::1] mean, floating[::1] rstd):
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1]
    dtype = np.float32 if floating is float else np.float64
    dx_arr = np.empty((n, d), dtype=dtype)
    dgamma_arr = np.zeros(d, dtype=dtype)
    dbeta_arr = np.zeros(d, dtype=dtype)
    cdef floating[:, ::1] dx = dx_arr
    cdef floating[::1] dgamma = dgamma_arr
    cdef floating[::1] dbeta = dbeta_arr
    cdef Py_ssize_t i, j
    cdef double m1, m2, xhat, dxhat, mu, rs
    for i in range(n):
        mu = mean[i]
        rs = rstd[i]
        m1 = 0
        m2 = 0
        for j in range(d):
            xhat = (x[i, j] - mu) * rs
            dxhat = dy[i, j] * gamma[j]
            m1 += dxhat
            m2 += dxhat * xhat
            dgamma[j] += <floating> (dy[i, j] * xhat)
            dbeta[j] += dy[i, j]
        m1 /= d
        m2 /= d
        for j in range(d):
            xhat = (x[i, j] - mu) * rs
            dxhat = dy[i, j] * gamma[j]
            dx[i, j] = <floating> (rs * (dxhat - m1 - xhat * m2))
    return dx_arr, dgamma_arr, dbeta_arr


def masked_softmax_fwd(floating[:, ::1] scores, const unsigned char[:, ::1] mask,
                       Py_ssize_t rows_per_group=1):
    cdef Py_ssize_t r = scores.shape[0], c = scores.shape[1]
    dtype = np.float32 if floating is float else np.float64
    p_arr = np.zeros((r, c), dtype=dtype)
    cdef floating[:, ::1] p = p_arr
    cdef Py_ssize_t i, j, g
    cdef double best, denom, e
    cdef bint any_keep
    for i in range(r):
        g = i // rows_per_group
        any_keep = False
        best = 0
        for j in range(c):
            if mask[g, j]:
                if not any_keep or scores[i, j] > best:
                    best = scores[i, j]
                any_keep = True
        if not any_keep:
            continue
        denom = 0
        for j in range(c):
            if mask[g, j]:
                e = exp(scores[i, j] - best)
                p[i, j] = <floating> e
                denom += e
        for j in range(c):
            if mask[g, j]:
                p[i, j] = <floating> (p[i, j] / denom)
    return p_arr


def masked_softmax_bwd(floating[:, ::1] dp, floating[:, ::1] p):
    cdef Py_ssize_t r = p.shape[0], c = p.shape[1]
    dtype = np.float32 if floating is float else np.float64
    ds_arr = np.empty((r, c), dtype=dtype)
    cdef floating[:, ::1] ds = ds_arr
    cdef Py_ssize_t i, j
    cdef double inner
    for i in range(r):
        inner = 0
        for j in range(c):
            inner += dp[i, j] * p[i, j]
        for j in range(c):
            ds[i, j] = <floating> (p[i, j] * (dp[i, j] - inner))
    return ds_arr


def gelu_fwd(floating[:, ::1] x):
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1]
    dtype = np.float32 if floating is float else np.float64
    y_arr = np.empty((n, d), dtype=dtype)
    cdef floating[:, ::1] y = y_arr
    cdef Py_ssize_t i, j
    cdef double v, t
    for i in range(n):
        for j in range(d):
            v = x[i, j]
            t = tanh(_GELU_C * (v + _GELU_A * v * v * v))
            y[i, j] = <floating> (0.5 * v * (1 + t))
    return y_arr


def gelu_bwd(floating[:, ::1] dy, floating[:, ::1] x):
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1]
    dtype = np.float32 if floating is float else np.float64
    dx_arr = np.empty((n, d), dtype=dtype)
    cdef floating[:, ::1] dx = dx_arr
    cdef Py_ssize_t i, j
    cdef double v, t, du
    for i in range(n):
        for j in range(d):
            v = x[i, j]
            t = tanh(_GELU_C * (v + _GELU_A * v * v * v))
            du = _GELU_C * (1 + 3 * _GELU_A * v * v)
            dx[i, j] = <floating> (dy[i, j] * (0.5 * (1 + t) + 0.5 * v * (1 - t * t) * du))
    return dx_arr


def adam_step(floating[::1] param, floating[::1] grad, floating[::1] m,
              floating[::1] v, double lr, double beta1, double beta2,
              double eps, long step):
    cdef Py_ssize_t n = param.shape[0]
    cdef Py_ssize_t i
    cdef double c1 = 1.0 - beta1 ** step
    cdef double c2 = 1.0 - beta2 ** step
    cdef double mi, vi
    for i in range(n):
        mi = beta1 * m[i] + (1.0 - beta1) * grad[i]
        vi = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i]
        m[i] = <floating> mi
        v[i] = <floating> vi
        param[i] = <floating> (param[i] - lr * (mi / c1) / (sqrt(vi / c2) + eps))


def sgd_step(floating[::1] param, floating[::1] grad, double lr):
    cdef Py_ssize_t n = param.shape[0]
    cdef Py_ssize_t i
    for i in range(n):
        param[i] = <floating> (param[i] - lr * grad[i])
