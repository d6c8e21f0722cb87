#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-NumPy fallback.

Runs each numeric kernel on encoder-sized inputs with both backends,
checks they agree, and prints a timing table.  Usage:

    python3 benchmarks/bench_kernels.py [--repeats N] [--rows R] [--dim D]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from wikispan.spanpred import kernels
from wikispan.spanpred.kernels import numpy_backend

try:
    from wikispan.spanpred.kernels import _ckernels
except ImportError:  # pragma: no cover - compiled module missing
    _ckernels = None


def _time(fn, args, repeats: int) -> float:
    """Median wall time over *repeats* calls, in seconds."""
    fn(*[np.copy(a) if isinstance(a, np.ndarray) else a for a in args])  # warm
    samples = []
    for _ in range(repeats):
        fresh = [np.copy(a) if isinstance(a, np.ndarray) else a for a in args]
        start = time.perf_counter()
        fn(*fresh)
        samples.append(time.perf_counter() - start)
    samples.sort()
    return samples[len(samples) // 2]


IN_PLACE = {"adam_step", "sgd_step"}


def _run_once(fn, name, case_args):
    """Call *fn* on fresh copies; return the array to compare (the return
    value, or the mutated first argument for in-place optimizer steps)."""
    fresh = [np.copy(a) if isinstance(a, np.ndarray) else a
             for a in case_args]
    result = fn(*fresh)
    if name in IN_PLACE:
        return fresh[0]
    if isinstance(result, tuple):
        return result[0]
    return result


def build_cases(rows: int, dim: int, heads: int = 4):
    rng = np.random.default_rng(0)
    f32 = np.float32
    x = rng.normal(size=(rows, dim)).astype(f32)
    gamma = rng.normal(size=dim).astype(f32) + 1.0
    beta = rng.normal(size=dim).astype(f32)
    dy = rng.normal(size=(rows, dim)).astype(f32)
    _, mean, rstd = numpy_backend.layer_norm_fwd(x, gamma, beta)

    # scores for a batch of `heads` items: each group of `rows` score rows
    # shares one key-padding mask row
    scores = rng.normal(size=(heads * rows, rows)).astype(f32)
    mask = (rng.random(size=(heads, rows)) > 0.1).astype(np.uint8)
    probs = numpy_backend.masked_softmax_fwd(scores, mask,
                                             rows_per_group=rows)
    dprobs = rng.normal(size=scores.shape).astype(f32)

    hidden = rng.normal(size=(rows, 4 * dim)).astype(f32)
    dhidden = rng.normal(size=hidden.shape).astype(f32)

    n_params = rows * dim
    param = rng.normal(size=n_params).astype(f32)
    grad = rng.normal(size=n_params).astype(f32)
    m = np.zeros(n_params, dtype=f32)
    v = np.zeros(n_params, dtype=f32)

    return [
        ("layer_norm_fwd", (x, gamma, beta)),
        ("layer_norm_bwd", (dy, x, gamma, mean, rstd)),
        ("masked_softmax_fwd", (scores, mask, rows)),
        ("masked_softmax_bwd", (dprobs, probs)),
        ("gelu_fwd", (hidden,)),
        ("gelu_bwd", (dhidden, hidden)),
        ("adam_step", (param, grad, m, v, 1e-3, 0.9, 0.999, 1e-8, 1)),
        ("sgd_step", (param, grad, 1e-3)),
    ]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=50,
                        help="timed calls per kernel (median reported)")
    parser.add_argument("--rows", type=int, default=160,
                        help="sequence length of the synthetic batch")
    parser.add_argument("--dim", type=int, default=192,
                        help="model width of the synthetic batch")
    args = parser.parse_args(argv)

    if _ckernels is None:
        print("compiled backend unavailable; nothing to compare")
        return 1

    print(f"rows={args.rows} dim={args.dim} repeats={args.repeats} "
          f"(median wall time)")
    header = f"{'kernel':<20} {'numpy':>12} {'compiled':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))

    for name, case_args in build_cases(args.rows, args.dim):
        np_fn = getattr(numpy_backend, name)
        c_fn = getattr(_ckernels, name)

        ref = _run_once(np_fn, name, case_args)
        got = _run_once(c_fn, name, case_args)
        np.testing.assert_allclose(got, ref, rtol=2e-5, atol=2e-6,
                                   err_msg=f"{name}: backends disagree")

        t_np = _time(np_fn, case_args, args.repeats)
        t_c = _time(c_fn, case_args, args.repeats)
        print(f"{name:<20} {t_np * 1e6:>10.1f}us {t_c * 1e6:>10.1f}us "
              f"{t_np / t_c:>8.2f}x")

    print(f"\nactive backend at import: {kernels.BACKEND}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
