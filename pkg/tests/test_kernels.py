"""Numerical kernels: each backend against a plain-numpy oracle, and the
two backends against each other."""

import importlib

import numpy as np
import pytest

from wikispan.spanpred.kernels import numpy_backend

try:
    from wikispan.spanpred.kernels import _ckernels
    BACKENDS = [numpy_backend, _ckernels]
except ImportError:  # compiled extension genuinely unavailable
    _ckernels = None
    BACKENDS = [numpy_backend]

ids = [b.NAME for b in BACKENDS]


@pytest.fixture(params=BACKENDS, ids=ids)
def backend(request):
    return request.param


def _rng():
    return np.random.default_rng(99)


class TestLayerNorm:
    def test_forward_matches_direct_formula(self, backend):
        x = _rng().normal(size=(6, 8)).astype(np.float64)
        gamma = _rng().normal(size=8)
        beta = _rng().normal(size=8)
        y, mean, rstd = backend.layer_norm_fwd(x, gamma, beta)
        mu = x.mean(axis=1, keepdims=True)
        var = x.var(axis=1, keepdims=True)
        want = (x - mu) / np.sqrt(var + 1e-5) * gamma + beta
        np.testing.assert_allclose(y, want, atol=1e-12)
        np.testing.assert_allclose(mean, mu.ravel(), atol=1e-12)
        np.testing.assert_allclose(rstd, 1 / np.sqrt(var.ravel() + 1e-5),
                                   atol=1e-12)

    def test_rows_are_standardized(self, backend):
        x = _rng().normal(loc=3.0, scale=2.0, size=(4, 16))
        y, _, _ = backend.layer_norm_fwd(x, np.ones(16), np.zeros(16))
        np.testing.assert_allclose(y.mean(axis=1), 0.0, atol=1e-10)
        np.testing.assert_allclose(y.std(axis=1), 1.0, atol=1e-3)

    def test_backward_matches_finite_differences(self, backend):
        rng = _rng()
        x = rng.normal(size=(3, 5))
        gamma = rng.normal(size=5)
        beta = rng.normal(size=5)
        dy = rng.normal(size=(3, 5))
        _, mean, rstd = backend.layer_norm_fwd(x, gamma, beta)
        dx, dgamma, dbeta = backend.layer_norm_bwd(dy, x, gamma, mean, rstd)

        def loss(xv, gv, bv):
            y, _, _ = backend.layer_norm_fwd(xv, gv, bv)
            return float((y * dy).sum())

        eps = 1e-6
        for arr, grad, name in ((x, dx, "x"), (gamma, dgamma, "gamma"),
                                (beta, dbeta, "beta")):
            flat = arr.ravel()
            for idx in range(0, flat.size, max(1, flat.size // 5)):
                orig = flat[idx]
                flat[idx] = orig + eps
                hi = loss(x, gamma, beta)
                flat[idx] = orig - eps
                lo = loss(x, gamma, beta)
                flat[idx] = orig
                num = (hi - lo) / (2 * eps)
                assert grad.ravel()[idx] == pytest.approx(num, abs=1e-4), name


class TestMaskedSoftmax:
    def test_forward_matches_naive_oracle(self, backend):
        rng = _rng()
        scores = rng.normal(size=(6, 7))
        mask = (rng.random((2, 7)) > 0.3).astype(np.uint8)
        mask[:, 0] = 1  # ensure nothing is fully masked
        p = backend.masked_softmax_fwd(scores, mask, 3)
        full = np.repeat(mask, 3, axis=0).astype(bool)
        want = np.where(full, scores, -np.inf)
        want = np.exp(want - want.max(axis=1, keepdims=True))
        want = want / want.sum(axis=1, keepdims=True)
        np.testing.assert_allclose(p, want, atol=1e-12)

    def test_masked_rows_sum_to_one_over_visible_columns(self, backend):
        rng = _rng()
        scores = rng.normal(size=(4, 9))
        mask = np.array([[1, 0, 1, 0, 1, 0, 1, 0, 1]], dtype=np.uint8)
        p = backend.masked_softmax_fwd(scores, mask, 4)
        assert np.all(p[:, mask[0] == 0] == 0.0)
        np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-12)

    def test_fully_masked_group_yields_zero_rows(self, backend):
        scores = np.zeros((2, 3))
        mask = np.zeros((1, 3), dtype=np.uint8)
        p = backend.masked_softmax_fwd(scores, mask, 2)
        assert np.all(p == 0.0)

    def test_backward_is_softmax_jacobian_product(self, backend):
        rng = _rng()
        scores = rng.normal(size=(5, 6))
        mask = np.ones((5, 6), dtype=np.uint8)
        p = backend.masked_softmax_fwd(scores, mask, 1)
        dp = rng.normal(size=(5, 6))
        ds = backend.masked_softmax_bwd(dp, p)
        want = p * (dp - (dp * p).sum(axis=1, keepdims=True))
        np.testing.assert_allclose(ds, want, atol=1e-12)

    def test_shift_invariance(self, backend):
        rng = _rng()
        scores = rng.normal(size=(3, 4))
        mask = np.ones((3, 4), dtype=np.uint8)
        a = backend.masked_softmax_fwd(scores, mask, 1)
        b = backend.masked_softmax_fwd(scores + 123.0, mask, 1)
        np.testing.assert_allclose(a, b, atol=1e-12)


class TestGelu:
    # kernel contract is 2-d (rows x features), matching the encoder's use
    def test_matches_tanh_formula(self, backend):
        x = np.linspace(-4, 4, 40).reshape(8, 5)
        y = backend.gelu_fwd(x)
        c = np.sqrt(2 / np.pi)
        want = 0.5 * x * (1 + np.tanh(c * (x + 0.044715 * x ** 3)))
        np.testing.assert_allclose(y, want, atol=1e-12)

    def test_backward_matches_finite_differences(self, backend):
        x = np.linspace(-3, 3, 24).reshape(4, 6)
        dy = np.ones_like(x)
        dx = backend.gelu_bwd(dy, x)
        eps = 1e-6
        num = (backend.gelu_fwd(x + eps) - backend.gelu_fwd(x - eps)) / (2 * eps)
        np.testing.assert_allclose(dx, num, atol=1e-8)

    def test_preserves_dtype(self, backend):
        x32 = np.linspace(-1, 1, 6, dtype=np.float32).reshape(2, 3)
        assert backend.gelu_fwd(x32).dtype == np.float32
        assert backend.gelu_bwd(x32, x32).dtype == np.float32


class TestOptimizers:
    def test_adam_step_matches_reference_update(self, backend):
        rng = _rng()
        p = rng.normal(size=17)
        g = rng.normal(size=17)
        m = rng.normal(size=17) * 0.1
        v = np.abs(rng.normal(size=17)) * 0.1
        p0, g0, m0, v0 = p.copy(), g.copy(), m.copy(), v.copy()
        backend.adam_step(p, g, m, v, lr=1e-3, beta1=0.9, beta2=0.999,
                          eps=1e-8, step=7)
        m_want = 0.9 * m0 + 0.1 * g0
        v_want = 0.999 * v0 + 0.001 * g0 * g0
        mhat = m_want / (1 - 0.9 ** 7)
        vhat = v_want / (1 - 0.999 ** 7)
        p_want = p0 - 1e-3 * mhat / (np.sqrt(vhat) + 1e-8)
        np.testing.assert_allclose(p, p_want, atol=1e-12)
        np.testing.assert_allclose(m, m_want, atol=1e-12)
        np.testing.assert_allclose(v, v_want, atol=1e-12)

    def test_sgd_step(self, backend):
        p = np.array([1.0, 2.0, 3.0])
        g = np.array([0.5, -0.5, 1.0])
        backend.sgd_step(p, g, lr=0.1)
        np.testing.assert_allclose(p, [0.95, 2.05, 2.9], atol=1e-12)

    def test_updates_are_in_place(self, backend):
        p = np.zeros(4)
        view = p
        backend.sgd_step(p, np.ones(4), lr=1.0)
        assert view is p and np.all(view == -1.0)


@pytest.mark.skipif(_ckernels is None, reason="compiled backend not built")
class TestBackendParity:
    def test_all_kernels_agree_on_random_inputs(self):
        rng = np.random.default_rng(1234)
        for trial in range(20):
            rows, cols = int(rng.integers(1, 12)), int(rng.integers(1, 12))
            x = rng.normal(size=(rows, cols))
            gamma, beta = rng.normal(size=cols), rng.normal(size=cols)
            for a, b in zip(numpy_backend.layer_norm_fwd(x, gamma, beta),
                            _ckernels.layer_norm_fwd(x, gamma, beta)):
                np.testing.assert_allclose(a, b, atol=1e-12)

            dy = rng.normal(size=(rows, cols))
            _, mean, rstd = numpy_backend.layer_norm_fwd(x, gamma, beta)
            for a, b in zip(
                    numpy_backend.layer_norm_bwd(dy, x, gamma, mean, rstd),
                    _ckernels.layer_norm_bwd(dy, x, gamma, mean, rstd)):
                np.testing.assert_allclose(a, b, atol=1e-12)

            groups = int(rng.integers(1, 4))
            rpg = int(rng.integers(1, 4))
            scores = rng.normal(size=(groups * rpg, cols))
            mask = (rng.random((groups, cols)) > 0.3).astype(np.uint8)
            pn = numpy_backend.masked_softmax_fwd(scores, mask, rpg)
            pc = _ckernels.masked_softmax_fwd(scores, mask, rpg)
            np.testing.assert_allclose(pn, pc, atol=1e-12)
            dp = rng.normal(size=scores.shape)
            np.testing.assert_allclose(
                numpy_backend.masked_softmax_bwd(dp, pn),
                _ckernels.masked_softmax_bwd(dp, pc), atol=1e-12)

            np.testing.assert_allclose(numpy_backend.gelu_fwd(x),
                                       _ckernels.gelu_fwd(x), atol=1e-12)
            np.testing.assert_allclose(numpy_backend.gelu_bwd(dy, x),
                                       _ckernels.gelu_bwd(dy, x), atol=1e-12)

    def test_optimizer_parity_float32(self):
        rng = np.random.default_rng(7)
        p = rng.normal(size=40).astype(np.float32)
        g = rng.normal(size=40).astype(np.float32)
        m = np.zeros(40, dtype=np.float32)
        v = np.zeros(40, dtype=np.float32)
        pn, gn, mn, vn = (a.copy() for a in (p, g, m, v))
        pc, gc, mc, vc = (a.copy() for a in (p, g, m, v))
        for step in range(1, 6):
            numpy_backend.adam_step(pn, gn, mn, vn, lr=1e-3, beta1=0.9,
                                    beta2=0.999, eps=1e-8, step=step)
            _ckernels.adam_step(pc, gc, mc, vc, lr=1e-3, beta1=0.9,
                                beta2=0.999, eps=1e-8, step=step)
        np.testing.assert_allclose(pn, pc, atol=1e-6)
        np.testing.assert_allclose(mn, mc, atol=1e-6)
        np.testing.assert_allclose(vn, vc, atol=1e-6)


class TestBackendSelection:
    def test_env_var_forces_numpy(self, monkeypatch):
        import wikispan.spanpred.kernels as K
        monkeypatch.setenv("WIKISPAN_KERNELS", "numpy")
        mod = importlib.reload(K)
        assert mod.BACKEND == "numpy"
        monkeypatch.delenv("WIKISPAN_KERNELS")
        importlib.reload(mod)

    def test_invalid_env_value_rejected(self, monkeypatch):
        import wikispan.spanpred.kernels as K
        from wikispan.errors import ConfigError
        monkeypatch.setenv("WIKISPAN_KERNELS", "fortran")
        with pytest.raises(ConfigError):
            importlib.reload(K)
        monkeypatch.delenv("WIKISPAN_KERNELS")
        importlib.reload(K)

    def test_default_prefers_compiled_when_available(self):
        import wikispan.spanpred.kernels as K
        if _ckernels is not None:
            assert K.BACKEND == "c"
        else:
            assert K.BACKEND == "numpy"
