"""Greedy sparse-recovery baseline tests."""

import numpy as np
import pytest

from nsin_urllc.estimators import OmpChannelEstimator, RoampChannelEstimator, SpChannelEstimator
from nsin_urllc.greedy import GreedyConfig, omp, sp
from nsin_urllc.sparse_model import build_grid, build_measurement


def _well_separated_instance(seed, n=128, p=48, k=8):
    rng = np.random.default_rng(seed)
    grid = build_grid(n)
    model = build_measurement(grid, None, None, p, rng)
    support = np.sort(rng.permutation(np.arange(0, n, n // k))[:k])
    x = np.zeros(n, complex)
    x[support] = rng.standard_normal(k) + 1j * rng.standard_normal(k)
    y = model.matrix() @ x
    return model, x, y, set(support.tolist())


class TestOmp:
    def test_noiseless_one_sparse_orthogonal(self):
        f = np.eye(8, dtype=complex)
        y = np.zeros(8, complex)
        y[3] = 2.0 - 1j
        x = omp(y, f, GreedyConfig(target_sparsity=1))
        assert np.allclose(x, y)

    def test_noiseless_well_separated_support(self):
        model, x_true, y, support = _well_separated_instance(0)
        x = omp(y, model.matrix(), GreedyConfig(target_sparsity=8))
        assert set(np.flatnonzero(np.abs(x) > 1e-8).tolist()) == support
        assert np.allclose(x, x_true, atol=1e-8)

    def test_zero_input_returns_zero(self):
        f = np.eye(4, dtype=complex)
        assert np.count_nonzero(omp(np.zeros(4, complex), f, GreedyConfig(target_sparsity=2))) == 0

    def test_sparsity_bound(self):
        rng = np.random.default_rng(1)
        f = rng.standard_normal((10, 30)) + 1j * rng.standard_normal((10, 30))
        y = rng.standard_normal(10) + 1j * rng.standard_normal(10)
        x = omp(y, f, GreedyConfig(target_sparsity=5))
        assert np.count_nonzero(x) <= 5

    def test_too_few_columns_rejected(self):
        with pytest.raises(ValueError):
            omp(np.zeros(4, complex), np.eye(4, 3, dtype=complex), GreedyConfig(target_sparsity=4))


class TestSp:
    def test_noiseless_one_sparse(self):
        f = np.eye(8, dtype=complex)
        y = np.zeros(8, complex)
        y[5] = 1.0 + 1j
        x = sp(y, f, GreedyConfig(target_sparsity=1))
        assert np.allclose(x, y)

    def test_head_to_head_with_omp(self):
        model, _, y, _ = _well_separated_instance(0)
        f = model.matrix()
        cfg = GreedyConfig(target_sparsity=8)
        r_sp = np.linalg.norm(y - f @ sp(y, f, cfg))
        r_omp = np.linalg.norm(y - f @ omp(y, f, cfg))
        assert r_sp <= r_omp + 1e-10

    def test_zero_iterations_gives_correlation_support(self):
        model, _, y, _ = _well_separated_instance(2)
        f = model.matrix()
        cfg = GreedyConfig(target_sparsity=8, max_iterations=0)
        x = sp(y, f, cfg)
        norms = np.linalg.norm(f, axis=0)
        corr = np.abs(f.conj().T @ y) / norms
        expected = set(np.argsort(corr)[::-1][:8].tolist())
        assert set(np.flatnonzero(np.abs(x) > 1e-12).tolist()) <= expected

    def test_sparsity_bound(self):
        rng = np.random.default_rng(3)
        f = rng.standard_normal((12, 40)) + 1j * rng.standard_normal((12, 40))
        y = rng.standard_normal(12) + 1j * rng.standard_normal(12)
        assert np.count_nonzero(sp(y, f, GreedyConfig(target_sparsity=6))) <= 6


class TestEstimatorWrappers:
    def test_fit_predict_roundtrip(self):
        model, x_true, y, _ = _well_separated_instance(4)
        truth = model.grid.dictionary() @ x_true
        for est in (OmpChannelEstimator(), SpChannelEstimator()):
            est.set_params(config=GreedyConfig(target_sparsity=8))
            est.fit(y, model)
            assert np.linalg.norm(est.predict() - truth) < 1e-6 * np.linalg.norm(truth)

    def test_roamp_wrapper(self):
        model, x_true, y, _ = _well_separated_instance(5)
        model = model.with_noise_variance(1e-12)
        truth = model.grid.dictionary() @ x_true
        est = RoampChannelEstimator().fit(y, model)
        assert np.linalg.norm(est.predict() - truth) < 1e-3 * np.linalg.norm(truth)

    def test_get_set_params(self):
        est = OmpChannelEstimator()
        cfg = GreedyConfig(target_sparsity=3)
        assert est.set_params(config=cfg).get_params()["config"] is cfg
        with pytest.raises(ValueError):
            est.set_params(bogus=1)

    def test_unfitted_predict_raises(self):
        with pytest.raises(RuntimeError):
            OmpChannelEstimator().predict()

    def test_input_validation(self):
        model, _, y, _ = _well_separated_instance(6)
        with pytest.raises(ValueError):
            OmpChannelEstimator().fit(y[:10], model)
