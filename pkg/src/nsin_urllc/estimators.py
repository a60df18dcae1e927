"""Estimator-style wrappers around the channel recovery algorithms.

These follow the fit/predict convention (trailing-underscore fitted
attributes, ``get_params``/``set_params``) so the estimators compose with
pipeline tooling, without pulling in scikit-learn as a dependency.
"""

from __future__ import annotations

import numpy as np

from .greedy import GreedyConfig, omp, sp
from .roamp import RoampConfig, run_roamp
from .sparse_model import MeasurementModel


class _BaseChannelEstimator:
    """Shared parameter plumbing for the channel estimators."""

    _param_names: tuple[str, ...] = ()

    def get_params(self, deep: bool = True) -> dict:
        return {name: getattr(self, name) for name in self._param_names}

    def set_params(self, **params):
        for name, value in params.items():
            if name not in self._param_names:
                raise ValueError(f"unknown parameter {name!r}")
            setattr(self, name, value)
        return self

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.get_params().items())
        return f"{type(self).__name__}({args})"

    @staticmethod
    def _check_inputs(y: np.ndarray, model: MeasurementModel) -> np.ndarray:
        y = np.asarray(y)
        if y.ndim != 1:
            raise ValueError("y must be a 1-D pilot vector")
        if len(y) != model.num_pilots:
            raise ValueError("pilot vector length does not match the measurement model")
        return y.astype(complex)


class RoampChannelEstimator(_BaseChannelEstimator):
    """Recurrent-OAMP sparse channel estimator with off-grid refinement."""

    _param_names = ("config",)

    def __init__(self, config: RoampConfig | None = None):
        self.config = config or RoampConfig()

    def fit(self, y: np.ndarray, model: MeasurementModel):
        y = self._check_inputs(y, model)
        result = run_roamp(y, model, self.config)
        self.result_ = result
        self.coefficients_ = result.x_hat
        self.offsets_ = result.refined_offsets
        self.channel_ = result.reconstructed_channel
        return self

    def predict(self) -> np.ndarray:
        """Reconstructed dense channel from the last fit."""
        if not hasattr(self, "channel_"):
            raise RuntimeError("estimator is not fitted")
        return self.channel_


class _GreedyChannelEstimator(_BaseChannelEstimator):
    _param_names = ("config",)
    _solver = None

    def __init__(self, config: GreedyConfig | None = None):
        self.config = config or GreedyConfig()

    def fit(self, y: np.ndarray, model: MeasurementModel):
        y = self._check_inputs(y, model)
        f0 = model.matrix()
        x = type(self)._solver(y, f0, self.config)
        self.coefficients_ = x
        self.channel_ = model.grid.dictionary() @ x
        return self

    def predict(self) -> np.ndarray:
        if not hasattr(self, "channel_"):
            raise RuntimeError("estimator is not fitted")
        return self.channel_


class OmpChannelEstimator(_GreedyChannelEstimator):
    """Orthogonal matching pursuit on the nominal dictionary."""

    _solver = staticmethod(omp)


class SpChannelEstimator(_GreedyChannelEstimator):
    """Subspace pursuit on the nominal dictionary."""

    _solver = staticmethod(sp)
