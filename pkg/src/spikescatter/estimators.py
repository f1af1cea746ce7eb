"""Scikit-learn style front ends so the pipeline composes with the wider
estimator ecosystem (``get_params`` / ``set_params``, cloning, pipelines).

``WaveletSparsifier`` and ``GaborMeasurer`` are stateless transformers;
``SpikeRecoverer`` and ``GreedySynthesizer`` are fit-shaped inverse solvers
that expose their results through trailing-underscore attributes.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .amplitudes import recover_signal
from .errors import PreconditionError
from .gabor import measurement_batch
from .synthesis import MeasurementSet, SynthesisConfig, greedy_synthesize
from .validation import (
    as_piecewise_polynomial,
    as_sparse_signal,
    check_convention,
    check_floats,
    check_positive_floats,
    check_sweep,
    check_window,
)
from .wavelets import sparsify


class WaveletSparsifier(BaseEstimator, TransformerMixin):
    """First layer as a transformer: piecewise polynomials in, Dirac trains out.

    Parameters
    ----------
    ell : dyadic scale of the wavelet (window half-width 2**ell)
    step : sampling step h
    """

    def __init__(self, ell: int = 0, step: float = 1.0 / 32.0):
        self.ell = ell
        self.step = step

    def fit(self, X=None, y=None):
        return self

    def transform(self, X):
        if isinstance(X, (list, tuple)):
            return [self._one(item) for item in X]
        return self._one(X)

    def _one(self, item):
        return sparsify(as_piecewise_polynomial(item), self.ell, self.step)


class GaborMeasurer(BaseEstimator, TransformerMixin):
    """Second layer as a feature extractor: one translation-invariant
    measurement per (scale, frequency) pair, scales outer."""

    def __init__(self, scales=(1.0,), freqs=(0.0,), p: int = 2,
                 window: str = "indicator", convention: str = "norm_power"):
        self.scales = scales
        self.freqs = freqs
        self.p = p
        self.window = window
        self.convention = convention

    def fit(self, X=None, y=None):
        return self

    def measurement_set(self, x) -> MeasurementSet:
        return measurement_batch(
            as_sparse_signal(x),
            check_positive_floats(self.scales, "scales"),
            check_floats(self.freqs, "freqs"),
            p=self.p,
            window=check_window(self.window),
            convention=check_convention(self.convention),
        )

    def transform(self, X):
        if isinstance(X, (list, tuple)):
            return np.vstack([self.measurement_set(x).values() for x in X])
        return self.measurement_set(X).values()


class SpikeRecoverer(BaseEstimator):
    """Inverse solver: fit on per-frequency norm_power sweeps, recover the
    spike train up to translation, reflection, and global sign.

    ``fit(sweeps, freqs=...)`` expects one (scale, value) sweep per
    frequency; the p-norm of the amplitudes is a required side input.
    """

    def __init__(self, p: int = 2, norm: float = 1.0, grid_step: float = 1.0,
                 rel_tol: float = 1e-6):
        self.p = p
        self.norm = norm
        self.grid_step = grid_step
        self.rel_tol = rel_tol

    def fit(self, X, y=None, freqs=None):
        if freqs is None:
            raise PreconditionError("fit needs freqs=, one frequency per sweep")
        sweeps = [check_sweep(s) for s in X]
        result = recover_signal(sweeps, freqs, self.norm, self.p,
                                self.grid_step, self.rel_tol)
        self.result_ = result
        self.signal_ = result.signal
        self.support_ = result.support
        self.ambiguous_ = result.ambiguous
        return self

    def predict(self, X=None):
        if not hasattr(self, "signal_"):
            raise PreconditionError("call fit before predict")
        return self.signal_


class GreedySynthesizer(BaseEstimator):
    """Fit-shaped synthesis: match a target MeasurementSet with a sparse
    grid signal by randomized coordinate descent."""

    def __init__(self, grid_size: int = 128, sparsity_budget: int = 4,
                 max_sweeps: int = 60, restarts: int = 8, seed: int = 0,
                 grid_step: float = 1.0, amplitude_grid=None):
        self.grid_size = grid_size
        self.sparsity_budget = sparsity_budget
        self.max_sweeps = max_sweeps
        self.restarts = restarts
        self.seed = seed
        self.grid_step = grid_step
        self.amplitude_grid = amplitude_grid

    def fit(self, X: MeasurementSet, y=None):
        config = SynthesisConfig(
            grid_size=self.grid_size,
            measurement_targets=X,
            sparsity_budget=self.sparsity_budget,
            max_sweeps=self.max_sweeps,
            amplitude_grid=self.amplitude_grid,
            restarts=self.restarts,
            seed=self.seed,
            grid_step=self.grid_step,
        )
        result = greedy_synthesize(config)
        self.result_ = result
        self.signal_ = result.signal
        self.amplitudes_ = result.amplitudes
        self.residual_ = result.residual
        self.trace_ = result.trace
        return self

    def predict(self, X=None):
        if not hasattr(self, "signal_"):
            raise PreconditionError("call fit before predict")
        return self.signal_
