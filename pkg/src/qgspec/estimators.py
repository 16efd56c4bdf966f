"""scikit-learn style wrappers around the spectral pipelines."""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import check_is_fitted

from . import stats
from .scattering import VertexConditionSpec
from .solver import solve_spectrum


def make_conditions(variant="preferred", mu=0.0, asymptotic=False, matrix=None):
    return VertexConditionSpec(variant, float(mu), matrix, bool(asymptotic))


def _as_levels(X):
    X = np.asarray(X, dtype=float)
    if X.ndim == 2 and 1 in X.shape:
        X = X.ravel()
    if X.ndim != 1:
        raise ValueError("expected a one-dimensional sequence of levels")
    return X


class SpectrumSolver(BaseEstimator):
    """Eigenvalues of a metric graph; ``fit(graph)`` stores ``spectrum_``."""

    def __init__(self, variant="preferred", mu=0.0, k_min=0.5, k_max=None, n_levels=None,
                 grid_factor=20.0, refine_tol=1e-10, mode="exact", n_jobs=1):
        self.variant = variant
        self.mu = mu
        self.k_min = k_min
        self.k_max = k_max
        self.n_levels = n_levels
        self.grid_factor = grid_factor
        self.refine_tol = refine_tol
        self.mode = mode
        self.n_jobs = n_jobs

    def fit(self, graph, y=None):
        spec = make_conditions(self.variant, self.mu)
        self.spectrum_ = solve_spectrum(graph, spec, self.k_min, self.k_max, self.grid_factor,
                                        self.refine_tol, self.mode, self.n_levels,
                                        n_jobs=self.n_jobs)
        self.ks_ = self.spectrum_.ks
        self.weyl_residual_ = self.spectrum_.weyl_residual
        self.total_length_ = graph.total_length
        return self


class Unfolder(TransformerMixin, BaseEstimator):
    """Weyl unfolding ``x = L k / pi``.

    With ``total_length=None`` the length is estimated from the mean level
    density of the training levels.
    """

    def __init__(self, total_length=None):
        self.total_length = total_length

    def fit(self, X, y=None):
        ks = _as_levels(X)
        if self.total_length is not None:
            self.total_length_ = float(self.total_length)
        else:
            if ks.size < 2:
                raise ValueError("need at least two levels to estimate the density")
            self.total_length_ = math.pi * (ks.size - 1) / (ks[-1] - ks[0])
        return self

    def transform(self, X):
        check_is_fitted(self, "total_length_")
        return stats.unfold(_as_levels(X), self.total_length_)

    def inverse_transform(self, X):
        check_is_fitted(self, "total_length_")
        return _as_levels(X) * math.pi / self.total_length_


class SpacingDistribution(BaseEstimator):
    """Spacing histogram plus KS distances to the GOE and Poisson references."""

    def __init__(self, bin_width=0.1, s_max=4.0):
        self.bin_width = bin_width
        self.s_max = s_max

    def fit(self, X, y=None):
        xs = _as_levels(X)
        self.histogram_ = stats.nn_histogram(xs, self.bin_width, self.s_max)
        s = stats.spacings(xs)
        self.ks_goe_ = stats.ks_distance(s, stats.wigner_goe_cdf)
        self.ks_poisson_ = stats.ks_distance(s, stats.poisson_cdf)
        return self

    def closer_to(self):
        check_is_fitted(self, "ks_goe_")
        return "goe" if self.ks_goe_ < self.ks_poisson_ else "poisson"


class EigenvalueFormFactor(BaseEstimator):
    def __init__(self, taus=None, window_size=1000):
        self.taus = taus
        self.window_size = window_size

    def fit(self, X, y=None):
        xs = _as_levels(X)
        taus = np.arange(0.01, 3.0 + 1e-9, 0.01) if self.taus is None else self.taus
        self.series_ = stats.sff_from_eigenvalues(xs, taus, self.window_size)
        return self

    def predict(self, taus):
        check_is_fitted(self, "series_")
        return np.interp(taus, self.series_.taus, self.series_.values)


class EigenphaseFormFactor(BaseEstimator):
    """``K_U(tau)`` on ``tau = n / 2E`` from k-averaged traces of ``U(k)^n``."""

    def __init__(self, variant="preferred", mu=0.0, ns=None, k_samples=20000, k_window=None,
                 mode="asymptotic", seed=0):
        self.variant = variant
        self.mu = mu
        self.ns = ns
        self.k_samples = k_samples
        self.k_window = k_window
        self.mode = mode
        self.seed = seed

    def fit(self, graph, y=None):
        spec = make_conditions(self.variant, self.mu)
        self.series_ = stats.sff_eigenphases_series(graph, spec, self.ns, self.k_samples,
                                                    self.k_window, self.mode, self.seed)
        self.bond_count_ = graph.bond_count
        return self

    def value_at(self, n):
        if not hasattr(self, "series_"):
            raise NotFittedError("EigenphaseFormFactor is not fitted yet")
        return self.series_.at(n / self.bond_count_)
