import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from qgspec.estimators import (EigenphaseFormFactor, EigenvalueFormFactor, SpacingDistribution,
                               SpectrumSolver, Unfolder, make_conditions)
from qgspec.graph import build_interval


def test_params_round_trip():
    est = SpectrumSolver(variant="distorted", mu=0.5, k_max=20.0)
    params = est.get_params()
    assert params["variant"] == "distorted" and params["mu"] == 0.5
    twin = clone(est)
    assert twin.get_params() == params
    twin.set_params(grid_factor=40.0)
    assert twin.grid_factor == 40.0 and est.grid_factor == 20.0


def test_spectrum_solver_interval():
    est = SpectrumSolver(variant="neumann", k_min=0.5, k_max=20.0).fit(build_interval(1.0))
    assert np.allclose(est.ks_, math.pi * np.arange(1, 7), atol=1e-9)
    assert est.weyl_residual_ <= 2.0
    assert est.total_length_ == 1.0


def test_unfolder():
    ks = np.sort(np.random.default_rng(0).uniform(0, 100, 500))
    u = Unfolder(total_length=2.0).fit(ks)
    xs = u.transform(ks)
    assert np.allclose(xs, 2.0 * ks / math.pi)
    assert np.allclose(u.inverse_transform(xs), ks)
    est = Unfolder().fit(ks)
    assert np.mean(np.diff(est.transform(ks))) == pytest.approx(1.0)
    assert np.allclose(Unfolder(2.0).fit_transform(ks.reshape(-1, 1)), xs)
    with pytest.raises(NotFittedError):
        Unfolder().transform(ks)
    with pytest.raises(ValueError):
        Unfolder().fit(ks[::-1]).transform(ks[::-1])


def test_spacing_distribution_poisson():
    xs = np.cumsum(np.random.default_rng(1).exponential(size=5000))
    est = SpacingDistribution().fit(xs)
    assert est.closer_to() == "poisson"
    assert est.ks_poisson_ < 0.03
    h = est.histogram_
    assert np.sum(h.densities * h.bin_width) == pytest.approx(1.0)
    with pytest.raises(NotFittedError):
        SpacingDistribution().closer_to()


def test_spacing_distribution_goe_like():
    # levels with Wigner-distributed spacings
    s = np.sqrt(-4.0 / math.pi * np.log(np.random.default_rng(2).uniform(size=5000)))
    est = SpacingDistribution().fit(np.cumsum(s))
    assert est.closer_to() == "goe"


def test_eigenvalue_form_factor_predict():
    xs = np.cumsum(np.random.default_rng(3).exponential(size=4000))
    est = EigenvalueFormFactor(taus=np.arange(0.05, 2.0, 0.05)).fit(xs)
    assert est.series_.taus[0] >= 0.01
    assert np.mean(est.predict([0.5, 1.0, 1.5])) == pytest.approx(1.0, abs=0.3)
    with pytest.raises(NotFittedError):
        EigenvalueFormFactor().predict([0.5])


def test_eigenphase_form_factor():
    from qgspec.graph import build_octahedron, LengthSampler, sample_lengths
    g = sample_lengths(build_octahedron(), LengthSampler(0, 1.0, 2.0))
    est = EigenphaseFormFactor(ns=[12], k_samples=4000).fit(g)
    value, err = est.value_at(12)
    assert 0.8 < value < 1.1 and err > 0
    with pytest.raises(NotFittedError):
        EigenphaseFormFactor().value_at(1)


def test_make_conditions():
    spec = make_conditions("distorted", mu=1, asymptotic=True)
    assert spec.variant == "distorted" and spec.mu == 1.0 and spec.asymptotic
