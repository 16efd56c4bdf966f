"""Nearest-neighbour spacing statistics, reference curves and form-factor estimators."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as _st

from .evolution import BondLayout, Conditions
from .graph import MetricGraph

TWO_PI = 2.0 * math.pi


# -- unfolding and spacings -----------------------------------------------------

def unfold(ks, L: float) -> np.ndarray:
    """Weyl unfolding ``x_n = (L / pi) k_n``; unit mean spacing."""
    ks = np.asarray(ks, dtype=float)
    if ks.size and np.any(np.diff(ks) < 0):
        raise ValueError("eigenvalues must be ascending")
    return (L / math.pi) * ks


@dataclass(frozen=True)
class SpacingHistogram:
    bin_edges: np.ndarray
    densities: np.ndarray
    sample_count: int

    @property
    def bin_width(self) -> np.ndarray:
        return np.diff(self.bin_edges)

    def to_csv(self) -> str:
        rows = ["bin_left,bin_right,density"]
        rows += [f"{a:.17g},{b:.17g},{d:.17g}"
                 for a, b, d in zip(self.bin_edges[:-1], self.bin_edges[1:], self.densities)]
        return "\n".join(rows) + "\n"


def spacings(xs) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    if xs.size < 2:
        raise ValueError("need at least two levels for a spacing")
    return np.diff(xs)


def nn_histogram(xs, bin_width: float = 0.1, s_max: float = 4.0) -> SpacingHistogram:
    """Normalised histogram of consecutive spacings on ``[0, s_max]``.

    Densities are normalised over the samples that fall inside the range, so
    the histogram integrates to one exactly.
    """
    s = spacings(xs)
    if not (bin_width > 0 and s_max > 0):
        raise ValueError("bin_width and s_max must be positive")
    n_bins = max(1, int(round(s_max / bin_width)))
    edges = np.linspace(0.0, s_max, n_bins + 1)
    counts, _ = np.histogram(s, bins=edges)
    inside = counts.sum()
    if inside == 0:
        raise ValueError("no spacing falls inside [0, s_max]")
    densities = counts / (inside * np.diff(edges))
    return SpacingHistogram(edges, densities, int(s.size))


# -- reference curves ------------------------------------------------------------

def wigner_goe_pdf(s):
    s = np.asarray(s, dtype=float)
    return 0.5 * math.pi * s * np.exp(-0.25 * math.pi * s * s)


def wigner_goe_cdf(s):
    s = np.maximum(np.asarray(s, dtype=float), 0.0)
    return -np.expm1(-0.25 * math.pi * s * s)


def poisson_pdf(s):
    s = np.asarray(s, dtype=float)
    return np.where(s >= 0, np.exp(-np.maximum(s, 0.0)), 0.0)


def poisson_cdf(s):
    s = np.maximum(np.asarray(s, dtype=float), 0.0)
    return -np.expm1(-s)


def goe_form_factor(tau):
    """GOE form factor; ``2 tau - tau ln(1 + 2 tau)`` below the Heisenberg time."""
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise ValueError("tau must be non-negative")
    low = 2.0 * tau - tau * np.log1p(2.0 * tau)
    with np.errstate(divide="ignore", invalid="ignore"):
        high = 2.0 - tau * np.log((2.0 * tau + 1.0) / (2.0 * tau - 1.0))
    out = np.where(tau <= 1.0, low, high)
    return out if out.ndim else float(out)


def ks_distance(samples, cdf) -> float:
    """Kolmogorov-Smirnov sup distance between the empirical CDF and ``cdf``."""
    samples = np.asarray(samples, dtype=float)
    if samples.size < 100:
        raise ValueError("need at least 100 samples for a KS distance")
    return float(_st.kstest(samples, cdf).statistic)


# -- form factors ----------------------------------------------------------------

@dataclass(frozen=True)
class FormFactorSeries:
    taus: np.ndarray
    values: np.ndarray
    estimator: str
    error_bars: np.ndarray

    def to_csv(self) -> str:
        rows = ["tau,K,stderr"]
        rows += [f"{t:.17g},{v:.17g},{e:.17g}"
                 for t, v, e in zip(self.taus, self.values, self.error_bars)]
        return "\n".join(rows) + "\n"

    def at(self, tau: float, atol: float = 1e-9):
        i = int(np.argmin(np.abs(self.taus - tau)))
        if abs(self.taus[i] - tau) > atol:
            raise KeyError(f"tau={tau} not on the grid")
        return float(self.values[i]), float(self.error_bars[i])


def _mean_and_stderr(samples, axis=0):
    samples = np.asarray(samples, dtype=float)
    m = samples.shape[axis]
    mean = samples.mean(axis=axis)
    if m < 2:
        return mean, np.zeros_like(mean)
    return mean, samples.std(axis=axis, ddof=1) / math.sqrt(m)


def sff_from_eigenvalues(xs, taus, window_size: int = 1000) -> FormFactorSeries:
    """Windowed periodogram ``|sum_n exp(2 pi i x_n tau)|^2 / N`` averaged over windows.

    Levels are split into consecutive non-overlapping windows of
    ``window_size`` levels (a trailing partial window is dropped).  Values of
    ``tau < 10 / window_size`` are discarded: there the finite-window Dirac
    comb dominates.
    """
    xs = np.asarray(xs, dtype=float)
    if window_size < 1000:
        raise ValueError("window_size must be at least 1000 levels")
    n_windows = len(xs) // window_size
    if n_windows < 1:
        raise ValueError(f"{len(xs)} levels do not fill one window of {window_size}")
    taus = np.asarray(taus, dtype=float)
    taus = np.sort(taus[taus >= 10.0 / window_size])
    per_window = np.empty((n_windows, len(taus)))
    for w in range(n_windows):
        x = xs[w * window_size:(w + 1) * window_size]
        x = x - x[0]
        for start in range(0, len(taus), 256):
            t = taus[start:start + 256]
            z = np.exp((2j * math.pi) * np.outer(t, x)).sum(axis=1)
            per_window[w, start:start + 256] = (z.real ** 2 + z.imag ** 2) / window_size
    mean, err = _mean_and_stderr(per_window)
    return FormFactorSeries(taus, mean, "eigenvalue", err)


def default_k_window(graph: MetricGraph):
    lo = 1e3
    return (lo, lo + 10.0 * TWO_PI / min(graph.lengths))


def _evolution_samples(graph, conditions, k_samples, k_window, mode, seed, batch=1024):
    """Yield batches of ``U`` drawn for the k-average.

    In asymptotic mode without an explicit window every edge phase
    ``e^{i k l_e}`` is drawn independently and uniformly on the circle (the
    ergodic limit of a long k-average for incommensurate lengths).
    """
    layout = BondLayout(graph, conditions)
    rng = np.random.default_rng(seed)
    if mode == "asymptotic" and k_window is None:
        sigma = layout.scattering_batch([1.0], "asymptotic")[0]
        phases = rng.uniform(0.0, TWO_PI, size=(k_samples, graph.edge_count))
        for start in range(0, k_samples, batch):
            p = np.repeat(np.exp(1j * phases[start:start + batch]), 2, axis=1)
            yield p[:, :, None] * sigma[None]
        return
    if k_window is None:
        k_window = default_k_window(graph)
    lo, hi = k_window
    if not 0 < lo < hi:
        raise ValueError("k_window must satisfy 0 < k_lo < k_hi")
    ks = rng.uniform(lo, hi, size=k_samples)
    for start in range(0, k_samples, batch):
        yield layout.evolution_batch(ks[start:start + batch], mode)


def sff_eigenphases(graph: MetricGraph, conditions: Conditions, n: int,
                    k_samples: int = 20000, k_window=None, mode: str = "asymptotic",
                    seed: int = 0):
    """``(1 / 2E) <|tr U(k)^n|^2>_k`` and its standard error."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    if k_samples < 1000:
        raise ValueError("need at least 1000 k-samples")
    values = []
    for U in _evolution_samples(graph, conditions, k_samples, k_window, mode, seed):
        tr = np.trace(np.linalg.matrix_power(U, n), axis1=1, axis2=2)
        values.append(tr.real ** 2 + tr.imag ** 2)
    mean, err = _mean_and_stderr(np.concatenate(values))
    B = graph.bond_count
    return float(mean) / B, float(err) / B


def sff_eigenphases_series(graph: MetricGraph, conditions: Conditions, ns=None,
                           k_samples: int = 20000, k_window=None, mode: str = "asymptotic",
                           seed: int = 0) -> FormFactorSeries:
    """Eigenphase form factor on ``tau = n / 2E``; default ``n = 1 .. 3 * 2E``."""
    B = graph.bond_count
    ns = np.arange(1, 3 * B + 1) if ns is None else np.asarray(sorted(set(ns)), dtype=int)
    if ns.size == 0 or ns[0] < 1:
        raise ValueError("powers must be positive")
    if k_samples < 1000:
        raise ValueError("need at least 1000 k-samples")
    values = []
    for U in _evolution_samples(graph, conditions, k_samples, k_window, mode, seed):
        w = np.linalg.eigvals(U)
        w = w / np.abs(w)
        tr = np.stack([np.sum(w ** n, axis=1) for n in ns], axis=1)
        values.append(tr.real ** 2 + tr.imag ** 2)
    mean, err = _mean_and_stderr(np.concatenate(values))
    return FormFactorSeries(ns / B, mean / B, "eigenphase", err / B)
