"""Eigenvalue roots of ``det(I - U(k)) = 0``.

The solver relies on an exact spectral counting function.  With eigenphases
``theta_j(k)`` of ``U(k)`` reduced to ``[0, 2 pi)`` and ``Theta(k)`` the
continuous branch of ``arg det U(k)`` (known in closed form), the quantity

    N(k) = (Theta(k) - sum_j theta_j(k)) / 2 pi

is integer valued and jumps by one each time an eigenphase crosses zero.
Roots are bracketed on a uniform grid, close pairs are separated by bisection
on ``N`` and each isolated root is polished with Brent's method on the real
secular function ``Z(k) = Re(e^{-i Theta / 2} det(I - U(k)))``.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import WeylCheckError
from .evolution import BondLayout, Conditions
from .graph import MetricGraph

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
_CAYLEY_LIMIT = 1e6
_BATCH = 512


@dataclass(frozen=True)
class Spectrum:
    ks: np.ndarray
    window: tuple
    weyl_residual: float
    tolerance: float
    total_length: float
    grid_factor: float = 20.0

    def __len__(self):
        return len(self.ks)

    def to_csv(self) -> str:
        return "k\n" + "".join(f"{k:.17g}\n" for k in self.ks)

    def write_csv(self, path):
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv())


def read_spectrum_csv(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "k":
            raise ValueError(f"expected header 'k', got {header!r}")
        return np.array([float(line) for line in fh if line.strip()])


def _phase_sums(U: np.ndarray) -> np.ndarray:
    """Sum of eigenphases in ``[0, 2 pi)`` for a stack of unitaries.

    Uses the Cayley transform ``H = i (I - U)(I + U)^{-1}`` (Hermitian, with
    eigenvalues ``tan(theta / 2)``); matrices with an eigenvalue too close to
    -1 fall back to a general eigenvalue solve.
    """
    m, B, _ = U.shape
    eye = np.eye(B)
    out = np.empty(m)
    bad = np.zeros(m, dtype=bool)
    try:
        H = 1j * np.linalg.solve(eye + U, eye - U)
        H = 0.5 * (H + np.conj(np.swapaxes(H, 1, 2)))
        finite = np.all(np.isfinite(H), axis=(1, 2))
        H[~finite] = 0.0
        h = np.linalg.eigvalsh(H)
        bad = ~finite | (np.max(np.abs(h), axis=1) > _CAYLEY_LIMIT)
        theta = 2.0 * np.arctan(h)
        theta = np.where(theta < 0.0, theta + TWO_PI, theta)
        out[:] = theta.sum(axis=1)
    except np.linalg.LinAlgError:
        bad[:] = True
    if bad.any():
        w = np.linalg.eigvals(U[bad])
        theta = np.mod(np.angle(w), TWO_PI)
        out[bad] = theta.sum(axis=1)
    return out


class CountingFunction:
    """Integer spectral counting function relative to a reference momentum."""

    def __init__(self, layout: BondLayout, mode: str, k_ref: float):
        self.layout = layout
        self.mode = mode
        self.k_ref = float(k_ref)
        U = layout.evolution_batch([k_ref], mode)
        self.offset = float(_phase_sums(U)[0] - layout.det_phase(np.array([k_ref]), mode)[0])

    def theta(self, ks) -> np.ndarray:
        return self.layout.det_phase(ks, self.mode) + self.offset

    def __call__(self, ks) -> np.ndarray:
        ks = np.atleast_1d(np.asarray(ks, dtype=float))
        out = np.empty(len(ks), dtype=np.int64)
        for start in range(0, len(ks), _BATCH):
            chunk = ks[start:start + _BATCH]
            U = self.layout.evolution_batch(chunk, self.mode)
            raw = (self.theta(chunk) - _phase_sums(U)) / TWO_PI
            counts = np.rint(raw)
            drift = np.abs(raw - counts)
            if drift.max() > 1e-3:
                # recheck offending points with the general eigensolver
                sel = drift > 1e-3
                w = np.linalg.eigvals(U[sel])
                sums = np.mod(np.angle(w), TWO_PI).sum(axis=1)
                raw[sel] = (self.theta(chunk[sel]) - sums) / TWO_PI
                counts = np.rint(raw)
                if np.abs(raw - counts).max() > 1e-3:
                    raise RuntimeError("spectral counting function is not integer valued")
            out[start:start + _BATCH] = counts.astype(np.int64)
        return out

    def secular(self, k: float) -> float:
        """Real secular function; changes sign at every simple root."""
        U = self.layout.evolution_batch([k], self.mode)[0]
        det = np.linalg.det(np.eye(U.shape[0]) - U)
        return float((np.exp(-0.5j * self.theta(np.array([k]))[0]) * det).real)


def _isolate(count, a, b, na, nb, tol, depth=0):
    c = nb - na
    if c == 0:
        return []
    if abs(c) == 1:
        za, zb = count.secular(a), count.secular(b)
        if za == 0.0:
            return [a]
        if zb == 0.0 or za * zb > 0.0:
            # root sits on (or numerically at) an endpoint
            return [b]
        return [brentq(count.secular, a, b, xtol=tol / 4.0, rtol=4 * np.finfo(float).eps)]
    if b - a < tol or depth > 64:
        log.warning("unresolved %d-fold root cluster near k=%.12g", abs(c), 0.5 * (a + b))
        return [0.5 * (a + b)] * abs(c)
    mid = 0.5 * (a + b)
    nm = int(count([mid])[0])
    return (_isolate(count, a, mid, na, nm, tol, depth + 1)
            + _isolate(count, mid, b, nm, nb, tol, depth + 1))


def _solve_segment(count, grid, tol):
    n = count(grid)
    roots = []
    for i in np.flatnonzero(np.diff(n)):
        roots.extend(_isolate(count, grid[i], grid[i + 1], int(n[i]), int(n[i + 1]), tol))
    return roots, int(n[-1] - n[0])


def dedupe(ks, tol) -> np.ndarray:
    ks = np.sort(np.asarray(ks, dtype=float))
    if len(ks) == 0:
        return ks
    keep = np.concatenate([[True], np.diff(ks) > tol])
    return ks[keep]


def weyl_residual(ks, total_length, k_min, k_max) -> float:
    """``max_K |#{k_n in (k_min, K]} - L (K - k_min) / pi|`` over the window."""
    ks = np.sort(np.asarray(ks, dtype=float))
    ks = ks[(ks > k_min) & (ks <= k_max)]
    weyl = total_length * (ks - k_min) / math.pi
    idx = np.arange(len(ks))
    candidates = [0.0, abs(len(ks) - total_length * (k_max - k_min) / math.pi)]
    if len(ks):
        candidates.append(np.max(np.abs(idx - weyl)))
        candidates.append(np.max(np.abs(idx + 1 - weyl)))
    return float(max(candidates))


def weyl_count_check(spectrum: Spectrum, graph: MetricGraph) -> float:
    lo, hi = spectrum.window
    return weyl_residual(spectrum.ks, graph.total_length, lo, hi)


def _solve_once(graph, conditions, k_min, k_max, grid_factor, refine_tol, mode, n_jobs):
    layout = BondLayout(graph, conditions)
    L = graph.total_length
    step = (math.pi / L) / grid_factor
    n_steps = max(1, int(math.ceil((k_max - k_min) / step)))
    grid = k_min + step * np.arange(n_steps + 1)
    grid[-1] = k_max
    count = CountingFunction(layout, mode, k_min)
    n_jobs = max(1, int(n_jobs))
    # fixed segmentation so the result does not depend on the worker count
    seg = 4096
    bounds = [(i, min(i + seg, n_steps)) for i in range(0, n_steps, seg)]
    tasks = [grid[lo:hi + 1] for lo, hi in bounds]
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(lambda g: _solve_segment(count, g, refine_tol), tasks))
    else:
        results = [_solve_segment(count, g, refine_tol) for g in tasks]
    roots = [r for rs, _ in results for r in rs]
    expected = sum(net for _, net in results)
    ks = dedupe(roots, 10.0 * refine_tol)
    ks = ks[(ks > k_min) & (ks <= k_max)]
    return ks, expected


def solve_spectrum(graph: MetricGraph, conditions: Conditions, k_min: float = 0.5,
                   k_max: float = None, grid_factor: float = 20.0,
                   refine_tol: float = 1e-10, mode: str = "exact", n_levels: int = None,
                   weyl_bound: float = None, n_jobs: int = 1) -> Spectrum:
    """All roots of ``det(I - U(k))`` in ``(k_min, k_max]``.

    Either ``k_max`` or ``n_levels`` must be given; with ``n_levels`` the
    window is extended far enough to contain that many roots and the result is
    truncated to the first ``n_levels``.  A Weyl residual above ``weyl_bound``
    (default ``2E``) triggers one grid refinement and then ``WeylCheckError``.
    """
    if not 0 < k_min:
        raise ValueError("k_min must be positive")
    L = graph.total_length
    if k_max is None:
        if n_levels is None:
            raise ValueError("give k_max or n_levels")
        k_max = k_min + math.pi * (n_levels + 2 * graph.bond_count + 10) / L
    if not k_min < k_max:
        raise ValueError("need k_min < k_max")
    bound = 2 * graph.edge_count if weyl_bound is None else weyl_bound
    factor = grid_factor
    for attempt in range(2):
        ks, expected = _solve_once(graph, conditions, k_min, k_max, factor, refine_tol,
                                   mode, n_jobs)
        hi = k_max
        if n_levels is not None and len(ks) > n_levels:
            hi = 0.5 * (ks[n_levels - 1] + ks[n_levels])
            ks = ks[:n_levels]
        residual = weyl_residual(ks, L, k_min, hi)
        consistent = n_levels is not None or len(ks) == expected
        if residual <= bound and consistent:
            return Spectrum(ks, (k_min, hi), residual, refine_tol, L, factor)
        log.warning("Weyl residual %.3g (bound %.3g), %d roots vs %d counted; refining grid",
                    residual, bound, len(ks), expected)
        factor *= 2
    raise WeylCheckError(
        f"Weyl residual {residual:.3g} exceeds bound {bound:.3g} after grid refinement",
        residual=residual, bound=bound)
