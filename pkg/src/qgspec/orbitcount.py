"""Exact periodic-orbit counting over directed-edge subsets.

For every bitmask ``b`` over the 2E directed edges, ``tilde[b]`` is the
number of closed walks of length n (with a marked start) that only use edges
in ``b``; it equals ``tr A(b)^n``.  Inclusion-exclusion over the subset
lattice (the arithmetic / Moebius transform) turns it into ``exact[b]``, the
number of walks whose support is exactly ``b``.  Eulerian cycles are the
walks of length E whose support picks one direction of every edge.

Two independent Eulerian counters are provided for cross-checking: the BEST
theorem over balanced orientations and a plain backtracking enumeration.
"""

from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass

import numba
import numpy as np

from .errors import NotEulerianError, SizeGuardError
from .evolution import Conditions, global_scattering
from .graph import MetricGraph

log = logging.getLogger(__name__)

if "NUMBA_THREADING_LAYER" not in os.environ:
    # the bundled TBB is often too old and only produces a warning
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

MAX_WIDTH = 26          # 2E cap for the subset pipeline (2^26 int64 = 512 MiB)
MAX_BEST_EDGES = 24     # 2^E orientations
MAX_BACKTRACK_EDGES = 14
_INT64_SAFE = 1 << 62
_CHUNK = 1 << 12


@dataclass
class SubsetCountVector:
    values: np.ndarray
    stage: str       # "tilde" or "exact"
    n: int

    @property
    def width(self) -> int:
        return int(len(self.values)).bit_length() - 1

    def __getitem__(self, mask):
        return self.values[mask]


# -- numba kernels -----------------------------------------------------------------

@numba.njit(cache=True)
def _fill_adjacency(mask, origin, terminal, A):
    A[:, :] = 0
    for b in range(origin.shape[0]):
        if (mask >> b) & 1:
            A[terminal[b], origin[b]] = 1


@numba.njit(cache=True)
def _matmul(X, Y, out):
    m = X.shape[0]
    for i in range(m):
        for j in range(m):
            s = 0
            for k in range(m):
                s += X[i, k] * Y[k, j]
            out[i, j] = s


@numba.njit(cache=True)
def _trace_of_product(X, Y):
    m = X.shape[0]
    s = 0
    for i in range(m):
        for j in range(m):
            s += X[i, j] * Y[j, i]
    return s


@numba.njit(cache=True)
def _trace_power(A, n, P, R, T):
    """``tr A^n`` by repeated squaring; the last product only forms its trace."""
    P[:, :] = A
    have = False
    while True:
        if n & 1:
            if n >> 1 == 0:
                if have:
                    return _trace_of_product(R, P)
                s = 0
                for i in range(P.shape[0]):
                    s += P[i, i]
                return s
            if have:
                _matmul(R, P, T)
                R[:, :] = T
            else:
                R[:, :] = P
                have = True
        n >>= 1
        _matmul(P, P, T)
        P[:, :] = T


@numba.njit(cache=True)
def _swap_pairs(mask):
    return ((mask & 0x5555555555555555) << 1) | ((mask >> 1) & 0x5555555555555555)


@numba.njit(parallel=True, cache=True)
def _mirror(out):
    """Copy the value of the reversed mask; ``A(reversed b) = A(b)^T`` has equal traces."""
    total = out.shape[out.ndim - 1]
    for mask in numba.prange(total):
        r = _swap_pairs(mask)
        if r < mask:
            out[..., mask] = out[..., r]


@numba.njit(parallel=True, cache=True)
def _tilde_single(origin, terminal, V, n, out):
    total = out.shape[0]
    n_chunks = (total + _CHUNK - 1) // _CHUNK
    for c in numba.prange(n_chunks):
        A = np.zeros((V, V), dtype=np.int64)
        P = np.empty((V, V), dtype=np.int64)
        R = np.empty((V, V), dtype=np.int64)
        T = np.empty((V, V), dtype=np.int64)
        hi = min(total, (c + 1) * _CHUNK)
        for mask in range(c * _CHUNK, hi):
            if _swap_pairs(mask) < mask:
                continue
            _fill_adjacency(mask, origin, terminal, A)
            out[mask] = _trace_power(A, n, P, R, T)


@numba.njit(parallel=True, cache=True)
def _tilde_multi(origin, terminal, V, ns, out):
    """Traces for several powers in one sweep; ``ns`` ascending, ``out[j, mask]``."""
    total = out.shape[1]
    n_max = ns[ns.shape[0] - 1]
    n_chunks = (total + _CHUNK - 1) // _CHUNK
    for c in numba.prange(n_chunks):
        A = np.zeros((V, V), dtype=np.int64)
        P = np.empty((V, V), dtype=np.int64)
        T = np.empty((V, V), dtype=np.int64)
        hi = min(total, (c + 1) * _CHUNK)
        for mask in range(c * _CHUNK, hi):
            if _swap_pairs(mask) < mask:
                continue
            _fill_adjacency(mask, origin, terminal, A)
            P[:, :] = np.eye(V, dtype=np.int64)
            j = 0
            for p in range(1, n_max + 1):
                if ns[j] == p:
                    out[j, mask] = _trace_of_product(P, A)
                    j += 1
                if p < n_max:
                    _matmul(P, A, T)
                    P[:, :] = T


@numba.njit(cache=True)
def _bareiss_det(M):
    """Exact determinant of an integer matrix (fraction-free elimination)."""
    M = M.copy()
    m = M.shape[0]
    if m == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(m - 1):
        if M[k, k] == 0:
            swap = -1
            for r in range(k + 1, m):
                if M[r, k] != 0:
                    swap = r
                    break
            if swap < 0:
                return 0
            for c in range(m):
                tmp = M[k, c]
                M[k, c] = M[swap, c]
                M[swap, c] = tmp
            sign = -sign
        for i in range(k + 1, m):
            for j in range(k + 1, m):
                M[i, j] = (M[i, j] * M[k, k] - M[i, k] * M[k, j]) // prev
        prev = M[k, k]
    return sign * M[m - 1, m - 1]


@numba.njit(parallel=True, cache=True)
def _best_sweep(us, vs, half_degree, V):
    """Sum of in-arborescence counts (root 0) over all balanced orientations."""
    E = us.shape[0]
    total_orient = 1 << E
    n_chunks = (total_orient + _CHUNK - 1) // _CHUNK
    partial = np.zeros(n_chunks, dtype=np.int64)
    for c in numba.prange(n_chunks):
        out_deg = np.zeros(V, dtype=np.int64)
        L = np.zeros((V, V), dtype=np.int64)
        local = 0
        hi = min(total_orient, (c + 1) * _CHUNK)
        for orient in range(c * _CHUNK, hi):
            out_deg[:] = 0
            for e in range(E):
                if (orient >> e) & 1:
                    out_deg[vs[e]] += 1
                else:
                    out_deg[us[e]] += 1
            balanced = True
            for v in range(V):
                if out_deg[v] != half_degree[v]:
                    balanced = False
                    break
            if not balanced:
                continue
            L[:, :] = 0
            for v in range(V):
                L[v, v] = out_deg[v]
            for e in range(E):
                if (orient >> e) & 1:
                    L[vs[e], us[e]] -= 1
                else:
                    L[us[e], vs[e]] -= 1
            local += _bareiss_det(L[1:, 1:])
        partial[c] = local
    return partial.sum()


# -- helpers -------------------------------------------------------------------------

def _bond_arrays(graph):
    return graph.bond_origin.astype(np.int64), graph.bond_terminal.astype(np.int64)


def _check_width(graph):
    if graph.bond_count > MAX_WIDTH:
        raise SizeGuardError(
            f"subset pipeline needs 2E <= {MAX_WIDTH}; {graph.name} has 2E = {graph.bond_count}")


def _max_power_entry(graph, n) -> int:
    """Largest entry of ``A^m`` over ``m <= n`` and ``tr A^n`` for the full graph, in Python ints."""
    A = [[int(x) for x in row] for row in _adjacency_directed(graph)]
    V = len(A)
    P = [row[:] for row in A]
    worst = 1
    for _ in range(1, n):
        P = [[sum(P[i][k] * A[k][j] for k in range(V)) for j in range(V)] for i in range(V)]
        worst = max(worst, max(max(row) for row in P))
    return max(worst, sum(P[i][i] for i in range(V)))


def _adjacency_directed(graph):
    origin, terminal = _bond_arrays(graph)
    A = np.zeros((graph.vertex_count, graph.vertex_count), dtype=np.int64)
    A[terminal, origin] = 1
    return A


def _tilde_wide(graph, n):
    """Arbitrary-precision fallback; slow, for inputs whose traces overflow int64."""
    origin, terminal = _bond_arrays(graph)
    V, B = graph.vertex_count, graph.bond_count
    out = np.empty(1 << B, dtype=object)
    for mask in range(1 << B):
        A = np.zeros((V, V), dtype=object)
        A[:, :] = 0
        for b in range(B):
            if (mask >> b) & 1:
                A[terminal[b], origin[b]] = 1
        P = np.identity(V, dtype=object)
        base, e = A, n
        while e:
            if e & 1:
                P = P.dot(base)
            base = base.dot(base)
            e >>= 1
        out[mask] = int(sum(P[i, i] for i in range(V)))
    return out


# -- public API ------------------------------------------------------------------------

def tilde_vector(graph: MetricGraph, n, force_wide: bool = False):
    """``tr A(b)^n`` for every directed-edge mask ``b``.

    ``n`` may be an integer or a sequence of integers (one sweep serves all of
    them; a list of vectors is returned).  Entries are exact: int64 when the
    full-graph walk counts fit, Python integers otherwise.
    """
    _check_width(graph)
    many = not np.isscalar(n)
    ns = sorted({int(x) for x in np.atleast_1d(n)})
    if not ns or ns[0] < 1:
        raise ValueError("walk length must be >= 1")
    bound = _max_power_entry(graph, ns[-1]) * graph.vertex_count
    wide = force_wide or bound >= _INT64_SAFE
    origin, terminal = _bond_arrays(graph)
    B = graph.bond_count
    if wide:
        log.warning("walk counts exceed int64; using arbitrary-precision path")
        vecs = [_tilde_wide(graph, k) for k in ns]
    elif len(ns) == 1:
        out = np.empty(1 << B, dtype=np.int64)
        _tilde_single(origin, terminal, graph.vertex_count, ns[0], out)
        _mirror(out)
        vecs = [out]
    else:
        out = np.empty((len(ns), 1 << B), dtype=np.int64)
        _tilde_multi(origin, terminal, graph.vertex_count, np.array(ns, dtype=np.int64), out)
        _mirror(out)
        vecs = list(out)
    result = [SubsetCountVector(v, "tilde", k) for v, k in zip(vecs, ns)]
    if many:
        order = {k: r for k, r in zip(ns, result)}
        return [order[int(k)] for k in np.atleast_1d(n)]
    return result[0]


def _layers(values, sign):
    width = int(len(values)).bit_length() - 1
    if len(values) != 1 << width:
        raise ValueError("vector length must be a power of two")
    for i in range(width):
        view = values.reshape(-1, 2, 1 << i)
        if sign < 0:
            view[:, 1, :] -= view[:, 0, :]
        else:
            view[:, 1, :] += view[:, 0, :]
    return values


def _needs_object(values):
    if values.dtype == object:
        return False
    peak = int(np.abs(values).max()) if len(values) else 0
    width = int(len(values)).bit_length() - 1
    return peak << width >= _INT64_SAFE


def arithmetic_transform(vec: SubsetCountVector, inplace: bool = False) -> SubsetCountVector:
    """Inclusion-exclusion over subsets: ``N_b = sum_{c <= b} (-1)^{|b|-|c|} tilde_c``.

    Runs in ``width`` vectorised bit layers.  Values that could overflow int64
    are promoted to Python integers first.
    """
    if vec.stage != "tilde":
        raise ValueError(f"expected a tilde-stage vector, got {vec.stage!r}")
    values = vec.values if inplace else vec.values.copy()
    if _needs_object(values):
        values = values.astype(object)
    return SubsetCountVector(_layers(values, -1), "exact", vec.n)


def mobius_transform(values) -> np.ndarray:
    """Moebius transform on a raw integer array (returns a new array)."""
    values = np.array(values)
    if _needs_object(values):
        values = values.astype(object)
    return _layers(values, -1)


def zeta_transform(values) -> np.ndarray:
    """Subset-sum transform, the inverse of ``mobius_transform``."""
    values = np.array(values)
    if _needs_object(values):
        values = values.astype(object)
    return _layers(values, +1)


def _require_eulerian(graph):
    odd = [v for v, d in enumerate(graph.degrees) if d % 2]
    if odd:
        raise NotEulerianError(f"graph is not Eulerian: odd degree at vertices {odd}")
    if not graph.is_connected():
        raise NotEulerianError("graph is not Eulerian: it is disconnected")


def admissible_masks(graph: MetricGraph) -> np.ndarray:
    """The 2^E masks that contain exactly one direction of every edge."""
    _require_eulerian(graph)
    masks = np.zeros(1, dtype=np.int64)
    for e in range(graph.edge_count):
        masks = np.concatenate([masks | (1 << (2 * e)), masks | (1 << (2 * e + 1))])
    return np.sort(masks)


def euler_count_transform(graph: MetricGraph) -> int:
    """Eulerian cycles (cyclic shifts identified, reversals distinct) via the subset transform."""
    _require_eulerian(graph)
    _check_width(graph)
    E = graph.edge_count
    exact = arithmetic_transform(tilde_vector(graph, E), inplace=True)
    total = sum(int(x) for x in exact.values[admissible_masks(graph)])
    count, rem = divmod(2 * total, graph.bond_count)
    assert rem == 0, "Eulerian walk total is not a multiple of the cycle length"
    return count


def _hadamard_bound(half_degree):
    # rows of the reduced out-Laplacian: diagonal d/2 and at most d/2 entries -1
    return math.prod(math.isqrt(int(h * h + h)) + 1 for h in half_degree[1:])


def euler_count_best(graph: MetricGraph) -> int:
    """Eulerian cycles from the BEST theorem summed over balanced orientations."""
    _require_eulerian(graph)
    E = graph.edge_count
    if E > MAX_BEST_EDGES:
        raise SizeGuardError(f"BEST sweep needs E <= {MAX_BEST_EDGES}; got {E}")
    half = (graph.degrees // 2).astype(np.int64)
    bound = _hadamard_bound(half)
    if bound ** 2 >= _INT64_SAFE or (bound << E) >= _INT64_SAFE:
        raise SizeGuardError("arborescence counts may overflow int64")
    us = np.array([u for u, _ in graph.edges], dtype=np.int64)
    vs = np.array([v for _, v in graph.edges], dtype=np.int64)
    trees = int(_best_sweep(us, vs, half, graph.vertex_count))
    return trees * math.prod(math.factorial(int(h) - 1) for h in half)


def euler_count_backtrack(graph: MetricGraph) -> int:
    """Depth-first enumeration of Eulerian circuits through the bond ``0 -> 1`` of edge 0."""
    _require_eulerian(graph)
    E = graph.edge_count
    if E > MAX_BACKTRACK_EDGES:
        raise SizeGuardError(f"backtracking needs E <= {MAX_BACKTRACK_EDGES}; got {E}")
    adj = [[] for _ in range(graph.vertex_count)]
    for e, (u, v) in enumerate(graph.edges):
        adj[u].append((v, e))
        adj[v].append((u, e))
    used = [False] * E
    start, first = graph.edges[0]
    used[0] = True

    def walk(v, remaining):
        if remaining == 0:
            return 1 if v == start else 0
        found = 0
        for w, e in adj[v]:
            if not used[e]:
                used[e] = True
                found += walk(w, remaining - 1)
                used[e] = False
        return found

    # every circuit crosses edge 0 once; reversal maps the other direction onto this one
    return 2 * walk(first, E - 1)


def orbit_family_count(graph: MetricGraph, n: int, predicate) -> int:
    """Sum of exact support counts over masks accepted by ``predicate``.

    ``predicate`` receives an int64 array of masks and returns booleans.
    """
    exact = arithmetic_transform(tilde_vector(graph, n), inplace=True)
    masks = np.arange(len(exact.values), dtype=np.int64)
    keep = np.asarray(predicate(masks), dtype=bool)
    if keep.shape != masks.shape:
        raise ValueError("predicate must return one boolean per mask")
    return sum(int(x) for x in exact.values[keep]) if exact.values.dtype == object \
        else int(exact.values[keep].sum())


def popcount(masks) -> np.ndarray:
    masks = np.asarray(masks, dtype=np.int64)
    out = np.zeros(masks.shape, dtype=np.int64)
    m = masks.copy()
    while np.any(m):
        out += m & 1
        m >>= 1
    return out


def single_edge_masks(graph: MetricGraph) -> np.ndarray:
    return np.array([3 << (2 * e) for e in range(graph.edge_count)], dtype=np.int64)


def reversed_mask(mask: int) -> int:
    """Mask of the reversed bonds (swap the two bits of every edge)."""
    even = mask & 0x5555555555555555
    odd = mask & 0xAAAAAAAAAAAAAAAA
    return (even << 1) | (odd >> 1)


def diag_approx_via_M(graph: MetricGraph, conditions: Conditions, n: int,
                      mode: str = "asymptotic", k: float = 1.0) -> float:
    """``tr M^n`` with ``M = |Sigma|^2`` (entrywise) the classical bond transition matrix."""
    if n < 1:
        raise ValueError("n must be positive")
    M = np.abs(global_scattering(graph, conditions, k, mode)) ** 2
    return float(np.trace(np.linalg.matrix_power(M, n)))
