"""Bond scattering matrix and the unitary evolution operator ``U(k) = e^{ikL} S(k)``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .graph import MetricGraph
from .scattering import VertexConditionSpec

MODES = ("exact", "asymptotic")

Conditions = Union[VertexConditionSpec, Sequence[VertexConditionSpec]]


def resolve_conditions(graph: MetricGraph, conditions: Conditions) -> list:
    if isinstance(conditions, VertexConditionSpec):
        return [conditions] * graph.vertex_count
    conditions = list(conditions)
    if len(conditions) != graph.vertex_count:
        raise ValueError(
            f"{len(conditions)} vertex conditions given for {graph.vertex_count} vertices")
    for c in conditions:
        if not isinstance(c, VertexConditionSpec):
            raise TypeError("vertex conditions must be VertexConditionSpec instances")
    return conditions


class BondLayout:
    """Vertices grouped by (condition, degree) with their incoming/outgoing bond indices.

    Every group shares one local scattering matrix, so batched assembly solves
    one small system per group rather than per vertex.
    """

    def __init__(self, graph: MetricGraph, conditions: Conditions):
        self.graph = graph
        self.conditions = resolve_conditions(graph, conditions)
        groups = {}
        for v in range(graph.vertex_count):
            spec = self.conditions[v]
            d = len(graph.vertex_order[v])
            incoming, outgoing = graph.bonds_at(v)
            key = (spec.key, d)
            if key not in groups:
                groups[key] = (spec, d, [], [])
            groups[key][2].append(incoming)
            groups[key][3].append(outgoing)
        self.groups = [(spec, d, np.array(inc), np.array(out))
                       for spec, d, inc, out in groups.values()]
        for spec, d, _, _ in self.groups:
            spec.coupling(d)  # surfaces degree/condition mismatches early

    def scattering_batch(self, ks, mode: str = "exact") -> np.ndarray:
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        ks = np.atleast_1d(np.asarray(ks, dtype=float))
        B = self.graph.bond_count
        sigma = np.zeros((len(ks), B, B), dtype=complex)
        for spec, d, inc, out in self.groups:
            S = spec.scattering_batch(d, ks, mode)
            # sigma[m, out[v, i], inc[v, j]] = S[m, i, j]
            sigma[:, out[:, :, None], inc[:, None, :]] = S[:, None, :, :]
        return sigma

    def evolution_batch(self, ks, mode: str = "exact") -> np.ndarray:
        ks = np.atleast_1d(np.asarray(ks, dtype=float))
        phases = np.exp(1j * ks[:, None] * self.graph.bond_lengths[None, :])
        return phases[:, :, None] * self.scattering_batch(ks, mode)

    def det_phase(self, ks, mode: str = "exact") -> np.ndarray:
        """Continuous ``arg det U(k)`` up to an additive constant."""
        ks = np.asarray(ks, dtype=float)
        total = 2.0 * self.graph.total_length * ks
        for spec, d, inc, _ in self.groups:
            total = total + len(inc) * spec.phase_of_det(d, ks, mode)
        return total


def global_scattering(graph: MetricGraph, conditions: Conditions, k: float,
                      mode: str = "exact") -> np.ndarray:
    """``2E x 2E`` bond scattering matrix; entry (b', b) couples b into vertex v out along b'."""
    if mode == "exact" and not k > 0:
        raise ValueError("momentum must be positive")
    return BondLayout(graph, conditions).scattering_batch([k], mode)[0]


@dataclass(frozen=True)
class EvolutionOperator:
    matrix: np.ndarray
    k: float
    mode: str
    graph: MetricGraph

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


def evolution_operator(graph: MetricGraph, conditions: Conditions, k: float,
                       mode: str = "exact") -> EvolutionOperator:
    if not k > 0:
        raise ValueError("momentum must be positive")
    U = BondLayout(graph, conditions).evolution_batch([k], mode)[0]
    err = np.linalg.norm(U.conj().T @ U - np.eye(U.shape[0]), 2)
    assert err < 1e-10, f"evolution operator lost unitarity ({err:.3g})"
    return EvolutionOperator(U, float(k), mode, graph)


def trace_power(op: EvolutionOperator, n: int) -> complex:
    """``tr U^n`` by repeated squaring."""
    if n < 1:
        raise ValueError("power must be positive")
    return complex(np.trace(np.linalg.matrix_power(op.matrix, n)))


def eigenphases(op: EvolutionOperator) -> np.ndarray:
    """Arguments of the eigenvalues of ``U(k)`` in ``[0, 2 pi)``, ascending."""
    w = np.linalg.eigvals(op.matrix)
    theta = np.mod(np.angle(w), 2.0 * np.pi)
    theta[theta >= 2.0 * np.pi] = 0.0
    return np.sort(theta)
