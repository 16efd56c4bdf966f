"""Vertex couplings, on-shell vertex scattering matrices and the time-reversal violation measure.

A vertex of degree ``d`` with coupling matrix ``U`` (unitary, ``d x d``) scatters
incoming amplitudes into outgoing ones through

    S(k) = (k - 1 + (k + 1) U) (k + 1 + (k - 1) U)^{-1}.

Row index = outgoing local edge, column index = incoming local edge.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

UNITARY_TOL = 1e-12

VARIANTS = ("preferred", "distorted", "neumann", "custom")


def circulant_U(d: int) -> np.ndarray:
    """Cyclic shift: ones on the superdiagonal and in the bottom-left corner."""
    if d < 2:
        raise ValueError("circulant coupling needs degree d >= 2")
    return np.roll(np.eye(d, dtype=complex), 1, axis=1)


def distorted_U(d: int, mu: float) -> np.ndarray:
    return np.exp(1j * mu) * circulant_U(d)


def neumann_U(d: int) -> np.ndarray:
    """Coupling matrix reproducing Neumann-Kirchhoff conditions (``2/d J - I``)."""
    if d < 1:
        raise ValueError("degree must be positive")
    return (2.0 / d) * np.ones((d, d), dtype=complex) - np.eye(d)


def neumann_S(d: int) -> np.ndarray:
    if d < 1:
        raise ValueError("degree must be positive")
    return (2.0 / d) * np.ones((d, d)) - np.eye(d)


def eta(k):
    """``(1 - k) / (1 + k)``; lies in (-1, 1) for k > 0."""
    k = np.asarray(k, dtype=float)
    return (1.0 - k) / (1.0 + k)


def _check_unitary(U, tol=UNITARY_TOL):
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise ValueError("coupling matrix must be square")
    err = np.linalg.norm(U.conj().T @ U - np.eye(U.shape[0]), 2)
    if err > tol:
        raise ValueError(f"coupling matrix is not unitary (|U*U - I| = {err:.3g})")
    return U


def _polish_unitary(S):
    """One Newton-Schulz step towards the nearest unitary matrix.

    The solve is conditioned like ``k`` when -1 is an eigenvalue of ``U``; the
    step removes the resulting O(k eps) drift from unitarity.
    """
    gram = np.conj(np.swapaxes(S, -1, -2)) @ S
    return 0.5 * S @ (3.0 * np.eye(S.shape[-1]) - gram)


def vertex_scattering(U, k: float) -> np.ndarray:
    """On-shell scattering matrix for coupling ``U`` at momentum ``k > 0`` (linear solve)."""
    if not k > 0:
        raise ValueError("momentum must be positive")
    U = np.asarray(U, dtype=complex)
    eye = np.eye(U.shape[0])
    numerator = (k - 1.0) * eye + (k + 1.0) * U
    denominator = (k + 1.0) * eye + (k - 1.0) * U
    # numerator and denominator are polynomials in U, so they commute
    S = _polish_unitary(np.linalg.solve(denominator, numerator))
    err = np.linalg.norm(S.conj().T @ S - eye, 2)
    assert err < 1e-12, f"vertex scattering lost unitarity ({err:.3g})"
    return S


def vertex_scattering_batch(U, ks) -> np.ndarray:
    """``vertex_scattering`` evaluated on an array of momenta; shape ``(len(ks), d, d)``."""
    U = np.asarray(U, dtype=complex)
    ks = np.asarray(ks, dtype=float)[:, None, None]
    eye = np.eye(U.shape[0])
    numerator = (ks - 1.0) * eye + (ks + 1.0) * U
    denominator = (ks + 1.0) * eye + (ks - 1.0) * U
    return _polish_unitary(np.linalg.solve(denominator, numerator))


def vertex_scattering_closed_form(d: int, k: float) -> np.ndarray:
    """Entrywise formula for the circulant coupling in terms of ``eta = (1-k)/(1+k)``."""
    if d < 2:
        raise ValueError("degree must be >= 2")
    if not k > 0:
        raise ValueError("momentum must be positive")
    h = float(eta(k))
    assert abs(h) < 1.0
    # (1 - eta^2)/(1 - eta^d) and (1 - eta^{d-2})/(1 - eta^d) as ratios of geometric sums
    full = sum(h ** j for j in range(d))
    scale = (2.0 / (1.0 + k)) / full
    diag = -h * sum(h ** j for j in range(d - 2)) / full
    i, j = np.indices((d, d))
    S = scale * np.power(h, (j - i - 1) % d)
    S[np.diag_indices(d)] = diag
    return S.astype(complex)


def high_energy_S(d: int) -> np.ndarray:
    """``k -> infinity`` limit for the circulant coupling: identity for odd d."""
    if d < 2:
        raise ValueError("degree must be >= 2")
    if d % 2:
        return np.eye(d)
    i, j = np.indices((d, d))
    return -(2.0 / d) * (-1.0) ** (i + j) + np.eye(d)


def high_energy_limit(U, tol: float = 1e-9) -> np.ndarray:
    """``I - 2 P`` with ``P`` the projector onto the (-1)-eigenspace of ``U``."""
    U = np.asarray(U, dtype=complex)
    w, vecs = np.linalg.eig(U)
    minus = np.abs(w + 1.0) < tol
    d = U.shape[0]
    if not minus.any():
        return np.eye(d, dtype=complex)
    Q, _ = np.linalg.qr(vecs[:, minus])
    return np.eye(d) - 2.0 * Q @ Q.conj().T


def trs_measure(U, k: float) -> float:
    """Spectral norm of ``S(k) - S(k)^T``; bounded by 2."""
    S = vertex_scattering(U, k)
    return float(np.linalg.norm(S - S.T, 2))


def _circulant_prefactor(d, k):
    h = float(eta(k))
    one_plus = 2.0 / (1.0 + k)
    if d % 2 == 0:
        return 1.0 / sum(h ** (2 * j) for j in range(d // 2))
    return one_plus / sum(h ** j for j in range(d))


def circulant_difference_eigenvalues(d: int, k: float) -> np.ndarray:
    """Eigenvalues of the circulant bracket matrix of ``S - S^T`` (prefactor excluded)."""
    h = float(eta(k))
    j = np.arange(1, d)
    coeff = h ** (j - 1) - h ** (d - j - 1)
    n = np.arange(d)[:, None]
    omega = np.exp(2j * np.pi * n * j[None, :] / d)
    return omega @ coeff


def trs_measure_circulant(d: int, k: float) -> float:
    """Time-reversal violation measure from the explicit circulant eigenvalues."""
    if d < 2:
        raise ValueError("degree must be >= 2")
    if not k > 0:
        raise ValueError("momentum must be positive")
    lam = circulant_difference_eigenvalues(d, k)
    return float(_circulant_prefactor(d, k) * np.max(np.abs(lam)))


@dataclass(frozen=True)
class VertexConditionSpec:
    """Vertex coupling choice.

    ``variant`` is one of ``preferred`` (cyclic shift), ``distorted``
    (``e^{i mu}`` times the shift), ``neumann`` or ``custom`` (``matrix``).
    With ``asymptotic=True`` the vertex always scatters with the k -> infinity
    limit of its matrix.
    """

    variant: str = "preferred"
    mu: float = 0.0
    matrix: Optional[np.ndarray] = field(default=None, compare=False)
    asymptotic: bool = False

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown vertex condition {self.variant!r}")
        if not np.isfinite(self.mu):
            raise ValueError("mu must be real")
        if self.variant == "custom":
            if self.matrix is None:
                raise ValueError("custom conditions need a unitary matrix")
            object.__setattr__(self, "matrix", _check_unitary(self.matrix))
        elif self.matrix is not None:
            raise ValueError("matrix is only used by the custom variant")

    @property
    def key(self):
        blob = None if self.matrix is None else self.matrix.tobytes()
        return (self.variant, float(self.mu), blob, self.asymptotic)

    def coupling(self, d: int) -> np.ndarray:
        if self.variant == "preferred":
            return circulant_U(d)
        if self.variant == "distorted":
            return distorted_U(d, self.mu)
        if self.variant == "neumann":
            return neumann_U(d)
        if self.matrix.shape != (d, d):
            raise ValueError(f"custom matrix is {self.matrix.shape}, vertex degree is {d}")
        return self.matrix

    def is_k_independent(self, mode: str = "exact") -> bool:
        return self.asymptotic or mode == "asymptotic" or self.variant == "neumann"

    def limit(self, d: int) -> np.ndarray:
        if self.variant == "neumann":
            return neumann_S(d).astype(complex)
        if self.variant == "preferred":
            return high_energy_S(d).astype(complex)
        return high_energy_limit(self.coupling(d))

    def scattering(self, d: int, k: float, mode: str = "exact") -> np.ndarray:
        if self.is_k_independent(mode):
            return self.limit(d)
        return vertex_scattering(self.coupling(d), k)

    def scattering_batch(self, d: int, ks, mode: str = "exact") -> np.ndarray:
        ks = np.asarray(ks, dtype=float)
        if self.is_k_independent(mode):
            return np.broadcast_to(self.limit(d), (len(ks), d, d))
        return vertex_scattering_batch(self.coupling(d), ks)

    def phase_of_det(self, d: int, ks, mode: str = "exact") -> np.ndarray:
        """Continuous branch of ``arg det S(k)`` up to a k-independent constant."""
        ks = np.asarray(ks, dtype=float)
        if self.is_k_independent(mode):
            return np.zeros_like(ks)
        w = np.linalg.eigvals(self.coupling(d))
        total = np.zeros_like(ks)
        for u in w:
            if abs(1.0 + u) < 1e-12:
                continue  # eigenvalue -1 scatters as the constant -1
            t = np.tan(np.angle(u) / 2.0)
            total += 2.0 * np.arctan(t / ks)
        return total


PREFERRED = VertexConditionSpec("preferred")
NEUMANN = VertexConditionSpec("neumann")
