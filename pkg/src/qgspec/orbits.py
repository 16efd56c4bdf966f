"""Closed-form periodic-orbit predictions for complete graphs and Eulerian graphs.

Counts are exact (``int`` / ``Fraction``); floats appear only in the values
returned to callers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb


def _check_complete(V, n):
    if int(V) != V or V < 4:
        raise ValueError("complete-graph formulas need an integer V >= 4")
    if int(n) != n or n < 2:
        raise ValueError("orbit length n must be an integer >= 2")


def orbit_count_complete(V: int, n: int, t: int) -> Fraction:
    """Number of length-n periodic orbits on K_V with ``t`` transmissions.

    ``t >= 2``: ``(2/n) C(n,t) C(V,2) (V-2)^(t-2)``; a single transmission is
    impossible; ``t = 0`` orbits bounce on one edge and exist for even n only.
    """
    _check_complete(V, n)
    if not 0 <= t <= n:
        raise ValueError("need 0 <= t <= n")
    E = comb(V, 2)
    if t == 0:
        return Fraction(E if n % 2 == 0 else 0)
    if t == 1:
        return Fraction(0)
    return Fraction(2, n) * comb(n, t) * E * Fraction(V - 2) ** (t - 2)


def _weights(V):
    trans = Fraction(2, V - 1)
    refl = 1 - trans
    return trans * trans, refl * refl


def collapse_sum(V: int, n: int) -> Fraction:
    """``sum_{t=0}^{n} (2/n) C(n,t) (V-2)^(t-2) T^t R^(n-t)``, exactly.

    ``T = (2/(V-1))^2`` and ``R = (1 - 2/(V-1))^2`` are the squared
    transmission and reflection amplitudes; the sum collapses to
    ``2 / (n (V-2)^2)`` because ``(V-2) T + R = 1``.
    """
    _check_complete(V, n)
    T, R = _weights(V)
    return sum(Fraction(2, n) * comb(n, t) * Fraction(V - 2) ** (t - 2) * T ** t * R ** (n - t)
               for t in range(n + 1))


def collapse_target(V: int, n: int) -> Fraction:
    return Fraction(2, n * (V - 2) ** 2)


def k_diag_sum(V: int, n: int) -> Fraction:
    """Diagonal approximation as the explicit sum over transmission counts.

    ``n^2 [ (2/n^2) R^n + sum_{t=2}^{n} (2/n) C(n,t) (V-2)^(t-2) T^t R^(n-t) ]``.
    """
    _check_complete(V, n)
    T, R = _weights(V)
    body = Fraction(2, n * n) * R ** n
    body += sum(Fraction(2, n) * comb(n, t) * Fraction(V - 2) ** (t - 2) * T ** t * R ** (n - t)
                for t in range(2, n + 1))
    return n * n * body


def k_diag_complete(V: int, n: int, exact: bool = False):
    """Diagonal-approximation form factor of K_V at ``tau = n / 2E``.

    For ``n = 2`` only the bouncing (t = 0) orbits exist, giving
    ``2 (1 - 2/(V-1))^4``; the general closed form would add a spurious
    two-transmission term there.
    """
    _check_complete(V, n)
    r = 1 - Fraction(2, V - 1)
    if n == 2:
        value = 2 * r ** 4
    else:
        value = (Fraction(2 * n, (V - 2) ** 2)
                 + 2 * r ** (2 * n) * (1 - Fraction(n, (V - 2) ** 2)
                                       - Fraction(4 * n * n, (V - 1) ** 2 * (V - 2)) / (r * r)))
    return value if exact else float(value)


def k_diag_tau(V: int, tau: float) -> float:
    """``k_diag_complete`` at ``n = ceil(2 E tau)``."""
    n = math.ceil(2 * comb(V, 2) * tau - 1e-12)
    return k_diag_complete(V, max(n, 2))


def euler_ff_contribution(E: int, d: int, euler_count: int, exact: bool = False):
    """Eulerian-orbit share of the form factor at half the Heisenberg time.

    ``(1/2) E (2/d)^(2E) N_Euler^2`` for a d-regular Eulerian graph.
    """
    if E < 1 or d < 2:
        raise ValueError("need E >= 1 and d >= 2")
    if euler_count < 0:
        raise ValueError("euler_count must be non-negative")
    value = Fraction(E, 2) * Fraction(2, d) ** (2 * E) * Fraction(euler_count) ** 2
    return value if exact else float(value)


def asymptotic_euler_complete(m: int) -> float:
    """Log of the McKay-Robinson estimate of the Eulerian-cycle count of K_m.

    ``2^((m+1)/2) sqrt(pi) exp(-m^2/2 + 11/12) m^((m-2)(m+1)/2)``.
    """
    if int(m) != m or m < 5 or m % 2 == 0:
        raise ValueError("m must be an odd integer >= 5")
    return (0.5 * (m + 1) * math.log(2.0) + 0.5 * math.log(math.pi)
            - 0.5 * m * m + 11.0 / 12.0 + 0.5 * (m - 2) * (m + 1) * math.log(m))


def asymptotic_euler_ff_contribution(m: int) -> float:
    """Eulerian contribution for K_m using the asymptotic count (log-space)."""
    E, d = m * (m - 1) // 2, m - 1
    log_value = (math.log(E / 2.0) + 2 * E * math.log(2.0 / d)
                 + 2.0 * asymptotic_euler_complete(m))
    return math.exp(log_value)


# Eulerian-cycle counts quoted for graphs too large for the exact pipelines here.
KNOWN_EULER_COUNTS = {"K9": 911520057021235200}


@dataclass(frozen=True)
class DiagonalPrediction:
    V: int
    n: int
    value: float

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("diagonal prediction must be non-negative")

    @classmethod
    def compute(cls, V, n):
        return cls(V, n, k_diag_complete(V, n))

    @property
    def tau(self) -> float:
        return self.n / (2 * comb(self.V, 2))
