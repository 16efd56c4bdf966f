import itertools
import math
from fractions import Fraction
from math import comb

import numpy as np
import pytest

from qgspec.orbits import (KNOWN_EULER_COUNTS, DiagonalPrediction, asymptotic_euler_complete,
                           asymptotic_euler_ff_contribution, collapse_sum, collapse_target,
                           euler_ff_contribution, k_diag_complete, k_diag_sum, k_diag_tau,
                           orbit_count_complete)


def _brute_cycles(V, n, t):
    """Periodic bond orbits of length n on K_V with t transmissions (cyclic classes)."""
    bonds = [(u, v) for u in range(V) for v in range(V) if u != v]
    seen = set()
    for seq in itertools.product(range(len(bonds)), repeat=n):
        ok = all(bonds[seq[i]][1] == bonds[seq[(i + 1) % n]][0] for i in range(n))
        if not ok:
            continue
        trans = sum(bonds[seq[(i + 1) % n]][1] != bonds[seq[i]][0] for i in range(n))
        if trans != t:
            continue
        canon = min(tuple(seq[i:] + seq[:i]) for i in range(n))
        seen.add(canon)
    return len(seen)


def test_orbit_counts_examples():
    assert orbit_count_complete(5, 4, 0) == 10
    assert orbit_count_complete(5, 3, 0) == 0
    for V, n in [(5, 3), (7, 6), (9, 10)]:
        assert orbit_count_complete(V, n, 1) == 0
    assert orbit_count_complete(5, 3, 3) == 20
    assert _brute_cycles(5, 3, 3) == 20


@pytest.mark.parametrize("n,t", [(2, 0), (3, 3), (4, 0)])
def test_orbit_counts_brute_force(n, t):
    assert orbit_count_complete(5, n, t) == _brute_cycles(5, n, t)


def test_orbit_count_is_heuristic_beyond_triangles():
    # (V-2)^(t-2) ignores the closing constraint: 45 predicted, 30 directed 4-cycles on K5
    assert orbit_count_complete(5, 4, 4) == 45
    assert _brute_cycles(5, 4, 4) == 30


def test_orbit_count_validation():
    with pytest.raises(ValueError):
        orbit_count_complete(5, 4, 5)
    with pytest.raises(ValueError):
        orbit_count_complete(3, 4, 2)
    with pytest.raises(ValueError):
        orbit_count_complete(5, 1, 0)


@pytest.mark.parametrize("V", [5, 7, 9])
@pytest.mark.parametrize("n", range(2, 21))
def test_binomial_collapse_exact(V, n):
    assert collapse_sum(V, n) == collapse_target(V, n)


def test_n_equals_two():
    for V in (5, 6, 7, 9, 11):
        assert k_diag_complete(V, 2, exact=True) == 2 * (1 - Fraction(2, V - 1)) ** 4
    assert k_diag_complete(6, 2) == pytest.approx(0.2592, abs=1e-15)


@pytest.mark.parametrize("V", [5, 7])
def test_closed_form_matches_sum(V):
    for n in range(3, 21):
        assert abs(float(k_diag_sum(V, n)) - k_diag_complete(V, n)) < 1e-12
        assert k_diag_sum(V, n) == k_diag_complete(V, n, exact=True)


def test_large_graph_limit():
    V, tau = 101, 0.1
    n = math.ceil(2 * comb(V, 2) * tau)
    assert n == 1010
    assert abs(k_diag_complete(V, n) - 2 * tau) < 0.02
    assert k_diag_tau(V, tau) == k_diag_complete(V, n)


def test_limit_residual_decays():
    tau = 0.1
    res = [abs(k_diag_tau(V, tau) - 2 * tau) for V in (11, 21, 41, 81)]
    assert all(a > b for a, b in zip(res, res[1:]))


def test_diagonal_prediction():
    p = DiagonalPrediction.compute(7, 4)
    assert p.value == k_diag_complete(7, 4)
    assert p.tau == pytest.approx(4 / 42)
    with pytest.raises(ValueError):
        DiagonalPrediction(5, 2, -1.0)


@pytest.mark.parametrize("E,d,count,value,tol", [
    (12, 4, 744, 0.19796, 0.0005),
    (10, 4, 264, 0.3324, 0.0005),
    (21, 6, 129976320, 0.00162, 0.00002),
    (36, 8, KNOWN_EULER_COUNTS["K9"], 6.7e-7, 1e-7),
])
def test_euler_contributions(E, d, count, value, tol):
    assert abs(euler_ff_contribution(E, d, count) - value) < tol


def test_euler_contribution_exact_and_scaling():
    v = euler_ff_contribution(12, 4, 744, exact=True)
    assert v == Fraction(6 * 744 ** 2, 2 ** 24)
    assert euler_ff_contribution(12, 4, 3 * 744, exact=True) == 9 * v
    with pytest.raises(ValueError):
        euler_ff_contribution(12, 4, -1)


@pytest.mark.parametrize("m,exact", [(7, 129976320), (9, KNOWN_EULER_COUNTS["K9"])])
def test_asymptotic_count(m, exact):
    assert abs(math.exp(asymptotic_euler_complete(m)) / exact - 1) < 0.02


def test_asymptotic_exponent_choice():
    # the alternative reading exp(-m^12 / 2) is off by a factor exp(-3e9)
    log_printed = asymptotic_euler_complete(7) + 0.5 * 49 - 0.5 * 7 ** 12
    assert log_printed < math.log(129976320) - 1e6


def test_asymptotic_contribution_decreasing():
    vals = [asymptotic_euler_ff_contribution(m) for m in (5, 7, 9, 11)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        asymptotic_euler_complete(8)
