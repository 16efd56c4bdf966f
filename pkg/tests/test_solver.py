import math

import numpy as np
import pytest

from qgspec.errors import WeylCheckError
from qgspec.evolution import BondLayout
from qgspec.graph import (LengthSampler, build_cube, build_interval, build_octahedron,
                          from_edges, sample_lengths)
from qgspec.scattering import NEUMANN, PREFERRED, VertexConditionSpec
from qgspec.solver import (Spectrum, dedupe, read_spectrum_csv, solve_spectrum,
                           weyl_count_check, weyl_residual)


def test_interval_example_window():
    s = solve_spectrum(build_interval(1.0), NEUMANN, 0.5, 100.5)
    assert len(s) == 31
    assert np.max(np.abs(s.ks - math.pi * np.arange(1, 32))) < 1e-10
    assert weyl_count_check(s, build_interval(1.0)) <= 1


def test_interval_first_hundred_roots():
    ell = 1.3
    g = build_interval(ell)
    s = solve_spectrum(g, NEUMANN, 0.5, 100.5 * math.pi / ell)
    assert len(s) == 100
    assert np.max(np.abs(s.ks - math.pi * np.arange(1, 101) / ell)) < 1e-10


def test_octahedron_roots_are_zeros(octahedron):
    s = solve_spectrum(octahedron, PREFERRED, 0.5, 60.0)
    assert s.weyl_residual <= 2 * octahedron.edge_count
    layout = BondLayout(octahedron, PREFERRED)
    B = octahedron.bond_count
    at_roots = np.abs(np.linalg.det(np.eye(B) - layout.evolution_batch(s.ks)))
    grid = np.arange(0.5, 60.0, (math.pi / octahedron.total_length) / 20)
    on_grid = np.abs(np.linalg.det(np.eye(B) - layout.evolution_batch(grid)))
    assert np.max(at_roots) < 1e-6 * np.median(on_grid)
    assert np.all(np.diff(s.ks) > 0)
    assert s.ks[0] > 0.5 and s.ks[-1] <= 60.0


@pytest.mark.parametrize("spec", [PREFERRED, NEUMANN, VertexConditionSpec("distorted", 0.3)],
                         ids=["preferred", "neumann", "distorted"])
def test_grid_halving_stable(octahedron, spec):
    a = solve_spectrum(octahedron, spec, 0.5, 80.0, grid_factor=20)
    b = solve_spectrum(octahedron, spec, 0.5, 80.0, grid_factor=40)
    assert len(a) == len(b)
    assert np.max(np.abs(a.ks - b.ks)) < 10 * a.tolerance


def test_edge_reordering_invariance(octahedron):
    g = octahedron
    perm = np.random.default_rng(4).permutation(g.edge_count)
    inverse = np.argsort(perm)
    edges = [g.edges[p] for p in perm]
    lengths = [g.lengths[p] for p in perm]
    order = [tuple(int(inverse[e]) for e in g.vertex_order[v]) for v in range(g.vertex_count)]
    h = from_edges(g.vertex_count, edges, lengths, order)
    a = solve_spectrum(g, PREFERRED, 0.5, 50.0)
    b = solve_spectrum(h, PREFERRED, 0.5, 50.0)
    assert len(a) == len(b)
    assert np.max(np.abs(a.ks - b.ks)) < 10 * a.tolerance


def test_weyl_bound_on_cube(cube):
    s = solve_spectrum(cube, PREFERRED, 0.5, 150.0)
    assert s.weyl_residual <= 2 * cube.edge_count
    assert weyl_count_check(s, cube) == pytest.approx(s.weyl_residual)


def test_n_levels_and_threads(octahedron):
    a = solve_spectrum(octahedron, PREFERRED, 0.5, n_levels=300)
    b = solve_spectrum(octahedron, PREFERRED, 0.5, n_levels=300, n_jobs=3)
    assert len(a) == 300
    assert np.array_equal(a.ks, b.ks)
    full = solve_spectrum(octahedron, PREFERRED, 0.5, a.window[1])
    assert np.array_equal(full.ks, a.ks)


def test_subwindow_merge(octahedron):
    whole = solve_spectrum(octahedron, PREFERRED, 0.5, 40.0)
    left = solve_spectrum(octahedron, PREFERRED, 0.5, 20.0)
    right = solve_spectrum(octahedron, PREFERRED, 20.0, 40.0)
    merged = dedupe(np.concatenate([left.ks, right.ks]), 10 * whole.tolerance)
    assert len(merged) == len(whole)
    assert np.max(np.abs(merged - whole.ks)) < 10 * whole.tolerance


def test_empty_window_residual():
    g = build_interval(1.0)
    s = solve_spectrum(g, NEUMANN, 0.5, 1.0)
    assert len(s) == 0
    assert s.weyl_residual <= g.total_length * 0.5 / math.pi + 1e-12


def test_weyl_residual_function():
    ks = math.pi * np.arange(1, 11)
    assert weyl_residual(ks, 1.0, 1e-9, 10 * math.pi) < 1 + 1e-6
    assert weyl_residual(ks[::2], 1.0, 1e-9, 10 * math.pi) >= 5 - 1e-6


def test_weyl_failure_raises(octahedron):
    with pytest.raises(WeylCheckError) as info:
        solve_spectrum(octahedron, PREFERRED, 0.5, 30.0, weyl_bound=1e-3)
    assert info.value.residual > info.value.bound


def test_window_validation(octahedron):
    with pytest.raises(ValueError):
        solve_spectrum(octahedron, PREFERRED, 0.0, 10.0)
    with pytest.raises(ValueError):
        solve_spectrum(octahedron, PREFERRED, 5.0, 1.0)
    with pytest.raises(ValueError):
        solve_spectrum(octahedron, PREFERRED, 0.5)


def test_csv_round_trip(tmp_path, octahedron):
    s = solve_spectrum(octahedron, PREFERRED, 0.5, 20.0)
    path = tmp_path / "spectrum.csv"
    s.write_csv(path)
    assert path.read_text().splitlines()[0] == "k"
    assert np.array_equal(read_spectrum_csv(path), s.ks)


def _neumann_edge_distance(graph, ks):
    L = graph.total_length
    best = np.full(len(ks), np.inf)
    for ell in graph.lengths:
        n = np.rint(ks * ell / math.pi)
        best = np.minimum(best, np.abs(ks - n * math.pi / ell))
    return best / (math.pi / L)


def test_distorted_spectrum_decouples_at_high_k(octahedron):
    spec = VertexConditionSpec("distorted", 0.01)
    s = solve_spectrum(octahedron, spec, 1e5, 1e5 + 50)
    assert len(s) > 200
    assert np.all(_neumann_edge_distance(octahedron, s.ks) < 0.05)


def test_distorted_decoupling_improves_with_k(octahedron):
    # residual vertex phase at the eigenvalue next to -1 is about 2 arctan(2 / (mu k))
    spec = VertexConditionSpec("distorted", 0.01)
    fractions = []
    for k0 in (1e3, 1e4, 1e5):
        s = solve_spectrum(octahedron, spec, k0, k0 + 50)
        fractions.append(np.mean(_neumann_edge_distance(octahedron, s.ks) < 0.05))
    assert fractions[0] < fractions[1] < fractions[2] == 1.0
