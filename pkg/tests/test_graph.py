import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qgspec.errors import (GraphFileError, LoopEdgeError, MalformedLineError,
                           NonPositiveLengthError, ParallelEdgeError)
from qgspec.graph import (LengthSampler, MetricGraph, adjacency_matrix, build_bowtie,
                          build_complete, build_cube, build_cycle, build_interval,
                          build_named, build_octahedron, format_graph, from_edges,
                          parse_graph_file, sample_lengths)

BUILT = [build_octahedron(), build_cube(), build_complete(5), build_complete(7),
         build_complete(9), build_cycle(5), build_bowtie(), build_interval(1.0)]


@pytest.mark.parametrize("V,E", [(5, 10), (7, 21), (9, 36)])
def test_complete_sizes(V, E):
    g = build_complete(V)
    assert g.edge_count == E
    assert set(g.degrees) == {V - 1}


def test_complete_rejects_small():
    with pytest.raises(ValueError):
        build_complete(2)


def test_octahedron_structure():
    g = build_octahedron()
    assert g.vertex_count == 6 and g.edge_count == 12
    assert list(g.degrees) == [4] * 6
    assert g.is_eulerian()
    A = adjacency_matrix(g)
    # every vertex misses exactly its antipode
    for v in range(6):
        assert A[v, v ^ 1] == 0 and A[v].sum() == 4


def test_cube_structure():
    g = build_cube()
    assert g.vertex_count == 8 and g.edge_count == 12
    assert list(g.degrees) == [3] * 8
    assert not g.is_eulerian()
    assert g.is_bipartite()
    assert not build_octahedron().is_bipartite()


def test_interval():
    g = build_interval(1.0)
    assert g.edge_count == 1 and g.bond_count == 2
    assert g.total_length == 1.0
    assert list(g.degrees) == [1, 1]


def test_sampler_deterministic():
    a = LengthSampler(7).draw(12)
    b = LengthSampler(7).draw(12)
    assert np.array_equal(a, b)
    assert np.all((a >= 1.0) & (a < 2.0))
    assert not np.array_equal(a, LengthSampler(8).draw(12))


def test_octahedron_total_length_range():
    g = sample_lengths(build_octahedron(), LengthSampler(3))
    assert 12 <= g.total_length < 24


@pytest.mark.parametrize("g", BUILT, ids=lambda g: g.name)
def test_builder_invariants(g):
    assert g.degrees.sum() == 2 * g.edge_count
    assert g.bond_count == 2 * g.edge_count
    for b in range(g.bond_count):
        r = MetricGraph.reversal(b)
        assert r != b and MetricGraph.reversal(r) == b
        assert g.bond_origin[b] == g.bond_terminal[r]
    assert g.is_connected()
    A = adjacency_matrix(g)
    assert np.array_equal(A, A.T)
    assert np.all(np.diag(A) == 0)
    assert np.array_equal(A.sum(axis=1), g.degrees)
    assert np.trace(A) == 0
    assert np.trace(A @ A) == 2 * g.edge_count
    for v in range(g.vertex_count):
        inc, out = g.bonds_at(v)
        assert len(inc) == len(out) == g.degrees[v]
        assert np.all(g.bond_terminal[inc] == v) and np.all(g.bond_origin[out] == v)


def test_octahedron_trace_a12():
    A = adjacency_matrix(build_octahedron())
    assert np.trace(np.linalg.matrix_power(A, 12)) // 12 == 1398784


def test_invalid_graphs():
    with pytest.raises(ValueError, match="loop"):
        from_edges(2, [(0, 0)])
    with pytest.raises(ValueError, match="parallel"):
        from_edges(2, [(0, 1), (1, 0)])
    with pytest.raises(ValueError):
        from_edges(2, [(0, 1)], [0.0])
    with pytest.raises(ValueError):
        from_edges(3, [(0, 1), (1, 2)], vertex_order=[(0,), (0,), (1,)])


def test_vertex_order_custom():
    g = from_edges(3, [(0, 1), (1, 2), (2, 0)], vertex_order=[(2, 0), (1, 0), (1, 2)])
    assert g.local_index(0, 2) == 0
    inc, out = g.bonds_at(0)
    assert list(out) == [5, 0]


def test_build_named():
    assert build_named("complete:5").edge_count == 10
    assert build_named("cycle:4").edge_count == 4
    assert build_named("interval:2.5").total_length == 2.5
    assert build_named("cube").name == "cube"
    with pytest.raises(ValueError):
        build_named("petersen")


def test_parse_single_line():
    g = parse_graph_file("0 1 1.5\n")
    assert g.edge_count == 1 and g.lengths == (1.5,)
    assert list(g.degrees) == [1, 1]


def test_parse_comments_and_order():
    text = "# triangle\n\n0 1 1.0\n2 1 1.5\n0 2 2.0\n"
    g = parse_graph_file(text)
    assert g.edges == ((0, 1), (2, 1), (0, 2))
    assert g.vertex_order[1] == (0, 1)


@pytest.mark.parametrize("text,exc,msg", [
    ("0 1 1.0\n1 0 2.0\n", ParallelEdgeError, "parallel edge"),
    ("0 0 1.0\n", LoopEdgeError, "loop"),
    ("0 1\n", MalformedLineError, "expected"),
    ("0 x 1.0\n", MalformedLineError, "cannot parse"),
    ("0 1 -1\n", NonPositiveLengthError, "non-positive"),
    ("0 1 0\n", NonPositiveLengthError, "non-positive"),
    ("# nothing\n", GraphFileError, "no edges"),
])
def test_parse_errors(text, exc, msg):
    with pytest.raises(exc, match=msg):
        parse_graph_file(text)


def test_parse_errors_are_distinct():
    kinds = {ParallelEdgeError, LoopEdgeError, MalformedLineError, NonPositiveLengthError}
    assert len(kinds) == 4
    assert all(issubclass(k, GraphFileError) for k in kinds)


def test_parse_error_line_number():
    with pytest.raises(LoopEdgeError) as info:
        parse_graph_file("0 1 1\n# c\n2 2 1\n")
    assert info.value.line_no == 3


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(min_value=1e-6, max_value=1e6, allow_nan=False), min_size=12,
                max_size=12))
def test_graph_file_round_trip(lengths):
    g = build_octahedron().with_lengths(lengths)
    back = parse_graph_file(format_graph(g))
    assert back.edges == g.edges
    assert back.lengths == g.lengths
