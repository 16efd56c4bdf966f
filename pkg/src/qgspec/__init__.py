"""Spectral statistics of quantum graphs with preferred-orientation vertex couplings."""

__version__ = "0.1.0"

from .errors import (GraphFileError, NotEulerianError, SizeGuardError,  # noqa: E402
                     WeylCheckError)
from .graph import (LengthSampler, MetricGraph, adjacency_matrix, build_complete,  # noqa: E402
                    build_cube, build_interval, build_octahedron, parse_graph_file,
                    sample_lengths)
from .scattering import NEUMANN, PREFERRED, VertexConditionSpec  # noqa: E402

__all__ = [
    "GraphFileError", "NotEulerianError", "SizeGuardError", "WeylCheckError",
    "LengthSampler", "MetricGraph", "adjacency_matrix", "build_complete", "build_cube",
    "build_interval", "build_octahedron", "parse_graph_file", "sample_lengths",
    "NEUMANN", "PREFERRED", "VertexConditionSpec",
]
