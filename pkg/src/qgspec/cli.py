"""Command-line front end: ``qgspec <command> --config run.json --out results/``.

Exit codes: 0 success, 2 configuration error, 3 internal consistency failure,
4 numerical-validation failure (for example a Weyl-law violation).
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import platform
import sys
import time
from pathlib import Path
from typing import List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from . import __version__
from .errors import GraphFileError, NotEulerianError, SizeGuardError, WeylCheckError
from .graph import LengthSampler, MetricGraph, build_named, read_graph, sample_lengths
from .scattering import VertexConditionSpec, circulant_U, trs_measure, trs_measure_circulant

log = logging.getLogger("qgspec")

EXIT_OK, EXIT_CONFIG, EXIT_CONSISTENCY, EXIT_NUMERICAL = 0, 2, 3, 4

OUTPUTS = {
    "spectrum": ["spectrum.csv", "weyl.json"],
    "nnspacing": ["spacing_histogram.csv", "ks_summary.json"],
    "formfactor": ["formfactor_eigenvalue.csv", "formfactor_eigenphase.csv",
                   "formfactor_goe.csv"],
    "eulercount": ["eulercount.json"],
    "trsmeasure": ["trsmeasure.csv"],
    "diagff": ["diag_ff.csv", "euler_ff.csv"],
}


class ConfigError(Exception):
    pass


# -- configuration -----------------------------------------------------------------

class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ConditionConfig(_Strict):
    variant: Literal["preferred", "distorted", "neumann", "custom"] = "preferred"
    mu: float = 0.0
    asymptotic: bool = False
    matrix_real: Optional[List[List[float]]] = None
    matrix_imag: Optional[List[List[float]]] = None

    def build(self) -> VertexConditionSpec:
        matrix = None
        if self.matrix_real is not None:
            matrix = np.array(self.matrix_real, dtype=complex)
            if self.matrix_imag is not None:
                matrix = matrix + 1j * np.array(self.matrix_imag, dtype=float)
        return VertexConditionSpec(self.variant, self.mu, matrix, self.asymptotic)


class RunConfig(_Strict):
    graph: str = "octahedron"
    conditions: Union[ConditionConfig, List[ConditionConfig]] = ConditionConfig()
    seed: int = Field(0, ge=0, lt=2 ** 64)
    length_low: float = Field(1.0, gt=0)
    length_high: float = Field(2.0, gt=0)


class SpectrumConfig(RunConfig):
    k_min: float = Field(0.5, gt=0)
    k_max: Optional[float] = None
    n_levels: Optional[int] = Field(None, gt=0)
    grid_factor: float = Field(20.0, gt=0)
    refine_tol: float = Field(1e-10, gt=0)
    mode: Literal["exact", "asymptotic"] = "exact"
    weyl_bound: Optional[float] = Field(None, gt=0)

    @field_validator("k_max")
    @classmethod
    def _window(cls, v, info):
        if v is not None and v <= info.data.get("k_min", 0.0):
            raise ValueError("k_max must exceed k_min")
        return v


class SpacingConfig(SpectrumConfig):
    bin_width: float = Field(0.1, gt=0)
    s_max: float = Field(4.0, gt=0)
    spectrum_file: Optional[str] = None


class FormFactorConfig(SpectrumConfig):
    estimators: List[Literal["eigenvalue", "eigenphase"]] = ["eigenvalue", "eigenphase"]
    spectrum_file: Optional[str] = None
    window_size: int = Field(1000, ge=1000)
    tau_step: float = Field(0.01, gt=0)
    tau_max: float = Field(3.0, gt=0)
    n_max: Optional[int] = Field(None, gt=0)
    k_samples: int = Field(20000, ge=1000)
    k_window: Optional[Tuple[float, float]] = None
    phase_mode: Literal["exact", "asymptotic"] = "asymptotic"


class EulerConfig(RunConfig):
    methods: List[Literal["transform", "best", "backtrack"]] = ["transform", "best", "backtrack"]


class TrsConfig(_Strict):
    degrees: List[int] = [3, 4, 5, 6, 7, 8]
    k_min: float = Field(1e-3, gt=0)
    k_max: float = Field(1e3, gt=0)
    points: int = Field(1000, ge=2)
    seed: int = Field(0, ge=0, lt=2 ** 64)

    @field_validator("degrees")
    @classmethod
    def _degrees(cls, v):
        if not v or min(v) < 2:
            raise ValueError("degrees must be integers >= 2")
        return v


class DiagConfig(_Strict):
    vertices: List[int] = [5, 7, 9, 11, 21, 41, 81, 101]
    n_max: int = Field(20, ge=2)
    taus: List[float] = [0.1]
    seed: int = Field(0, ge=0, lt=2 ** 64)

    @field_validator("vertices")
    @classmethod
    def _vertices(cls, v):
        if not v or min(v) < 4:
            raise ValueError("vertex counts must be >= 4")
        return v


CONFIGS = {
    "spectrum": SpectrumConfig,
    "nnspacing": SpacingConfig,
    "formfactor": FormFactorConfig,
    "eulercount": EulerConfig,
    "trsmeasure": TrsConfig,
    "diagff": DiagConfig,
}


def load_config(command: str, path=None, seed=None):
    raw = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
    if seed is not None:
        raw["seed"] = seed
    try:
        return CONFIGS[command].model_validate(raw)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from None


def resolve_graph(cfg: RunConfig) -> MetricGraph:
    try:
        if os.path.exists(cfg.graph):
            graph = read_graph(cfg.graph)
        else:
            graph = build_named(cfg.graph)
            if cfg.graph.startswith("interval"):
                return graph
            graph = sample_lengths(graph, LengthSampler(cfg.seed, cfg.length_low, cfg.length_high))
    except (GraphFileError, ValueError) as exc:
        raise ConfigError(f"graph {cfg.graph!r}: {exc}") from None
    return graph


def resolve_conditions(cfg: RunConfig, graph: MetricGraph):
    try:
        if isinstance(cfg.conditions, list):
            if len(cfg.conditions) != graph.vertex_count:
                raise ValueError(f"need {graph.vertex_count} vertex conditions, "
                                 f"got {len(cfg.conditions)}")
            specs = [c.build() for c in cfg.conditions]
        else:
            specs = cfg.conditions.build()
        # validates degree compatibility
        from .evolution import BondLayout
        BondLayout(graph, specs)
    except ValueError as exc:
        raise ConfigError(f"vertex conditions: {exc}") from None
    return specs


# -- output helpers -----------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_text(out: Path, name: str, text: str):
    with open(out / name, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def write_json(out: Path, name: str, payload):
    write_text(out, name, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _versions():
    import numba
    import scipy
    import sklearn
    return {"python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "numba": numba.__version__,
            "scikit-learn": sklearn.__version__, "qgspec": __version__}


def _spectrum_for(cfg, graph, specs, n_jobs):
    from .solver import read_spectrum_csv, solve_spectrum, weyl_residual
    if getattr(cfg, "spectrum_file", None):
        ks = read_spectrum_csv(cfg.spectrum_file)
        return ks, weyl_residual(ks, graph.total_length, cfg.k_min, ks[-1] if len(ks) else cfg.k_max)
    if cfg.k_max is None and cfg.n_levels is None:
        raise ConfigError("give k_max or n_levels")
    spectrum = solve_spectrum(graph, specs, cfg.k_min, cfg.k_max, cfg.grid_factor,
                              cfg.refine_tol, cfg.mode, cfg.n_levels,
                              cfg.weyl_bound, n_jobs=n_jobs)
    return spectrum.ks, spectrum.weyl_residual


# -- commands ----------------------------------------------------------------------

def cmd_spectrum(cfg: SpectrumConfig, out: Path, n_jobs=1):
    from .solver import solve_spectrum
    graph = resolve_graph(cfg)
    specs = resolve_conditions(cfg, graph)
    if cfg.k_max is None and cfg.n_levels is None:
        raise ConfigError("give k_max or n_levels")
    spectrum = solve_spectrum(graph, specs, cfg.k_min, cfg.k_max, cfg.grid_factor,
                              cfg.refine_tol, cfg.mode, cfg.n_levels,
                              cfg.weyl_bound, n_jobs=n_jobs)
    spectrum.write_csv(out / "spectrum.csv")
    write_json(out, "weyl.json", {
        "graph": graph.name, "count": int(len(spectrum)),
        "window": [_fmt(x) for x in spectrum.window],
        "total_length": _fmt(graph.total_length),
        "weyl_residual": _fmt(spectrum.weyl_residual),
        "bound": cfg.weyl_bound or 2 * graph.edge_count, "grid_factor": spectrum.grid_factor,
        "refine_tol": spectrum.tolerance,
    })
    return {"count": int(len(spectrum))}


def cmd_nnspacing(cfg: SpacingConfig, out: Path, n_jobs=1):
    from . import stats
    graph = resolve_graph(cfg)
    specs = resolve_conditions(cfg, graph)
    ks, residual = _spectrum_for(cfg, graph, specs, n_jobs)
    xs = stats.unfold(ks, graph.total_length)
    hist = stats.nn_histogram(xs, cfg.bin_width, cfg.s_max)
    write_text(out, "spacing_histogram.csv", hist.to_csv())
    s = stats.spacings(xs)
    ks_goe = stats.ks_distance(s, stats.wigner_goe_cdf)
    ks_poi = stats.ks_distance(s, stats.poisson_cdf)
    write_json(out, "ks_summary.json", {
        "graph": graph.name, "levels": int(len(ks)), "spacings": int(len(s)),
        "ks_goe": _fmt(ks_goe), "ks_poisson": _fmt(ks_poi),
        "closer_to": "goe" if ks_goe < ks_poi else "poisson",
        "weyl_residual": _fmt(residual),
    })
    return {"ks_goe": ks_goe, "ks_poisson": ks_poi}


def cmd_formfactor(cfg: FormFactorConfig, out: Path, n_jobs=1):
    from . import stats
    graph = resolve_graph(cfg)
    specs = resolve_conditions(cfg, graph)
    B = graph.bond_count
    taus_all = []
    if "eigenvalue" in cfg.estimators:
        ks, _ = _spectrum_for(cfg, graph, specs, n_jobs)
        xs = stats.unfold(ks, graph.total_length)
        taus = cfg.tau_step * np.arange(1, int(round(cfg.tau_max / cfg.tau_step)) + 1)
        try:
            series = stats.sff_from_eigenvalues(xs, taus, cfg.window_size)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        write_text(out, "formfactor_eigenvalue.csv", series.to_csv())
        taus_all.append(series.taus)
    if "eigenphase" in cfg.estimators:
        n_max = cfg.n_max or 3 * B
        series = stats.sff_eigenphases_series(graph, specs, np.arange(1, n_max + 1),
                                              cfg.k_samples, cfg.k_window, cfg.phase_mode,
                                              cfg.seed)
        write_text(out, "formfactor_eigenphase.csv", series.to_csv())
        taus_all.append(series.taus)
    taus = np.unique(np.concatenate(taus_all)) if taus_all else np.zeros(0)
    goe = stats.FormFactorSeries(taus, np.atleast_1d(stats.goe_form_factor(taus)), "goe",
                                 np.zeros_like(taus))
    write_text(out, "formfactor_goe.csv", goe.to_csv())
    return {}


def cmd_eulercount(cfg: EulerConfig, out: Path, n_jobs=1):
    from . import orbitcount
    graph = resolve_graph(cfg)
    runners = {"transform": orbitcount.euler_count_transform,
               "best": orbitcount.euler_count_best,
               "backtrack": orbitcount.euler_count_backtrack}
    records = []
    for method in cfg.methods:
        t0 = time.perf_counter()
        try:
            count = runners[method](graph)
        except (NotEulerianError, SizeGuardError) as exc:
            raise ConfigError(f"{method}: {exc}") from None
        records.append({"graph": graph.name, "method": method, "count": str(count),
                        "n": graph.edge_count,
                        "elapsed_s": round(time.perf_counter() - t0, 6)})
    agree = len({r["count"] for r in records}) <= 1
    write_json(out, "eulercount.json", {"graph": graph.name, "results": records,
                                        "agree": agree})
    if not agree:
        raise ConsistencyError("Eulerian counts disagree: "
                               + ", ".join(f"{r['method']}={r['count']}" for r in records))
    return {"count": records[0]["count"] if records else None}


def cmd_trsmeasure(cfg: TrsConfig, out: Path, n_jobs=1):
    ks = np.geomspace(cfg.k_min, cfg.k_max, cfg.points)
    rows = ["d,k,M,M_circulant"]
    for d in cfg.degrees:
        U = circulant_U(d)
        for k in ks:
            rows.append(f"{d},{_fmt(k)},{_fmt(trs_measure(U, k))},"
                        f"{_fmt(trs_measure_circulant(d, k))}")
    write_text(out, "trsmeasure.csv", "\n".join(rows) + "\n")
    return {}


def cmd_diagff(cfg: DiagConfig, out: Path, n_jobs=1):
    from math import comb

    from . import orbitcount, orbits
    from .graph import build_complete, build_octahedron
    rows = ["V,n,tau,K_diag"]
    for V in cfg.vertices:
        E = comb(V, 2)
        ns = list(range(2, cfg.n_max + 1))
        ns += [max(2, math.ceil(2 * E * t - 1e-12)) for t in cfg.taus]
        for n in sorted(set(ns)):
            rows.append(f"{V},{n},{_fmt(n / (2 * E))},{_fmt(orbits.k_diag_complete(V, n))}")
    write_text(out, "diag_ff.csv", "\n".join(rows) + "\n")
    rows = ["graph,E,d,count,contribution,source"]
    cases = [("octahedron", build_octahedron()), ("K5", build_complete(5)),
             ("K7", build_complete(7))]
    for name, g in cases:
        count = orbitcount.euler_count_best(g)
        d = int(g.degrees[0])
        rows.append(f"{name},{g.edge_count},{d},{count},"
                    f"{_fmt(orbits.euler_ff_contribution(g.edge_count, d, count))},best")
    count = orbits.KNOWN_EULER_COUNTS["K9"]
    rows.append(f"K9,36,8,{count},{_fmt(orbits.euler_ff_contribution(36, 8, count))},tabulated")
    write_text(out, "euler_ff.csv", "\n".join(rows) + "\n")
    return {}


class ConsistencyError(Exception):
    pass


COMMANDS = {
    "spectrum": cmd_spectrum,
    "nnspacing": cmd_nnspacing,
    "formfactor": cmd_formfactor,
    "eulercount": cmd_eulercount,
    "trsmeasure": cmd_trsmeasure,
    "diagff": cmd_diagff,
}


def _set_threads(threads):
    import numba
    if threads is None:
        return 1
    if threads < 0:
        raise ConfigError("--threads must be >= 0")
    n = (os.cpu_count() or 1) if threads == 0 else threads
    numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
    return n


def build_parser():
    parser = argparse.ArgumentParser(prog="qgspec", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qgspec {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=str, default=None, help="JSON run configuration")
        p.add_argument("--out", type=str, default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="overrides the config seed")
        p.add_argument("--threads", type=int, default=None, help="worker threads (0 = auto)")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    t0 = time.perf_counter()
    try:
        if args.seed is not None and not 0 <= args.seed < 2 ** 64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        cfg = load_config(args.command, args.config, args.seed)
        n_jobs = _set_threads(args.threads)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        summary = COMMANDS[args.command](cfg, out, n_jobs)
    except ConfigError as exc:
        print(f"qgspec: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConsistencyError as exc:
        print(f"qgspec: consistency failure: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except WeylCheckError as exc:
        print(f"qgspec: numerical validation failed: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    write_json(out, "manifest.json", {
        "command": args.command,
        "config": cfg.model_dump(mode="json"),
        "versions": _versions(),
        "outputs": [f for f in OUTPUTS[args.command] if (out / f).exists()],
        "summary": {k: (v if not isinstance(v, float) else _fmt(v)) for k, v in summary.items()},
        "elapsed_s": round(time.perf_counter() - t0, 6),
    })
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
