"""Experiment configuration, presets and dataset files.

A dataset has one row per time point. CSV files carry their metadata as
``#``-prefixed JSON lines ahead of the header; JSON files hold the same
metadata next to a ``rows`` array. Floats are written with ``repr``
(shortest round-trip form), so both formats re-import bit-identically.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .engines import AdiabaticEngine, Engine, make_engine
from .entangle import bipartite_concurrence, multipartite_concurrence
from .errors import ConfigError, IntegrationStepError
from .infoflow import FlowEstimator
from .qstate import MAX_SUBSYSTEM_QUBITS
from .constants import max_qubits

__all__ = [
    "COLUMNS",
    "ExperimentConfig",
    "PRESETS",
    "RunResult",
    "build_rows",
    "preset",
    "read_dataset",
    "run",
]

OUTPUT_KINDS = ("flow", "leakage", "entanglement", "trajectory")
COLUMNS = {
    "trajectory": ("P_target",),
    "flow": ("sigma", "p_guess_star"),
    "leakage": ("sigma_tilde", "leakage_cumulative"),
    "entanglement": ("C_bipartite", "E_multipartite"),
}
FORMULA_FLAGS = {
    "adiabatic_schedule": "local-adiabatic tangent schedule with atan(sqrt(N-1)) inside "
                          "the tangent; f(0)=1, f(T)=0",
    "adiabatic_runtime": "exact end time N*atan(sqrt(N-1))/(eps*sqrt(N-1)); "
                         "large-N form sqrt(N)*pi/(2*eps) reported as asymptotic_run_time",
    "multipartite_concurrence_exponent": "+1/2",
    "oracle": "selective sign flip of basis state |w>",
}
FORMATS = ("csv", "json")
# not written to datasets: they cannot change a single emitted value
RUNTIME_FIELDS = ("out_path", "workers")


@dataclass(frozen=True)
class ExperimentConfig:
    engine: str = "circuit"
    n: int = 8
    target: int = 0
    n_s: int = 1
    energy: float = 1.0
    epsilon: float = 0.2
    dt: float | None = None
    t1: float | None = None
    t2: float | None = None
    grid_points: int = 200
    samples: int = 10_000
    seed: int = 0
    outputs: tuple[str, ...] = ("trajectory", "flow", "leakage")
    format: str = "csv"
    out_path: str | None = None
    workers: int = 1

    def validate(self) -> "ExperimentConfig":
        if self.engine not in ("circuit", "analog", "adiabatic"):
            raise ConfigError("engine", f"unknown engine {self.engine!r}")
        if not 1 <= self.n <= max_qubits():
            raise ConfigError("n", f"must lie in [1, {max_qubits()}]")
        if not 0 <= self.target < 2**self.n:
            raise ConfigError("target", f"must lie in [0, {2**self.n})")
        flows = {"flow", "leakage"} & set(self.outputs)
        if flows and not 1 <= self.n_s <= min(self.n - 1, MAX_SUBSYSTEM_QUBITS):
            raise ConfigError("n_s", f"must lie in [1, {min(self.n - 1, MAX_SUBSYSTEM_QUBITS)}]")
        if not self.energy > 0:
            raise ConfigError("energy", "must be positive")
        if not 0 < self.epsilon < 1:
            raise ConfigError("epsilon", "must lie in (0, 1)")
        if self.dt is not None and not self.dt > 0:
            raise ConfigError("dt", "must be positive")
        if self.grid_points < 2:
            raise ConfigError("grid_points", "need at least 2 points")
        if self.samples < 1:
            raise ConfigError("samples", "must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed", "must be an unsigned 64-bit integer")
        unknown = set(self.outputs) - set(OUTPUT_KINDS)
        if unknown or not self.outputs:
            raise ConfigError("outputs", f"choose from {OUTPUT_KINDS}, got {sorted(self.outputs)}")
        if "entanglement" in self.outputs and self.n < 2:
            raise ConfigError("n", "entanglement outputs need at least 2 qubits")
        if self.format not in FORMATS:
            raise ConfigError("format", f"must be one of {FORMATS}")
        if self.workers < 1:
            raise ConfigError("workers", "must be at least 1")
        for name in ("t1", "t2"):
            value = getattr(self, name)
            if value is not None and (not math.isfinite(value) or value < 0):
                raise ConfigError(name, "must be a finite non-negative time")
        if self.t1 is not None and self.t2 is not None and self.t2 <= self.t1:
            raise ConfigError("t2", "must exceed t1")
        return self

    def to_dict(self, persist: bool = False) -> dict:
        """Field mapping; ``persist=True`` drops where/how the run executes."""
        d = dataclasses.asdict(self)
        d["outputs"] = list(self.outputs)
        if persist:
            for key in RUNTIME_FIELDS:
                d.pop(key)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        d["outputs"] = tuple(d.get("outputs", cls.outputs))
        return cls(**d)

    def columns(self) -> list[str]:
        cols = ["t", "t_normalized"]
        for kind in ("trajectory", "flow", "leakage", "entanglement"):
            if kind in self.outputs:
                cols.extend(COLUMNS[kind])
        return cols


@dataclass
class RunResult:
    config: ExperimentConfig
    columns: list[str]
    rows: list[list[float]]
    metadata: dict
    path: Path | None = None
    summary: dict = field(default_factory=dict)


def _engine_for(config: ExperimentConfig) -> Engine:
    try:
        return make_engine(config.engine, config.n, config.target, energy=config.energy,
                           epsilon=config.epsilon, dt=config.dt)
    except IntegrationStepError as exc:
        raise ConfigError("dt", str(exc)) from exc


def time_grid(engine: Engine, config: ExperimentConfig) -> np.ndarray:
    end = engine.run_time
    t1 = 0.0 if config.t1 is None else config.t1
    t2 = end if config.t2 is None else config.t2
    if t2 > end * (1 + 1e-12):
        raise ConfigError("t2", f"must not exceed the run time {end!r}")
    if engine.discrete:
        grid = np.arange(math.ceil(t1), math.floor(t2) + 1, dtype=float)
        if grid.size < 2:
            raise ConfigError("t2", "interval holds fewer than two iterations")
        return grid
    return np.linspace(t1, min(t2, end), config.grid_points)


def build_rows(config: ExperimentConfig) -> RunResult:
    """Compute the dataset for ``config`` without writing it."""
    config.validate()
    engine = _engine_for(config)
    times = time_grid(engine, config)
    run_time = engine.run_time
    columns = config.columns()
    data = {"t": times, "t_normalized": times / run_time}

    if {"trajectory", "entanglement"} & set(config.outputs):
        states = engine.states(times)
        if "trajectory" in config.outputs:
            data["P_target"] = np.abs(states[:, config.target]) ** 2
        if "entanglement" in config.outputs:
            data["C_bipartite"] = np.array([bipartite_concurrence(s) for s in states])
            data["E_multipartite"] = np.array([multipartite_concurrence(s) for s in states])

    if {"flow", "leakage"} & set(config.outputs):
        est = FlowEstimator(engine, config.n_s, config.samples, config.seed,
                            workers=config.workers)
        series = est.series(times)
        data["sigma"] = np.array([r.sigma for r in series.records])
        data["p_guess_star"] = np.array([r.p_guess_star for r in series.records])
        data["sigma_tilde"] = series.sigma_tilde
        data["leakage_cumulative"] = series.leakage_series

    rows = [[float(data[c][i]) for c in columns] for i in range(len(times))]
    meta = {
        "library": "infoflux",
        "version": __version__,
        "engine_params": engine.params(),
        "run_time": run_time,
        "derivative_step": engine.derivative_step,
        "formula_flags": FORMULA_FLAGS,
    }
    if isinstance(engine, AdiabaticEngine):
        meta["asymptotic_run_time"] = engine.asymptotic_run_time
        meta["integration_steps"] = engine.steps
    summary = {"rows": len(rows)}
    if "sigma" in data:
        summary["sigma_min"] = float(np.min(data["sigma"]))
        summary["sigma_max"] = float(np.max(data["sigma"]))
    if "leakage_cumulative" in data:
        summary["leakage_total"] = float(data["leakage_cumulative"][-1])
    if "P_target" in data:
        summary["P_final"] = float(data["P_target"][-1])
    return RunResult(config, columns, rows, meta, summary=summary)


def _header(config: ExperimentConfig, meta: dict) -> dict:
    return {"config": config.to_dict(persist=True), "meta": meta}


def render_csv(result: RunResult) -> str:
    buf = io.StringIO()
    header = _header(result.config, result.metadata)
    buf.write(f"# infoflux dataset {__version__}\n")
    buf.write("# config: " + json.dumps(header["config"], sort_keys=True) + "\n")
    buf.write("# meta: " + json.dumps(header["meta"], sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(result.columns)
    for row in result.rows:
        writer.writerow([repr(v) for v in row])
    return buf.getvalue()


def render_json(result: RunResult) -> str:
    doc = {
        "format": "infoflux-dataset",
        **_header(result.config, result.metadata),
        "columns": result.columns,
        "rows": result.rows,
    }
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def write(result: RunResult, path) -> Path:
    path = Path(path)
    text = render_json(result) if result.config.format == "json" else render_csv(result)
    try:
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigError("out_path", f"cannot write {path}: {exc.strerror or exc}") from exc
    result.path = path
    return path


def run(config: ExperimentConfig) -> RunResult:
    """Compute the dataset and write it to ``config.out_path`` when one is set."""
    result = build_rows(config)
    if config.out_path is not None:
        write(result, config.out_path)
    return result


def read_dataset(path) -> tuple[ExperimentConfig, dict, list[str], list[list[float]]]:
    """Parse a dataset file written by :func:`run` (either format)."""
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        return (ExperimentConfig.from_dict(doc["config"]), doc["meta"], doc["columns"],
                [[float(v) for v in row] for row in doc["rows"]])
    config = meta = None
    body = []
    for line in text.splitlines():
        if line.startswith("# config: "):
            config = ExperimentConfig.from_dict(json.loads(line[len("# config: "):]))
        elif line.startswith("# meta: "):
            meta = json.loads(line[len("# meta: "):])
        elif not line.startswith("#"):
            body.append(line)
    reader = csv.reader(body)
    columns = next(reader)
    rows = [[float(v) for v in row] for row in reader]
    return config, meta, columns, rows


FIG2_OUTPUTS = ("trajectory", "flow", "leakage")
FIG4_OUTPUTS = ("trajectory", "entanglement")

PRESETS = {
    "fig2a": [dict(engine="circuit")],
    "fig2b": [dict(engine="analog")],
    "fig2c": [dict(engine="adiabatic")],
    "fig2": [dict(engine=e) for e in ("circuit", "analog", "adiabatic")],
    "fig3": [dict(engine=e, n_s=k) for e in ("circuit", "analog") for k in (1, 2, 3, 4)],
    "fig4": [dict(engine=e, outputs=FIG4_OUTPUTS) for e in ("circuit", "analog", "adiabatic")],
}


def preset(name: str, **overrides) -> list[ExperimentConfig]:
    """Configurations reproducing one figure at ``n = 8``.

    ``overrides`` replace fields on every configuration; overriding
    ``engine`` or ``n_s`` instead selects the matching members of a
    multi-dataset preset.
    """
    try:
        entries = PRESETS[name]
    except KeyError:
        raise ConfigError("preset", f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    configs = [ExperimentConfig(**{"n": 8, "outputs": FIG2_OUTPUTS, **e}) for e in entries]
    for key in ("engine", "n_s"):
        if key in overrides and len({getattr(c, key) for c in configs}) > 1:
            wanted = overrides.pop(key)
            configs = [c for c in configs if getattr(c, key) == wanted]
            if not configs:
                raise ConfigError(key, f"preset {name!r} has no dataset with {key}={wanted!r}")
    configs = [dataclasses.replace(c, **overrides) for c in configs]
    return [c.validate() for c in configs]


def dataset_name(name: str, config: ExperimentConfig) -> str:
    suffix = f"_ns{config.n_s}" if {"flow", "leakage"} & set(config.outputs) else ""
    return f"{name}_{config.engine}{suffix}.{config.format}"


def run_preset(name: str, out_dir, **overrides) -> list[RunResult]:
    results = []
    for config in preset(name, **overrides):
        path = os.path.join(out_dir, dataset_name(name, config))
        results.append(run(dataclasses.replace(config, out_path=path)))
    return results
