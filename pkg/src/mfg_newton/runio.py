"""Run configuration and on-disk artifacts.

A run writes four files into its output directory: fields_u.csv and
fields_m.csv with one row per (time level, node), history.json with the
iteration record, and meta.json with every resolved setting so the run is
reproducible from the metadata alone. Floats are formatted %.12e and rows
are emitted in a fixed order, so rerunning the same configuration produces
byte-identical field files.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .grid import GridSpec
from .newton_driver import NewtonConfig, grid_for
from .problems import MfgProblem, builtin_problem, expression_problem, sample

FIELD_HEADER = "k,i,j,x1,x2,value"

_RUN_KEYS = ("problem", "n_space", "dt", "out_dir", "seed", "normalize_m0")


@dataclass
class RunConfig:
    """One experiment: a problem, a resolution, and solver settings."""

    problem: str | dict = "test1"
    n_space: int = 40
    dt: float | None = None
    out_dir: str = "runs/latest"
    seed: int = 0
    normalize_m0: bool = False
    newton: NewtonConfig = field(default_factory=NewtonConfig)

    def __post_init__(self):
        if self.n_space < 3:
            raise ValueError(f"n_space must be at least 3, got {self.n_space}")
        if self.dt is not None and not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")

    @classmethod
    def from_mapping(cls, mapping: dict) -> "RunConfig":
        """Build from a flat mapping; unknown keys raise with their names."""
        run_kwargs = {}
        newton_kwargs = {}
        newton_fields = {f.name for f in dataclasses.fields(NewtonConfig)}
        unknown = []
        for key, value in mapping.items():
            if key in _RUN_KEYS:
                run_kwargs[key] = value
            elif key in newton_fields:
                newton_kwargs[key] = value
            else:
                unknown.append(key)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(newton=NewtonConfig(**newton_kwargs), **run_kwargs)

    def resolve_problem(self) -> MfgProblem:
        if isinstance(self.problem, str):
            prob = builtin_problem(self.problem)
        else:
            prob = expression_problem(**self.problem)
        if self.normalize_m0:
            prob = _normalized_m0(prob, self.n_space)
        return prob

    def resolve_grid(self, problem: MfgProblem) -> GridSpec:
        if self.dt is None:
            return grid_for(problem, self.n_space, self.newton)
        n_time = max(1, round(problem.horizon / self.dt))
        return GridSpec(
            dim=problem.dim,
            n_space=self.n_space,
            n_time=n_time,
            horizon=problem.horizon,
        )

    def to_mapping(self) -> dict:
        out = {k: getattr(self, k) for k in _RUN_KEYS}
        out.update(dataclasses.asdict(self.newton))
        return out


def _normalized_m0(problem: MfgProblem, n_space: int) -> MfgProblem:
    """Clip the initial density at zero and rescale to unit discrete mass."""
    grid = GridSpec(dim=problem.dim, n_space=n_space, n_time=1, horizon=problem.horizon)
    clipped = np.maximum(sample(problem.m0, grid), 0.0)
    mass = clipped.sum() * grid.h**problem.dim
    if mass <= 0:
        raise ValueError("initial density vanishes after clipping; cannot rescale")
    scale = 1.0 / mass
    original = problem.m0
    return dataclasses.replace(
        problem, m0=lambda x: np.maximum(original(x), 0.0) * scale
    )


def field_lines(values: np.ndarray, grid: GridSpec):
    """Rows of one field file, fixed order: level-major, flat node order."""
    n = grid.n_nodes
    values = np.asarray(values, dtype=float).reshape(-1, n)
    ax_i = np.arange(n) % grid.n_space
    ax_j = np.arange(n) // grid.n_space
    nodes = grid.nodes()
    x1 = nodes[:, 0]
    x2 = nodes[:, 1] if grid.dim == 2 else np.zeros(n)
    yield FIELD_HEADER
    for k in range(values.shape[0]):
        row = values[k]
        for node in range(n):
            yield (
                f"{k},{ax_i[node]},{ax_j[node]},"
                f"{x1[node]:.12e},{x2[node]:.12e},{row[node]:.12e}"
            )


def write_fields(path, values: np.ndarray, grid: GridSpec) -> None:
    Path(path).write_text("\n".join(field_lines(values, grid)) + "\n")


def read_fields(path):
    """Parse a field file back into (values, columns) in file order."""
    lines = Path(path).read_text().strip().split("\n")
    if lines[0] != FIELD_HEADER:
        raise ValueError(f"unexpected field header {lines[0]!r} in {path}")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    k = data[:, 0].astype(int)
    levels = k.max() + 1
    if len(data) % levels:
        raise ValueError(f"row count {len(data)} not a multiple of {levels} levels")
    n = len(data) // levels
    if not np.array_equal(k, np.repeat(np.arange(levels), n)):
        raise ValueError(f"level column out of order in {path}")
    cols = {
        "i": data[:n, 1].astype(int),
        "j": data[:n, 2].astype(int),
        "x1": data[:n, 3],
        "x2": data[:n, 4],
    }
    return data[:, 5].reshape(levels, n), cols


def _json_dump(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_run(
    out_dir,
    run_config: RunConfig,
    problem: MfgProblem,
    grid: GridSpec,
    u: np.ndarray,
    m: np.ndarray,
    history,
    wall_time: float,
) -> dict:
    """Write all four artifact files; returns their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "fields_u": out / "fields_u.csv",
        "fields_m": out / "fields_m.csv",
        "history": out / "history.json",
        "meta": out / "meta.json",
    }
    write_fields(paths["fields_u"], u, grid)
    write_fields(paths["fields_m"], m, grid)
    _json_dump(paths["history"], history.to_dict())
    meta = {
        "config": run_config.to_mapping(),
        "problem_label": problem.label,
        "dim": problem.dim,
        "nu": problem.nu,
        "horizon": problem.horizon,
        "n_space": grid.n_space,
        "n_time": grid.n_time,
        "h": grid.h,
        "dt": grid.dt,
        "status": history.status,
        "iterations": history.iterations,
        "wall_time_seconds": wall_time,
        "version": __version__,
    }
    _json_dump(paths["meta"], meta)
    return {k: str(v) for k, v in paths.items()}


def read_run(out_dir) -> dict:
    out = Path(out_dir)
    u, cols = read_fields(out / "fields_u.csv")
    m, _ = read_fields(out / "fields_m.csv")
    history = json.loads((out / "history.json").read_text())
    meta = json.loads((out / "meta.json").read_text())
    return {"u": u, "m": m, "columns": cols, "history": history, "meta": meta}
