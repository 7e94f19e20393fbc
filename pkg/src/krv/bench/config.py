"""Experiment configuration read from TOML."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

LEARNERS = ("knn", "wnn", "kernn", "krv", "rvm_bern", "rvm_gauss")
KERNELS = ("gaussian", "polynomial")
SCALINGS = ("minmax", "standard")

DEFAULT_K_GRID = tuple(range(1, 52))
DEFAULT_WIDTH_GRID = tuple(round(0.05 * i, 2) for i in range(1, 21))
DEFAULT_DELTA_GRID = (1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    """One benchmark: which learners on which datasets, over which grids.

    Attributes are rescaled per training fold (``minmax`` onto [0, 1] or
    ``standard`` z-scores) and the same map is applied to the test fold.
    Relative dataset paths in a config file resolve against the file's folder.
    ``n_jobs`` > 1 spreads (run, fold) units over worker processes; results
    are identical to the sequential run.
    """

    datasets: tuple[str, ...]
    learners: tuple[str, ...] = LEARNERS
    kernel: str = "gaussian"
    k_grid: tuple[int, ...] = DEFAULT_K_GRID
    width_grid: tuple[float, ...] = DEFAULT_WIDTH_GRID
    delta_grid: tuple[float, ...] = DEFAULT_DELTA_GRID
    poly_order: int = 2
    scaling: str = "minmax"
    runs: int = 10
    folds: int = 10
    seed: int = 0
    output_dir: str = "results"
    label_column: int = -1
    n_jobs: int = 1

    def __post_init__(self):
        fix = lambda name, conv: object.__setattr__(self, name, tuple(conv(v) for v in getattr(self, name)))
        fix("datasets", str)
        fix("learners", str)
        fix("k_grid", int)
        fix("width_grid", float)
        fix("delta_grid", float)
        if not self.datasets:
            raise ConfigError("no datasets configured")
        if not self.learners:
            raise ConfigError("empty learner set")
        unknown = [name for name in self.learners if name not in LEARNERS]
        if unknown:
            raise ConfigError(f"unknown learners {unknown}; choose from {LEARNERS}")
        if len(set(self.learners)) != len(self.learners):
            raise ConfigError("duplicate learners")
        if self.kernel not in KERNELS:
            raise ConfigError(f"unknown kernel {self.kernel!r}; choose from {KERNELS}")
        for name in ("k_grid", "width_grid", "delta_grid"):
            values = getattr(self, name)
            if not values:
                raise ConfigError(f"{name} is empty")
            if len(set(values)) != len(values):
                raise ConfigError(f"{name} has duplicates")
            if min(values) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.scaling not in SCALINGS:
            raise ConfigError(f"unknown scaling {self.scaling!r}; choose from {SCALINGS}")
        if self.poly_order < 1:
            raise ConfigError("poly_order must be >= 1")
        if self.runs < 1 or self.folds < 2:
            raise ConfigError("need runs >= 1 and folds >= 2")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if self.n_jobs < 1:
            raise ConfigError("n_jobs must be >= 1")

    def to_dict(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            out[f.name] = list(value) if isinstance(value, tuple) else value
        return out

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


def config_from_dict(raw: dict, base_dir: str | Path | None = None) -> ExperimentConfig:
    names = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = sorted(set(raw) - names)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    if "datasets" not in raw:
        raise ConfigError("missing required key 'datasets'")
    raw = dict(raw)
    if base_dir is not None:
        raw["datasets"] = [str(Path(base_dir) / p) if not Path(p).is_absolute() else p for p in raw["datasets"]]
    try:
        return ExperimentConfig(**raw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"no such config file: {path}")
    with open(path, "rb") as fh:
        try:
            raw = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(raw, base_dir=path.parent)
