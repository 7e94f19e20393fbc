from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from krv.data import Dataset

DATA_DIR = Path(__file__).resolve().parents[1] / "data"

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


def make_dataset(X, y, n_classes=None) -> Dataset:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    C = n_classes or int(y.max()) + 1
    return Dataset(
        instances=X, labels=y, attribute_kinds=("real",) * X.shape[1], classes=tuple(str(c) for c in range(C))
    )


def random_dataset(rng, n, d, n_classes=2, integer=False) -> Dataset:
    """Random dataset with every class present; integer grids force distance ties."""
    X = rng.integers(0, 4, size=(n, d)).astype(float) if integer else rng.normal(size=(n, d))
    y = np.concatenate([np.arange(n_classes), rng.integers(0, n_classes, size=n - n_classes)])
    return make_dataset(X, rng.permutation(y), n_classes)


def two_clusters(n_per=10, seed=0):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(0.0, 0.5, size=(n_per, 2)), rng.normal(3.0, 0.5, size=(n_per, 2))])
    y = np.repeat([0, 1], n_per)
    return X, y


# ------------------------------------------------------------ acceptance lines

ACCEPTANCE_LINES: list[str] = []


def record(criterion: int, passed: bool, detail: str) -> bool:
    line = f"criterion {criterion:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
