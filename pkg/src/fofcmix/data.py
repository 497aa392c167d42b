"""Column-typed datasets, correlation matrices and their CSV/JSON forms."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import PreconditionError

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Column:
    name: str
    kind: str = "continuous"  # "continuous" or "discrete"
    categories: int | None = None

    def __post_init__(self):
        if self.kind not in ("continuous", "discrete"):
            raise PreconditionError(f"unknown column kind {self.kind!r}")
        if self.kind == "discrete" and (self.categories is None or self.categories < 2):
            raise PreconditionError(f"discrete column {self.name!r} needs categories >= 2")

    @property
    def is_discrete(self) -> bool:
        return self.kind == "discrete"

    def to_dict(self) -> dict:
        return {"name": self.name, "kind": self.kind, "categories": self.categories}


@dataclass
class Dataset:
    """An ``n x p`` sample table with a declared kind per column."""

    columns: list[Column]
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2 or self.values.shape[1] != len(self.columns):
            raise PreconditionError(
                f"values of shape {self.values.shape} do not match {len(self.columns)} columns"
            )
        if self.values.shape[0] < 4:
            raise PreconditionError(f"need at least 4 rows, got {self.values.shape[0]}")
        if np.isnan(self.values).any():
            raise PreconditionError("missing values are not supported")
        for j, col in enumerate(self.columns):
            if not col.is_discrete:
                continue
            x = self.values[:, j]
            if np.any(x != np.round(x)) or x.min() < 0 or x.max() > col.categories - 1:
                raise PreconditionError(
                    f"column {col.name!r} must hold integer codes in 0..{col.categories - 1}"
                )

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    def column(self, j: int) -> np.ndarray:
        return self.values[:, j]

    @classmethod
    def continuous(cls, values, names=None, metadata=None) -> "Dataset":
        values = np.asarray(values, dtype=float)
        names = names or [f"X{j + 1}" for j in range(values.shape[1])]
        return cls([Column(nm) for nm in names], values, dict(metadata or {}))


@dataclass
class CorrelationMatrix:
    """Symmetric association matrix; ``population`` marks exact (noise-free) input."""

    values: np.ndarray
    estimator: str = "pearson"
    n: int | None = None
    names: list[str] | None = None
    clamped: list[tuple[int, int]] = field(default_factory=list)
    population: bool = False

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        m = self.values
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise PreconditionError("correlation matrix must be square")
        if not np.allclose(m, m.T, atol=1e-12):
            raise PreconditionError("correlation matrix must be symmetric")
        if self.names is None:
            self.names = [f"X{j + 1}" for j in range(m.shape[0])]

    @property
    def p(self) -> int:
        return self.values.shape[0]


def standardize(cov) -> np.ndarray:
    """Rescale a covariance matrix to unit diagonal."""
    cov = np.asarray(cov, dtype=float)
    d = np.sqrt(np.diag(cov))
    if np.any(d <= 0):
        raise PreconditionError("covariance matrix has a non-positive variance")
    out = cov / np.outer(d, d)
    np.fill_diagonal(out, 1.0)
    return np.clip(out, -1.0, 1.0)


# --- serialization ---------------------------------------------------------


def sidecar_path(csv_path) -> Path:
    return Path(csv_path).with_suffix(".json")


def write_dataset(data: Dataset, csv_path, extra_meta: dict | None = None) -> Path:
    """Write ``data`` as CSV plus a JSON metadata sidecar; returns the sidecar path."""
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(data.names)
        for row in data.values:
            writer.writerow(_fmt_row(row, data.columns))
    meta = {
        "schema_version": SCHEMA_VERSION,
        "columns": [c.to_dict() for c in data.columns],
        "n": data.n,
        **data.metadata,
        **(extra_meta or {}),
    }
    side = sidecar_path(csv_path)
    side.write_text(json.dumps(meta, indent=2, sort_keys=True))
    return side


def _fmt_row(row, columns):
    return [str(int(x)) if c.is_discrete else repr(float(x)) for x, c in zip(row, columns)]


def read_dataset(csv_path) -> Dataset:
    """Read a CSV written by :func:`write_dataset`.

    Column kinds come from the JSON sidecar when it exists; otherwise every
    column is treated as continuous.
    """
    csv_path = Path(csv_path)
    with csv_path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(x) for x in r] for r in reader if r]
    values = np.array(rows, dtype=float).reshape(len(rows), len(header))
    side = sidecar_path(csv_path)
    meta = json.loads(side.read_text()) if side.exists() else {}
    if "columns" in meta:
        columns = [Column(c["name"], c["kind"], c.get("categories")) for c in meta["columns"]]
        if [c.name for c in columns] != header:
            raise PreconditionError(f"sidecar {side} does not describe the columns of {csv_path}")
    else:
        columns = [Column(h) for h in header]
    return Dataset(columns, values, meta)


def write_matrix(matrix: np.ndarray, names: list[str], csv_path) -> None:
    with Path(csv_path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for row in np.asarray(matrix):
            writer.writerow([repr(float(x)) for x in row])


def read_matrix(csv_path) -> tuple[np.ndarray, list[str]]:
    with Path(csv_path).open(newline="") as fh:
        reader = csv.reader(fh)
        names = next(reader)
        m = np.array([[float(x) for x in r] for r in reader if r])
    return m, names
