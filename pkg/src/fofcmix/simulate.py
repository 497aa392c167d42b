"""Linear-Gaussian latent-variable models with pure 1-factor measurement parts.

Every variable (latent and measured) has unit population variance.  Latent
equations keep their drawn coefficients and take noise variance
``1 - explained``; when the explained share would exceed 0.9 the equation
is instead rescaled as if its noise had unit variance.  Measured equations
use noise variance ``1 - a_i^2`` and are rescaled when an impurity edge
feeds them.  Variable order is
latents ``L1..Lm`` followed by measured ``X1..Xp``; measured variable ``i``
belongs to latent ``i // children``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .data import Column, CorrelationMatrix, Dataset
from .discrete import as_cutoffs
from .errors import DomainError, PreconditionError

GENERATOR = "numpy.PCG64"
LOADING_RANGE = (0.5, 0.9)
LATENT_COEF_RANGE = (0.3, 0.6)
IMPURITY_COEF_RANGE = (0.3, 0.5)
MIN_LATENT_NOISE = 0.1
DATA_TYPE_CODES = ("0", "2", "2_", "3", "4", "5", "6", "7", "8")


@dataclass
class MeasurementModelSpec:
    num_latents: int
    children_per_latent: int
    latent_edges: list[tuple[int, int]]
    impurities: list[tuple[int, int]]
    loadings: list[float]
    latent_coefs: list[float]
    impurity_coefs: list[float]
    seed: int = 0
    latent_order: list[int] = field(default_factory=list)
    measured_order: list[int] = field(default_factory=list)

    def __post_init__(self):
        m, c = self.num_latents, self.children_per_latent
        if m < 1 or c < 1:
            raise PreconditionError("need at least one latent with one child")
        if len(self.loadings) != m * c:
            raise PreconditionError("one loading per measured variable is required")
        if len(self.latent_coefs) != len(self.latent_edges):
            raise PreconditionError("one coefficient per latent edge is required")
        if len(self.impurity_coefs) != len(self.impurities):
            raise PreconditionError("one coefficient per impurity is required")
        self.latent_edges = [tuple(int(x) for x in e) for e in self.latent_edges]
        self.impurities = [tuple(int(x) for x in e) for e in self.impurities]
        if not self.latent_order:
            self.latent_order = list(range(m))
        if not self.measured_order:
            self.measured_order = list(range(m * c))
        for a, b in self.latent_edges:
            if not (0 <= a < m and 0 <= b < m) or a == b:
                raise PreconditionError(f"bad latent edge {(a, b)}")
        for a, b in self.impurities:
            if not (0 <= a < m * c and 0 <= b < m * c) or a == b:
                raise PreconditionError(f"bad impurity edge {(a, b)}")
        _topological_order(self)  # raises on cycles

    @property
    def num_measured(self) -> int:
        return self.num_latents * self.children_per_latent

    def parent_latent(self, i: int) -> int:
        return i // self.children_per_latent

    def true_clusters(self) -> list[list[int]]:
        c = self.children_per_latent
        return [list(range(j * c, (j + 1) * c)) for j in range(self.num_latents)]

    def measured_names(self) -> list[str]:
        return [f"X{i + 1}" for i in range(self.num_measured)]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["latent_edges"] = [list(e) for e in self.latent_edges]
        d["impurities"] = [list(e) for e in self.impurities]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "MeasurementModelSpec":
        return cls(**{k: d[k] for k in cls.__dataclass_fields__ if k in d})


def _topological_order(spec: MeasurementModelSpec) -> list[int]:
    """Order over all m + p variables (latents first, then measured)."""
    m, p = spec.num_latents, spec.num_measured
    parents = {v: [] for v in range(m + p)}
    for a, b in spec.latent_edges:
        parents[b].append(a)
    for i in range(p):
        parents[m + i].append(spec.parent_latent(i))
    for a, b in spec.impurities:
        parents[m + b].append(m + a)
    order, state = [], {}

    def visit(v):
        if state.get(v) == 1:
            raise PreconditionError("model graph contains a cycle")
        if state.get(v) == 2:
            return
        state[v] = 1
        for u in parents[v]:
            visit(u)
        state[v] = 2
        order.append(v)

    for v in range(m + p):
        visit(v)
    return order


def structural_matrices(spec: MeasurementModelSpec) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(B, omega)`` with ``V = B V + E`` and ``Var(E) = diag(omega)``.

    Coefficients are rescaled so every variable has unit variance.
    """
    m, p = spec.num_latents, spec.num_measured
    size = m + p
    raw = np.zeros((size, size))
    raw_noise = np.zeros(size)
    for (a, b), coef in zip(spec.latent_edges, spec.latent_coefs):
        raw[b, a] = coef
    raw_noise[:m] = 1.0
    for i, load in enumerate(spec.loadings):
        raw[m + i, spec.parent_latent(i)] = load
        raw_noise[m + i] = 1.0 - load * load
    for (a, b), coef in zip(spec.impurities, spec.impurity_coefs):
        raw[m + b, m + a] = coef

    B = np.zeros_like(raw)
    omega = np.zeros(size)
    cov = np.zeros((size, size))
    for v in _topological_order(spec):
        beta = raw[v]
        explained = beta @ cov @ beta
        if v < m and explained < 1.0 - MIN_LATENT_NOISE:
            # latent equations keep their coefficients; noise fills the rest
            B[v] = beta
            omega[v] = 1.0 - explained
        else:
            var = explained + raw_noise[v]
            B[v] = beta / math.sqrt(var)
            omega[v] = raw_noise[v] / var
        # covariance of v with everything already placed
        cv = B[v] @ cov
        cov[v, :] = cv
        cov[:, v] = cv
        cov[v, v] = 1.0
    return B, omega


def full_covariance(spec: MeasurementModelSpec) -> np.ndarray:
    B, omega = structural_matrices(spec)
    inv = np.linalg.inv(np.eye(len(omega)) - B)
    cov = inv @ np.diag(omega) @ inv.T
    return 0.5 * (cov + cov.T)


def implied_covariance(spec: MeasurementModelSpec) -> CorrelationMatrix:
    """Population covariance (= correlation) of the measured variables."""
    m = spec.num_latents
    cov = full_covariance(spec)[m:, m:]
    return CorrelationMatrix(cov, "population", None, spec.measured_names(), population=True)


def _draw_coefficients(rng, num_measured, num_edges, num_impurities):
    signs = rng.choice([-1.0, 1.0], size=num_measured)
    loadings = signs * rng.uniform(*LOADING_RANGE, size=num_measured)
    latent = rng.uniform(*LATENT_COEF_RANGE, size=num_edges)
    impure = rng.uniform(*IMPURITY_COEF_RANGE, size=num_impurities)
    return loadings.tolist(), latent.tolist(), impure.tolist()


def random_model(
    num_latents: int,
    children: int,
    num_latent_edges: int,
    num_impurities: int = 0,
    seed: int = 0,
) -> MeasurementModelSpec:
    """Draw a random latent DAG with ``num_latent_edges`` edges and pure children.

    The edge set is uniform among latent pairs and oriented along a random
    permutation, so the DAG is acyclic.  Impurities join measured variables
    of different clusters.

    Raises:
        DomainError: if the edge or impurity count is infeasible.
    """
    max_edges = num_latents * (num_latents - 1) // 2
    if not 0 <= num_latent_edges <= max_edges:
        raise DomainError(
            f"{num_latent_edges} latent edges requested but only {max_edges} pairs exist"
        )
    p = num_latents * children
    cross = [(a, b) for a, b in itertools.combinations(range(p), 2) if a // children != b // children]
    if not 0 <= num_impurities <= len(cross):
        raise DomainError(f"cannot place {num_impurities} impurities")
    rng = np.random.Generator(np.random.PCG64(seed))
    latent_order = rng.permutation(num_latents).tolist()
    rank = {v: i for i, v in enumerate(latent_order)}
    pairs = list(itertools.combinations(range(num_latents), 2))
    chosen = sorted(rng.choice(len(pairs), size=num_latent_edges, replace=False).tolist())
    edges = []
    for idx in chosen:
        a, b = pairs[idx]
        edges.append((a, b) if rank[a] < rank[b] else (b, a))
    measured_order = rng.permutation(p).tolist()
    mrank = {v: i for i, v in enumerate(measured_order)}
    picked = sorted(rng.choice(len(cross), size=num_impurities, replace=False).tolist())
    impurities = []
    for idx in picked:
        a, b = cross[idx]
        impurities.append((a, b) if mrank[a] < mrank[b] else (b, a))
    loadings, latent, impure = _draw_coefficients(rng, p, num_latent_edges, num_impurities)
    return MeasurementModelSpec(
        num_latents, children, edges, impurities, loadings, latent, impure,
        seed=seed, latent_order=latent_order, measured_order=measured_order,
    )


def redraw_coefficients(spec: MeasurementModelSpec, seed: int) -> MeasurementModelSpec:
    """Same graph, fresh coefficients."""
    rng = np.random.Generator(np.random.PCG64(seed))
    loadings, latent, impure = _draw_coefficients(
        rng, spec.num_measured, len(spec.latent_edges), len(spec.impurities)
    )
    d = spec.to_dict()
    d.update(loadings=loadings, latent_coefs=latent, impurity_coefs=impure, seed=seed)
    return MeasurementModelSpec.from_dict(d)


def simulate_gaussian(spec: MeasurementModelSpec, n: int, seed: int | None = None) -> Dataset:
    """Ancestral sampling of ``n`` rows of the measured variables."""
    if n < 1:
        raise PreconditionError("n must be positive")
    seed = spec.seed if seed is None else seed
    rng = np.random.Generator(np.random.PCG64(seed))
    B, omega = structural_matrices(spec)
    size = len(omega)
    noise = rng.standard_normal((n, size)) * np.sqrt(omega)
    values = np.zeros((n, size))
    for v in _topological_order(spec):
        values[:, v] = values @ B[v] + noise[:, v]
    m = spec.num_latents
    meta = {"spec": spec.to_dict(), "seed": int(seed), "generator": GENERATOR}
    if n < 4:
        raise PreconditionError("datasets need at least 4 rows")
    return Dataset.continuous(values[:, m:], spec.measured_names(), meta)


def random_cutoffs(k: int, mode: str = "gap-centered", seed=0) -> np.ndarray:
    """Random cutoff vector for ``k`` categories.

    ``dichotomy-uniform01`` gives one cutoff drawn from U(0, 1).
    ``gap-centered`` gives ``k - 1`` increasing cutoffs whose successive
    gaps are U(0, 1) draws, shifted to mean zero.
    """
    if k < 2:
        raise DomainError("need at least two categories")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.Generator(np.random.PCG64(seed))
    if mode == "dichotomy-uniform01":
        if k != 2:
            raise DomainError("dichotomy-uniform01 only makes binary cutoffs")
        return np.array([rng.uniform(0.0, 1.0)])
    if mode == "gap-centered":
        gaps = rng.uniform(0.0, 1.0, size=k - 2)
        cut = np.concatenate(([0.0], np.cumsum(gaps)))
        return cut - cut.mean()
    raise DomainError(f"unknown cutoff mode {mode!r}")


def make_plan(p: int, code: str, seed) -> list[list[float] | None]:
    """Discretization plan for one data-type code applied to all ``p`` columns.

    Codes: ``0`` continuous, ``2`` median binary, ``2_`` binary with a
    U(0, 1) cutoff, ``3``..``8`` (any k >= 3) gap-centered random cutoffs.
    """
    code = str(code)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.Generator(np.random.PCG64(seed))
    if code == "0":
        return [None] * p
    if code == "2":
        return [[0.0] for _ in range(p)]
    if code == "2_":
        return [random_cutoffs(2, "dichotomy-uniform01", rng).tolist() for _ in range(p)]
    try:
        k = int(code)
    except ValueError:
        raise DomainError(f"unknown data-type code {code!r}") from None
    if k < 3:
        raise DomainError(f"unknown data-type code {code!r}")
    return [random_cutoffs(k, "gap-centered", rng).tolist() for _ in range(p)]


def discretize(data: Dataset, plan) -> Dataset:
    """Threshold columns: code ``c`` when ``S_{c-1} < x <= S_c``.

    ``plan`` holds one entry per column: ``None`` keeps the column, a cutoff
    list discretizes it.  Cutoffs are recorded in the output metadata.
    """
    if len(plan) != data.p:
        raise PreconditionError(f"plan has {len(plan)} entries for {data.p} columns")
    values = data.values.copy()
    columns = []
    recorded = []
    for j, (col, cut) in enumerate(zip(data.columns, plan)):
        if cut is None:
            columns.append(col)
            recorded.append(None)
            continue
        cut = as_cutoffs(cut)
        values[:, j] = np.searchsorted(cut, data.values[:, j], side="left")
        columns.append(Column(col.name, "discrete", len(cut) + 1))
        recorded.append(cut.tolist())
    meta = dict(data.metadata)
    meta["cutoffs"] = recorded
    return Dataset(columns, values, meta)
