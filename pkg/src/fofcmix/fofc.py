"""FindOneFactorClusters: pure triples, cluster growth, disjoint selection."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .correlation import mixed_matrix
from .data import CorrelationMatrix, Dataset
from .errors import PreconditionError
from .tetrad import TetradConfig, nonzero_pairs, quads_vanish


@dataclass
class Clustering:
    clusters: list[tuple[int, ...]]
    unclustered: list[int]
    names: list[str] | None = None
    labels: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.clusters = [tuple(sorted(int(i) for i in c)) for c in self.clusters]
        if not self.labels:
            self.labels = [f"_L{i + 1}" for i in range(len(self.clusters))]
        seen = set()
        for c in self.clusters:
            if seen & set(c):
                raise PreconditionError("clusters must be disjoint")
            seen |= set(c)

    def to_dict(self) -> dict:
        def nm(i):
            return self.names[i] if self.names else str(i)

        return {
            "clusters": [
                {"label": lab, "indices": list(c), "variables": [nm(i) for i in c]}
                for lab, c in zip(self.labels, self.clusters)
            ],
            "unclustered": {"indices": self.unclustered, "variables": [nm(i) for i in self.unclustered]},
        }


def find_pure_triples(corr, n, cfg: TetradConfig = TetradConfig()) -> set[tuple[int, int, int]]:
    """All triples that pass :func:`fofcmix.tetrad.pure_triple` against every variable."""
    r = np.asarray(getattr(corr, "values", corr), dtype=float)
    p = r.shape[0]
    if p < 4:
        raise PreconditionError(f"need at least 4 variables, got {p}")
    keep = nonzero_pairs(r, n, cfg)
    triples = [
        t for t in itertools.combinations(range(p), 3)
        if keep[t[0], t[1]] and keep[t[0], t[2]] and keep[t[1], t[2]]
    ]
    if not triples:
        return set()
    trip = np.array(triples)
    others = np.array([[w for w in range(p) if w not in t] for t in triples])
    quads = np.concatenate(
        [np.repeat(trip[:, None, :], p - 3, axis=1), others[:, :, None]], axis=2
    ).reshape(-1, 4)
    ok = quads_vanish(r, n, quads, cfg).reshape(len(triples), p - 3)
    fails = np.count_nonzero(~ok, axis=1)
    allowed = cfg.max_failure_fraction * (p - 3)
    return {t for t, f in zip(triples, fails) if f <= allowed}


def grow_clusters(triples, subset_fraction: float = 1.0) -> list[tuple[int, ...]]:
    """Grow each pure triple into a maximal candidate cluster.

    A variable ``o`` joins a cluster when at least ``subset_fraction`` of
    the triples ``{a, b, o}`` (``a, b`` already in the cluster) are pure.
    Triples are seeded in sorted order and skipped once covered by an
    earlier candidate, so the result is deterministic.
    """
    pure = {tuple(sorted(t)) for t in triples}
    variables = sorted({i for t in pure for i in t})
    candidates: list[tuple[int, ...]] = []
    for seed in sorted(pure):
        if any(set(seed) <= set(c) for c in candidates):
            continue
        cluster = list(seed)
        for o in variables:
            if o in cluster:
                continue
            pairs = list(itertools.combinations(cluster, 2))
            hits = sum(tuple(sorted((a, b, o))) in pure for a, b in pairs)
            if hits >= subset_fraction * len(pairs):
                cluster.append(o)
        cand = tuple(sorted(cluster))
        if cand not in candidates:
            candidates.append(cand)
    return candidates


def select_disjoint(candidates, p: int | None = None, names=None) -> Clustering:
    """Repeatedly keep the largest candidate and drop those overlapping it.

    Ties go to the lexicographically smallest index tuple.
    """
    pool = sorted({tuple(sorted(c)) for c in candidates}, key=lambda c: (-len(c), c))
    chosen: list[tuple[int, ...]] = []
    used: set[int] = set()
    for cand in pool:
        if used & set(cand):
            continue
        chosen.append(cand)
        used |= set(cand)
    universe = range(p) if p is not None else sorted({i for c in candidates for i in c})
    return Clustering(chosen, [i for i in universe if i not in used], names)


def fofc_from_corr(
    corr: CorrelationMatrix, cfg: TetradConfig | None = None, subset_fraction: float = 1.0
) -> Clustering:
    if cfg is None:
        cfg = TetradConfig(population=corr.population)
    if corr.p < 4:
        raise PreconditionError(f"need at least 4 variables, got {corr.p}")
    triples = find_pure_triples(corr.values, corr.n, cfg)
    candidates = grow_clusters(triples, subset_fraction)
    return select_disjoint(candidates, corr.p, corr.names)


def fofc(
    data: Dataset,
    policy: str = "pearson",
    cfg: TetradConfig | None = None,
    subset_fraction: float = 1.0,
) -> Clustering:
    """Cluster the columns of ``data`` into pure 1-factor measurement models."""
    if data.p < 4:
        raise PreconditionError(f"need at least 4 variables, got {data.p}")
    if data.n < 5:
        raise PreconditionError(f"need at least 5 rows, got {data.n}")
    corr = mixed_matrix(data, policy)
    return fofc_from_corr(corr, cfg or TetradConfig(), subset_fraction)
