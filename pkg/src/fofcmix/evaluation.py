"""Precision and recall of an estimated clustering against the true clusters.

For an estimated cluster, its individual precision is the largest share of
its members that sits inside one true cluster; the final precision is the
mean over estimated clusters.  Recall mirrors this from the side of the true
clusters.  A run with no estimated cluster has no precision: it is reported
as ``None`` and left out of batch means, with coverage recorded instead.
"""
from __future__ import annotations

import csv
import math
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import FofcError
from .fofc import Clustering, fofc
from .simulate import (
    discretize,
    make_plan,
    random_model,
    redraw_coefficients,
    simulate_gaussian,
)
from .tetrad import TetradConfig


def _clusters(clustering) -> list[set[int]]:
    if isinstance(clustering, Clustering):
        return [set(c) for c in clustering.clusters]
    return [set(c) for c in clustering]


def individual_precision(est, truth) -> float:
    est = set(est)
    if not est:
        raise ValueError("estimated cluster is empty")
    return max(len(est & set(t)) for t in truth) / len(est)


def final_precision(clustering, truth) -> float | None:
    clusters = _clusters(clustering)
    if not clusters:
        return None
    return float(np.mean([individual_precision(c, truth) for c in clusters]))


def individual_recall(true_cluster, clustering) -> float:
    true_cluster = set(true_cluster)
    if not true_cluster:
        raise ValueError("true cluster is empty")
    best = max((len(true_cluster & c) for c in _clusters(clustering)), default=0)
    return best / len(true_cluster)


def final_recall(clustering, truth) -> float:
    if not truth:
        raise ValueError("truth has no clusters")
    return float(np.mean([individual_recall(t, clustering) for t in truth]))


@dataclass(frozen=True)
class Condition:
    """One simulation cell: graph size, latent density, data type, sample size."""

    num_latents: int = 5
    children: int = 4
    latent_edges: int = 3
    impurities: int = 0
    data_type: str = "0"
    n: int = 2000
    policy: str = "pearson"

    @property
    def key(self) -> str:
        return (
            f"L{self.num_latents}xC{self.children}-E{self.latent_edges}-I{self.impurities}"
            f"-T{self.data_type}-N{self.n}-{self.policy}"
        )


@dataclass
class RunScore:
    condition: str
    rep: int
    precision: float | None
    recall: float
    clusters: int


@dataclass
class ScoreRow:
    condition: str
    data_type: str
    latent_edges: int
    n: int
    policy: str
    reps: int
    mean_precision: float | None
    sd_precision: float | None
    mean_recall: float
    sd_recall: float
    coverage: float
    runs: list[RunScore] = field(default_factory=list, repr=False)


def _condition_seed(master_seed: int, cond: Condition) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(master_seed), zlib.crc32(cond.key.encode())])


def _one_rep(args):
    cond, spec0, rep, rep_seed, cfg, fix_coefficients = args
    ss = np.random.SeedSequence(rep_seed)
    coef_seed, data_seed, cut_seed = (int(s.generate_state(1)[0]) for s in ss.spawn(3))
    spec = spec0 if fix_coefficients else redraw_coefficients(spec0, coef_seed)
    try:
        data = simulate_gaussian(spec, cond.n, seed=data_seed)
        if cond.data_type != "0":
            data = discretize(data, make_plan(data.p, cond.data_type, cut_seed))
        clustering = fofc(data, cond.policy, cfg)
    except FofcError as exc:
        raise type(exc)(f"condition {cond.key}, rep {rep}: {exc}") from exc
    truth = spec.true_clusters()
    return RunScore(
        cond.key, rep, final_precision(clustering, truth), final_recall(clustering, truth),
        len(clustering.clusters),
    )


def _mean_sd(xs):
    if not xs:
        return None, None
    arr = np.asarray(xs, dtype=float)
    return float(arr.mean()), float(arr.std(ddof=1)) if arr.size > 1 else 0.0


def batch_score(
    conditions,
    reps: int,
    master_seed: int = 0,
    cfg: TetradConfig | None = None,
    jobs: int = 1,
    fix_coefficients: bool = False,
) -> list[ScoreRow]:
    """Score FOFC over ``reps`` seeded runs of each condition.

    The graph of a condition is drawn once (from the master seed and the
    condition itself, so identical conditions get identical rows); each rep
    redraws coefficients, data and cutoffs unless ``fix_coefficients``.
    Results do not depend on ``jobs``.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    cfg = cfg or TetradConfig()
    tasks = []
    for cond in conditions:
        ss = _condition_seed(master_seed, cond)
        graph_ss, *rep_ss = ss.spawn(reps + 1)
        spec0 = random_model(
            cond.num_latents, cond.children, cond.latent_edges, cond.impurities,
            seed=int(graph_ss.generate_state(1)[0]),
        )
        for rep in range(reps):
            rep_seed = int(rep_ss[rep].generate_state(1)[0])
            tasks.append((cond, spec0, rep, rep_seed, cfg, fix_coefficients))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(_one_rep, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        runs = [_one_rep(t) for t in tasks]

    rows = []
    for ci, cond in enumerate(conditions):
        mine = runs[ci * reps:(ci + 1) * reps]
        precs = [r.precision for r in mine if r.precision is not None]
        mp, sp = _mean_sd(precs)
        mr, sr = _mean_sd([r.recall for r in mine])
        rows.append(ScoreRow(
            cond.key, cond.data_type, cond.latent_edges, cond.n, cond.policy, reps,
            mp, sp, mr, sr, len(precs) / reps, mine,
        ))
    return rows


SCORE_FIELDS = [
    "condition", "data_type", "latent_edges", "n", "policy", "reps",
    "mean_precision", "sd_precision", "mean_recall", "sd_recall", "coverage",
]


def _cell(x):
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "NA"
    return x


def write_score_csv(rows: list[ScoreRow], path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SCORE_FIELDS)
        writer.writeheader()
        for row in rows:
            d = asdict(row)
            writer.writerow({k: _cell(d[k]) for k in SCORE_FIELDS})
