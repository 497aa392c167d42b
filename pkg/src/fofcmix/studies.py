"""Analytic sweeps of how well discretized variables keep Gaussian structure.

``tetrad_ratio_sweep`` draws 4-indicator single-factor models with positive
correlations, discretizes them analytically and records the ratio of two
tetrad products against the largest continuous correlation involved.

``category_ratio_sweep`` compares the correlation of two discretized
variables with the Gaussian correlation they come from, for nine pairs of
category counts.
"""
from __future__ import annotations

import csv
import itertools
from pathlib import Path

import numpy as np

from .discrete import discrete_cor
from .simulate import random_cutoffs

TETRAD_MODES = ("median", "non-median", "continuous")
# the three ways to split four variables into two pairs
PAIRINGS = (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2)))
DEFAULT_RHO_GRID = tuple(np.round(np.linspace(0.05, 0.95, 19), 2))
DEFAULT_CONT_COR = tuple(np.round(np.linspace(0.1, 0.9, 9), 2))


def _rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def _pair_cor(cont: np.ndarray, cuts, mode: str, i: int, j: int) -> float:
    if mode == "continuous":
        return float(cont[i, j])
    return discrete_cor(cuts[i], cuts[j], cont[i, j])


def tetrad_ratio_sweep(modes=TETRAD_MODES, rho_grid=DEFAULT_RHO_GRID, reps: int = 50, seed: int = 0):
    """Records ``{x, y, mode, seed, rep, skipped}`` sorted by ``x``.

    For each mode, grid value ``g`` and rep: loadings are drawn so no
    continuous correlation exceeds ``g``; two of the three pairings are
    chosen at random and ``y`` is the ratio of their correlation products
    after discretization (1 means the tetrad holds).  ``x`` is the largest
    continuous correlation among the four pairs used.  Records whose
    denominator vanishes are kept with ``skipped=True`` and ``y=None``.
    """
    records = []
    for mi, mode in enumerate(modes):
        if mode not in TETRAD_MODES:
            raise ValueError(f"unknown mode {mode!r}; choose from {TETRAD_MODES}")
        rng = _rng([seed, mi])
        for g in rho_grid:
            if not 0.0 < g < 1.0:
                raise ValueError("rho grid values must lie in (0, 1)")
            for rep in range(reps):
                u = rng.uniform(0.2, 1.0, size=4)
                a = np.sqrt(g) * u / u.max()
                cont = np.outer(a, a)
                if mode == "median":
                    cuts = [[0.0]] * 4
                else:
                    cuts = [[c] for c in rng.uniform(0.0, 1.0, size=4)]
                first, second = rng.choice(3, size=2, replace=False)
                pairs = PAIRINGS[first] + PAIRINGS[second]
                x = max(cont[i, j] for i, j in pairs)
                num = np.prod([_pair_cor(cont, cuts, mode, i, j) for i, j in PAIRINGS[first]])
                den = np.prod([_pair_cor(cont, cuts, mode, i, j) for i, j in PAIRINGS[second]])
                skipped = den == 0.0
                records.append({
                    "x": float(x),
                    "y": None if skipped else float(num / den),
                    "mode": mode,
                    "seed": seed,
                    "rep": rep,
                    "skipped": bool(skipped),
                })
    records.sort(key=lambda r: (r["x"], r["mode"], r["rep"]))
    return records


def category_matrix(rng: np.random.Generator) -> np.ndarray:
    """The 9 x 2 category-count table: column 1 is 2..10, column 0 random in [2, col 1]."""
    m = np.zeros((9, 2), dtype=int)
    m[:, 1] = np.arange(9) + 2
    m[:, 0] = [rng.integers(2, hi + 1) for hi in m[:, 1]]
    return m


def mean_ratio(cut_w, cut_z, rho_list) -> float:
    """Average of ``discrete_cor / rho`` over ``rho_list``."""
    ratios = [discrete_cor(cut_w, cut_z, r) / r for r in rho_list]
    return float(sum(ratios) / len(ratios))


def category_ratio_sweep(rho_list=DEFAULT_CONT_COR, seed: int = 0):
    """One record ``{row, k_small, k_large, mean_ratio, seed}`` per category pair.

    Each pair gets gap-centered random cutoffs; the discrete correlation is
    divided by the Gaussian correlation and averaged over ``rho_list``.
    """
    rho_list = [float(r) for r in rho_list]
    if not rho_list or any(not 0.0 < r < 1.0 for r in rho_list):
        raise ValueError("rho_list must be nonempty with entries in (0, 1)")
    rng = _rng([seed, 1])
    table = category_matrix(rng)
    out = []
    for i, (w, z) in enumerate(table):
        cut_w = random_cutoffs(int(w), "gap-centered", rng)
        cut_z = random_cutoffs(int(z), "gap-centered", rng)
        out.append({
            "row": i,
            "k_small": int(w),
            "k_large": int(z),
            "mean_ratio": mean_ratio(cut_w, cut_z, rho_list),
            "seed": seed,
        })
    return out


def write_records(records, path, fields) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, extrasaction="ignore")
        writer.writeheader()
        for rec in records:
            writer.writerow({k: ("NA" if rec.get(k) is None else rec[k]) for k in fields})


TETRAD_FIELDS = ["x", "y", "mode", "seed", "rep", "skipped"]
CATEGORY_FIELDS = ["row", "k_small", "k_large", "mean_ratio", "seed"]
