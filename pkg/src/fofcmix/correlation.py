"""Sample association matrices: Pearson, Spearman and polychoric.

The polychoric estimator is the two-step kind: thresholds come from the
marginal cumulative proportions, then rho alone maximizes the multinomial
likelihood of the contingency table.  Tetrachoric is the 2x2 special case.
"""
from __future__ import annotations

import math
import warnings

import numpy as np
from scipy import stats

from .bvn import bvn_cdf_increment, std_normal_cdf, std_normal_quantile
from .data import CorrelationMatrix, Dataset
from .errors import EstimationError

POLICIES = ("pearson", "rank", "polychoric")
CLAMP = 1.0 - 1e-6
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class ClampedCorrelationWarning(UserWarning):
    """The likelihood peaked at the boundary; the estimate was clamped."""


def pearson_matrix(data: Dataset) -> CorrelationMatrix:
    x = data.values
    sd = x.std(axis=0)
    for j in np.flatnonzero(sd == 0):
        raise EstimationError(f"column {data.names[j]!r} has zero variance")
    r = np.corrcoef(x, rowvar=False)
    np.fill_diagonal(r, 1.0)
    return CorrelationMatrix(np.clip(r, -1, 1), "pearson", data.n, data.names)


def spearman_matrix(data: Dataset) -> CorrelationMatrix:
    x = data.values
    for j in range(data.p):
        if np.all(x[:, j] == x[0, j]):
            raise EstimationError(f"column {data.names[j]!r} is constant")
    ranks = stats.rankdata(x, method="average", axis=0)
    r = np.corrcoef(ranks, rowvar=False)
    np.fill_diagonal(r, 1.0)
    return CorrelationMatrix(np.clip(r, -1, 1), "rank", data.n, data.names)


def contingency(a, b, k: int | None = None, g: int | None = None) -> np.ndarray:
    a = np.asarray(a).astype(int)
    b = np.asarray(b).astype(int)
    k = int(a.max()) + 1 if k is None else k
    g = int(b.max()) + 1 if g is None else g
    table = np.zeros((k, g))
    np.add.at(table, (a, b), 1)
    return table


def thresholds_from_margin(counts: np.ndarray, label: str = "column") -> np.ndarray:
    counts = np.asarray(counts, dtype=float)
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        raise EstimationError(f"{label}: category {int(empty[0])} is empty")
    cum = np.cumsum(counts)[:-1] / counts.sum()
    return std_normal_quantile(cum)


def cell_probs(cut_a: np.ndarray, cut_b: np.ndarray, rho: float) -> np.ndarray:
    """Cell probabilities of the k x g table implied by cutoffs and rho."""
    ea = np.concatenate(([-np.inf], cut_a, [np.inf]))
    eb = np.concatenate(([-np.inf], cut_b, [np.inf]))
    fa, fb = std_normal_cdf(ea), std_normal_cdf(eb)
    grid = np.outer(fa, fb)
    inc = bvn_cdf_increment(cut_a[:, None], cut_b[None, :], rho)
    grid[1:-1, 1:-1] += inc
    return np.maximum(np.diff(np.diff(grid, axis=0), axis=1), 1e-300)


def polychoric_loglik(table: np.ndarray, cut_a, cut_b, rho: float) -> float:
    return float(np.sum(table * np.log(cell_probs(cut_a, cut_b, rho))))


def _golden_max(f, lo: float, hi: float, tol: float = 1e-10):
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def _newton_polish(f, x: float, fx: float, lo: float, hi: float, h: float = 1e-5):
    for _ in range(5):
        if x - h <= lo or x + h >= hi:
            break
        fp, fm = f(x + h), f(x - h)
        d1 = (fp - fm) / (2 * h)
        d2 = (fp - 2 * fx + fm) / (h * h)
        if d2 >= 0:
            break
        step = -d1 / d2
        if abs(step) > 10 * h:
            break
        xn = min(hi, max(lo, x + step))
        fn = f(xn)
        if fn < fx:
            break
        x, fx = xn, fn
        if abs(step) < 1e-12:
            break
    return x, fx


def polychoric_fit(a, b, k: int | None = None, g: int | None = None) -> tuple[float, bool]:
    """Return ``(rho_hat, clamped)`` for two integer-coded ordinal columns."""
    table = contingency(a, b, k, g)
    if table.shape[0] < 2 or table.shape[1] < 2:
        raise EstimationError("each column needs at least two categories")
    cut_a = thresholds_from_margin(table.sum(axis=1), "first column")
    cut_b = thresholds_from_margin(table.sum(axis=0), "second column")

    def f(r):
        return polychoric_loglik(table, cut_a, cut_b, r)

    x, fx = _golden_max(f, -CLAMP, CLAMP)
    x, fx = _newton_polish(f, x, fx, -CLAMP, CLAMP)
    if abs(x) >= CLAMP - 1e-5:
        return math.copysign(CLAMP, x), True
    return x, False


def polychoric(a, b, k: int | None = None, g: int | None = None) -> float:
    """Polychoric correlation of two ordinal columns coded 0..k-1 and 0..g-1.

    Raises:
        EstimationError: if a category is empty.
    """
    rho, clamped = polychoric_fit(a, b, k, g)
    if clamped:
        warnings.warn("perfect association; polychoric estimate clamped", ClampedCorrelationWarning)
    return rho


def tetrachoric(a, b) -> float:
    """Tetrachoric correlation of two 0/1 columns."""
    return polychoric(a, b, 2, 2)


def mixed_matrix(data: Dataset, policy: str = "pearson") -> CorrelationMatrix:
    """Assemble a correlation matrix for mixed column kinds.

    ``pearson`` and ``rank`` apply one estimator everywhere.  ``polychoric``
    (alias ``tetrachoric``) uses the latent-Gaussian estimator for
    discrete/discrete pairs and Pearson for every pair involving a
    continuous column.
    """
    if policy == "tetrachoric":
        policy = "polychoric"
    if policy not in POLICIES:
        raise ValueError(f"unknown estimator policy {policy!r}; choose from {POLICIES}")
    if policy == "rank":
        return spearman_matrix(data)
    base = pearson_matrix(data)
    if policy == "pearson":
        return base
    r = base.values.copy()
    clamped = []
    disc = [j for j, c in enumerate(data.columns) if c.is_discrete]
    for ii, i in enumerate(disc):
        for j in disc[ii + 1:]:
            ci, cj = data.columns[i], data.columns[j]
            try:
                rho, hit = polychoric_fit(data.column(i), data.column(j), ci.categories, cj.categories)
            except EstimationError as exc:
                raise EstimationError(f"pair ({ci.name}, {cj.name}): {exc}") from exc
            r[i, j] = r[j, i] = rho
            if hit:
                clamped.append((i, j))
    return CorrelationMatrix(r, "polychoric", data.n, data.names, clamped)
