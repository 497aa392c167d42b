"""Moments of threshold-discretized standard Gaussians.

A variable with cutoffs ``S_0 < S_1 < ... < S_{k-2}`` takes the integer code
``c`` in ``0..k-1`` when ``S_{c-1} < X <= S_c`` (with ``S_{-1} = -inf`` and
``S_{k-1} = +inf``).  Equivalently ``V = #{c : X > S_c}``, so covariances
between two such variables decompose into sums of indicator covariances.
All values below depend on this 0..k-1 coding.
"""
from __future__ import annotations

import math

import numpy as np

from .bvn import bvn_cdf_increment, std_normal_cdf, std_normal_pdf
from .errors import DomainError


def as_cutoffs(cut) -> np.ndarray:
    """Validate a cutoff vector and return it as a float array."""
    arr = np.atleast_1d(np.asarray(cut, dtype=float))
    if arr.ndim != 1 or arr.size < 1:
        raise DomainError("a cutoff vector needs at least one value (k >= 2)")
    if np.any(np.isnan(arr)):
        raise DomainError("cutoffs must not be NaN")
    if np.any(np.diff(arr) <= 0):
        raise DomainError(f"cutoffs must be strictly increasing, got {arr.tolist()}")
    return arr


def _check_rho(rho: float) -> float:
    rho = float(rho)
    if not -1.0 <= rho <= 1.0:
        raise DomainError(f"correlation must lie in [-1, 1], got {rho}")
    return rho


def discrete_marginal_pmf(cut) -> np.ndarray:
    cut = as_cutoffs(cut)
    edges = np.concatenate(([-np.inf], cut, [np.inf]))
    return np.diff(std_normal_cdf(edges))


def binary_cont_cov(s: float) -> float:
    """Cov(1{X > s}, X) for standard normal X, which equals phi(s)."""
    return std_normal_pdf(float(s))


def binary_other_cov(s: float, rho: float) -> float:
    """Cov(1{X_i > s}, X_j) when Cor(X_i, X_j) = rho."""
    return _check_rho(rho) * binary_cont_cov(s)


def discrete_cov_exact(cut_i, cut_j, rho: float) -> float:
    """Exact covariance of two discretized standard Gaussians.

    Sum over every cutoff pair of ``Psi(S_a, S_b, rho) - Psi(S_a, S_b, 0)``.
    """
    cut_i, cut_j = as_cutoffs(cut_i), as_cutoffs(cut_j)
    rho = _check_rho(rho)
    a, b = np.meshgrid(cut_i, cut_j, indexing="ij")
    return float(np.sum(bvn_cdf_increment(a, b, rho)))


def discrete_mean(cut) -> float:
    pmf = discrete_marginal_pmf(cut)
    return float(np.arange(pmf.size) @ pmf)


def discrete_var(cut) -> float:
    pmf = discrete_marginal_pmf(cut)
    codes = np.arange(pmf.size)
    mean = codes @ pmf
    return float((codes - mean) ** 2 @ pmf)


def discrete_cor(cut_i, cut_j, rho: float) -> float:
    cov = discrete_cov_exact(cut_i, cut_j, rho)
    out = cov / math.sqrt(discrete_var(cut_i) * discrete_var(cut_j))
    return min(1.0, max(-1.0, out))


def median_dichotomy_cov(rho: float) -> float:
    """Covariance of two median-split binaries: arcsin(rho) / (2 pi)."""
    return math.asin(_check_rho(rho)) / (2.0 * math.pi)


def nonmedian_cov_approx(s_i: float, s_j: float, rho: float) -> float:
    """Separable approximation exp(-S_i^2/2) exp(-S_j^2/2) arcsin(rho) / (2 pi)."""
    return math.exp(-0.5 * s_i * s_i) * math.exp(-0.5 * s_j * s_j) * median_dichotomy_cov(rho)


def multi_cat_cov_approx(cut_i, cut_j, rho: float) -> float:
    """Multi-category version of :func:`nonmedian_cov_approx`."""
    cut_i, cut_j = as_cutoffs(cut_i), as_cutoffs(cut_j)
    wi = np.exp(-0.5 * cut_i**2).sum()
    wj = np.exp(-0.5 * cut_j**2).sum()
    return float(wi * wj) * median_dichotomy_cov(rho)


def lemma1_residual(cor_ab: float, cor_bc: float, cor_ac: float) -> float:
    """``Cor(A,C) - Cor(A,B) Cor(B,C)``; zero exactly when the chain factorizes."""
    return cor_ac - cor_ab * cor_bc
