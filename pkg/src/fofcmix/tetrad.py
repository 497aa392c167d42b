"""Tetrad differences, vanishing-tetrad tests and the pure-triple predicate.

Pairing convention for a quad ``(a, b, c, d)``::

    0:  r_ab r_cd - r_ac r_bd
    1:  r_ab r_cd - r_ad r_bc
    2:  r_ac r_bd - r_ad r_bc

so that ``diff0 - diff1 + diff2 == 0`` identically.  Each pairing is written
as ``t(x, y, z, w) = r_xy r_zw - r_xz r_yw`` with the index orders below.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .data import standardize
from .errors import PreconditionError, TestUndefinedError

PAIRING_ORDERS = np.array([[0, 1, 2, 3], [0, 1, 3, 2], [0, 2, 3, 1]])
TESTS = ("wishart", "delta")
EXACT_TOL = 1e-10


@dataclass(frozen=True)
class TetradConfig:
    """Settings for vanishing-tetrad decisions.

    ``zero_corr_alpha`` drives a Fisher-z screen: a triple containing a pair
    whose correlation is not significantly nonzero at that level is never
    pure.  ``None`` disables it.  ``max_failure_fraction`` is the share of
    fourth variables allowed to produce a rejected tetrad (0 = unanimity).
    ``population`` switches to exact arithmetic: a tetrad vanishes when
    ``|diff| < 1e-10`` and a correlation is zero when ``|r| < 1e-10``.
    """

    alpha: float = 0.001
    test: str = "wishart"
    min_abs_corr: float = 0.0
    zero_corr_alpha: float | None = 0.001
    max_failure_fraction: float = 0.0
    population: bool = False

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise PreconditionError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.test not in TESTS:
            raise PreconditionError(f"unknown tetrad test {self.test!r}")
        if not 0.0 <= self.min_abs_corr < 1.0:
            raise PreconditionError("min_abs_corr must lie in [0, 1)")
        if self.zero_corr_alpha is not None and not 0.0 < self.zero_corr_alpha < 1.0:
            raise PreconditionError("zero_corr_alpha must lie in (0, 1)")
        if not 0.0 <= self.max_failure_fraction < 1.0:
            raise PreconditionError("max_failure_fraction must lie in [0, 1)")


def _matrix(corr) -> np.ndarray:
    return np.asarray(getattr(corr, "values", corr), dtype=float)


def _check_quad(quad, p: int) -> tuple[int, int, int, int]:
    quad = tuple(int(i) for i in quad)
    if len(quad) != 4 or len(set(quad)) != 4:
        raise PreconditionError(f"a tetrad needs four distinct indices, got {quad}")
    if min(quad) < 0 or max(quad) >= p:
        raise PreconditionError(f"indices {quad} out of range for {p} variables")
    return quad


def _pairing_indices(quads: np.ndarray, pairing: int) -> np.ndarray:
    """Reorder ``(m, 4)`` quads into ``(x, y, z, w)`` for t = r_xy r_zw - r_xz r_yw."""
    return quads[:, PAIRING_ORDERS[pairing]]


def _tetrad_values(r: np.ndarray, xyzw: np.ndarray) -> np.ndarray:
    x, y, z, w = xyzw.T
    return r[x, y] * r[z, w] - r[x, z] * r[y, w]


def tetrad_diffs(corr, quad) -> tuple[float, float, float]:
    """The three tetrad differences of a quad (see module docstring)."""
    r = _matrix(corr)
    q = np.array([_check_quad(quad, r.shape[0])])
    return tuple(float(_tetrad_values(r, _pairing_indices(q, k))[0]) for k in range(3))


def _wishart_sd(r, xyzw, n):
    x, y, z, w = xyzw.T
    # t(x,y,z,w) is the determinant of the {x,w} x {y,z} cross block
    d_xw = r[x, x] * r[w, w] - r[x, w] ** 2
    d_yz = r[y, y] * r[z, z] - r[y, z] ** 2
    sub = r[xyzw[:, :, None], xyzw[:, None, :]]
    det4 = np.linalg.det(sub)
    var = (d_xw * d_yz * (n + 1.0) / ((n - 1.0) * (n - 2.0))) - det4 / (n - 2.0)
    bad = (d_xw <= 0) | (d_yz <= 0)
    return np.sqrt(np.abs(var)), bad


def _acov(r, i, j, k, l):
    """n * asymptotic covariance of sample correlations r_ij and r_kl (normal theory)."""
    return (
        0.5 * r[i, j] * r[k, l] * (r[i, k] ** 2 + r[i, l] ** 2 + r[j, k] ** 2 + r[j, l] ** 2)
        + r[i, k] * r[j, l]
        + r[i, l] * r[j, k]
        - r[i, j] * r[i, k] * r[i, l]
        - r[j, i] * r[j, k] * r[j, l]
        - r[k, i] * r[k, j] * r[k, l]
        - r[l, i] * r[l, j] * r[l, k]
    )


def _delta_sd(r, xyzw, n):
    x, y, z, w = xyzw.T
    pairs = [(x, y), (z, w), (x, z), (y, w)]
    grad = [r[z, w], r[x, y], -r[y, w], -r[x, z]]
    var = np.zeros(len(x))
    for a, (i, j) in enumerate(pairs):
        for b, (k, l) in enumerate(pairs):
            var += grad[a] * grad[b] * _acov(r, i, j, k, l)
    bad = np.zeros(len(x), dtype=bool)
    for i, j in pairs:
        bad |= np.abs(r[i, j]) >= 1.0
    return np.sqrt(np.maximum(var, 0.0) / n), bad


def tetrad_pvalues(corr, n: int, quads, pairing: int, test: str = "wishart") -> np.ndarray:
    """Two-sided p-values for H0: tetrad = 0, vectorized over ``(m, 4)`` quads.

    Raises:
        TestUndefinedError: when ``n <= 4``, an off-diagonal |r| reaches 1 or a
            2x2 block is singular.
    """
    if n is None or n <= 4:
        raise TestUndefinedError(f"tetrad test needs n > 4, got {n}")
    r = standardize(_matrix(corr))
    quads = np.atleast_2d(np.asarray(quads, dtype=int))
    xyzw = _pairing_indices(quads, pairing)
    if test == "wishart":
        sd, bad = _wishart_sd(r, xyzw, float(n))
    elif test == "delta":
        sd, bad = _delta_sd(r, xyzw, float(n))
    else:
        raise PreconditionError(f"unknown tetrad test {test!r}")
    if np.any(bad):
        raise TestUndefinedError("singular 2x2 block or |r| = 1 inside a tetrad")
    t = _tetrad_values(r, xyzw)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(t == 0.0, 0.0, np.abs(t) / sd)
    return 2.0 * special.ndtr(-z)


def wishart_test(corr, n: int, quad, pairing: int = 0) -> float:
    """Wishart test p-value for one tetrad of ``quad``."""
    r = _matrix(corr)
    q = _check_quad(quad, r.shape[0])
    return float(tetrad_pvalues(r, n, [q], pairing, "wishart")[0])


def delta_test(corr, n: int, quad, pairing: int = 0) -> float:
    """Normal-theory delta-method p-value for one tetrad of ``quad``."""
    r = _matrix(corr)
    q = _check_quad(quad, r.shape[0])
    return float(tetrad_pvalues(r, n, [q], pairing, "delta")[0])


def quads_vanish(corr, n, quads, cfg: TetradConfig) -> np.ndarray:
    """Boolean ``(m,)``: all three tetrads of each quad fail to reject."""
    r = standardize(_matrix(corr))
    quads = np.atleast_2d(np.asarray(quads, dtype=int))
    ok = np.ones(len(quads), dtype=bool)
    for k in range(3):
        if cfg.population:
            ok &= np.abs(_tetrad_values(r, _pairing_indices(quads, k))) < EXACT_TOL
        else:
            ok &= tetrad_pvalues(r, n, quads, k, cfg.test) > cfg.alpha
    return ok


def nonzero_pairs(corr, n, cfg: TetradConfig) -> np.ndarray:
    """Boolean matrix of pairs that pass the correlation screens."""
    r = standardize(_matrix(corr))
    a = np.abs(r)
    keep = a >= cfg.min_abs_corr
    if cfg.population:
        keep &= a >= EXACT_TOL
    elif cfg.zero_corr_alpha is not None:
        if n is None or n <= 3:
            raise TestUndefinedError(f"correlation screen needs n > 3, got {n}")
        with np.errstate(divide="ignore"):
            z = np.arctanh(np.minimum(a, 1 - 1e-15)) * np.sqrt(n - 3.0)
        keep &= 2.0 * special.ndtr(-z) <= cfg.zero_corr_alpha
    np.fill_diagonal(keep, True)
    return keep


def pure_triple(corr, n, triple, universe, cfg: TetradConfig = TetradConfig()) -> bool:
    """True when every fourth variable of ``universe`` leaves the triple's tetrads vanishing.

    A share ``cfg.max_failure_fraction`` of failing fourth variables is
    tolerated.  Triples failing the correlation screen are never pure.
    """
    triple = tuple(int(i) for i in triple)
    universe = sorted({int(i) for i in universe})
    if len(set(triple)) != 3:
        raise PreconditionError(f"a triple needs three distinct indices, got {triple}")
    if not set(triple) <= set(universe):
        raise PreconditionError("universe must contain the triple")
    if len(universe) < 4:
        raise PreconditionError("universe must hold at least four variables")
    keep = nonzero_pairs(corr, n, cfg)
    a, b, c = triple
    if not (keep[a, b] and keep[a, c] and keep[b, c]):
        return False
    others = [w for w in universe if w not in triple]
    quads = np.array([(a, b, c, w) for w in others])
    fails = np.count_nonzero(~quads_vanish(corr, n, quads, cfg))
    return fails <= cfg.max_failure_fraction * len(others)
