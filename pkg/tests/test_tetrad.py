"""Tetrad differences, Wishart/delta tests and the pure-triple predicate."""
from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from fofcmix.data import standardize
from fofcmix.errors import PreconditionError, TestUndefinedError
from fofcmix.tetrad import (
    TetradConfig,
    delta_test,
    nonzero_pairs,
    pure_triple,
    quads_vanish,
    tetrad_diffs,
    tetrad_pvalues,
    wishart_test,
)

QUAD = (0, 1, 2, 3)


def one_factor(a):
    a = np.asarray(a, dtype=float)
    r = np.outer(a, a)
    np.fill_diagonal(r, 1.0)
    return r


def sample_corr(cov, n, rng):
    x = rng.multivariate_normal(np.zeros(len(cov)), cov, size=n)
    return np.corrcoef(x, rowvar=False)


def two_factor_cov(load=0.75, per=2):
    """Two independent factors with ``per`` indicators each."""
    a = np.full(2 * per, load)
    cov = np.zeros((2 * per, 2 * per))
    cov[:per, :per] = np.outer(a[:per], a[:per])
    cov[per:, per:] = np.outer(a[per:], a[per:])
    np.fill_diagonal(cov, 1.0)
    return cov


class TestDiffs:
    def test_single_factor_vanishes(self):
        np.testing.assert_allclose(tetrad_diffs(one_factor([0.8, 0.7, 0.6, 0.5]), QUAD), 0.0, atol=1e-15)

    def test_identity(self):
        assert tetrad_diffs(np.eye(4), QUAD) == (0.0, 0.0, 0.0)

    def test_arithmetic(self):
        r = np.full((4, 4), 0.1)
        np.fill_diagonal(r, 1.0)
        r[0, 1] = r[1, 0] = r[2, 3] = r[3, 2] = 0.5
        np.testing.assert_allclose(tetrad_diffs(r, QUAD), (0.24, 0.24, 0.0), atol=1e-15)

    @given(st.integers(0, 2**32 - 1))
    def test_three_diffs_identity(self, seed):
        rng = np.random.default_rng(seed)
        g = rng.standard_normal((6, 6))
        r = standardize(g @ g.T)
        d0, d1, d2 = tetrad_diffs(r, (1, 4, 0, 5))
        assert abs(d0 - d1 + d2) < 1e-12

    @pytest.mark.parametrize("quad", [(0, 1, 2), (0, 1, 1, 2), (0, 1, 2, 9)])
    def test_bad_quads(self, quad):
        with pytest.raises(PreconditionError):
            tetrad_diffs(np.eye(5), quad)


class TestWishart:
    def test_population_zero_statistic(self):
        r = one_factor([0.8, 0.7, 0.6, 0.5])
        for k in range(3):
            assert wishart_test(r, 10**6, QUAD, k) > 0.999

    def test_needs_more_than_four_rows(self):
        with pytest.raises(TestUndefinedError):
            wishart_test(one_factor([0.5] * 4), 4, QUAD)

    def test_singular_block(self):
        r = one_factor([0.5] * 4)
        r[0, 3] = r[3, 0] = 1.0  # {x, w} block of pairing 0 is singular
        with pytest.raises(TestUndefinedError):
            wishart_test(r, 100, QUAD, 0)

    @pytest.mark.parametrize("test", ["wishart", "delta"])
    def test_variance_matches_monte_carlo(self, test):
        rng = np.random.default_rng(12)
        cov = one_factor([0.8, 0.7, 0.6, 0.5])
        n, reps = 400, 3000
        stats, sds = [], []
        for _ in range(reps):
            r = sample_corr(cov, n, rng)
            t = tetrad_diffs(r, QUAD)[0]
            p = tetrad_pvalues(r, n, [QUAD], 0, test)[0]
            stats.append(t)
            # recover |t| / sd from the two-sided p-value
            z = norm.isf(p / 2)
            if z > 0.5:
                sds.append(abs(t) / z)
        assert np.mean(sds) == pytest.approx(np.std(stats), rel=0.1)

    def test_power_against_split_factors(self):
        rng = np.random.default_rng(13)
        cov = two_factor_cov(0.7)
        rejects = sum(wishart_test(sample_corr(cov, 2000, rng), 2000, QUAD, 0) < 0.05 for _ in range(100))
        assert rejects >= 90

    def test_delta_power(self):
        rng = np.random.default_rng(14)
        cov = two_factor_cov(0.7)
        rejects = sum(delta_test(sample_corr(cov, 2000, rng), 2000, QUAD, 0) < 0.05 for _ in range(50))
        assert rejects >= 45

    def test_delta_calibrated(self):
        rng = np.random.default_rng(15)
        cov = one_factor([0.8, 0.7, 0.6, 0.5])
        rate = np.mean([delta_test(sample_corr(cov, 1000, rng), 1000, QUAD, 1) < 0.05 for _ in range(400)])
        assert 0.02 <= rate <= 0.09


class TestConfig:
    @pytest.mark.parametrize("kw", [
        {"alpha": 0.0}, {"alpha": 1.0}, {"test": "bootstrap"}, {"min_abs_corr": 1.0},
        {"zero_corr_alpha": 0.0}, {"max_failure_fraction": 1.0},
    ])
    def test_rejects_bad_values(self, kw):
        with pytest.raises(PreconditionError):
            TetradConfig(**kw)


class TestPureTriple:
    def test_single_factor_population(self):
        r = one_factor([0.8, 0.7, 0.6, 0.5])
        cfg = TetradConfig(population=True)
        for t in itertools.combinations(range(4), 3):
            assert pure_triple(r, None, t, range(4), cfg)

    def test_universe_too_small(self):
        with pytest.raises(PreconditionError):
            pure_triple(one_factor([0.5] * 3), 100, (0, 1, 2), range(3))

    def test_triple_must_be_in_universe(self):
        with pytest.raises(PreconditionError):
            pure_triple(one_factor([0.5] * 5), 100, (0, 1, 4), range(4))

    def test_split_triple_rejected(self):
        rng = np.random.default_rng(16)
        cov = two_factor_cov(0.75, per=4)
        hits = sum(
            not pure_triple(sample_corr(cov, 2000, rng), 2000, (0, 1, 4), range(8))
            for _ in range(40)
        )
        assert hits >= 36

    def test_screen_blocks_weak_pairs(self):
        r = one_factor([0.8, 0.7, 0.6, 0.05, 0.5])
        cfg = TetradConfig(population=True, min_abs_corr=0.1)
        assert not pure_triple(r, None, (0, 1, 3), range(5), cfg)
        assert pure_triple(r, None, (0, 1, 2), range(5), cfg)

    def test_uncorrelated_triple_not_pure(self):
        # mutually uncorrelated variables make every tetrad vanish trivially
        rng = np.random.default_rng(17)
        r = sample_corr(np.eye(6), 2000, rng)
        assert not pure_triple(r, 2000, (0, 1, 2), range(6))
        keep = nonzero_pairs(r, 2000, TetradConfig())
        assert np.array_equal(np.diag(keep), np.ones(6, bool))

    def test_failure_tolerance(self):
        # variable 4 is an impure child of factor 1, breaking tetrads with it
        a = np.array([0.8, 0.7, 0.6, 0.7, 0.6])
        r = one_factor(a)
        r[0, 4] = r[4, 0] = 0.8
        strict = TetradConfig(population=True)
        loose = TetradConfig(population=True, max_failure_fraction=0.5)
        assert not pure_triple(r, None, (0, 1, 2), range(5), strict)
        assert pure_triple(r, None, (0, 1, 2), range(5), loose)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_permuting_a_quad_keeps_decision(self, seed):
        rng = np.random.default_rng(seed)
        cov = two_factor_cov(0.6) if seed % 2 else one_factor([0.7, 0.6, 0.6, 0.5])
        r = sample_corr(cov, 300, rng)
        cfg = TetradConfig(alpha=0.05)
        decisions = {bool(quads_vanish(r, 300, [perm], cfg)[0]) for perm in itertools.permutations(QUAD)}
        assert len(decisions) == 1

    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_scale_invariance(self, seed):
        rng = np.random.default_rng(seed)
        cov = two_factor_cov(0.7, per=3)
        x = rng.multivariate_normal(np.zeros(6), cov, size=500) * rng.uniform(0.1, 10, size=6)
        s = np.cov(x, rowvar=False)
        for t in itertools.combinations(range(6), 3):
            assert pure_triple(s, 500, t, range(6)) == pure_triple(standardize(s), 500, t, range(6))
