"""FOFC search: pure triples, growth, disjoint selection, end to end."""
from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fofcmix.data import Column, CorrelationMatrix, Dataset
from fofcmix.errors import PreconditionError
from fofcmix.evaluation import final_precision, final_recall
from fofcmix.fofc import Clustering, find_pure_triples, fofc, fofc_from_corr, grow_clusters, select_disjoint
from fofcmix.simulate import MeasurementModelSpec, implied_covariance, random_model, simulate_gaussian
from fofcmix.tetrad import TetradConfig

POP = TetradConfig(population=True)


def brute_force_pure(r, tol=1e-10):
    """Triples with nonzero pairwise correlations whose tetrads vanish with every fourth variable."""
    p = r.shape[0]
    out = set()
    for t in itertools.combinations(range(p), 3):
        if any(abs(r[a, b]) < tol for a, b in itertools.combinations(t, 2)):
            continue
        ok = True
        for w in set(range(p)) - set(t):
            a, b, c = t
            diffs = [
                r[a, b] * r[c, w] - r[a, c] * r[b, w],
                r[a, b] * r[c, w] - r[a, w] * r[b, c],
                r[a, c] * r[b, w] - r[a, w] * r[b, c],
            ]
            ok &= all(abs(d) < tol for d in diffs)
        if ok:
            out.add(t)
    return out


class TestPureTriples:
    def test_two_independent_factors(self):
        spec = MeasurementModelSpec(2, 4, [], [], [0.8, 0.7, 0.6, 0.75, 0.65, 0.7, 0.8, 0.55], [], [])
        r = implied_covariance(spec).values
        got = find_pure_triples(r, None, POP)
        assert got == brute_force_pure(r)
        assert len(got) == 8

    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(0, 3), st.integers(0, 2))
    def test_matches_brute_force(self, seed, edges, impurities):
        spec = random_model(3, 4, edges, num_impurities=impurities, seed=seed)
        r = implied_covariance(spec).values
        assert find_pure_triples(r, None, POP) == brute_force_pure(r)

    def test_identity_matrix(self):
        assert find_pure_triples(np.eye(6), None, POP) == set()
        assert find_pure_triples(np.eye(6), 1000, TetradConfig(min_abs_corr=0.1)) == set()

    def test_too_few_variables(self):
        with pytest.raises(PreconditionError):
            find_pure_triples(np.eye(3), 100)


class TestGrow:
    def test_closure_of_four(self):
        assert grow_clusters(itertools.combinations(range(4), 3)) == [(0, 1, 2, 3)]

    def test_disjoint_families(self):
        triples = list(itertools.combinations(range(4), 3)) + list(itertools.combinations(range(4, 8), 3))
        assert grow_clusters(triples) == [(0, 1, 2, 3), (4, 5, 6, 7)]

    def test_families_sharing_a_variable_stay_apart(self):
        triples = list(itertools.combinations(range(4), 3)) + list(itertools.combinations(range(3, 7), 3))
        assert grow_clusters(triples) == [(0, 1, 2, 3), (3, 4, 5, 6)]

    def test_one_missing_subset_blocks_growth(self):
        triples = set(itertools.combinations(range(5), 3)) - {(0, 1, 4)}
        cands = grow_clusters(triples)
        assert (0, 1, 2, 3) in cands
        assert (0, 1, 2, 3, 4) not in cands
        assert grow_clusters(triples, subset_fraction=0.8)[0] == (0, 1, 2, 3, 4)

    def test_impure_pair_never_merged(self):
        # one factor with five indicators and a direct edge X4 -> X5
        spec = MeasurementModelSpec(1, 5, [], [(3, 4)], [0.8, 0.7, 0.75, 0.6, 0.65], [], [0.4])
        cands = grow_clusters(find_pure_triples(implied_covariance(spec).values, None, POP))
        assert all(not {3, 4} <= set(c) for c in cands)

    def test_empty(self):
        assert grow_clusters([]) == []


class TestSelect:
    def test_largest_first(self):
        c = select_disjoint([(0, 1, 2, 3), (2, 3, 4)], p=5)
        assert c.clusters == [(0, 1, 2, 3)] and c.unclustered == [4]

    def test_equal_disjoint(self):
        assert select_disjoint([(3, 4, 5), (0, 1, 2)]).clusters == [(0, 1, 2), (3, 4, 5)]

    def test_tie_goes_to_lexicographically_smaller(self):
        assert select_disjoint([(1, 2, 4), (1, 2, 3)]).clusters == [(1, 2, 3)]

    def test_labels_and_disjointness(self):
        c = select_disjoint([(0, 1, 2), (3, 4, 5), (6, 7, 8)], p=10)
        assert c.labels == ["_L1", "_L2", "_L3"]
        with pytest.raises(PreconditionError):
            Clustering([(0, 1, 2), (2, 3, 4)], [])


class TestFofc:
    def test_population_recovers_truth(self):
        for seed in range(5):
            spec = random_model(5, 4, 6, seed=seed)
            c = fofc_from_corr(implied_covariance(spec))
            assert sorted(map(list, c.clusters)) == spec.true_clusters()

    def test_gaussian_regression(self):
        spec = random_model(5, 4, 6, seed=20)
        c = fofc(simulate_gaussian(spec, 2000, seed=21))
        truth = spec.true_clusters()
        assert final_precision(c, truth) >= 0.9
        assert final_recall(c, truth) >= 0.7
        for cl in c.clusters:
            assert len(cl) >= 3
        assert sorted(sum(map(list, c.clusters), []) + c.unclustered) == list(range(20))

    def test_noise_cluster_absent(self):
        spec = random_model(4, 4, 2, seed=22)
        d = simulate_gaussian(spec, 2000, seed=23)
        vals = d.values.copy()
        vals[:, 12:16] = np.random.default_rng(24).standard_normal((2000, 4))
        c = fofc(Dataset(d.columns, vals))
        assert all(not set(cl) & {12, 13, 14, 15} for cl in c.clusters)

    def test_too_few_rows(self):
        d = Dataset.continuous(np.random.default_rng(0).standard_normal((4, 6)))
        with pytest.raises(PreconditionError):
            fofc(d)

    def test_too_few_columns(self):
        d = Dataset.continuous(np.random.default_rng(0).standard_normal((50, 3)))
        with pytest.raises(PreconditionError):
            fofc(d)

    def test_deterministic(self):
        d = simulate_gaussian(random_model(5, 4, 3, seed=25), 1000, seed=26)
        assert fofc(d) == fofc(d)

    @settings(max_examples=8, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_permutation_equivariance(self, seed):
        spec = random_model(4, 4, 2, seed=seed)
        d = simulate_gaussian(spec, 1500, seed=seed)
        perm = np.random.default_rng(seed).permutation(d.p)
        shuffled = Dataset([d.columns[j] for j in perm], d.values[:, perm])
        a = {frozenset(cl) for cl in fofc(d).clusters}
        b = {frozenset(int(perm[j]) for j in cl) for cl in fofc(shuffled).clusters}
        cands = grow_clusters(find_pure_triples(np.corrcoef(d.values, rowvar=False), d.n))
        tied = any(
            len(x) == len(y) and set(x) & set(y) for x, y in itertools.combinations(cands, 2)
        )
        # only the tie rule may depend on the labeling
        if not tied:
            assert a == b

    def test_matrix_path_equals_data_path(self):
        d = simulate_gaussian(random_model(4, 4, 2, seed=27), 1000, seed=28)
        r = np.corrcoef(d.values, rowvar=False)
        assert fofc(d).clusters == fofc_from_corr(CorrelationMatrix(r, n=1000), TetradConfig()).clusters

    def test_binary_data_runs(self):
        spec = random_model(4, 4, 1, seed=29)
        d = simulate_gaussian(spec, 2000, seed=30)
        vals = (d.values > 0).astype(float)
        binary = Dataset([Column(c.name, "discrete", 2) for c in d.columns], vals)
        truth = spec.true_clusters()
        for policy in ("pearson", "rank", "tetrachoric"):
            c = fofc(binary, policy)
            assert final_precision(c, truth) == 1.0
        assert final_recall(fofc(binary, "pearson"), truth) == 1.0
        assert final_recall(fofc(binary, "rank"), truth) == 1.0
