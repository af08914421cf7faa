import itertools
import math

import numpy as np
import pytest

import community_sdp as cs
from community_sdp import _mle_py
from community_sdp.errors import GuardExceededError
from community_sdp.oracle import swap_deltas


def rand_score(n, seed):
    rng = np.random.default_rng(seed)
    L = rng.standard_normal((n, n))
    L = L + L.T
    np.fill_diagonal(L, 0)
    return np.ascontiguousarray(L)


def brute_force(L, K):
    best, args = -math.inf, []
    for S in itertools.combinations(range(L.shape[0]), K):
        v = 2 * sum(L[a, b] for a, b in itertools.combinations(S, 2))
        if v > best + 1e-12:
            best, args = v, [S]
        elif abs(v - best) <= 1e-12:
            args.append(S)
    return best, args


class TestMleExhaustive:
    def test_all_ties_on_complete_graph(self):
        L = np.ones((7, 7)) - np.eye(7)
        res = cs.mle_exhaustive(L, 3)
        assert res.best_value == pytest.approx(6.0)
        assert len(res.maximizers) == math.comb(7, 3)
        assert res.evaluated == math.comb(7, 3)

    def test_noiseless_clique_unique(self):
        inst = cs.gen_instance(
            cs.ModelSpec(kind=cs.Kind.BERNOULLI, n=10, K=3, p=1.0, q=0.0), seed=2
        )
        res = cs.mle_exhaustive(inst.A, 3)
        assert res.maximizers == [inst.truth]
        assert res.best_value == pytest.approx(6.0)

    @pytest.mark.parametrize("n,K", [(6, 2), (8, 3), (9, 4), (10, 5)])
    def test_matches_brute_force(self, n, K):
        L = rand_score(n, seed=n * 31 + K)
        res = cs.mle_exhaustive(L, K)
        best, args = brute_force(L, K)
        assert res.best_value == pytest.approx(best, abs=1e-10)
        assert set(res.maximizers) <= set(args) or res.maximizers[0] in args

    def test_incremental_equals_naive(self):
        # delta-update running values match fresh recomputation
        for seed in range(100):
            n = 4 + seed % 7
            K = 2 + seed % max(1, n - 2)
            K = min(K, n)
            L = rand_score(n, seed)
            _, cands = _mle_py.enumerate_candidates(L, K, 1e9)
            for approx, subset in cands:
                assert approx == pytest.approx(_mle_py.exact_value(L, subset), abs=1e-12)

    def test_guard(self):
        with pytest.raises(GuardExceededError):
            cs.mle_exhaustive(np.zeros((40, 40)), 15)

    def test_backends_agree(self):
        import community_sdp._mle_py as py_kernel

        try:
            import community_sdp._mle_core as cy_kernel
        except ImportError:
            pytest.skip("compiled kernel not built")
        for seed in range(5):
            L = rand_score(9, seed)
            for K in (2, 4, 7):
                a = py_kernel.enumerate_candidates(L, K, 1e-7)
                b = cy_kernel.enumerate_candidates(L, K, 1e-7)
                assert a[0] == b[0]
                assert [s for _, s in a[1]] == [s for _, s in b[1]]


class TestSwapCheck:
    def test_noiseless_mean_matrix(self):
        # alpha=2, beta=0.5: gap = (K-1)alpha - K*beta
        n, K = 9, 4
        truth = [0, 2, 5, 7]
        L = cs.mean_matrix(truth, n, alpha=2.0, beta=0.5)
        holds, gap = cs.swap_check(L, truth)
        assert holds
        assert gap == pytest.approx((K - 1) * 2.0 - K * 0.5, rel=1e-12)

    def test_K_equals_n_vacuous(self):
        holds, gap = cs.swap_check(np.zeros((5, 5)), range(5))
        assert holds and gap == math.inf

    def test_maximizer_implies_no_improving_swap(self):
        for seed in range(30):
            n = 7 + seed % 5
            K = 3
            L = rand_score(n, seed + 1000)
            res = cs.mle_exhaustive(L, K)
            for S in res.maximizers:
                assert swap_deltas(L, S) <= 1e-9

    def test_improving_swap_implies_not_maximizer(self):
        for seed in range(30):
            n = 8
            K = 3
            L = rand_score(n, seed + 2000)
            res = cs.mle_exhaustive(L, K)
            rng = np.random.default_rng(seed)
            S = tuple(sorted(rng.choice(n, size=K, replace=False).tolist()))
            if swap_deltas(L, S) > 1e-9:
                assert S not in res.maximizers
