import math

import numpy as np
import pytest

import community_sdp as cs
from community_sdp.errors import ParameterError


def bern_inst(n, K, p, q, seed):
    return cs.gen_instance(cs.ModelSpec(kind=cs.Kind.BERNOULLI, n=n, K=K, p=p, q=q), seed)


def gauss_inst(n, K, mu, seed):
    return cs.gen_instance(cs.ModelSpec(kind=cs.Kind.GAUSSIAN, n=n, K=K, mu=mu), seed)


class TestCommunitySdp:
    def test_complete_graph_K_equals_n(self):
        n = 8
        sol = cs.solve_community_sdp(np.ones((n, n)) - np.eye(n), n)
        assert sol.optimal
        assert sol.objective == pytest.approx(n * (n - 1), abs=1e-5)
        assert np.abs(sol.Z - 1.0).max() <= 1e-5

    def test_noiseless_separation(self):
        inst = bern_inst(6, 3, 1.0, 0.0, seed=42)
        sol = cs.solve_community_sdp(inst.A, 3)
        assert sol.optimal
        assert sol.objective == pytest.approx(6.0, abs=1e-6)
        assert cs.recovered_exactly(sol.Z, inst.truth)

    def test_matches_enumeration_and_certificate(self):
        inst = gauss_inst(10, 3, 5.0, seed=1)
        sol = cs.solve_community_sdp(inst.A, 3)
        res = cs.mle_exhaustive(inst.A, 3)
        assert sol.optimal
        assert sol.objective == pytest.approx(res.best_value, abs=1e-5 * (1 + abs(res.best_value)))
        cert = cs.build_dual_certificate(inst.A, inst.truth, beta_mean=0.0, alpha_mean=5.0)
        kkt = cs.verify_kkt(inst.A, 3, cs.cluster_matrix(inst.truth, 10), cert)
        assert kkt.accepted and kkt.unique

    def test_weak_duality_sampled(self):
        inst = gauss_inst(20, 6, 4.0, seed=3)
        sol = cs.solve_community_sdp(inst.A, 6)
        assert sol.optimal
        n, K = 20, 6
        Zstar = cs.cluster_matrix(inst.truth, n)
        slater = np.full((n, n), K * (K - 1) / (n * (n - 1)))
        np.fill_diagonal(slater, K / n)
        rng = np.random.default_rng(0)
        for theta in rng.random(1000):
            Zfeas = theta * Zstar + (1 - theta) * slater
            assert sol.objective >= np.tensordot(inst.A, Zfeas) - 1e-5 * (1 + abs(sol.objective))

    def test_options_validation(self):
        with pytest.raises(ParameterError):
            cs.SolverOptions(tol_primal=-1)
        with pytest.raises(ParameterError):
            cs.SolverOptions(over_relaxation=2.5)
        with pytest.raises(ParameterError):
            cs.solve_community_sdp(np.zeros((4, 4)), 5)

    def test_feasibility_of_returned_point(self):
        inst = bern_inst(30, 6, 0.9, 0.15, seed=5)
        sol = cs.solve_community_sdp(inst.A, 6)
        feas = cs.check_feasibility(sol.Z, "community", K=6)
        assert feas.max_violation <= 1e-6


class TestVm:
    def test_endpoint_a1(self):
        M = bern_inst(12, 3, 0.9, 0.4, 0).A
        sol = cs.solve_vm(M, 1.0)
        assert sol.optimal and sol.objective == pytest.approx(0.0, abs=1e-7)

    def test_endpoint_am(self):
        M = bern_inst(12, 3, 0.9, 0.4, 1).A
        sol = cs.solve_vm(M, 12.0)
        assert sol.optimal
        assert sol.objective == pytest.approx(M.sum() / 12, abs=1e-7)
        assert np.abs(sol.Z - 1.0 / 12).max() <= 1e-9

    def test_outside_range_infeasible(self):
        M = np.zeros((5, 5))
        for a in (0.5, 5.5):
            sol = cs.solve_vm(M, a)
            assert sol.status == "infeasible"
            assert sol.objective == -math.inf

    def test_dominates_random_feasible_sample(self):
        rng = np.random.default_rng(7)
        m, a = 5, 2.5
        M = (rng.random((m, m)) < 0.5).astype(float)
        M = np.triu(M, 1)
        M = M + M.T
        sol = cs.solve_vm(M, a)
        assert sol.optimal
        lam_max = float(np.linalg.eigvalsh(M)[-1])
        assert sol.objective <= lam_max + 1e-6
        # random feasible points: Z = x vv' + y I solves tr = 1, mass = a
        hits = 0
        for _ in range(10**4):
            v = rng.random(m)
            V = np.outer(v, v)
            t, s = float(np.trace(V)), float(V.sum())
            if abs(t * m - s * m) < 1e-12:
                continue
            x, y = np.linalg.solve(np.array([[t, m], [s, m]]), np.array([1.0, a]))
            if x < 0 or y < 0:
                continue
            Z = x * V + y * np.eye(m)
            hits += 1
            assert np.tensordot(M, Z) <= sol.objective + 1e-6
        assert hits > 100  # the sample actually exercised the bound

    def test_monotone_in_M(self):
        rng = np.random.default_rng(9)
        m = 10
        M = rng.random((m, m))
        M = (M + M.T) / 2
        np.fill_diagonal(M, 0)
        P = rng.random((m, m)) * 0.5
        P = (P + P.T) / 2
        np.fill_diagonal(P, 0)
        v1 = cs.solve_vm(M, 4.0).objective
        v2 = cs.solve_vm(M + P, 4.0).objective
        assert v2 >= v1 - 1e-6

    def test_concave_in_a_small_grid(self):
        rng = np.random.default_rng(11)
        m = 15
        M = (rng.random((m, m)) < 0.4).astype(float)
        M = np.triu(M, 1)
        M = M + M.T
        grid = np.linspace(1, m, 6)
        vals = np.array([cs.solve_vm(M, float(a)).objective for a in grid])
        second = vals[2:] - 2 * vals[1:-1] + vals[:-2]
        assert np.all(second <= 1e-5 * max(1, np.abs(vals).max()))


class TestSbmSdp:
    def test_two_disjoint_edges(self):
        inst = cs.gen_sbm(4, 2, 1.0, 0.0, seed=3)
        sol = cs.solve_sbm_sdp(inst.A, 2)
        Ystar = cs.sbm_cluster_matrix(inst.truth, 4, 2)
        # enumeration over the 3 balanced partitions of 4 nodes
        best = -math.inf
        for part in ([(0, 1), (2, 3)], [(0, 2), (1, 3)], [(0, 3), (1, 2)]):
            Y = cs.sbm_cluster_matrix(part, 4, 2)
            best = max(best, float(np.tensordot(inst.A, Y)))
        assert sol.optimal
        assert sol.objective == pytest.approx(best, abs=1e-5) == pytest.approx(4.0, abs=1e-5)
        assert np.abs(sol.Z - Ystar).max() <= 1e-4

    def test_zero_matrix(self):
        sol = cs.solve_sbm_sdp(np.zeros((6, 6)), 3)
        assert sol.optimal
        assert abs(sol.objective) <= 1e-6
        feas = cs.check_feasibility(sol.Z, "sbm", r=3)
        assert feas.max_violation <= 1e-6

    def test_recovers_strong_signal(self):
        hits = 0
        for seed in range(5):
            inst = cs.gen_sbm(60, 3, 0.9, 0.05, seed)
            sol = cs.solve_sbm_sdp(inst.A, 3)
            Ystar = cs.sbm_cluster_matrix(inst.truth, 60, 3)
            if np.abs(sol.Z - Ystar).max() <= 1e-4:
                hits += 1
        assert hits >= 4


class TestFeasibilityAndRounding:
    def test_cluster_matrix_zero_violations(self):
        Z = cs.cluster_matrix([1, 3, 4], 7)
        feas = cs.check_feasibility(Z, "community", K=3)
        # equality constraints and box are exactly zero; the PSD check goes
        # through an eigendecomposition and carries float-eps noise
        assert feas.violations["trace"] == 0.0
        assert feas.violations["mass"] == 0.0
        assert feas.violations["min_entry"] == 0.0
        assert feas.violations["diag_excess"] == 0.0
        assert feas.max_violation <= 1e-12

    def test_reports_exact_deficit(self):
        n, K = 6, 3
        Z = np.eye(n) * (K / n)
        feas = cs.check_feasibility(Z, "community", K=K)
        assert feas.violations["mass"] == pytest.approx(K * K - K, rel=1e-12)
        assert feas.violations["trace"] == pytest.approx(0.0, abs=1e-12)

    def test_round_exact_and_perturbed(self):
        truth = (1, 2, 5)
        Z = cs.cluster_matrix(truth, 8)
        assert cs.round_solution(Z, 3) == truth
        rng = np.random.default_rng(13)
        E = rng.standard_normal((8, 8)) * 1e-6
        assert cs.round_solution(Z + (E + E.T) / 2, 3) == truth

    def test_round_tie_break_deterministic(self):
        # uniform leading eigenvector and equal row sums: ties fall to index order
        Z = np.ones((4, 4))
        assert cs.round_solution(Z, 2) == (0, 1)
