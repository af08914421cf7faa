import numpy as np
import pytest

import community_sdp as cs
from community_sdp.errors import ContractError


def rand_sym(n, seed, scale=1.0):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((n, n)) * scale
    return (M + M.T) / 2


class TestSymEig:
    def test_identity(self):
        dec = cs.sym_eig(np.eye(3))
        assert np.allclose(dec.values, [1, 1, 1])

    def test_all_ones(self):
        dec = cs.sym_eig(np.ones((3, 3)))
        assert np.allclose(dec.values, [0, 0, 3], atol=1e-12)

    def test_reconstruction_and_orthonormality(self):
        for seed in range(10):
            M = rand_sym(5, seed)
            dec = cs.sym_eig(M)
            recon = (dec.vectors * dec.values) @ dec.vectors.T
            assert np.linalg.norm(recon - M) <= 1e-8 * (1 + np.linalg.norm(M))
            assert np.max(np.abs(dec.vectors.T @ dec.vectors - np.eye(5))) <= 1e-10

    def test_sign_convention_deterministic(self):
        M = rand_sym(6, 1)
        a = cs.sym_eig(M)
        b = cs.sym_eig(M.copy())
        assert np.array_equal(a.vectors, b.vectors)
        for j in range(6):
            col = a.vectors[:, j]
            nz = np.flatnonzero(np.abs(col) > 1e-12)
            assert col[nz[0]] > 0

    def test_rejects_nonsymmetric(self):
        with pytest.raises(ContractError):
            cs.sym_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestSpectralNorm:
    def test_complete_graph(self):
        assert cs.spectral_norm(np.ones((4, 4)) - np.eye(4)) == pytest.approx(3.0, rel=1e-12)

    def test_zero(self):
        assert cs.spectral_norm(np.zeros((5, 5))) == 0.0

    def test_negation_invariance(self):
        M = rand_sym(8, 2)
        assert cs.spectral_norm(M) == pytest.approx(cs.spectral_norm(-M), rel=1e-12)

    def test_triangle_inequality_sampled(self):
        for seed in range(5):
            A, B = rand_sym(7, seed), rand_sym(7, seed + 100)
            assert cs.spectral_norm(A + B) <= cs.spectral_norm(A) + cs.spectral_norm(B) + 1e-10

    def test_wigner_band_small(self):
        # scaled-down version of the concentration gate (full run in acceptance)
        n, hits = 300, 0
        for seed in range(10):
            rng = np.random.default_rng(seed)
            W = rng.standard_normal((n, n))
            W = np.triu(W, 1)
            W = W + W.T
            val = cs.spectral_norm(W)
            if 2 * np.sqrt(n) - 3 * n**0.25 <= val <= 2 * np.sqrt(n) + 3 * n**0.25:
                hits += 1
        assert hits >= 9


class TestPsdProject:
    def test_psd_fixed_point(self):
        M = rand_sym(6, 3)
        P = cs.psd_project(M)
        P2 = cs.psd_project(P)
        assert np.linalg.norm(P2 - P) <= 1e-9

    def test_negative_identity(self):
        assert np.allclose(cs.psd_project(-np.eye(4)), 0.0)

    def test_diagonal_closed_form(self):
        assert np.allclose(cs.psd_project(np.diag([2.0, -3.0])), np.diag([2.0, 0.0]))

    def test_frobenius_nearest_variational(self):
        # <M - proj, X - proj> <= 0 for PSD X characterizes the projection
        rng = np.random.default_rng(4)
        for _ in range(100):
            M = rand_sym(6, int(rng.integers(0, 10**6)))
            P = cs.psd_project(M)
            G = rng.standard_normal((6, 6))
            X = G @ G.T
            assert np.tensordot(M - P, X - P) <= 1e-9 * (1 + np.abs(M).max())

    def test_min_eig_floor(self):
        M = rand_sym(10, 5)
        w = np.linalg.eigvalsh(cs.psd_project(M))
        assert w[0] >= -1e-10


class TestLambda2Orth:
    def test_identity(self):
        assert cs.lambda2_orth(np.eye(4), np.ones(4)) == pytest.approx(1.0, abs=1e-10)

    def test_all_ones_vs_ones_vector(self):
        assert cs.lambda2_orth(np.ones((3, 3)), np.ones(3)) == pytest.approx(0.0, abs=1e-10)

    def test_psd_with_kernel_vector(self):
        rng = np.random.default_rng(6)
        G = rng.standard_normal((5, 4))
        S = G @ G.T  # rank 4, one-dim kernel
        w, V = np.linalg.eigh(S)
        v = V[:, 0]
        val = cs.lambda2_orth(S, v)
        assert val >= -1e-9
        assert val == pytest.approx(w[1], rel=1e-8)

    def test_lower_bounded_by_min_eig(self):
        for seed in range(10):
            S = rand_sym(6, seed)
            v = np.random.default_rng(seed + 50).standard_normal(6)
            w = np.linalg.eigvalsh(S)
            assert cs.lambda2_orth(S, v) >= w[0] - 1e-10

    def test_zero_vector_rejected(self):
        with pytest.raises(ContractError):
            cs.lambda2_orth(np.eye(3), np.zeros(3))
