"""Hidden-community and SBM instance generation, score matrices, degree statistics.

Data matrices are dense symmetric float ndarrays with exactly zero diagonal.
Generation is reproducible across platforms: a counter-based Philox generator
keyed by the 64-bit seed, community sampled by a Fisher-Yates partial shuffle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import DegenerateLikelihoodError, ParameterError


class Kind(str, Enum):
    GAUSSIAN = "gaussian"
    BERNOULLI = "bernoulli"
    SBM = "sbm"


class Score(str, Enum):
    ADJACENCY = "adjacency"
    LLR = "llr"


@dataclass(frozen=True)
class ModelSpec:
    """Model parameters: size n, community size K, and the P/Q parameters.

    Gaussian: P = N(mu,1), Q = N(0,1). Bernoulli: P = Bern(p), Q = Bern(q).
    Sbm: r communities of size K = n/r, within-block Bern(p), cross Bern(q).
    """

    kind: Kind
    n: int
    K: int
    mu: float | None = None
    p: float | None = None
    q: float | None = None
    r: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError(f"n must be positive, got {self.n}")
        if not (2 <= self.K <= self.n):
            raise ParameterError(f"K must satisfy 2 <= K <= n, got K={self.K}, n={self.n}")
        if self.kind == Kind.GAUSSIAN:
            if self.mu is None or self.mu <= 0:
                raise ParameterError(f"Gaussian model requires mu > 0, got {self.mu}")
        elif self.kind in (Kind.BERNOULLI, Kind.SBM):
            if self.p is None or self.q is None or not (0 <= self.q < self.p <= 1):
                raise ParameterError(f"require 0 <= q < p <= 1, got p={self.p}, q={self.q}")
            if self.kind == Kind.SBM:
                if self.r is None or self.r < 2 or self.r * self.K != self.n:
                    raise ParameterError(
                        f"SBM requires n = r*K exactly with r >= 2, got n={self.n}, r={self.r}, K={self.K}"
                    )
        else:  # pragma: no cover
            raise ParameterError(f"unknown kind {self.kind}")

    def to_dict(self) -> dict:
        d = {"kind": self.kind.value, "n": self.n, "K": self.K}
        for name in ("mu", "p", "q", "r"):
            v = getattr(self, name)
            if v is not None:
                d[name] = v
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        return cls(
            kind=Kind(d["kind"]),
            n=int(d["n"]),
            K=int(d["K"]),
            mu=d.get("mu"),
            p=d.get("p"),
            q=d.get("q"),
            r=d.get("r"),
        )


@dataclass(frozen=True)
class Instance:
    """One generated draw: data matrix A, ground truth, and provenance."""

    spec: ModelSpec
    A: np.ndarray
    truth: tuple  # sorted community indices; for SBM, tuple of r sorted blocks
    seed: int

    @property
    def blocks(self) -> tuple:
        if self.spec.kind != Kind.SBM:
            raise ParameterError("blocks is only defined for SBM instances")
        return self.truth


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


def _sample_subset(rng: np.random.Generator, n: int, K: int) -> np.ndarray:
    # Fisher-Yates partial shuffle: K swaps, take the first K slots, sort.
    perm = np.arange(n)
    for i in range(K):
        j = i + int(rng.integers(0, n - i))
        perm[i], perm[j] = perm[j], perm[i]
    return np.sort(perm[:K])


def _symmetrize_upper(n: int, upper: np.ndarray) -> np.ndarray:
    A = np.zeros((n, n))
    iu = np.triu_indices(n, k=1)
    A[iu] = upper
    A += A.T
    return A


def gen_instance(spec: ModelSpec, seed: int) -> Instance:
    """Draw C* uniformly and fill the symmetric zero-diagonal data matrix."""
    if spec.kind not in (Kind.GAUSSIAN, Kind.BERNOULLI):
        raise ParameterError(f"gen_instance handles Gaussian/Bernoulli, got {spec.kind}")
    rng = _rng(seed)
    truth = _sample_subset(rng, spec.n, spec.K)
    n = spec.n
    iu = np.triu_indices(n, k=1)
    inside = np.zeros(n, dtype=bool)
    inside[truth] = True
    in_block = inside[iu[0]] & inside[iu[1]]
    if spec.kind == Kind.GAUSSIAN:
        upper = rng.standard_normal(iu[0].size)
        upper[in_block] += spec.mu
    else:
        u = rng.random(iu[0].size)
        prob = np.where(in_block, spec.p, spec.q)
        upper = (u < prob).astype(float)
    A = _symmetrize_upper(n, upper)
    return Instance(spec=spec, A=A, truth=tuple(int(i) for i in truth), seed=int(seed))


def gen_sbm(n: int, r: int, p: float, q: float, seed: int) -> Instance:
    """Partition [n] into r equal blocks uniformly; Bern(p) within, Bern(q) across."""
    if r < 1 or n % r != 0:
        raise ParameterError(f"n must be divisible by r, got n={n}, r={r}")
    K = n // r
    spec = ModelSpec(kind=Kind.SBM, n=n, K=K, p=p, q=q, r=r)
    rng = _rng(seed)
    perm = rng.permutation(n)
    blocks = tuple(tuple(sorted(int(i) for i in perm[b * K : (b + 1) * K])) for b in range(r))
    label = np.empty(n, dtype=int)
    for b, blk in enumerate(blocks):
        label[list(blk)] = b
    iu = np.triu_indices(n, k=1)
    same = label[iu[0]] == label[iu[1]]
    u = rng.random(iu[0].size)
    upper = (u < np.where(same, p, q)).astype(float)
    A = _symmetrize_upper(n, upper)
    return Instance(spec=spec, A=A, truth=blocks, seed=int(seed))


def score_matrix(inst: Instance, kind: Score = Score.ADJACENCY) -> np.ndarray:
    """Adjacency returns A; Llr applies the entrywise log-likelihood ratio."""
    if kind == Score.ADJACENCY:
        return inst.A.copy()
    spec = inst.spec
    n = spec.n
    off = ~np.eye(n, dtype=bool)
    L = np.zeros((n, n))
    if spec.kind == Kind.GAUSSIAN:
        L[off] = spec.mu * (inst.A[off] - spec.mu / 2.0)
    elif spec.kind in (Kind.BERNOULLI, Kind.SBM):
        p, q = spec.p, spec.q
        if p >= 1.0 or q <= 0.0:
            raise DegenerateLikelihoodError(
                f"LLR undefined for p={p}, q={q}; use the adjacency score"
            )
        slope = math.log(p * (1 - q) / (q * (1 - p)))
        offset = math.log((1 - p) / (1 - q))
        L[off] = slope * inst.A[off] + offset
    return L


def e_stat(L: np.ndarray, S: Sequence[int], i: int) -> float:
    """Sum of scores from vertex i into the set S (diagonal contributes zero)."""
    idx = np.asarray(list(S), dtype=int)
    return float(L[i, idx].sum())


def e_vector(L: np.ndarray, S: Sequence[int]) -> np.ndarray:
    """e(i, S) for every i, vectorized."""
    idx = np.asarray(list(S), dtype=int)
    return L[:, idx].sum(axis=1)


def cluster_matrix(truth: Sequence[int], n: int) -> np.ndarray:
    """Rank-one 0/1 matrix xi* xi*' including diagonal ones on the community."""
    xi = indicator(truth, n)
    return np.outer(xi, xi)


def indicator(truth: Sequence[int], n: int) -> np.ndarray:
    xi = np.zeros(n)
    xi[np.asarray(list(truth), dtype=int)] = 1.0
    return xi


def sbm_cluster_matrix(blocks: Sequence[Sequence[int]], n: int, r: int) -> np.ndarray:
    """Y*: +1 within blocks (incl. diagonal), -1/(r-1) across."""
    Y = np.full((n, n), -1.0 / (r - 1))
    for blk in blocks:
        idx = np.asarray(list(blk), dtype=int)
        Y[np.ix_(idx, idx)] = 1.0
    return Y


def model_means(spec: ModelSpec, score: Score = Score.ADJACENCY) -> tuple[float, float]:
    """(alpha, beta) = (E_P[L_12], E_Q[L_12]) for the given score kind."""
    if spec.kind == Kind.GAUSSIAN:
        if score == Score.ADJACENCY:
            return float(spec.mu), 0.0
        return float(spec.mu**2 / 2.0), float(-(spec.mu**2) / 2.0)
    p, q = spec.p, spec.q
    if score == Score.ADJACENCY:
        return float(p), float(q)
    if p >= 1.0 or q <= 0.0:
        raise DegenerateLikelihoodError("LLR means undefined for p=1 or q=0")
    slope = math.log(p * (1 - q) / (q * (1 - p)))
    offset = math.log((1 - p) / (1 - q))
    return float(slope * p + offset), float(slope * q + offset)


def mean_matrix(truth: Sequence[int], n: int, alpha: float, beta: float) -> np.ndarray:
    """E[L]: alpha on C*xC* off-diagonal, beta elsewhere off-diagonal, zero diagonal."""
    M = np.full((n, n), beta)
    idx = np.asarray(list(truth), dtype=int)
    M[np.ix_(idx, idx)] = alpha
    np.fill_diagonal(M, 0.0)
    return M
