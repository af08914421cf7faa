"""Optimality certificates and failure witnesses.

Constructions: the canonical dual tuple (D, B, lambda, eta, S) certifying the
cluster matrix, the KKT verifier, the deterministic sufficient and necessary
condition checks, the rank-one-plus-spread primal perturbation that beats the
cluster matrix below threshold, the tilted-Gaussian and density-mixed
Bernoulli feasible points lower-bounding the auxiliary SDP value, and the
degree-corrected multi-community witness.

Solvers are never imported here; operations that need an auxiliary-SDP
maximizer take it (or a solver handle) as an argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import ParameterError, RegimeError, WitnessFailedError
from .info import kappa as kappa_fn
from .linalg import lambda2_orth, spectral_norm
from .model import e_vector, indicator, mean_matrix, sbm_cluster_matrix

IDENTITY_TOL = 1e-10


@dataclass
class DualCert:
    """Certificate tuple for the community SDP at a given support.

    The constructor's choices force S xi* = 0, complementary slackness, and
    the sign constraints; positive semidefiniteness of S is the verifier's
    question, never assumed.
    """

    support: tuple
    d: np.ndarray
    B: np.ndarray
    lam: float
    eta: float
    S: np.ndarray
    alpha_mean: float | None
    beta_mean: float
    beta_plugin: bool = False


@dataclass
class KktReport:
    accepted: bool
    unique: bool
    unique_by: str | None
    lambda2: float
    margins: dict[str, float]  # >= 0 means the check passed
    notes: str = ""


class SuffReport(NamedTuple):
    satisfied: bool
    margin: float
    min_in: float
    max_out: float
    norm_dev: float


@dataclass
class NecReport:
    consistent: bool
    worst_margin: float
    argmax_a: float
    terms: dict[float, float]  # a -> V(a) - (a/K) max_out
    values: dict[float, float]  # a -> solved V(a)
    argmax_solution: object = None
    min_in: float = 0.0
    max_out: float = 0.0


@dataclass(frozen=True)
class PerturbScalars:
    eps: float
    r: float
    alphaP: float
    betaP: float


@dataclass
class WitnessParams:
    tau: float = 0.0
    gamma: float = 0.0
    epsW: float = 0.0
    R: float = 0.0
    branch: str = ""


def build_dual_certificate(
    L: np.ndarray,
    truth: Sequence[int],
    beta_mean: float | None = None,
    alpha_mean: float | None = None,
) -> DualCert:
    """Canonical dual tuple at the given support (total; never raises on data).

    beta_mean defaults to the empirical mean of L outside the community block
    (flagged as a plug-in); with a generated instance pass the exact model
    mean instead.
    """
    L = np.asarray(L, dtype=float)
    n = L.shape[0]
    support = tuple(sorted(int(i) for i in truth))
    K = len(support)
    ins = np.asarray(support, dtype=int)
    mask = np.zeros(n, dtype=bool)
    mask[ins] = True
    outs = np.flatnonzero(~mask)

    beta_plugin = beta_mean is None
    if beta_plugin:
        cnt = n * (n - 1) - K * (K - 1)
        beta_mean = float((L.sum() - L[np.ix_(ins, ins)].sum()) / cnt) if cnt else 0.0

    e = e_vector(L, support)
    max_out = float(e[outs].max()) if outs.size else -math.inf
    lam = max(max_out / K, float(beta_mean))
    eta = float(e[ins].min()) - lam * K

    d = np.zeros(n)
    d[ins] = e[ins] - eta - lam * K
    B = np.zeros((n, n))
    if outs.size:
        b = lam - e[outs] / K
        B[np.ix_(outs, ins)] = b[:, None]
        B[np.ix_(ins, outs)] = b[None, :]

    S = -B - L + lam
    S[np.diag_indices(n)] += d + eta
    return DualCert(
        support=support,
        d=d,
        B=B,
        lam=lam,
        eta=eta,
        S=(S + S.T) / 2.0,
        alpha_mean=alpha_mean,
        beta_mean=float(beta_mean),
        beta_plugin=beta_plugin,
    )


def verify_kkt(
    L: np.ndarray,
    K: int,
    Z: np.ndarray,
    cert: DualCert,
    tol: float = 1e-8,
) -> KktReport:
    """Check every KKT condition with its own margin; margins >= 0 pass.

    Acceptance covers optimality of the cluster matrix; the uniqueness flag
    additionally requires the second-eigenvalue clause or the strict
    complementarity clause.
    """
    L = np.asarray(L, dtype=float)
    Z = np.asarray(Z, dtype=float)
    n = L.shape[0]
    if Z.shape != L.shape or cert.S.shape != L.shape:
        raise ParameterError("dimension mismatch between L, Z, and certificate")
    ins = np.asarray(cert.support, dtype=int)
    xi = indicator(cert.support, n)

    assembled = -cert.B - L + cert.lam
    assembled[np.diag_indices(n)] += cert.d + cert.eta
    id_scale = 1.0 + max(np.max(np.abs(L)), abs(cert.lam) * n, abs(cert.eta))
    margins = {}
    margins["identity"] = IDENTITY_TOL * id_scale - float(np.max(np.abs(cert.S - (assembled + assembled.T) / 2.0)))

    s_eigs = np.linalg.eigvalsh(cert.S)
    margins["psd"] = float(s_eigs[0]) + tol
    margins["s_xi"] = tol * (1.0 + float(np.max(np.abs(cert.S)))) - float(np.max(np.abs(cert.S @ xi)))
    margins["s_z"] = tol * (1.0 + abs(float(np.tensordot(L, Z)))) - abs(float(np.tensordot(cert.S, Z)))
    margins["d_nonneg"] = float(cert.d.min()) + tol
    margins["b_nonneg"] = float(cert.B.min()) + tol
    margins["comp_slack_d"] = tol - float(np.max(np.abs(cert.d * (np.diag(Z) - 1.0))))
    margins["comp_slack_b"] = tol - float(np.max(np.abs(cert.B * Z)))

    accepted = all(v >= 0 for v in margins.values())

    lam2 = lambda2_orth(cert.S, xi)
    unique_by = None
    if lam2 > tol:
        unique_by = "lambda2"
    else:
        mask = np.zeros(n, dtype=bool)
        mask[ins] = True
        outs = np.flatnonzero(~mask)
        if outs.size:
            cross_min = float(cert.B[np.ix_(outs, ins)].min())
            out_out = cert.B[np.ix_(outs, outs)]
            off = out_out[~np.eye(outs.size, dtype=bool)] if outs.size > 1 else np.array([math.inf])
            b_clause = min(cross_min, float(off.min()))
            if float(cert.d[ins].min()) > tol and b_clause > tol:
                unique_by = "strict_complementarity"
    return KktReport(
        accepted=accepted,
        unique=accepted and unique_by is not None,
        unique_by=unique_by,
        lambda2=float(lam2),
        margins=margins,
    )


def suff_check(
    L: np.ndarray,
    truth: Sequence[int],
    beta_mean: float,
    alpha_mean: float | None = None,
) -> SuffReport:
    """Deterministic sufficient condition: separation beats the noise norm.

    alpha_mean defaults to the empirical in-community mean (plug-in) when the
    exact model value is not available.
    """
    L = np.asarray(L, dtype=float)
    n = L.shape[0]
    ins = np.asarray(sorted(truth), dtype=int)
    K = ins.size
    mask = np.zeros(n, dtype=bool)
    mask[ins] = True
    outs = np.flatnonzero(~mask)
    if alpha_mean is None:
        cnt = K * (K - 1)
        alpha_mean = float(L[np.ix_(ins, ins)].sum() / cnt) if cnt else 0.0

    e = e_vector(L, ins)
    min_in = float(e[ins].min())
    max_out = float(e[outs].max()) if outs.size else -math.inf
    dev = spectral_norm(L - mean_matrix(ins, n, alpha_mean, beta_mean))
    margin = min_in - max(max_out, K * beta_mean) - dev + beta_mean
    return SuffReport(satisfied=margin > 0, margin=margin, min_in=min_in, max_out=max_out, norm_dev=dev)


def default_a_grid(K: int, n: int, q: float | None = None, kappa_val: float | None = None, points: int = 32) -> list[float]:
    """Geometric grid on [1, K] plus the analysis' special choices of a."""
    grid = list(np.geomspace(1.0, K, points)) if K > 1 else [1.0]
    grid.append(float(K))
    special = math.sqrt(K) * (n - K) ** 0.25
    if 1.0 <= special <= K:
        grid.append(special)
    if q is not None and q > 0:
        kap = kappa_val if kappa_val is not None else kappa_fn(n, q)
        a_b = math.sqrt(n * q / (1 - q)) / kap + 1.0
        if 1.0 <= a_b <= K:
            grid.append(a_b)
    return sorted(set(round(a, 12) for a in grid))


def nec_check(
    L: np.ndarray,
    truth: Sequence[int],
    a_grid: Sequence[float],
    vm: Callable[[np.ndarray, float], object],
) -> NecReport:
    """Deterministic necessary condition over the supplied a-grid.

    vm is a solver handle (M, a) -> solution with .objective and .Z; the
    auxiliary SDP runs on the submatrix outside the community. Restricting
    the sup to a subgrid only weakens the reported inconsistency, never
    fabricates one.
    """
    L = np.asarray(L, dtype=float)
    n = L.shape[0]
    ins = np.asarray(sorted(truth), dtype=int)
    K = ins.size
    mask = np.zeros(n, dtype=bool)
    mask[ins] = True
    outs = np.flatnonzero(~mask)
    if any(a < 1.0 or a > K for a in a_grid):
        raise ParameterError(f"a_grid must lie in [1, K={K}]")

    e = e_vector(L, ins)
    min_in = float(e[ins].min())
    max_out = float(e[outs].max()) if outs.size else 0.0
    M = L[np.ix_(outs, outs)]

    terms, values = {}, {}
    best_a, best_term, best_sol = None, -math.inf, None
    for a in a_grid:
        sol = vm(M, a)
        v = float(sol.objective)
        term = v - (a / K) * max_out
        terms[float(a)] = term
        values[float(a)] = v
        if term > best_term:
            best_a, best_term, best_sol = float(a), term, sol
    worst_margin = min_in - max_out - best_term
    return NecReport(
        consistent=worst_margin >= 0,
        worst_margin=worst_margin,
        argmax_a=best_a,
        terms=terms,
        values=values,
        argmax_solution=best_sol,
        min_in=min_in,
        max_out=max_out,
    )


def repair_vm_feasible(U: np.ndarray, a: float) -> np.ndarray:
    """Exactly restore trace 1 and off-diagonal mass a-1 while preserving
    nonnegativity and positive semidefiniteness (up to the input's own PSD
    error). Used to clean solver output before it enters a witness."""
    U = np.asarray(U, dtype=float)
    m = U.shape[0]
    U = np.maximum((U + U.T) / 2.0, 0.0)
    t = float(np.trace(U))
    if t <= 0:
        raise WitnessFailedError("degenerate auxiliary maximizer: nonpositive trace")
    U = U / t
    off = U.copy()
    np.fill_diagonal(off, 0.0)
    c = float(off.sum())
    target = a - 1.0
    if target <= 0:
        return np.diag(np.diag(U))
    if c >= target and c > 0:
        theta = target / c
        U = theta * U + (1 - theta) * np.diag(np.diag(U))
    else:
        if m <= 1 or target > m - 1:
            raise WitnessFailedError(f"off-diagonal target {target} unreachable at m={m}")
        theta = (m - 1 - target) / (m - 1 - c)
        U = theta * U + (1 - theta) * np.full((m, m), 1.0 / m)
    return U


def perturbation_solution(
    L: np.ndarray,
    truth: Sequence[int],
    U: np.ndarray,
    a: float,
    eps: float = 1e-3,
    psd_tol: float = 1e-9,
) -> tuple[np.ndarray, PerturbScalars]:
    """Feasible perturbation of the cluster matrix with first-order objective
    gain (1-a/K) max_out + V(a) - min_in.

    U is the auxiliary-SDP maximizer on the community complement (indices in
    ascending order); its equality constraints are exactly repaired first.
    The scalar pair solves the two equality constraints exactly (quadratic
    root nearest 1 - a/K); eps is halved until the assembled matrix passes
    the PSD check.
    """
    L = np.asarray(L, dtype=float)
    n = L.shape[0]
    ins = np.asarray(sorted(truth), dtype=int)
    K = ins.size
    if not (0 < eps < 0.5):
        raise ParameterError(f"eps must lie in (0, 1/2), got {eps}")
    if not (1.0 <= a <= K):
        raise ParameterError(f"a must lie in [1, K], got {a}")
    mask = np.zeros(n, dtype=bool)
    mask[ins] = True
    outs = np.flatnonzero(~mask)
    if outs.size == 0:
        raise ParameterError("perturbation needs a nonempty complement")

    e = e_vector(L, ins)
    i_min = int(ins[np.argmin(e[ins])])
    j_max = int(outs[np.argmax(e[outs])])
    r = a / K

    U = repair_vm_feasible(U, a)
    U_embed = np.zeros((n, n))
    U_embed[np.ix_(outs, outs)] = U

    while True:
        beta = _perturb_beta(K, r, eps)
        alpha = (K - 2 * eps) / (K - 2 * eps + (1 + beta * beta) * eps * eps)
        xi = np.zeros(n)
        xi[ins] = 1.0
        xi[i_min] = 1.0 - eps
        xi[j_max] = beta * eps
        Z = alpha * np.outer(xi, xi) + 2 * eps * U_embed
        Z = (Z + Z.T) / 2.0
        min_eig = float(np.linalg.eigvalsh(Z)[0])
        feasible = (
            min_eig >= -psd_tol
            and float(Z.min()) >= -1e-12
            and float(np.diag(Z).max()) <= 1.0 + 1e-12
        )
        if feasible:
            return Z, PerturbScalars(eps=eps, r=r, alphaP=alpha, betaP=beta)
        eps /= 2.0
        if eps < 1e-8:
            raise WitnessFailedError(
                f"no feasible perturbation down to eps={eps:.2e} (min eig {min_eig:.2e})"
            )


def _perturb_beta(K: int, r: float, eps: float) -> float:
    """Root nearest 1 - r of the exact alpha-elimination quadratic.

    Exact elimination of the scalar from the two equality constraints
    (symbolically verified); keeping every term is what makes the assembled
    matrix meet the trace and mass constraints to 1e-9 at finite eps.
    """
    A = 0.5 * eps * (K * K - 2 * K * eps * r - K + 2 * eps)
    B = -(K * K) + 3.0 * eps * K - 2.0 * eps * eps
    C = (
        K * K * (1.0 - r)
        + 0.5 * K * K * eps
        - K * eps * eps * r
        + 2.0 * K * eps * r
        - 2.5 * K * eps
        + eps * eps
    )
    disc = B * B - 4.0 * A * C
    if disc < 0:
        raise WitnessFailedError(f"negative discriminant in perturbation scalars: {disc}")
    qf = -(B - math.sqrt(disc)) / 2.0 if B < 0 else -(B + math.sqrt(disc)) / 2.0
    return C / qf


def vm_witness_gaussian(
    W: np.ndarray,
    a: float,
    c_lo: float = 0.2,
    c_hi: float = 4.0,
    branch: str | None = None,
) -> tuple[np.ndarray, WitnessParams]:
    """Tilted-likelihood feasible point for the auxiliary SDP on Gaussian noise.

    Trace and total mass hold exactly by normalization for any W; positive
    semidefiniteness is probabilistic and reported, not guaranteed. Branches
    by a versus sqrt(m); the cutoffs are configuration, the asymptotic
    branches are not sharp at any finite m.
    """
    W = np.asarray(W, dtype=float)
    m = W.shape[0]
    if a <= 1.0:
        raise ParameterError(f"gaussian witness requires a > 1, got {a}")
    sqm = math.sqrt(m)
    if branch is None:
        if a >= c_hi * sqm:
            branch = "mu"
        elif a <= c_lo * sqm:
            branch = "tau2"
        else:
            branch = "const"

    if branch == "mu":
        tau = sqm / (2 * (a - 1)) - m**0.75 / (2 * math.sqrt(2) * (a - 1) ** 1.5) - 1.0 / sqm
        if tau <= 0:
            raise WitnessFailedError(f"nonpositive tilt {tau:.3g}; a too large for m")
    elif branch == "tau2":
        la = math.log(m / (a * a))
        if la <= 1.0:
            raise WitnessFailedError(f"log(m/a^2) = {la:.3g} too small for the small-a branch")
        tau = math.sqrt((la - math.log(la)) / 3.0)
    elif branch == "const":
        tau = 0.9 * math.sqrt(math.log1p(m / (4 * a * a)))
    else:
        raise ParameterError(f"unknown branch {branch!r}")

    off = ~np.eye(m, dtype=bool)
    G = np.zeros((m, m))
    G[off] = np.exp(tau * W[off] - tau * tau / 2.0)
    alpha = float(G.sum() / (m * (m - 1)))
    Z = (a - 1.0) / (alpha * m * (m - 1)) * G
    Z[np.diag_indices(m)] = 1.0 / m
    return Z, WitnessParams(tau=tau, branch=branch)


def vm_witness_bernoulli(
    M: np.ndarray,
    a: float,
    q: float,
    kappa_val: float | None = None,
) -> tuple[np.ndarray, WitnessParams]:
    """Density-mixed feasible point for the auxiliary SDP on Bernoulli noise.

    The objective identity <M,Z> = (a-1) gamma is exact by construction; PSD
    is probabilistic and reported.
    """
    M = np.asarray(M, dtype=float)
    m = M.shape[0]
    if a < 1.0:
        raise ParameterError(f"bernoulli witness requires a >= 1, got {a}")
    R = float(M.sum() / (m * (m - 1)))
    if not (0.0 < R < 1.0):
        raise RegimeError(f"degenerate empirical density R={R}; witness undefined")
    kap = kappa_val if kappa_val is not None else kappa_fn(m, q)
    denom_arg = m * min(math.sqrt(q), 1.0 / a if a > 0 else math.inf)
    if denom_arg <= 1.0:
        raise WitnessFailedError(f"m min(sqrt(q), 1/a) = {denom_arg:.3g} <= 1; slack undefined")
    epsW = 2.0 / math.log(denom_arg)
    if epsW >= 1.0:
        raise WitnessFailedError(f"slack epsW = {epsW:.3g} >= 1 at m={m}; matrix too small")

    if a == 1.0:
        Z = np.eye(m) / m
        return Z, WitnessParams(gamma=0.0, epsW=epsW, R=R, branch="identity")

    gamma = min(q + (1 - epsW) * math.sqrt(m * q * (1 - q)) / (kap * (a - 1)), 1.0)
    alpha = (gamma - R) / (R * (1 - R)) * (a - 1) / (m * (m - 1))
    beta = (1 - gamma) / (1 - R) * (a - 1) / (m * (m - 1))
    off = ~np.eye(m, dtype=bool)
    Z = np.zeros((m, m))
    Z[off] = alpha * M[off] + beta
    Z[np.diag_indices(m)] = 1.0 / m
    return Z, WitnessParams(gamma=gamma, epsW=epsW, R=R, branch="mixed")


def sbm_witness(
    A: np.ndarray,
    r: int,
    eps_gain: float,
    blocks: Sequence[Sequence[int]],
) -> tuple[np.ndarray, dict]:
    """Degree-corrected feasible candidate with objective (1+eps_gain) <A,Y*>.

    A must be an adjacency (0/1) matrix. The three coefficients solve the
    zero-row-sum and objective equations exactly; constraint satisfaction
    beyond those identities (lower bounds, PSD) is reported in the info dict.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if r < 2:
        raise ParameterError("sbm witness requires r >= 2")
    d = A.sum(axis=1)
    z = float(d.sum())
    if z == 0:
        raise WitnessFailedError("all degrees zero; coefficient system is singular")
    Ystar = sbm_cluster_matrix(blocks, n, r)
    base = float(np.tensordot(A, Ystar))
    g = (1.0 + eps_gain) * base

    dn2 = float(d @ d)
    denom = z + z * z / ((n - 1) * (n - 2)) - 2.0 * dn2 / (n - 2)
    if abs(denom) < 1e-12 * max(1.0, z):
        raise WitnessFailedError("singular coefficient system for the witness")
    s = (g + z / (n - 1)) / denom
    w = -s / (n - 2)
    t = s * z / ((n - 1) * (n - 2)) - 1.0 / (n - 1)

    Y = s * A + t * (1.0 - np.eye(n)) + w * (d[:, None] + d[None, :] - 2.0 * np.diag(d))
    Y[np.diag_indices(n)] = 0.0
    Y += np.eye(n)

    off = ~np.eye(n, dtype=bool)
    info = {
        "s": s,
        "t": t,
        "w": w,
        "objective": float(np.tensordot(A, Y)),
        "target_objective": g,
        "base_objective": base,
        "row_sum_max": float(np.max(np.abs(Y.sum(axis=1)))),
        "min_offdiag": float(Y[off].min()),
        "lower_bound": -1.0 / (r - 1),
        "corner_bound": t + 2.0 * w * float(d.max()),  # analytic min-offdiag surrogate
        "min_eig": float(np.linalg.eigvalsh((Y + Y.T) / 2.0)[0]),
    }
    return Y, info
