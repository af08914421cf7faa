"""First-order solvers for the community SDP, the auxiliary trace-one SDP,
and the multi-community SDP.

All three are solved by the same consensus operator-splitting scheme with
three blocks: the affine equality set (closed-form rank-two correction), the
PSD cone (one eigendecomposition per iteration), and the entrywise box. The
duality gap reported at check points comes from a feasible dual tuple
assembled out of the scaled multipliers, so a small gap is meaningful and not
merely heuristic. One solve is deterministic and touches no RNG.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ParameterError
from .linalg import lambda2_orth
from .model import indicator

OPTIMAL = "optimal"
MAX_ITERS = "max_iters"
INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class SolverOptions:
    tol_primal: float = 1e-7
    tol_dual: float = 1e-7
    tol_gap: float = 1e-7
    max_iters: int = 50000
    penalty: float = 1.0  # base splitting step; self-adaptive during the run
    over_relaxation: float = 1.6
    check_every: int = 25
    certificate_exit: bool = True  # community problem only

    def __post_init__(self):
        if min(self.tol_primal, self.tol_dual, self.tol_gap) <= 0:
            raise ParameterError("tolerances must be positive")
        if self.max_iters < 1:
            raise ParameterError("max_iters must be >= 1")
        if not (1.0 <= self.over_relaxation < 2.0):
            raise ParameterError("over_relaxation must lie in [1, 2)")


@dataclass
class SdpSolution:
    Z: np.ndarray
    objective: float
    status: str
    residuals: tuple[float, float, float]  # (primal, dual, gap)
    iters: int
    info: dict = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


@dataclass
class FeasReport:
    violations: dict[str, float]
    max_violation: float

    def ok(self, tol: float) -> bool:
        return self.max_violation <= tol


# --- problem adapters ------------------------------------------------------


class _CommunityProblem:
    """max <L,Z> s.t. Z psd, Z >= 0, Z_ii <= 1, tr Z = K, <J,Z> = K^2."""

    def __init__(self, L: np.ndarray, K: int):
        self.C = L
        self.n = L.shape[0]
        self.K = int(K)

    def start(self) -> np.ndarray:
        n, K = self.n, self.K
        Z = np.full((n, n), K * (K - 1) / (n * (n - 1)))
        np.fill_diagonal(Z, K / n)
        return Z

    def proj_affine(self, V: np.ndarray) -> np.ndarray:
        n, K = self.n, self.K
        tr = float(np.trace(V))
        sm = float(V.sum())
        det = n * n * (n - 1.0)
        r1, r2 = K - tr, K * K - sm
        a = (r1 * n * n - r2 * n) / det
        b = (r2 * n - r1 * n) / det
        X = V + b
        X[np.diag_indices(n)] += a
        return X

    def proj_box(self, V: np.ndarray) -> np.ndarray:
        X = np.maximum(V, 0.0)
        d = np.clip(np.diag(X), 0.0, 1.0)
        X[np.diag_indices(self.n)] = d
        return X

    def feasibility(self, Z: np.ndarray, min_eig: float) -> FeasReport:
        n, K = self.n, self.K
        v = {
            "min_eig": max(0.0, -min_eig),
            "min_entry": max(0.0, -float(Z.min())),
            "diag_excess": max(0.0, float(np.diag(Z).max()) - 1.0),
            "trace": abs(float(np.trace(Z)) - K),
            "mass": abs(float(Z.sum()) - K * K),
        }
        return FeasReport(v, max(v.values()))

    def dual_objective(self, rho: float, U_aff: np.ndarray, U_box: np.ndarray):
        n, K = self.n, self.K
        Ya = rho * U_aff
        Yb = rho * U_box
        s1, s2 = float(np.trace(Ya)), float(Ya.sum())
        lam = (s1 - s2) / (n * n - n)
        eta = -(s1 / n) - lam
        d_hat = np.maximum(-np.diag(Yb), 0.0)
        B_hat = np.maximum(Yb, 0.0)
        S = -B_hat - self.C + lam
        S[np.diag_indices(n)] += d_hat + eta
        sig = float(np.linalg.eigvalsh((S + S.T) / 2.0)[0])
        if sig < 0:
            eta -= sig
        return float(d_hat.sum() + eta * K + lam * K * K)


class _VmProblem:
    """max <M,Z> s.t. Z psd, Z >= 0, tr Z = 1, <J,Z> = a."""

    def __init__(self, M: np.ndarray, a: float):
        self.C = M
        self.n = M.shape[0]
        self.a = float(a)

    def start(self) -> np.ndarray:
        m, a = self.n, self.a
        gamma = (a - 1.0) / (m - 1.0) if m > 1 else 0.0
        Z = np.full((m, m), gamma / m)
        np.fill_diagonal(Z, 1.0 / m)
        return Z

    def proj_affine(self, V: np.ndarray) -> np.ndarray:
        n = self.n
        tr = float(np.trace(V))
        sm = float(V.sum())
        det = n * n * (n - 1.0)
        r1, r2 = 1.0 - tr, self.a - sm
        a = (r1 * n * n - r2 * n) / det
        b = (r2 * n - r1 * n) / det
        X = V + b
        X[np.diag_indices(n)] += a
        return X

    def proj_box(self, V: np.ndarray) -> np.ndarray:
        return np.maximum(V, 0.0)

    def feasibility(self, Z: np.ndarray, min_eig: float) -> FeasReport:
        v = {
            "min_eig": max(0.0, -min_eig),
            "min_entry": max(0.0, -float(Z.min())),
            "trace": abs(float(np.trace(Z)) - 1.0),
            "mass": abs(float(Z.sum()) - self.a),
        }
        return FeasReport(v, max(v.values()))

    def dual_objective(self, rho: float, U_aff: np.ndarray, U_box: np.ndarray):
        n = self.n
        Ya = rho * U_aff
        s1, s2 = float(np.trace(Ya)), float(Ya.sum())
        lam = (s1 - s2) / (n * n - n)
        eta = -(s1 / n) - lam
        B_hat = np.maximum(rho * U_box, 0.0)
        S = lam - B_hat - self.C
        S[np.diag_indices(n)] += eta
        sig = float(np.linalg.eigvalsh((S + S.T) / 2.0)[0])
        if sig < 0:
            eta -= sig
        return float(eta + lam * self.a)


class _SbmProblem:
    """max <A,Y> s.t. Y psd, Y_ii = 1, Y_ij >= -1/(r-1), <J,Y> = 0."""

    def __init__(self, A: np.ndarray, r: int):
        self.C = A
        self.n = A.shape[0]
        self.r = int(r)
        self.lower = -1.0 / (r - 1)

    def start(self) -> np.ndarray:
        n = self.n
        Y = np.full((n, n), -1.0 / (n - 1))
        np.fill_diagonal(Y, 1.0)
        return Y

    def proj_affine(self, V: np.ndarray) -> np.ndarray:
        n = self.n
        X = V.copy()
        np.fill_diagonal(X, 0.0)
        off_sum = float(X.sum())
        X += (-n - off_sum) / (n * n - n)
        np.fill_diagonal(X, 1.0)
        return X

    def proj_box(self, V: np.ndarray) -> np.ndarray:
        X = np.maximum(V, self.lower)
        np.fill_diagonal(X, np.diag(V))
        return X

    def feasibility(self, Y: np.ndarray, min_eig: float) -> FeasReport:
        off = Y[~np.eye(self.n, dtype=bool)]
        v = {
            "min_eig": max(0.0, -min_eig),
            "diag": float(np.max(np.abs(np.diag(Y) - 1.0))),
            "lower_bound": max(0.0, self.lower - float(off.min())),
            "mass": abs(float(Y.sum())),
        }
        return FeasReport(v, max(v.values()))

    def dual_objective(self, rho: float, U_aff: np.ndarray, U_box: np.ndarray):
        n = self.n
        Ya = rho * U_aff
        off_mask = ~np.eye(n, dtype=bool)
        lam = -float(Ya[off_mask].mean())
        d_hat = -np.diag(Ya) - lam
        B_hat = np.maximum(rho * U_box, 0.0)
        np.fill_diagonal(B_hat, 0.0)
        S = lam - B_hat - self.C
        S[np.diag_indices(n)] += d_hat
        sig = float(np.linalg.eigvalsh((S + S.T) / 2.0)[0])
        if sig < 0:
            d_hat = d_hat - sig
        return float(d_hat.sum() + B_hat.sum() / (self.r - 1))


# --- engine ----------------------------------------------------------------


def _psd_step(V: np.ndarray) -> tuple[np.ndarray, float]:
    """Projection onto the PSD cone; also returns min eigenvalue of V.

    Reconstructs from whichever side of the spectrum is smaller.
    """
    w, Q = np.linalg.eigh(V)
    if w[0] >= 0:
        return V.copy(), float(w[0])  # callers may reuse the input buffer
    pos = w > 0
    npos = int(np.count_nonzero(pos))
    if npos == 0:
        return np.zeros_like(V), float(w[0])
    if npos <= V.shape[0] - npos:
        Qp = Q[:, pos]
        X = (Qp * w[pos]) @ Qp.T
    else:
        Qn = Q[:, ~pos]
        X = V - (Qn * w[~pos]) @ Qn.T
    X += X.T
    X *= 0.5
    return X, float(w[0])


def _run_admm(problem, opts: SolverOptions, z0: np.ndarray | None = None, on_check=None) -> SdpSolution:
    C = problem.C
    n = problem.n
    scale = max(float(np.linalg.norm(C, "fro")) / max(n, 1), 1e-8)
    rho = opts.penalty * scale
    alpha = opts.over_relaxation

    Zbar = problem.start() if z0 is None else np.array(z0, dtype=float)
    U_aff = np.zeros_like(Zbar)
    U_psd = np.zeros_like(Zbar)
    U_box = np.zeros_like(Zbar)
    V = np.empty_like(Zbar)
    Zprev = np.empty_like(Zbar)
    acc = np.empty_like(Zbar)
    Cdiv = C / (3.0 * rho)

    best = None
    s_norm = math.inf
    for k in range(1, opts.max_iters + 1):
        np.subtract(Zbar, U_aff, out=V)
        Xa = problem.proj_affine(V)
        np.subtract(Zbar, U_psd, out=V)
        Xp, _ = _psd_step(V)
        np.subtract(Zbar, U_box, out=V)
        Xb = problem.proj_box(V)

        np.copyto(Zprev, Zbar)
        # Znew = mean_b(alpha X_b + (1-alpha) Zbar + U_b) + C/(3 rho)
        np.add(Xa, Xb, out=acc)
        acc += Xp
        acc *= alpha / 3.0
        acc += (1.0 - alpha) * Zbar
        np.add(U_aff, U_box, out=Zbar)
        Zbar += U_psd
        Zbar /= 3.0
        Zbar += acc
        Zbar += Cdiv

        # scaled dual updates: U_b += alpha X_b + (1-alpha) Zprev - Znew
        np.subtract(Zbar, (1.0 - alpha) * Zprev, out=acc)
        U_aff += alpha * Xa
        U_aff -= acc
        U_psd += alpha * Xp
        U_psd -= acc
        U_box += alpha * Xb
        U_box -= acc

        if k % 10 == 0:
            r_norm = math.sqrt(
                np.linalg.norm(Xa - Zbar) ** 2
                + np.linalg.norm(Xp - Zbar) ** 2
                + np.linalg.norm(Xb - Zbar) ** 2
            )
            s_norm = rho * math.sqrt(3.0) * float(np.linalg.norm(Zbar - Zprev))
            if r_norm > 10.0 * s_norm and rho < 1e8 * scale:
                rho *= 2.0
                U_aff /= 2.0
                U_psd /= 2.0
                U_box /= 2.0
                Cdiv = C / (3.0 * rho)
            elif s_norm > 10.0 * r_norm and rho > 1e-8 * scale:
                rho /= 2.0
                U_aff *= 2.0
                U_psd *= 2.0
                U_box *= 2.0
                Cdiv = C / (3.0 * rho)

        if k % opts.check_every == 0 or k == opts.max_iters:
            Zhat = problem.proj_affine((Zbar + Zbar.T) / 2.0)
            w = np.linalg.eigvalsh(Zhat)
            feas = problem.feasibility(Zhat, float(w[0]))
            obj = float(np.tensordot(C, Zhat))
            dual_obj = problem.dual_objective(rho, U_aff, U_box)
            gap = dual_obj - obj
            dual_res = s_norm / (1.0 + float(np.linalg.norm(Zbar)))
            best = SdpSolution(
                Z=Zhat,
                objective=obj,
                status=MAX_ITERS,
                residuals=(feas.max_violation, dual_res, gap),
                iters=k,
                info={"rho": rho, "dual_objective": dual_obj, "violations": feas.violations},
            )
            if on_check is not None:
                exact = on_check(Zbar, k, dual_obj)
                if exact is not None:
                    return exact
            if (
                feas.max_violation <= opts.tol_primal
                and dual_res <= opts.tol_dual
                and abs(gap) <= opts.tol_gap * (1.0 + abs(obj))
            ):
                best.status = OPTIMAL
                return best

    if best is None:  # max_iters below check_every
        Zhat = problem.proj_affine((Zbar + Zbar.T) / 2.0)
        w = np.linalg.eigvalsh(Zhat)
        feas = problem.feasibility(Zhat, float(w[0]))
        best = SdpSolution(
            Z=Zhat,
            objective=float(np.tensordot(problem.C, Zhat)),
            status=MAX_ITERS,
            residuals=(feas.max_violation, math.inf, math.inf),
            iters=opts.max_iters,
        )
    return best


# --- public API ------------------------------------------------------------


def solve_community_sdp(
    L: np.ndarray,
    K: int,
    opts: SolverOptions | None = None,
    z0: np.ndarray | None = None,
) -> SdpSolution:
    """Maximize <L,Z> over the community-SDP feasible set.

    With certificate_exit on, the run stops early whenever the canonical dual
    certificate of the currently rounded support verifies strictly; the
    returned Z is then the exactly feasible cluster matrix with certified
    zero gap.
    """
    L = np.asarray(L, dtype=float)
    n = L.shape[0]
    if not (1 <= K <= n):
        raise ParameterError(f"require 1 <= K <= n, got K={K}, n={n}")
    opts = opts or SolverOptions()
    problem = _CommunityProblem(L, K)

    on_check = None
    if opts.certificate_exit and 1 < K:
        from .certify import build_dual_certificate  # deferred: certify sits above sdp

        state = {"support": None, "stable": 0, "cert_tried": None}

        def on_check(Zbar, k, dual_obj):
            rows = Zbar.sum(axis=1)
            support = tuple(int(i) for i in np.sort(np.argpartition(rows, -K)[-K:]))
            xi = indicator(support, n)
            Zstar = np.outer(xi, xi)
            vert = float(np.tensordot(L, Zstar))

            # certified near-optimal vertex: the extracted dual bound is feasible
            # by construction, the vertex is exactly feasible, so a small gap
            # between them certifies the vertex within tol_gap.
            gap = dual_obj - vert
            if gap <= opts.tol_gap * (1.0 + abs(vert)):
                return SdpSolution(
                    Z=Zstar,
                    objective=vert,
                    status=OPTIMAL,
                    residuals=(0.0, 0.0, max(gap, 0.0)),
                    iters=k,
                    info={"vertex_exit": True, "support": support, "dual_objective": dual_obj},
                )

            # canonical dual certificate of the rounded support: when it
            # verifies strictly, the vertex is the unique optimum (exact exit).
            if support == state["support"]:
                state["stable"] += 1
            else:
                state["support"] = support
                state["stable"] = 0
                return None
            if state["stable"] < 1 or state["cert_tried"] == support:
                return None
            state["cert_tried"] = support
            comp = [i for i in range(n) if i not in set(support)]
            if comp:
                sub = L[np.ix_(comp, comp)]
                cnt = len(comp) * (len(comp) - 1)
                beta_emp = float(sub.sum() / cnt) if cnt else 0.0
            else:
                beta_emp = 0.0
            cert = build_dual_certificate(L, support, beta_mean=beta_emp)
            lam2 = lambda2_orth(cert.S, xi)
            s_scale = 1.0 + float(np.max(np.abs(cert.S)))
            if lam2 <= 1e-7 * s_scale:
                return None
            return SdpSolution(
                Z=Zstar,
                objective=vert,
                status=OPTIMAL,
                residuals=(0.0, 0.0, 0.0),
                iters=k,
                info={"certificate_exit": True, "lambda2": lam2, "support": support},
            )

    return _run_admm(problem, opts, z0=z0, on_check=on_check)


def solve_vm(M: np.ndarray, a: float, opts: SolverOptions | None = None, z0: np.ndarray | None = None) -> SdpSolution:
    """Value and maximizer of the auxiliary SDP with trace 1 and total mass a.

    Outside 1 <= a <= m there is no feasible point; the returned status is
    Infeasible and the objective -inf.
    """
    M = np.asarray(M, dtype=float)
    m = M.shape[0]
    if not (1.0 <= a <= m):
        return SdpSolution(
            Z=np.zeros((m, m)),
            objective=-math.inf,
            status=INFEASIBLE,
            residuals=(math.inf, math.inf, math.inf),
            iters=0,
        )
    # Presolve the two boundary faces, which are exact set reductions:
    # a = 1 forces zero off-diagonal mass (value 0), a = m forces Z = J/m.
    if a == 1.0:
        return SdpSolution(
            Z=np.eye(m) / m,
            objective=0.0,
            status=OPTIMAL,
            residuals=(0.0, 0.0, 0.0),
            iters=0,
            info={"presolve": "a=1"},
        )
    if a == float(m):
        return SdpSolution(
            Z=np.full((m, m), 1.0 / m),
            objective=float(M.sum() / m),
            status=OPTIMAL,
            residuals=(0.0, 0.0, 0.0),
            iters=0,
            info={"presolve": "a=m"},
        )
    opts = opts or SolverOptions()
    return _run_admm(_VmProblem(M, a), opts, z0=z0)


def solve_sbm_sdp(A: np.ndarray, r: int, opts: SolverOptions | None = None, z0: np.ndarray | None = None) -> SdpSolution:
    """Maximize <A,Y> over the multi-community feasible set."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if r < 2 or n % r != 0:
        raise ParameterError(f"require r >= 2 and r | n, got r={r}, n={n}")
    opts = opts or SolverOptions()
    return _run_admm(_SbmProblem(A, r), opts, z0=z0)


def check_feasibility(
    Z: np.ndarray,
    problem: str,
    *,
    K: int | None = None,
    a: float | None = None,
    r: int | None = None,
) -> FeasReport:
    """Worst violation per constraint family of the named problem."""
    Z = np.asarray(Z, dtype=float)
    min_eig = float(np.linalg.eigvalsh((Z + Z.T) / 2.0)[0])
    if problem == "community":
        if K is None:
            raise ParameterError("community feasibility needs K")
        return _CommunityProblem(Z, K).feasibility(Z, min_eig)
    if problem == "vm":
        if a is None:
            raise ParameterError("vm feasibility needs a")
        return _VmProblem(Z, a).feasibility(Z, min_eig)
    if problem == "sbm":
        if r is None:
            raise ParameterError("sbm feasibility needs r")
        return _SbmProblem(Z, r).feasibility(Z, min_eig)
    raise ParameterError(f"unknown problem kind {problem!r}")


def round_solution(Z: np.ndarray, K: int) -> tuple[int, ...]:
    """Top-K indices of the leading eigenvector of Z.

    Ties break toward larger row sum of Z, then smaller index. Note that
    exact-recovery bookkeeping uses the stricter max-norm test against the
    cluster matrix, not this rounding.
    """
    Z = np.asarray(Z, dtype=float)
    n = Z.shape[0]
    w, V = np.linalg.eigh((Z + Z.T) / 2.0)
    v = V[:, -1]
    if v.sum() < 0:
        v = -v

    def quantize(x):  # collapse eig/summation ulp noise so ties are real ties
        scale = max(float(np.max(np.abs(x))), 1e-300)
        return np.round(x / scale, 12)

    order = np.lexsort((np.arange(n), -quantize(Z.sum(axis=1)), -quantize(v)))
    return tuple(sorted(int(i) for i in order[:K]))


def recovered_exactly(Z: np.ndarray, truth: Sequence[int], tol: float = 1e-4) -> bool:
    """The package's success metric: max-norm distance to the cluster matrix."""
    n = Z.shape[0]
    xi = indicator(truth, n)
    return float(np.max(np.abs(Z - np.outer(xi, xi)))) <= tol
