"""Monte Carlo sweeps and phase-diagram data generation.

A sweep walks a 1- or 2-axis parameter grid, runs the selected algorithms on
freshly generated instances, and appends one CSV row per (cell, trial). The
output is deterministic given seed0: the trial seed is a SHA-256 hash of
(seed0, cell, trial), and rows are written in (cell, trial) order regardless
of worker completion order.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import certify, oracle
from .errors import GuardExceededError, ParameterError
from .model import (
    Kind,
    ModelSpec,
    cluster_matrix,
    gen_instance,
    gen_sbm,
    model_means,
    sbm_cluster_matrix,
)
from .sdp import SolverOptions, recovered_exactly, solve_community_sdp, solve_sbm_sdp, solve_vm

SCHEMA_VERSION = 1
SCHEMA_HEADER = f"# community-sdp-lab v{SCHEMA_VERSION}"

THREADS_ENV = "COMMUNITY_SDP_THREADS"

KNOWN_ALGORITHMS = ("sdp", "mle", "certify-only", "nec")

# regime-mapped axis parameters (resolved against the template spec's n)
_REGIME_PARAMS = ("rho", "mu0", "a_logn", "b_logn")
_DIRECT_PARAMS = ("n", "K", "mu", "p", "q", "r")


@dataclass
class SweepAxis:
    param: str
    grid: list

    def __post_init__(self):
        if self.param not in _REGIME_PARAMS + _DIRECT_PARAMS:
            raise ParameterError(f"unknown sweep parameter {self.param!r}")
        if len(self.grid) < 1:
            raise ParameterError("axis grid must be nonempty")


@dataclass
class SweepConfig:
    model: ModelSpec
    axes: list[SweepAxis]
    trials: int
    algorithms: list[str]
    seed0: int
    out: str
    solver: SolverOptions = field(default_factory=SolverOptions)
    nec_grid_points: int = 5

    def __post_init__(self):
        if not (0 <= len(self.axes) <= 2):
            raise ParameterError("at most two swept axes")
        if self.trials < 1:
            raise ParameterError("trials must be >= 1")
        for alg in self.algorithms:
            if alg not in KNOWN_ALGORITHMS:
                raise ParameterError(f"unknown algorithm {alg!r}; choose from {KNOWN_ALGORITHMS}")

    @classmethod
    def from_json(cls, path) -> "SweepConfig":
        d = json.loads(Path(path).read_text())
        solver = SolverOptions(**d.get("solver", {}))
        return cls(
            model=ModelSpec.from_dict(d["model"]),
            axes=[SweepAxis(**ax) for ax in d.get("axes", [])],
            trials=int(d["trials"]),
            algorithms=list(d.get("algorithms", ["sdp"])),
            seed0=int(d.get("seed0", 0)),
            out=d["out"],
            solver=solver,
            nec_grid_points=int(d.get("nec_grid_points", 5)),
        )


def trial_seed(seed0: int, cell: tuple, trial: int) -> int:
    """Stable 63-bit seed from (seed0, cell coordinates, trial index)."""
    payload = json.dumps([seed0, list(map(float, cell)), trial]).encode()
    digest = hashlib.sha256(payload).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def _resolve_spec(template: ModelSpec, assignment: dict) -> ModelSpec:
    d = template.to_dict()
    n = int(assignment.get("n", d["n"]))
    d["n"] = n
    ln = math.log(n)
    for name, value in assignment.items():
        if name == "n":
            continue
        if name == "rho":
            d["K"] = max(2, round(value * n / ln))
        elif name == "mu0":
            d["mu"] = value * ln / math.sqrt(n)
        elif name == "a_logn":
            d["p"] = value * ln * ln / n
        elif name == "b_logn":
            d["q"] = value * ln * ln / n
        else:
            d[name] = value
    if d["kind"] == Kind.SBM.value and "r" in d:
        d["K"] = d["n"] // d["r"]
    return ModelSpec.from_dict(d)


def _overlay_columns(spec: ModelSpec) -> dict:
    """Reference-curve columns for the critical regime (emitted, not adjudicated)."""
    cols = {}
    n = spec.n
    ln = math.log(n)
    if spec.kind == Kind.GAUSSIAN:
        rho = spec.K * ln / n
        mu0 = spec.mu * math.sqrt(n) / ln
        cols["rho"] = rho
        cols["mu0"] = mu0
        cols["ref_mle_rho_mu0sq_8"] = rho * mu0 * mu0 - 8.0
        cols["ref_mle_rho_mu0sq_1"] = rho * mu0 * mu0 - 1.0
        cols["ref_sdp_suff"] = rho * mu0 - 2 * math.sqrt(2 * rho) - 2.0
        cols["ref_sdp_necc"] = rho * mu0 - 2 * math.sqrt(2 * rho) - 0.5
        cols["ref_mp"] = rho * rho * mu0 * mu0 * math.e - 1.0
        cols["ref_lmp"] = rho * rho * mu0 * mu0 - 1.0
    return cols


_CSV_FIELDS = [
    "cell_index",
    "axis1",
    "value1",
    "axis2",
    "value2",
    "trial",
    "seed",
    "n",
    "K",
    "sdp_success",
    "sdp_objective",
    "sdp_status",
    "sdp_res_primal",
    "sdp_res_dual",
    "sdp_res_gap",
    "sdp_seconds",
    "sdp_nonunique_flag",
    "mle_success",
    "mle_best_value",
    "mle_num_maximizers",
    "mle_seconds",
    "cert_margin",
    "cert_accepted",
    "cert_unique",
    "nec_consistent",
    "nec_margin",
    "nec_argmax_a",
    "error",
]


def _run_trial(cfg: SweepConfig, cell_index: int, cell: tuple, assignment: dict, trial: int) -> dict:
    row = {
        "cell_index": cell_index,
        "trial": trial,
        "error": "",
    }
    for i, ax in enumerate(cfg.axes):
        row[f"axis{i + 1}"] = ax.param
        row[f"value{i + 1}"] = cell[i]
    seed = trial_seed(cfg.seed0, cell, trial)
    row["seed"] = seed
    try:
        spec = _resolve_spec(cfg.model, assignment)
        row["n"], row["K"] = spec.n, spec.K
        if spec.kind == Kind.SBM:
            inst = gen_sbm(spec.n, spec.r, spec.p, spec.q, seed)
        else:
            inst = gen_instance(spec, seed)
        L = inst.A
        row.update(_overlay_columns(spec))

        if "sdp" in cfg.algorithms:
            t0 = time.perf_counter()
            if spec.kind == Kind.SBM:
                sol = solve_sbm_sdp(L, spec.r, cfg.solver)
                Ystar = sbm_cluster_matrix(inst.truth, spec.n, spec.r)
                success = float(np.max(np.abs(sol.Z - Ystar))) <= 1e-4
                base = float(np.tensordot(L, Ystar))
            else:
                sol = solve_community_sdp(L, spec.K, cfg.solver)
                success = recovered_exactly(sol.Z, inst.truth)
                base = float(np.tensordot(L, cluster_matrix(inst.truth, spec.n)))
            row["sdp_seconds"] = time.perf_counter() - t0
            row["sdp_success"] = int(success)
            row["sdp_objective"] = sol.objective
            row["sdp_status"] = sol.status
            row["sdp_res_primal"], row["sdp_res_dual"], row["sdp_res_gap"] = sol.residuals
            near_tie = abs(sol.objective - base) <= cfg.solver.tol_gap * (1 + abs(base)) + 1e-6
            row["sdp_nonunique_flag"] = int(near_tie and not success)

        if "mle" in cfg.algorithms and spec.kind != Kind.SBM:
            t0 = time.perf_counter()
            res = oracle.mle_exhaustive(L, spec.K)
            row["mle_seconds"] = time.perf_counter() - t0
            row["mle_best_value"] = res.best_value
            row["mle_num_maximizers"] = len(res.maximizers)
            row["mle_success"] = int(res.maximizers == [tuple(inst.truth)])

        if ("certify-only" in cfg.algorithms or "sdp" in cfg.algorithms) and spec.kind != Kind.SBM:
            alpha, beta = model_means(spec)
            rep = certify.suff_check(L, inst.truth, beta_mean=beta, alpha_mean=alpha)
            row["cert_margin"] = rep.margin
            cert = certify.build_dual_certificate(L, inst.truth, beta_mean=beta, alpha_mean=alpha)
            kkt = certify.verify_kkt(L, spec.K, cluster_matrix(inst.truth, spec.n), cert)
            row["cert_accepted"] = int(kkt.accepted)
            row["cert_unique"] = int(kkt.unique)

        if "nec" in cfg.algorithms and spec.kind != Kind.SBM:
            grid = certify.default_a_grid(spec.K, spec.n, q=spec.q, points=cfg.nec_grid_points)
            nec = certify.nec_check(
                L, inst.truth, grid, lambda M, a: solve_vm(M, a, cfg.solver)
            )
            row["nec_consistent"] = int(nec.consistent)
            row["nec_margin"] = nec.worst_margin
            row["nec_argmax_a"] = nec.argmax_a
    except (ParameterError, GuardExceededError, RuntimeError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def run_sweep(cfg: SweepConfig) -> Path:
    """Execute the sweep and write the CSV; returns the output path."""
    grids = [ax.grid for ax in cfg.axes] or [[0.0]]
    cells = [(v,) for v in grids[0]]
    if len(grids) == 2:
        cells = [(v1, v2) for v1 in grids[0] for v2 in grids[1]]

    jobs = []
    for ci, cell in enumerate(cells):
        assignment = {ax.param: cell[i] for i, ax in enumerate(cfg.axes)}
        for t in range(cfg.trials):
            jobs.append((ci, cell, assignment, t))

    workers = int(os.environ.get(THREADS_ENV, "1") or "1")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(lambda j: _run_trial(cfg, *j), jobs))
    else:
        rows = [_run_trial(cfg, *j) for j in jobs]

    extra = sorted({k for row in rows for k in row} - set(_CSV_FIELDS))
    fields = _CSV_FIELDS + extra
    out = Path(cfg.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        fh.write(SCHEMA_HEADER + "\n")
        fh.write(f"# timestamp: {time.strftime('%Y-%m-%dT%H:%M:%S')}\n")
        writer = csv.DictWriter(fh, fieldnames=fields, restval="")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    return out


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if trials == 0:
        return 0.0, 1.0
    phat = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (phat + z2 / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z2 / (4 * trials * trials)) / denom
    return center - half, center + half


def read_sweep_csv(path) -> list[dict]:
    text = Path(path).read_text()
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def report(path, out=None) -> Path:
    """Aggregate a sweep CSV into per-cell success rates with Wilson intervals."""
    rows = read_sweep_csv(path)
    cells: dict[tuple, dict] = {}
    for row in rows:
        key = (row["cell_index"], row.get("axis1", ""), row.get("value1", ""), row.get("axis2", ""), row.get("value2", ""))
        cell = cells.setdefault(key, {"trials": 0, "sdp_successes": 0, "sdp_trials": 0, "mle_successes": 0, "mle_trials": 0})
        cell["trials"] += 1
        for alg in ("sdp", "mle"):
            v = row.get(f"{alg}_success", "")
            if v != "":
                cell[f"{alg}_trials"] += 1
                cell[f"{alg}_successes"] += int(v)
    out = Path(out) if out else Path(path).with_suffix(".report.csv")
    fields = [
        "cell_index",
        "axis1",
        "value1",
        "axis2",
        "value2",
        "trials",
        "sdp_rate",
        "sdp_wilson_lo",
        "sdp_wilson_hi",
        "mle_rate",
        "mle_wilson_lo",
        "mle_wilson_hi",
    ]
    with out.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, restval="")
        writer.writeheader()
        for key in sorted(cells, key=lambda k: int(k[0])):
            cell = cells[key]
            row = dict(zip(["cell_index", "axis1", "value1", "axis2", "value2"], key))
            row["trials"] = cell["trials"]
            for alg in ("sdp", "mle"):
                if cell[f"{alg}_trials"]:
                    rate = cell[f"{alg}_successes"] / cell[f"{alg}_trials"]
                    lo, hi = wilson_interval(cell[f"{alg}_successes"], cell[f"{alg}_trials"])
                    row[f"{alg}_rate"] = f"{rate:.6g}"
                    row[f"{alg}_wilson_lo"] = f"{lo:.6g}"
                    row[f"{alg}_wilson_hi"] = f"{hi:.6g}"
            writer.writerow(row)
    return out
