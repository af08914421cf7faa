"""Command-line interface.

Subcommands: generate, solve, certify, vm, sweep, report. Exit codes: 0 on
success, 1 on runtime failure (machine-readable JSON error on stderr), 2 on
usage errors (argparse convention).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import certify, lab, matio
from .model import Kind, ModelSpec, cluster_matrix, gen_instance, gen_sbm, model_means
from .sdp import SolverOptions, check_feasibility, round_solution, solve_community_sdp, solve_sbm_sdp, solve_vm


def _solver_options(args) -> SolverOptions:
    kw = {}
    for name in ("tol_primal", "tol_dual", "tol_gap", "max_iters", "penalty"):
        v = getattr(args, name, None)
        if v is not None:
            kw[name] = v
    return SolverOptions(**kw)


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol-primal", dest="tol_primal", type=float)
    p.add_argument("--tol-dual", dest="tol_dual", type=float)
    p.add_argument("--tol-gap", dest="tol_gap", type=float)
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--penalty", type=float)


def cmd_generate(args) -> int:
    if args.model == "sbm":
        inst = gen_sbm(args.n, args.r, args.p, args.q, args.seed)
    else:
        spec = ModelSpec(
            kind=Kind(args.model),
            n=args.n,
            K=args.k,
            mu=args.mu,
            p=args.p,
            q=args.q,
        )
        inst = gen_instance(spec, args.seed)
    mtx, meta = matio.write_instance(args.out, inst)
    print(json.dumps({"matrix": str(mtx), "meta": str(meta)}))
    return 0


def cmd_solve(args) -> int:
    L = matio.read_matrix(args.infile)
    opts = _solver_options(args)
    if args.r is not None:
        sol = solve_sbm_sdp(L, args.r, opts)
        feas = check_feasibility(sol.Z, "sbm", r=args.r)
    else:
        sol = solve_community_sdp(L, args.k, opts)
        feas = check_feasibility(sol.Z, "community", K=args.k)
    summary = {
        "objective": sol.objective,
        "status": sol.status,
        "iters": sol.iters,
        "residuals": {
            "primal": sol.residuals[0],
            "dual": sol.residuals[1],
            "gap": sol.residuals[2],
        },
        "max_violation": feas.max_violation,
    }
    if args.r is None:
        summary["rounded_support"] = list(round_solution(sol.Z, args.k))
    if args.out:
        matio.write_matrix(Path(args.out).with_suffix(".mtx"), sol.Z, comment="solver iterate")
        Path(args.out).with_suffix(".json").write_text(json.dumps(summary, indent=2) + "\n")
    print(json.dumps(summary, indent=2))
    return 0


def cmd_certify(args) -> int:
    inst = matio.read_instance(args.instance)
    L = inst.A
    alpha, beta = model_means(inst.spec)
    cert = certify.build_dual_certificate(L, inst.truth, beta_mean=beta, alpha_mean=alpha)
    Zstar = cluster_matrix(inst.truth, inst.spec.n)
    kkt = certify.verify_kkt(L, inst.spec.K, Zstar, cert, tol=args.tol)
    suff = certify.suff_check(L, inst.truth, beta_mean=beta, alpha_mean=alpha)
    envelope = {
        "verdict": "accept" if kkt.accepted else "reject",
        "unique": kkt.unique,
        "unique_by": kkt.unique_by,
        "lambda2": kkt.lambda2,
        "margins": kkt.margins,
        "suff_margin": suff.margin,
        "lambda": cert.lam,
        "eta": cert.eta,
        "beta_mean": cert.beta_mean,
        "beta_plugin": cert.beta_plugin,
        "support": list(cert.support),
    }
    if args.out:
        base = Path(args.out)
        base.with_suffix(".json").write_text(json.dumps(envelope, indent=2) + "\n")
        matio.write_matrix(base.parent / (base.stem + ".S.mtx"), cert.S, comment="certificate S")
        matio.write_matrix(base.parent / (base.stem + ".B.mtx"), cert.B, comment="certificate B")
        matio.write_matrix(base.parent / (base.stem + ".D.mtx"), np.diag(cert.d), comment="certificate D")
    print(json.dumps(envelope, indent=2))
    return 0


def cmd_vm(args) -> int:
    M = matio.read_matrix(args.infile)
    opts = _solver_options(args)
    if args.a is not None:
        grid = [args.a]
    else:
        lo, hi, num = args.a_grid
        grid = list(np.linspace(lo, hi, int(num)))
    values = []
    for a in grid:
        sol = solve_vm(M, a, opts)
        values.append(
            {
                "a": a,
                "value": None if math.isinf(sol.objective) else sol.objective,
                "status": sol.status,
                "iters": sol.iters,
            }
        )
    print(json.dumps({"m": M.shape[0], "values": values}, indent=2))
    return 0


def cmd_sweep(args) -> int:
    cfg = lab.SweepConfig.from_json(args.config)
    out = lab.run_sweep(cfg)
    print(json.dumps({"out": str(out)}))
    return 0


def cmd_report(args) -> int:
    out = lab.report(args.infile, args.out)
    print(json.dumps({"out": str(out)}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="community-sdp", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate an instance to <out>.mtx/<out>.json")
    g.add_argument("--model", choices=["gaussian", "bernoulli", "sbm"], required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--k", type=int, help="community size (gaussian/bernoulli)")
    g.add_argument("--mu", type=float)
    g.add_argument("--p", type=float)
    g.add_argument("--q", type=float)
    g.add_argument("--r", type=int, help="number of communities (sbm)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="solve the community (or SBM) SDP on a score matrix")
    s.add_argument("--in", dest="infile", required=True)
    s.add_argument("--k", type=int, help="community size")
    s.add_argument("--r", type=int, help="solve the SBM program with r communities instead")
    s.add_argument("--out", help="write <out>.mtx and <out>.json")
    _add_solver_flags(s)
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("certify", help="build + verify a dual certificate for an instance")
    c.add_argument("--instance", required=True, help="instance prefix (expects .mtx and .json)")
    c.add_argument("--tol", type=float, default=1e-8)
    c.add_argument("--out", help="envelope prefix for .json/.S.mtx/.B.mtx/.D.mtx")
    c.set_defaults(func=cmd_certify)

    v = sub.add_parser("vm", help="auxiliary SDP value over an a-grid")
    v.add_argument("--in", dest="infile", required=True)
    v.add_argument("--a", type=float)
    v.add_argument("--a-grid", dest="a_grid", nargs=3, type=float, metavar=("LO", "HI", "NUM"))
    _add_solver_flags(v)
    v.set_defaults(func=cmd_vm)

    w = sub.add_parser("sweep", help="run a Monte Carlo sweep from a JSON config")
    w.add_argument("--config", required=True)
    w.set_defaults(func=cmd_sweep)

    r = sub.add_parser("report", help="aggregate a sweep CSV into success rates")
    r.add_argument("--in", dest="infile", required=True)
    r.add_argument("--out")
    r.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command == "vm" and args.a is None and args.a_grid is None:
        ap.error("vm requires --a or --a-grid")
    if args.command == "solve" and args.k is None and args.r is None:
        ap.error("solve requires --k or --r")
    if args.command == "generate" and args.model != "sbm" and args.k is None:
        ap.error("generate requires --k for gaussian/bernoulli")
    if args.command == "generate" and args.model == "sbm" and args.r is None:
        ap.error("generate --model sbm requires --r")
    try:
        return args.func(args)
    except Exception as exc:  # runtime failures -> exit 1, JSON on stderr
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
