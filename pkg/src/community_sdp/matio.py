"""Matrix Market and JSON interchange for instances and solutions."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse

from .model import Instance, ModelSpec


def write_matrix(path, M: np.ndarray, comment: str = "") -> None:
    """Write a symmetric matrix in Matrix Market coordinate format."""
    M = np.asarray(M, dtype=float)
    sym = scipy.sparse.coo_matrix(np.tril(M))  # symmetric MM kind stores the lower triangle
    scipy.io.mmwrite(str(path), sym, comment=comment, symmetry="symmetric")


def read_matrix(path) -> np.ndarray:
    M = scipy.io.mmread(str(path))
    if scipy.sparse.issparse(M):
        M = M.toarray()
    M = np.asarray(M, dtype=float)
    return (M + M.T) / 2.0 if not np.array_equal(M, M.T) else M


def write_instance(prefix, inst: Instance) -> tuple[Path, Path]:
    """Write <prefix>.mtx (data matrix) and <prefix>.json (spec, seed, truth)."""
    prefix = Path(prefix)
    mtx = prefix.with_suffix(".mtx")
    meta = prefix.with_suffix(".json")
    write_matrix(mtx, inst.A, comment="hidden-community data matrix")
    record = {"spec": inst.spec.to_dict(), "seed": inst.seed, "truth": _truth_json(inst.truth)}
    meta.write_text(json.dumps(record, indent=2) + "\n")
    return mtx, meta


def _truth_json(truth):
    if truth and isinstance(truth[0], tuple):
        return [list(b) for b in truth]
    return list(truth)


def read_instance(prefix) -> Instance:
    prefix = Path(prefix)
    A = read_matrix(prefix.with_suffix(".mtx"))
    record = json.loads(prefix.with_suffix(".json").read_text())
    truth = record["truth"]
    if truth and isinstance(truth[0], list):
        truth = tuple(tuple(b) for b in truth)
    else:
        truth = tuple(truth)
    return Instance(
        spec=ModelSpec.from_dict(record["spec"]),
        A=A,
        truth=truth,
        seed=int(record["seed"]),
    )
