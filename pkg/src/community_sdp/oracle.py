"""Ground-truth references at small scale: exhaustive MLE and the swap check.

The enumeration kernel is the compiled extension when available, otherwise
the pure-Python twin; both walk K-subsets in revolving-door order with O(K)
delta updates. Ties are exact: candidate subsets are re-evaluated with a
fixed index-ascending summation order and compared with float equality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import GuardExceededError, ParameterError
from .model import e_vector

try:  # compiled kernel is optional; the fallback is semantically identical
    from . import _mle_core as _kernel

    MLE_BACKEND = "cython"
except ImportError:  # pragma: no cover - depends on build environment
    from . import _mle_py as _kernel

    MLE_BACKEND = "python"

from ._mle_py import exact_value

ENUM_GUARD = 10**7


@dataclass
class MleResult:
    best_value: float
    maximizers: list[tuple]
    evaluated: int


def mle_exhaustive(L: np.ndarray, K: int, guard: int = ENUM_GUARD) -> MleResult:
    """Exact maximizers of the K-by-K principal submatrix sum.

    Refuses when C(n,K) exceeds the guard. All ties are returned.
    """
    L = np.ascontiguousarray(L, dtype=float)
    n = L.shape[0]
    if not (1 <= K <= n):
        raise ParameterError(f"require 1 <= K <= n, got K={K}, n={n}")
    total = math.comb(n, K)
    if total > guard:
        raise GuardExceededError(f"C({n},{K}) = {total} exceeds the guard {guard}")

    scale = K * float(np.max(np.abs(L))) if L.size else 0.0
    buf = 1e-8 * (1.0 + scale)
    count, candidates = _kernel.enumerate_candidates(L, K, buf)
    if count != total:
        raise RuntimeError(f"enumeration visited {count} subsets, expected {total}")

    best = -math.inf
    exact: dict[tuple, float] = {}
    for _, subset in candidates:
        if subset in exact:
            continue
        v = exact_value(L, subset)
        exact[subset] = v
        if v > best:
            best = v
    maximizers = sorted(s for s, v in exact.items() if v == best)
    return MleResult(best_value=best, maximizers=maximizers, evaluated=total)


def swap_check(L: np.ndarray, truth: Sequence[int]) -> tuple[bool, float]:
    """MLE-necessary swap statistic: gap = min_in e - max_out e.

    Returns (holds, gap); K = n is vacuously true with an infinite gap.
    The exact swap deltas (including the cross term) are available through
    swap_deltas.
    """
    L = np.asarray(L, dtype=float)
    n = L.shape[0]
    ins = np.asarray(sorted(truth), dtype=int)
    if ins.size == n:
        return True, math.inf
    mask = np.zeros(n, dtype=bool)
    mask[ins] = True
    outs = np.flatnonzero(~mask)
    e = e_vector(L, ins)
    gap = float(e[ins].min() - e[outs].max())
    return gap >= 0, gap


def swap_deltas(L: np.ndarray, truth: Sequence[int]) -> float:
    """Largest exact swap improvement e(j, C*\\{i}) - e(i, C*\\{i}) over pairs
    i in C*, j outside; nonpositive whenever C* maximizes the submatrix sum."""
    L = np.asarray(L, dtype=float)
    n = L.shape[0]
    ins = np.asarray(sorted(truth), dtype=int)
    mask = np.zeros(n, dtype=bool)
    mask[ins] = True
    outs = np.flatnonzero(~mask)
    if outs.size == 0:
        return -math.inf
    e = e_vector(L, ins)
    # e(j, C*\{i}) - e(i, C*\{i}) = e(j,C*) - L[j,i] - e(i,C*)
    diff = e[outs][:, None] - L[np.ix_(outs, ins)] - e[ins][None, :]
    return float(diff.max())
