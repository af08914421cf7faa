"""Pure-Python revolving-door enumeration kernel.

Same contract as the compiled extension `_mle_core`: walk all K-subsets in
revolving-door order (one element swapped per step), maintain the submatrix
sum by O(K) delta updates with periodic exact resyncs, and collect every
subset whose running value comes within `buf` of the running maximum. The
caller re-evaluates candidates with a fixed summation order, so `buf` only
needs to absorb float drift.
"""

from __future__ import annotations


def exact_value(L, subset) -> float:
    """Submatrix sum with index-ascending summation order (tie-reproducible)."""
    acc = 0.0
    s = sorted(subset)
    for i in range(len(s)):
        row = L[s[i]]
        for j in range(i + 1, len(s)):
            acc += row[s[j]]
    return 2.0 * acc


def enumerate_candidates(L, K: int, buf: float, resync_every: int = 65536):
    """Return (visit_count, [(approx_value, subset_tuple), ...])."""
    n = L.shape[0]
    t = K
    if t == n:
        s = tuple(range(n))
        return 1, [(exact_value(L, s), s)]
    if t == 1:
        return n, [(0.0, (i,)) for i in range(n)]  # diagonal is zero: all tie
    c = [0] * (t + 3)  # 1-based c[1..t], sentinels c[t+1] = n, c[t+2] = 0
    for j in range(1, t + 1):
        c[j] = j - 1
    c[t + 1] = n
    c[t + 2] = 0

    value = exact_value(L, c[1 : t + 1])
    best = value
    candidates = [(value, tuple(sorted(c[1 : t + 1])))]
    count = 1
    odd = t % 2 == 1

    def delta(out: int, inn: int) -> float:
        acc = 0.0
        Lo = L[out]
        Li = L[inn]
        for idx in range(1, t + 1):
            v = c[idx]
            if v != out:
                acc += Li[v] - Lo[v]
        return 2.0 * acc

    while True:
        out = inn = -1
        if odd:
            if c[1] + 1 < c[2]:
                out, inn = c[1], c[1] + 1
                value += delta(out, inn)
                c[1] += 1
            else:
                j, step = 2, 4
        else:
            if c[1] > 0:
                out, inn = c[1], c[1] - 1
                value += delta(out, inn)
                c[1] -= 1
            else:
                j, step = 2, 5
        if out < 0:
            done = False
            while True:
                if step == 4:
                    if c[j] >= j:
                        out, inn = c[j], j - 2
                        value += delta(out, inn)
                        c[j] = c[j - 1]
                        c[j - 1] = j - 2
                        break
                    j += 1
                    step = 5
                else:
                    if c[j] + 1 < c[j + 1]:
                        out, inn = j - 2, c[j] + 1
                        value += delta(out, inn)
                        c[j - 1] = c[j]
                        c[j] += 1
                        break
                    j += 1
                    if j > t:
                        done = True
                        break
                    step = 4
            if done:
                break
        count += 1
        if count % resync_every == 0:
            value = exact_value(L, c[1 : t + 1])
        if value >= best - buf:
            candidates.append((value, tuple(sorted(c[1 : t + 1]))))
            if value > best:
                best = value
                if len(candidates) > 65536:
                    candidates = [cv for cv in candidates if cv[0] >= best - buf]
    return count, candidates
