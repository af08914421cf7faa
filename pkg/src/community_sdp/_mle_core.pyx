# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled revolving-door enumeration kernel (see _mle_py for the contract)."""

import numpy as np

cimport numpy as cnp


cdef double _exact_value(double[:, ::1] L, int* c, int t) noexcept nogil:
    cdef double acc = 0.0
    cdef int i, j
    for i in range(1, t + 1):
        for j in range(i + 1, t + 1):
            acc += L[c[i], c[j]]
    return 2.0 * acc


cdef double _delta(double[:, ::1] L, int* c, int t, int out, int inn) noexcept nogil:
    cdef double acc = 0.0
    cdef int idx, v
    for idx in range(1, t + 1):
        v = c[idx]
        if v != out:
            acc += L[inn, v] - L[out, v]
    return 2.0 * acc


def enumerate_candidates(double[:, ::1] L, int K, double buf, int resync_every=65536):
    """Return (visit_count, [(approx_value, subset_tuple), ...])."""
    cdef int n = L.shape[0]
    cdef int t = K
    cdef long long count = 1
    cdef int j, step, out, inn, idx
    cdef double value, best
    cdef bint odd = (t % 2 == 1)
    cdef bint done = False

    if t == n:
        s = tuple(range(n))
        return 1, [(2.0 * float(np.triu(np.asarray(L), 1).sum()), s)]
    if t == 1:
        return n, [(0.0, (i,)) for i in range(n)]  # diagonal is zero: all tie

    carr = np.zeros(t + 3, dtype=np.intc)
    cdef int[::1] cv = carr
    cdef int* c = &cv[0]
    for j in range(1, t + 1):
        c[j] = j - 1
    c[t + 1] = n
    c[t + 2] = 0

    value = _exact_value(L, c, t)
    best = value
    candidates = [(value, tuple(sorted(carr[1 : t + 1].tolist())))]

    while True:
        out = -1
        inn = -1
        if odd:
            if c[1] + 1 < c[2]:
                out = c[1]
                inn = c[1] + 1
                value += _delta(L, c, t, out, inn)
                c[1] += 1
            else:
                j = 2
                step = 4
        else:
            if c[1] > 0:
                out = c[1]
                inn = c[1] - 1
                value += _delta(L, c, t, out, inn)
                c[1] -= 1
            else:
                j = 2
                step = 5
        if out < 0:
            done = False
            while True:
                if step == 4:
                    if c[j] >= j:
                        out = c[j]
                        inn = j - 2
                        value += _delta(L, c, t, out, inn)
                        c[j] = c[j - 1]
                        c[j - 1] = j - 2
                        break
                    j += 1
                    step = 5
                else:
                    if c[j] + 1 < c[j + 1]:
                        out = j - 2
                        inn = c[j] + 1
                        value += _delta(L, c, t, out, inn)
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
            value = _exact_value(L, c, t)
        if value >= best - buf:
            candidates.append((value, tuple(sorted(carr[1 : t + 1].tolist()))))
            if value > best:
                best = value
                if len(candidates) > 65536:
                    candidates = [cvv for cvv in candidates if cvv[0] >= best - buf]
    return count, candidates
