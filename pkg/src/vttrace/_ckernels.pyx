# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: batch two-phase decoding and phase-2 occupancy checks.

Every function here has a pure-Python twin in ``_pykernels`` with identical
results; ``decoder.py`` documents the decoding rules.
"""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int8_t, int32_t, int64_t, uint8_t

cnp.import_array()

cdef enum:
    OK = 0
    UNRESOLVABLE = 1
    MISMATCH = 2
    NO_CODEWORD = 3


cdef inline int64_t _key(const int8_t* w, int nb, int q) noexcept nogil:
    cdef int64_t acc = 0, tot = 0
    cdef int j
    if q == 2:
        for j in range(nb):
            acc += (j + 1) * w[j]
        return acc % (nb + 1)
    if nb == 1:
        return w[0] % q
    for j in range(1, nb):
        if w[j] >= w[j - 1]:
            acc += j
    for j in range(nb):
        tot += w[j]
    return (acc % nb) * q + (tot % q)


cdef inline int _embed(const int8_t* cand, int clen, const int8_t* y, int start, int end) noexcept nogil:
    """Trace symbols consumed by the greedy leftmost embedding."""
    cdef int p = start, s
    for s in range(clen):
        if p < end and y[p] == cand[s]:
            p += 1
    return p - start


cdef inline int64_t _key_inserted(const int8_t* w, int m, int p, int v, int q) noexcept nogil:
    # key of w[:p] + (v,) + w[p:], length m + 1, without materialising it
    cdef int nb = m + 1, j
    cdef int64_t acc = 0, tot = 0
    cdef int cur, prev
    prev = 0
    for j in range(nb):
        if j < p:
            cur = w[j]
        elif j == p:
            cur = v
        else:
            cur = w[j - 1]
        if q == 2:
            acc += (j + 1) * cur
        else:
            if j > 0 and cur >= prev:
                acc += j
            tot += cur
        prev = cur
    if q == 2:
        return acc % (nb + 1)
    if nb == 1:
        return tot % q
    return (acc % nb) * q + (tot % q)


cdef int _decode_single(const int8_t* w, int m, int q, int64_t target, int8_t* out) noexcept nogil:
    """Single-deletion VT decode of ``w`` (length m) into ``out`` (length m + 1)."""
    cdef int j, p, v, weight = 0, ones, zeros
    cdef int nb = m + 1
    cdef int64_t s = 0, deficit
    if q == 2:
        for j in range(m):
            weight += w[j]
            s += (j + 1) * w[j]
        deficit = ((target - s) % (nb + 1) + (nb + 1)) % (nb + 1)
        if deficit <= weight:
            p = m
            ones = 0
            while ones < deficit:
                p -= 1
                ones += w[p]
            v = 0
        else:
            p = 0
            zeros = 0
            while zeros < deficit - weight - 1:
                zeros += 1 - w[p]
                p += 1
            v = 1
    else:
        v = -1
        for p in range(nb):
            for j in range(q):
                if p > 0 and w[p - 1] == j:
                    continue
                if _key_inserted(w, m, p, j, q) == target:
                    v = j
                    break
            if v >= 0:
                break
        if v < 0:
            return 0
    for j in range(p):
        out[j] = w[j]
    out[p] = v
    for j in range(p, m):
        out[j + 1] = w[j]
    return 1


cdef int _decode_instance(
    const int8_t* Y, int n, const int32_t* lens, int t, int l, int nb, int q,
    const int64_t* targets, int8_t* out, int32_t* fail_range,
    int64_t* ws, int by_deletions,
) noexcept nogil:
    # workspace layout (int64 slots)
    cdef int64_t* acc = ws
    cdef int64_t* kk = ws + t
    cdef int64_t* entry = ws + 2 * t
    cdef int64_t* c_starts = ws + 3 * t
    cdef int64_t* c_ins = ws + 4 * t
    cdef int64_t* c_cons = ws + 5 * t
    cdef int64_t* c_e = ws + 6 * t
    cdef int64_t* b_starts = ws + 7 * t
    cdef int64_t* b_ins = ws + 8 * t
    cdef int64_t* b_cons = ws + 9 * t
    cdef int64_t* b_e = ws + 10 * t
    cdef int64_t* run_first = ws + 11 * t
    cdef int64_t* run_len = run_first + l
    cdef int64_t* run_entry = run_len + l       # l * t
    cdef int64_t* run_end = run_entry + l * t   # l * t
    cdef int64_t* run_e = run_end + l * t       # l * t

    cdef int i, j, j2, src, e, e2, e_hi, e2_hi, c, nruns = 0, pending = -1
    cdef int64_t start, s2, best_total, total, budget, n_ins, best_ins, spent, best_spent
    cdef int best_trace, best_src_start, best_s, best_cons, best_e, cons, feasible
    cdef int64_t target
    cdef const int8_t* y
    cdef const int8_t* word

    for j in range(t):
        kk[j] = n - lens[j]
        acc[j] = 0

    for i in range(l):
        c = 0 if pending < 0 else i - pending
        target = targets[i]
        best_trace = -1
        best_total = 0
        best_spent = 0
        best_src_start = 0
        for src in range(t):
            y = Y + src * n
            if c == 0:
                e_hi = 0
            else:
                e_hi = kk[src] - acc[src]
                if e_hi > c * nb:
                    e_hi = c * nb
            for e in range(c, e_hi + 1):
                start = <int64_t>i * nb - acc[src] - e
                if start < 0 or start + nb > lens[src]:
                    continue
                if _key(y + start, nb, q) != target:
                    continue
                # validate this candidate against every other trace
                word = y + start
                feasible = 1
                total = 0
                for j in range(t):
                    if j == src:
                        c_starts[j] = start
                        c_ins[j] = 0
                        c_cons[j] = nb
                        c_e[j] = e
                        continue
                    budget = kk[j] - acc[j]
                    if c == 0:
                        e2_hi = 0
                    else:
                        e2_hi = budget
                        if e2_hi > c * nb:
                            e2_hi = c * nb
                    best_ins = -1
                    for e2 in range(c, e2_hi + 1):
                        s2 = <int64_t>i * nb - acc[j] - e2
                        if s2 > lens[j]:
                            continue
                        cons = _embed(word, nb, Y + j * n, <int>s2, lens[j])
                        n_ins = nb - cons
                        if e2 + n_ins > budget:
                            continue
                        if best_ins < 0 or n_ins < best_ins:
                            best_ins = n_ins
                            best_s = <int>s2
                            best_cons = cons
                            best_e = e2
                    if best_ins < 0:
                        feasible = 0
                        break
                    c_starts[j] = best_s
                    c_ins[j] = best_ins
                    c_cons[j] = best_cons
                    c_e[j] = best_e
                    total += best_ins
                if not feasible:
                    continue
                spent = 0
                if by_deletions:
                    for j in range(t):
                        spent += c_e[j]
                if (best_trace < 0 or total < best_total
                        or (total == best_total and spent < best_spent)
                        or (total == best_total and spent == best_spent
                            and src == best_trace and start < best_src_start)):
                    best_trace = src
                    best_total = total
                    best_spent = spent
                    best_src_start = <int>start
                    for j in range(t):
                        b_starts[j] = c_starts[j]
                        b_ins[j] = c_ins[j]
                        b_cons[j] = c_cons[j]
                        b_e[j] = c_e[j]
        if best_trace < 0:
            if pending < 0:
                pending = i
                for j in range(t):
                    entry[j] = <int64_t>i * nb - acc[j]
            continue
        if pending >= 0:
            run_first[nruns] = pending
            run_len[nruns] = c
            for j in range(t):
                run_entry[nruns * t + j] = entry[j]
                run_end[nruns * t + j] = b_starts[j]
                run_e[nruns * t + j] = b_e[j]
            nruns += 1
            pending = -1
        word = Y + best_trace * n + best_src_start
        for j in range(nb):
            out[i * nb + j] = word[j]
        for j in range(t):
            acc[j] += b_e[j] + b_ins[j]

    if pending >= 0:
        run_first[nruns] = pending
        run_len[nruns] = l - pending
        for j in range(t):
            run_entry[nruns * t + j] = entry[j]
            run_end[nruns * t + j] = lens[j]
            run_e[nruns * t + j] = kk[j] - acc[j]
        nruns += 1

    # phase 2
    cdef int rr, r, b, status, ok, seglen, first
    cdef int8_t* blk
    for rr in range(nruns):
        r = <int>run_len[rr]
        first = <int>run_first[rr]
        fail_range[0] = first
        fail_range[1] = first + r - 1
        status = UNRESOLVABLE
        ok = 0
        for j in range(t):
            if run_e[rr * t + j] != r:
                continue
            seglen = <int>(run_end[rr * t + j] - run_entry[rr * t + j])
            if seglen != r * (nb - 1):
                continue
            y = Y + j * n + run_entry[rr * t + j]
            ok = 1
            for b in range(r):
                if not _decode_single(y + b * (nb - 1), nb - 1, q, targets[first + b],
                                      out + (first + b) * nb):
                    ok = 0
                    status = NO_CODEWORD
                    break
            if not ok:
                continue
            blk = out + first * nb
            for j2 in range(t):
                if j2 == j:
                    continue
                seglen = <int>(run_end[rr * t + j2] - run_entry[rr * t + j2])
                cons = _embed(blk, r * nb, Y + j2 * n + run_entry[rr * t + j2], 0, seglen)
                if r * nb - cons != run_e[rr * t + j2]:
                    ok = 0
                    status = MISMATCH
                    break
            if ok:
                break
        if not ok:
            return status
    return OK


def workspace_size(int t, int l):
    return 11 * t + 2 * l + 3 * l * t


def decode_batch(const int8_t[:, :, ::1] traces, const int32_t[:, ::1] lengths,
                 int l, int nb, int q, const int64_t[::1] targets, bint by_deletions=True):
    """Decode ``M`` trace sets.

    ``targets[i]`` is block ``i``'s class key: ``a`` for binary, ``a * q + c``
    otherwise. ``by_deletions=False`` selects the ``"index"`` tie-break of
    :func:`vttrace.decoder.decode`. Returns ``(status, words, fail_first, fail_last)``.
    """
    cdef Py_ssize_t M = traces.shape[0], m
    cdef int i
    cdef int t = traces.shape[1], n = traces.shape[2]
    if n != l * nb:
        raise ValueError("trace buffer width must equal l * nb")
    status_arr = np.zeros(M, dtype=np.int32)
    words_arr = np.zeros((M, n), dtype=np.int8)
    fail_arr = np.full((M, 2), -1, dtype=np.int32)
    ws_arr = np.zeros(workspace_size(t, l), dtype=np.int64)
    cdef int32_t[::1] status = status_arr
    cdef int8_t[:, ::1] words = words_arr
    cdef int32_t[:, ::1] fail = fail_arr
    cdef int64_t[::1] ws = ws_arr
    cdef int32_t fr[2]
    with nogil:
        for m in range(M):
            fr[0] = -1
            fr[1] = -1
            status[m] = _decode_instance(&traces[m, 0, 0], n, &lengths[m, 0], t, l, nb, q,
                                         &targets[0], &words[m, 0], fr, &ws[0], by_deletions)
            if status[m] != OK:
                for i in range(n):
                    words[m, i] = 0
                fail[m, 0] = fr[0]
                fail[m, 1] = fr[1]
    return status_arr, words_arr, fail_arr[:, 0], fail_arr[:, 1]


def phase2_failures(const int64_t[:, :, ::1] counts, bint single_block=False):
    """Per-trial phase-2 failure flags from per-trace per-block deletion counts.

    ``counts`` has shape ``(M, t, l)``. A block is congested when every trace
    deletes at least one of its symbols. With ``single_block`` a trial fails
    when some block loses two or more symbols in every trace; otherwise it
    fails when some maximal congested run of ``r`` blocks loses more than
    ``r`` symbols in every trace.
    """
    cdef Py_ssize_t M = counts.shape[0], m
    cdef int t = counts.shape[1], l = counts.shape[2], i, j, rl
    cdef bint cong, bad
    out_arr = np.zeros(M, dtype=np.uint8)
    cdef uint8_t[::1] out = out_arr
    sums_arr = np.zeros(t, dtype=np.int64)
    cdef int64_t[::1] sums = sums_arr
    with nogil:
        for m in range(M):
            rl = 0
            for j in range(t):
                sums[j] = 0
            for i in range(l + 1):
                cong = i < l
                if cong:
                    for j in range(t):
                        if counts[m, j, i] < (2 if single_block else 1):
                            cong = False
                            break
                if single_block:
                    if cong:
                        out[m] = 1
                        break
                    continue
                if cong:
                    rl += 1
                    for j in range(t):
                        sums[j] += counts[m, j, i]
                    continue
                if rl > 0:
                    bad = True
                    for j in range(t):
                        if sums[j] <= rl:
                            bad = False
                            break
                    if bad:
                        out[m] = 1
                        break
                rl = 0
                for j in range(t):
                    sums[j] = 0
    return out_arr
