"""Pure-Python twins of the compiled kernels in ``_ckernels``."""

from __future__ import annotations

import numpy as np

from .block_code import BlockCode
from .decoder import MISMATCH, NO_CODEWORD, UNRESOLVABLE, DetectedFailure, decode
from .vt_core import VtClass

STATUS_CODES = {UNRESOLVABLE: 1, MISMATCH: 2, NO_CODEWORD: 3}


def _code_from_targets(l: int, nb: int, q: int, targets) -> BlockCode:
    if q == 2:
        classes = tuple(VtClass(nb, 2, int(a)) for a in targets)
    else:
        classes = tuple(VtClass(nb, q, int(k) // q, int(k) % q) for k in targets)
    return BlockCode(l, nb, q, classes)


def decode_batch(traces, lengths, l, nb, q, targets, by_deletions=True):
    traces = np.asarray(traces)
    lengths = np.asarray(lengths)
    M, t, n = traces.shape
    if n != l * nb:
        raise ValueError("trace buffer width must equal l * nb")
    code = _code_from_targets(l, nb, q, targets)
    status = np.zeros(M, dtype=np.int32)
    words = np.zeros((M, n), dtype=np.int8)
    fail = np.full((M, 2), -1, dtype=np.int32)
    for m in range(M):
        ys = [traces[m, j, :lengths[m, j]].tolist() for j in range(t)]
        out = decode(ys, code, tie_break="deletions" if by_deletions else "index")
        if isinstance(out, DetectedFailure):
            status[m] = STATUS_CODES[out.reason]
            fail[m] = (out.first_block, out.last_block)
        else:
            words[m] = out.word
    return status, words, fail[:, 0], fail[:, 1]


def phase2_failures(counts, single_block=False):
    counts = np.asarray(counts)
    M, t, l = counts.shape
    if single_block:
        return (counts >= 2).all(axis=1).any(axis=1).astype(np.uint8)
    congested = (counts >= 1).all(axis=1)
    fail = np.zeros(M, dtype=bool)
    run_sum = np.zeros((M, t), dtype=np.int64)
    run_len = np.zeros(M, dtype=np.int64)
    for i in range(l + 1):
        cong = congested[:, i] if i < l else np.zeros(M, dtype=bool)
        closing = ~cong & (run_len > 0)
        fail |= closing & (run_sum > run_len[:, None]).all(axis=1)
        if i < l:
            run_sum = np.where(cong[:, None], run_sum + counts[:, :, i], 0)
            run_len = np.where(cong, run_len + 1, 0)
    return fail.astype(np.uint8)
