"""Two-phase decoder for block VT codes observed through several traces.

Phase 1 walks the blocks left to right looking for a trace that holds a
deletion-free copy of the block (its window has the block's syndrome) and
checks each such candidate by aligning it against the other traces. Blocks
with no surviving candidate are congested; after a congested run every
feasible start position of the next block is tried in every trace.

Phase 2 repairs each congested run of ``r`` blocks from a trace that lost
exactly ``r`` symbols inside the run, one VT single-deletion decode per block.

Alignment counts insertions with the greedy leftmost embedding
(:func:`embed_and_count`). Tie-breaking, in order: fewest total insertions in
the other traces, fewest run deletions summed over all traces, lowest source
trace index, leftmost source start. When a candidate is aligned against a
trace whose start is unknown, the start with fewest insertions wins and ties
go to the rightmost start.

The run-deletion step keeps a window shifted into the tail of a congested run
from beating the true block when both align with the same number of
insertions. ``tie_break="index"`` drops it and goes straight to the trace
index.

This module is the readable reference implementation; the compiled batch
kernel in ``_ckernels`` mirrors it decision for decision.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .block_code import BlockCode, is_valid
from .vt_core import Word, decode_one_deletion

TIE_BREAKS = ("index", "deletions")

UNRESOLVABLE = "unresolvable-congestion"
MISMATCH = "insertion-mismatch"
NO_CODEWORD = "no-codeword"
FAILURE_REASONS = (UNRESOLVABLE, MISMATCH, NO_CODEWORD)


@dataclass
class TraceState:
    index: int
    k: int                 # total deletions in this trace, n - len(y)
    cursor: int = 0        # start of the next block when synchronised
    inserted: int = 0      # symbols inserted while correcting resolved blocks
    accounted: int = 0     # deletions located up to the last resolved block

    @property
    def budget(self) -> int:
        return self.k - self.accounted


@dataclass(frozen=True)
class Candidate:
    trace: int
    start: int
    block: int
    word: Word
    starts: tuple[int, ...]          # adopted start of the block in every trace
    insertions: tuple[int, ...]      # per-trace insertions to fit the block
    consumed: tuple[int, ...]        # per-trace trace symbols covered
    run_deletions: tuple[int, ...]   # per-trace deletions in the preceding run

    @property
    def total_insertions(self) -> int:
        return sum(self.insertions)


@dataclass(frozen=True)
class CongestedRun:
    first: int                        # 0-indexed first block
    length: int
    deletions: tuple[int, ...]        # per-trace deletions inside the run
    segments: tuple[Word, ...]        # per-trace symbols covering the run

    @property
    def last(self) -> int:
        return self.first + self.length - 1


@dataclass(frozen=True)
class Decoded:
    word: Word

    ok = True


@dataclass(frozen=True)
class DetectedFailure:
    reason: str
    first_block: int
    last_block: int

    ok = False


DecodeOutcome = Decoded | DetectedFailure


@dataclass
class DecodeStats:
    """Symbol-operation counters (syndrome symbols read, alignment steps)."""

    phase1_ops: int = 0
    phase2_ops: int = 0


@dataclass
class Phase1Result:
    blocks: dict[int, Word]
    runs: list[CongestedRun]
    states: list[TraceState]
    stats: DecodeStats = field(default_factory=DecodeStats)


def embed_and_count(candidate: Sequence[int], trace: Sequence[int], start: int) -> tuple[int, int]:
    """Insertions needed to turn ``trace[start:]``'s prefix into ``candidate``.

    Greedy leftmost embedding: a matching symbol advances both sequences, a
    mismatch counts one insertion. Returns ``(insertions, consumed)`` with
    ``insertions + consumed == len(candidate)``.
    """
    p, end = start, len(trace)
    for s in candidate:
        if p < end and trace[p] == s:
            p += 1
    consumed = p - start
    return len(candidate) - consumed, consumed


def _window_key(y: Sequence[int], start: int, n_b: int, q: int):
    w = y[start:start + n_b]
    if q == 2:
        return sum(j * s for j, s in enumerate(w, 1)) % (n_b + 1)
    if n_b == 1:
        return 0, w[0] % q
    a = sum(j for j in range(1, n_b) if w[j] >= w[j - 1]) % n_b
    return a, sum(w) % q


class _Phase1:
    def __init__(self, traces: Sequence[Sequence[int]], code: BlockCode, stats: DecodeStats,
                 tie_break: str = "deletions"):
        if tie_break not in TIE_BREAKS:
            raise ValueError(f"unknown tie-break {tie_break!r}")
        self.by_deletions = tie_break == "deletions"
        self.y = [tuple(int(s) for s in tr) for tr in traces]
        self.code = code
        self.stats = stats
        n = code.n
        self.states = []
        for j, y in enumerate(self.y):
            if len(y) > n:
                raise ValueError(f"trace {j} is longer than the code length {n}")
            self.states.append(TraceState(j, n - len(y)))

    def window_candidates(self, i: int, c: int) -> list[tuple[int, int, int]]:
        """``(trace, start, run_deletions)`` windows whose syndrome matches block ``i``."""
        code, nb = self.code, self.code.n_b
        target = code.classes[i].key
        out = []
        for st in self.states:
            y = self.y[st.index]
            for e in self._run_deletion_range(st, c):
                start = self._start(st, i, e)
                if start < 0 or start + nb > len(y):
                    continue
                self.stats.phase1_ops += nb
                if _window_key(y, start, nb, code.q) == target:
                    out.append((st.index, start, e))
        return out

    def _run_deletion_range(self, st: TraceState, c: int) -> range:
        if c == 0:
            return range(0, 1)
        return range(c, min(st.budget, c * self.code.n_b) + 1)

    def _start(self, st: TraceState, i: int, e: int) -> int:
        return i * self.code.n_b - st.accounted - e

    def validate(self, i: int, c: int, src: int, start: int, e_src: int) -> Candidate | None:
        nb = self.code.n_b
        word = self.y[src][start:start + nb]
        starts, ins, cons, run_del = [], [], [], []
        for st in self.states:
            if st.index == src:
                starts.append(start)
                ins.append(0)
                cons.append(nb)
                run_del.append(e_src)
                continue
            y = self.y[st.index]
            best = None
            # rightmost start first, so strict improvement keeps the rightmost tie
            for e in self._run_deletion_range(st, c):
                s = self._start(st, i, e)
                if s > len(y):
                    continue
                n_ins, n_cons = embed_and_count(word, y, s)
                self.stats.phase1_ops += nb
                if e + n_ins > st.budget:
                    continue
                if best is None or n_ins < best[1]:
                    best = (s, n_ins, n_cons, e)
            if best is None:
                return None
            starts.append(best[0])
            ins.append(best[1])
            cons.append(best[2])
            run_del.append(best[3])
        return Candidate(src, start, i, word, tuple(starts), tuple(ins), tuple(cons), tuple(run_del))

    def run(self) -> Phase1Result:
        code = self.code
        blocks: dict[int, Word] = {}
        runs: list[CongestedRun] = []
        run_first: int | None = None
        run_entry: list[int] = []
        for i in range(code.l):
            c = 0 if run_first is None else i - run_first
            best = None
            for src, start, e in self.window_candidates(i, c):
                cand = self.validate(i, c, src, start, e)
                if cand is None:
                    continue
                spent = sum(cand.run_deletions) if self.by_deletions else 0
                key = (cand.total_insertions, spent, cand.trace, cand.start)
                if best is None or key < best[0]:
                    best = (key, cand)
            if best is None:
                if run_first is None:
                    run_first = i
                    run_entry = [st.cursor for st in self.states]
                continue
            cand = best[1]
            if run_first is not None:
                runs.append(CongestedRun(
                    run_first, c, cand.run_deletions,
                    tuple(self.y[j][run_entry[j]:cand.starts[j]] for j in range(len(self.y))),
                ))
                run_first = None
            for st in self.states:
                j = st.index
                st.accounted += cand.run_deletions[j] + cand.insertions[j]
                st.inserted += cand.insertions[j]
                st.cursor = cand.starts[j] + cand.consumed[j]
                assert st.accounted <= st.k
            blocks[i] = cand.word
        if run_first is not None:
            runs.append(CongestedRun(
                run_first, code.l - run_first,
                tuple(st.budget for st in self.states),
                tuple(self.y[j][run_entry[j]:] for j in range(len(self.y))),
            ))
        return Phase1Result(blocks, runs, self.states, self.stats)


def phase1(traces: Sequence[Sequence[int]], code: BlockCode, stats: DecodeStats | None = None,
           tie_break: str = "deletions") -> Phase1Result:
    if not traces:
        raise ValueError("need at least one trace")
    return _Phase1(traces, code, stats or DecodeStats(), tie_break).run()


def _repair_run(run: CongestedRun, code: BlockCode, stats: DecodeStats) -> list[Word] | DetectedFailure:
    r, nb = run.length, code.n_b
    failure = DetectedFailure(UNRESOLVABLE, run.first, run.last)
    for j, e in enumerate(run.deletions):
        if e != r:
            continue
        seg = run.segments[j]
        if len(seg) != r * (nb - 1):
            continue
        decoded = []
        for b in range(r):
            chunk = seg[b * (nb - 1):(b + 1) * (nb - 1)]
            stats.phase2_ops += nb
            blk = decode_one_deletion(chunk, code.classes[run.first + b])
            if blk is None:
                failure = DetectedFailure(NO_CODEWORD, run.first, run.last)
                break
            decoded.append(blk)
        else:
            word = sum(decoded, ())
            for j2, seg2 in enumerate(run.segments):
                if j2 == j:
                    continue
                stats.phase2_ops += len(word)
                n_ins, _ = embed_and_count(word, seg2, 0)
                if n_ins != run.deletions[j2]:
                    failure = DetectedFailure(MISMATCH, run.first, run.last)
                    break
            else:
                return decoded
    return failure


def phase2(p1: Phase1Result, code: BlockCode) -> DecodeOutcome:
    blocks = dict(p1.blocks)
    for run in p1.runs:
        fixed = _repair_run(run, code, p1.stats)
        if isinstance(fixed, DetectedFailure):
            return fixed
        for b, blk in enumerate(fixed):
            blocks[run.first + b] = blk
    word = sum((blocks[i] for i in range(code.l)), ())
    assert is_valid(word, code)
    return Decoded(word)


def decode(traces: Sequence[Sequence[int]], code: BlockCode, stats: DecodeStats | None = None,
           tie_break: str = "deletions") -> DecodeOutcome:
    """Reconstruct the codeword from its traces, or report a detected failure."""
    return phase2(phase1(traces, code, stats, tie_break), code)
