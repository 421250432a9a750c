"""The t-trace deletion channel.

Each trace deletes a uniformly random set of positions from the input, drawn
independently per trace. Deletion positions in :class:`DeletionPattern` are
1-indexed, matching the usual ``x_1 .. x_n`` notation; the batch samplers
work with 0-indexed arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .vt_core import Word

MODES = ("exactly-k", "at-most-k")


@dataclass(frozen=True)
class DeletionPattern:
    positions: tuple[int, ...]
    n: int

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.positions, self.positions[1:])):
            raise ValueError("deletion positions must be strictly increasing")
        if self.positions and not (1 <= self.positions[0] and self.positions[-1] <= self.n):
            raise ValueError(f"deletion positions must lie in 1..{self.n}")


@dataclass(frozen=True)
class Trace:
    word: Word
    pattern: DeletionPattern

    @property
    def deletions(self) -> int:
        return len(self.pattern.positions)


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for one (seed, key...) stream.

    Monte Carlo work is split into fixed-size chunks, each drawing from
    ``stream(seed, tag, chunk_index)``, so results do not depend on how the
    chunks are scheduled.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def sample_pattern(n: int, k: int, rng: np.random.Generator) -> DeletionPattern:
    """Uniform k-subset of ``1..n``."""
    if not 0 <= k <= n:
        raise ValueError(f"cannot delete {k} symbols from a word of length {n}")
    positions = floyd_subsets(n, k, (), rng)
    return DeletionPattern(tuple(sorted(int(p) + 1 for p in positions)), n)


def apply_deletions(x: Sequence[int], pattern: DeletionPattern) -> Trace:
    if pattern.n != len(x):
        raise ValueError(f"pattern is for length {pattern.n}, word has length {len(x)}")
    drop = set(pattern.positions)
    return Trace(tuple(s for i, s in enumerate(x, 1) if i not in drop), pattern)


def generate_traces(
    x: Sequence[int], t: int, k: int, rng: np.random.Generator, mode: str = "exactly-k"
) -> list[Trace]:
    """``t`` independent traces of ``x``.

    ``at-most-k`` first draws the per-trace deletion count uniformly from
    ``0..k``.
    """
    if t < 1:
        raise ValueError("need at least one trace")
    if mode not in MODES:
        raise ValueError(f"unknown deletion mode {mode!r}")
    out = []
    for _ in range(t):
        kj = k if mode == "exactly-k" else int(rng.integers(0, k + 1))
        out.append(apply_deletions(x, sample_pattern(len(x), kj, rng)))
    return out


def is_subsequence(y: Sequence[int], x: Sequence[int]) -> bool:
    it = iter(x)
    return all(s in it for s in y)


# ---------------------------------------------------------------------------
# Vectorised samplers for the Monte Carlo harness


def floyd_subsets(n: int, k: int, shape: tuple[int, ...], rng: np.random.Generator) -> np.ndarray:
    """Independent uniform k-subsets of ``range(n)``, one per entry of ``shape``.

    Floyd's algorithm, run in lockstep over the batch. Output has shape
    ``shape + (k,)`` and is not sorted.
    """
    if not 0 <= k <= n:
        raise ValueError(f"cannot choose {k} of {n}")
    out = np.empty(shape + (k,), dtype=np.int64)
    for i, j in enumerate(range(n - k, n)):
        r = rng.integers(0, j + 1, size=shape)
        seen = (out[..., :i] == r[..., None]).any(axis=-1) if i else np.zeros(shape, dtype=bool)
        out[..., i] = np.where(seen, j, r)
    return out


def deletion_counts(
    rng: np.random.Generator, shape: tuple[int, ...], k: int, mode: str
) -> np.ndarray:
    if mode == "exactly-k":
        return np.full(shape, k, dtype=np.int64)
    if mode == "at-most-k":
        return rng.integers(0, k + 1, size=shape)
    raise ValueError(f"unknown deletion mode {mode!r}")


def batch_traces(
    x: np.ndarray, t: int, k: int, rng: np.random.Generator, mode: str = "exactly-k"
) -> tuple[np.ndarray, np.ndarray]:
    """Traces for a batch of codewords ``x`` (shape ``(M, n)``).

    Returns ``(traces, lengths)``: ``traces`` has shape ``(M, t, n)`` with each
    trace left-aligned, entries past ``lengths[m, j]`` are padding.
    """
    M, n = x.shape
    pos = floyd_subsets(n, k, (M, t), rng)
    kj = deletion_counts(rng, (M, t), k, mode)
    keep = np.ones((M, t, n), dtype=bool)
    if k:
        if mode != "exactly-k":
            # a uniform kj-subset of a uniform k-subset is a uniform kj-subset
            order = np.argsort(rng.random((M, t, k)), axis=-1)
            pos = np.take_along_axis(pos, order, axis=-1)
            active = np.arange(k) < kj[..., None]
        else:
            active = np.ones((M, t, k), dtype=bool)
        mm, jj, _ = np.nonzero(active)
        keep[mm, jj, pos[active]] = False
    idx = np.argsort(~keep, axis=-1, kind="stable")
    traces = np.take_along_axis(np.broadcast_to(x[:, None, :], (M, t, n)), idx, axis=-1)
    return np.ascontiguousarray(traces, dtype=np.int8), (n - kj).astype(np.int32)
