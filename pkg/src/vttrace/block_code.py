"""Concatenation of ``l`` VT blocks of equal length."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from typing import Sequence

import numpy as np

from .vt_core import (
    VtClass,
    Word,
    _qary_completions,
    as_word,
    class_of,
    class_size,
    decode_message,
    encode_binary,
    encode_qary,
    is_member,
    largest_class,
    rank_qary,
    redundancy,
    systematic_positions,
)


@dataclass(frozen=True)
class BlockCode:
    l: int
    n_b: int
    q: int
    classes: tuple[VtClass, ...]

    def __post_init__(self):
        if self.l < 1:
            raise ValueError("need at least one block")
        if len(self.classes) != self.l:
            raise ValueError(f"expected {self.l} block classes, got {len(self.classes)}")
        for cls in self.classes:
            if cls.n != self.n_b or cls.q != self.q:
                raise ValueError(f"class {cls} does not match n_b={self.n_b}, q={self.q}")

    @classmethod
    def uniform(cls, l: int, n_b: int, q: int = 2, vt_class: VtClass | None = None) -> "BlockCode":
        """Every block drawn from the same class (the largest one by default)."""
        vt_class = vt_class or largest_class(n_b, q)
        return cls(l, n_b, q, (vt_class,) * l)

    @classmethod
    def from_syndromes(cls, n_b: int, syndromes: Sequence, q: int = 2) -> "BlockCode":
        """``syndromes`` holds ``a_i`` values (binary) or ``(a_i, c_i)`` pairs."""
        if q == 2:
            classes = tuple(VtClass(n_b, 2, int(a)) for a in syndromes)
        else:
            classes = tuple(VtClass(n_b, q, int(a), int(c)) for a, c in syndromes)
        return cls(len(classes), n_b, q, classes)

    @property
    def n(self) -> int:
        return self.l * self.n_b

    def block(self, x: Sequence[int], i: int) -> Word:
        return tuple(x[i * self.n_b:(i + 1) * self.n_b])

    def blocks(self, x: Sequence[int]) -> list[Word]:
        return [self.block(x, i) for i in range(self.l)]

    def message_unit_count(self, i: int) -> int:
        """Bits per block (binary) or number of messages per block (q-ary)."""
        if self.q == 2:
            return self.n_b - redundancy(self.n_b)
        return class_size(self.classes[i])

    def describe(self) -> str:
        """Plain ``key = value`` description, readable by the CLI config parser."""
        if self.q == 2:
            syn = ",".join(str(c.a) for c in self.classes)
        else:
            syn = ",".join(f"{c.a}:{c.c}" for c in self.classes)
        return f"q = {self.q}\nl = {self.l}\nnb = {self.n_b}\nsyndromes = {syn}\n"


def encode(message: Sequence, code: BlockCode) -> Word:
    """Encode one message unit per block.

    Units are bit sequences for ``q = 2`` and class rank indices for ``q > 2``.
    """
    if len(message) != code.l:
        raise ValueError(f"expected {code.l} message units, got {len(message)}")
    out: list[int] = []
    for i, (unit, cls) in enumerate(zip(message, code.classes)):
        try:
            block = encode_binary(unit, cls) if code.q == 2 else encode_qary(int(unit), cls)
        except ValueError as exc:
            raise ValueError(f"block {i}: {exc}") from None
        out.extend(block)
    return tuple(out)


def decode_units(x: Sequence[int], code: BlockCode) -> list:
    """Inverse of :func:`encode` for valid codewords."""
    if code.q == 2:
        return [decode_message(b, c) for b, c in zip(code.blocks(x), code.classes)]
    return [rank_qary(b, c) for b, c in zip(code.blocks(x), code.classes)]


def is_valid(x: Sequence[int], code: BlockCode) -> bool:
    if len(x) != code.n:
        raise ValueError(f"word length {len(x)} does not match code length {code.n}")
    w = as_word(x, code.q)
    return all(is_member(b, c) for b, c in zip(code.blocks(w), code.classes))


def block_classes(x: Sequence[int], code: BlockCode) -> list[VtClass]:
    return [class_of(b, code.q) for b in code.blocks(x)]


def binary_rate(n_b: int) -> Fraction:
    """Rate of the systematic binary code, ``1 - ceil(log2(n_b + 1)) / n_b``."""
    if n_b < 1:
        raise ValueError("block length must be positive")
    return 1 - Fraction(redundancy(n_b), n_b)


def qary_rate_lower_bound(n_b: int, q: int) -> float:
    """``log2 q - (log2 n_b + log2 q) / n_b`` bits per symbol."""
    return math.log2(q) - (math.log2(n_b) + math.log2(q)) / n_b


def qary_rate(n_b: int, q: int) -> float:
    """Rate (bits per symbol) achieved by encoding into the largest class."""
    return math.log2(class_size(largest_class(n_b, q))) / n_b


# ---------------------------------------------------------------------------
# Batch codeword generation for simulations


def _encode_binary_batch(bits: np.ndarray, cls: VtClass) -> np.ndarray:
    """Vectorised :func:`encode_binary` over rows of ``bits``."""
    n = cls.n
    M = bits.shape[0]
    x = np.zeros((M, n), dtype=np.int64)
    sys_idx = np.asarray(systematic_positions(n), dtype=np.int64)
    x[:, sys_idx - 1] = bits
    deficit = (cls.a - x @ np.arange(1, n + 1)) % (n + 1)
    for j in range(redundancy(n)):
        x[:, (1 << j) - 1] = (deficit >> j) & 1
    return x


@lru_cache(maxsize=16)
def _qary_sampling_tables(cls: VtClass) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Float transition weights over the flattened state ``(prev, s, u)``.

    Returns ``(first, weights, next_state)``; ``weights[i - 1, state, w]`` is
    the number of members continuing with symbol ``w`` at position ``i``.
    """
    n, q = cls.n, cls.q
    R = _qary_completions(n, q, cls.a, cls.c).astype(np.float64)
    first = np.array([R[0, v, 0, v % q] for v in range(q)])
    prev, s, u = np.meshgrid(np.arange(q), np.arange(n), np.arange(q), indexing="ij")
    prev, s, u = prev.ravel(), s.ravel(), u.ravel()
    weights = np.empty((n - 1, q * n * q, q))
    nxt = np.empty((n - 1, q * n * q, q), dtype=np.int64)
    for i in range(1, n):
        for w in range(q):
            s2 = (s + np.where(w >= prev, i % n, 0)) % n
            u2 = (u + w) % q
            weights[i - 1, :, w] = R[i, w, s2, u2]
            nxt[i - 1, :, w] = (w * n + s2) * q + u2
    return first, weights, nxt


def _pick(weights: np.ndarray, r: np.ndarray) -> np.ndarray:
    cum = np.cumsum(weights, axis=1)
    thresh = np.minimum(r * cum[:, -1], np.nextafter(cum[:, -1], 0))
    return (cum <= thresh[:, None]).sum(axis=1)


def _sample_qary_members(cls: VtClass, M: int, rng: np.random.Generator) -> np.ndarray:
    """``M`` independent draws from the uniform distribution on ``cls``.

    Walks the exact completion counts converted to float64, so every output
    is a member and the sampling weights carry only rounding error
    (relative ~1e-16).
    """
    n, q = cls.n, cls.q
    x = np.zeros((M, n), dtype=np.int64)
    u01 = rng.random((M, n))
    if n == 1:
        x[:, 0] = cls.c
        return x
    first, weights, nxt = _qary_sampling_tables(cls)
    x[:, 0] = _pick(np.broadcast_to(first, (M, q)), u01[:, 0])
    state = (x[:, 0] * n) * q + x[:, 0] % q
    for i in range(1, n):
        w = _pick(weights[i - 1, state], u01[:, i])
        x[:, i] = w
        state = nxt[i - 1, state, w]
    return x


def random_codewords(code: BlockCode, M: int, rng: np.random.Generator) -> np.ndarray:
    """``M`` codewords for uniformly random messages, as an ``(M, n)`` int8 array.

    Binary blocks go through the systematic encoder with uniform message
    bits; q-ary blocks are uniform over their class, which is what the
    rank-based encoder produces for a uniform message index.
    """
    x = np.empty((M, code.l, code.n_b), dtype=np.int8)
    nb = code.n_b
    # blocks sharing a class are drawn together; order of draws is by first use
    for cls in dict.fromkeys(code.classes):
        idx = [i for i, c in enumerate(code.classes) if c == cls]
        if code.q == 2:
            bits = rng.integers(0, 2, size=(M * len(idx), nb - redundancy(nb)))
            blk = _encode_binary_batch(bits, cls)
        else:
            blk = _sample_qary_members(cls, M * len(idx), rng)
        x[:, idx, :] = blk.reshape(M, len(idx), nb)
    return x.reshape(M, code.n)


def batch_class_keys(blocks: np.ndarray, q: int) -> np.ndarray:
    """Class keys (``a`` or ``a * q + c``) of every row of ``blocks``."""
    blocks = np.asarray(blocks, dtype=np.int64)
    n = blocks.shape[-1]
    if q == 2:
        return (blocks @ np.arange(1, n + 1)) % (n + 1)
    if n == 1:
        return blocks[..., 0] % q
    up = blocks[..., 1:] >= blocks[..., :-1]
    a = (up @ np.arange(1, n)) % n
    return a * q + blocks.sum(axis=-1) % q
