"""Binary and q-ary Varshamov-Tenengolts codebooks.

Words are tuples of ints in ``0..q-1``. Positions in syndromes are 1-indexed
as in the usual ``x_1 .. x_n`` notation; Python-level indices are 0-indexed.

A binary class is ``VtClass(n, 2, a)`` with ``0 <= a <= n``: the words whose
weighted sum ``sum(j * x_j)`` is ``a`` modulo ``n + 1``. A q-ary class is
``VtClass(n, q, a, c)`` with ``0 <= a <= n - 1``: the words whose auxiliary
up/down sequence has syndrome ``a`` (mod ``n``) and whose symbol sum is ``c``
(mod ``q``).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Sequence

import numpy as np

Word = tuple[int, ...]

#: Largest ``q**n`` that :func:`enumerate_class` will walk through.
ENUMERATION_CAP = 1 << 22


class EnumerationCapError(ValueError):
    """Raised when a class is too large to enumerate explicitly."""


@dataclass(frozen=True)
class VtClass:
    n: int
    q: int = 2
    a: int = 0
    c: int | None = None

    def __post_init__(self):
        if self.q < 2:
            raise ValueError(f"alphabet size must be >= 2, got {self.q}")
        if self.n < 1:
            raise ValueError(f"length must be >= 1, got {self.n}")
        if self.q == 2:
            if self.c is not None:
                raise ValueError("binary classes carry no symbol-sum parameter")
            if not 0 <= self.a <= self.n:
                raise ValueError(f"binary syndrome must lie in 0..{self.n}, got {self.a}")
        else:
            if self.c is None or not 0 <= self.c < self.q:
                raise ValueError(f"q-ary class needs sum parameter in 0..{self.q - 1}")
            if not 0 <= self.a < max(self.n, 1):
                raise ValueError(f"q-ary syndrome must lie in 0..{self.n - 1}, got {self.a}")

    @property
    def key(self) -> int | tuple[int, int]:
        return self.a if self.q == 2 else (self.a, self.c)


def as_word(x: Sequence[int], q: int) -> Word:
    w = tuple(int(s) for s in x)
    for s in w:
        if not 0 <= s < q:
            raise ValueError(f"symbol {s} outside alphabet 0..{q - 1}")
    return w


def _weighted_sum(x: Sequence[int]) -> int:
    return sum(j * s for j, s in enumerate(x, 1))


def syn_binary(x: Sequence[int]) -> int:
    """VT syndrome ``sum(j * x_j) mod (n + 1)`` of a binary word."""
    w = as_word(x, 2)
    return _weighted_sum(w) % (len(w) + 1)


def alpha_sequence(x: Sequence[int]) -> Word:
    """Binary sequence of length ``n - 1``; entry ``j`` is 1 iff ``x[j+1] >= x[j]``."""
    if len(x) < 2:
        raise ValueError("the auxiliary sequence needs a word of length >= 2")
    return tuple(int(x[j] >= x[j - 1]) for j in range(1, len(x)))


def mod_sum(x: Sequence[int], q: int) -> int:
    return sum(x) % q


def _qary_key(w: Word, q: int) -> tuple[int, int]:
    n = len(w)
    if n == 1:
        return 0, w[0] % q
    return _weighted_sum(alpha_sequence(w)) % n, mod_sum(w, q)


def class_of(x: Sequence[int], q: int = 2) -> VtClass:
    w = as_word(x, q)
    if q == 2:
        return VtClass(len(w), 2, _weighted_sum(w) % (len(w) + 1))
    a, c = _qary_key(w, q)
    return VtClass(len(w), q, a, c)


def _key_unchecked(w: Word, q: int):
    if q == 2:
        return _weighted_sum(w) % (len(w) + 1)
    return _qary_key(w, q)


def is_member(x: Sequence[int], cls: VtClass) -> bool:
    if len(x) != cls.n:
        raise ValueError(f"word length {len(x)} does not match class length {cls.n}")
    w = as_word(x, cls.q)
    return _key_unchecked(w, cls.q) == cls.key


def all_classes(n: int, q: int = 2) -> list[VtClass]:
    if q == 2:
        return [VtClass(n, 2, a) for a in range(n + 1)]
    return [VtClass(n, q, a, c) for a in range(max(n, 1)) for c in range(q)]


def enumerate_class(cls: VtClass, cap: int = ENUMERATION_CAP) -> list[Word]:
    """All members of ``cls`` in lexicographic order."""
    if cls.q**cls.n > cap:
        raise EnumerationCapError(f"{cls.q}**{cls.n} words exceeds the cap {cap}")
    return [w for w in product(range(cls.q), repeat=cls.n) if _key_unchecked(w, cls.q) == cls.key]


# ---------------------------------------------------------------------------
# Counting tables. Exact integer DP, so sizes and ranks work far beyond the
# enumeration cap.


@lru_cache(maxsize=None)
def _binary_size_table(n: int) -> tuple[int, ...]:
    m = n + 1
    counts = [0] * m
    counts[0] = 1
    for j in range(1, n + 1):
        counts = [counts[s] + counts[(s - j) % m] for s in range(m)]
    return tuple(counts)


@lru_cache(maxsize=64)
def _qary_completions(n: int, q: int, a: int, c: int) -> np.ndarray:
    """``R[i, v, s, u]``: completions of a prefix of length ``i + 1``.

    The prefix ends in symbol ``v`` with partial auxiliary syndrome ``s`` and
    partial sum ``u``; the entry counts suffixes that land in class ``(a, c)``.
    Object dtype keeps the counts exact.
    """
    R = np.zeros((n, q, n, q), dtype=object)
    R[n - 1, :, a, c] = 1
    for i in range(n - 2, -1, -1):
        # the next symbol sits at 1-indexed position i + 2, auxiliary weight i + 1
        weight = (i + 1) % n
        for v in range(q):
            acc = np.zeros((n, q), dtype=object)
            for w in range(q):
                up = weight if w >= v else 0
                # acc[s, u] += R[i+1, w, (s+up) % n, (u+w) % q]
                acc = acc + np.roll(np.roll(R[i + 1, w], -up, axis=0), -w, axis=1)
            R[i, v] = acc
    return R


@lru_cache(maxsize=None)
def _qary_size_table(n: int, q: int) -> dict[tuple[int, int], int]:
    """Sizes of every q-ary class of length ``n``, by forward DP."""
    if n == 1:
        return {(0, c): 1 for c in range(q)}
    # state: last symbol, auxiliary syndrome, sum
    cur = np.zeros((q, n, q), dtype=object)
    for v in range(q):
        cur[v, 0, v] = 1
    for i in range(1, n):
        weight = i % n
        nxt = np.zeros_like(cur)
        for v in range(q):
            for w in range(q):
                up = weight if w >= v else 0
                nxt[w] = nxt[w] + np.roll(np.roll(cur[v], up, axis=0), w, axis=1)
        cur = nxt
    totals = cur.sum(axis=0)
    return {(a, c): int(totals[a, c]) for a in range(n) for c in range(q)}


def class_size(cls: VtClass) -> int:
    if cls.q == 2:
        return _binary_size_table(cls.n)[cls.a]
    return _qary_size_table(cls.n, cls.q)[(cls.a, cls.c)]


def class_sizes(n: int, q: int = 2) -> dict:
    """Map from class key (``a`` or ``(a, c)``) to class size."""
    if q == 2:
        return dict(enumerate(_binary_size_table(n)))
    return dict(_qary_size_table(n, q))


def largest_class(n: int, q: int = 2) -> VtClass:
    """A class of maximum size; ties go to the smallest ``(a, c)``."""
    sizes = class_sizes(n, q)
    key = min(sizes, key=lambda k: (-sizes[k], k))
    if q == 2:
        return VtClass(n, 2, key)
    return VtClass(n, q, key[0], key[1])


# ---------------------------------------------------------------------------
# Encoders


def redundancy(n: int) -> int:
    """Number of parity positions of the systematic binary encoder."""
    return (n).bit_length()  # == ceil(log2(n + 1))


def message_length(n: int) -> int:
    return n - redundancy(n)


def _parity_positions(n: int) -> list[int]:
    return [1 << j for j in range(redundancy(n))]


@lru_cache(maxsize=None)
def systematic_positions(n: int) -> tuple[int, ...]:
    """1-indexed message positions (everything except the powers of two)."""
    parity = set(_parity_positions(n))
    return tuple(p for p in range(1, n + 1) if p not in parity)


def encode_binary(msg: Sequence[int], cls: VtClass) -> Word:
    """Systematic binary VT encoder.

    Message bits fill the non-power-of-two positions; the power-of-two
    positions then spell out the syndrome deficit in binary.
    """
    if cls.q != 2:
        raise ValueError("encode_binary needs a binary class")
    n = cls.n
    bits = as_word(msg, 2)
    if len(bits) != message_length(n):
        raise ValueError(f"message must have {message_length(n)} bits, got {len(bits)}")
    x = [0] * n
    for p, b in zip(systematic_positions(n), bits):
        x[p - 1] = b
    deficit = (cls.a - _weighted_sum(x)) % (n + 1)
    for p in reversed(_parity_positions(n)):
        if deficit >= p:
            x[p - 1] = 1
            deficit -= p
    assert deficit == 0
    return tuple(x)


def decode_message(x: Sequence[int], cls: VtClass) -> Word:
    """Inverse of :func:`encode_binary` on codewords."""
    if not is_member(x, cls):
        raise ValueError("word is not a member of the class")
    return tuple(x[p - 1] for p in systematic_positions(cls.n))


def encode_qary(index: int, cls: VtClass) -> Word:
    """The ``index``-th member of ``cls`` in lexicographic order."""
    size = class_size(cls)
    if not 0 <= index < size:
        raise ValueError(f"message index {index} outside 0..{size - 1}")
    n, q = cls.n, cls.q
    if n == 1:
        return (cls.c,)
    R = _qary_completions(n, q, cls.a, cls.c)
    rem = index
    x = []
    for v in range(q):
        cnt = R[0, v, 0, v % q]
        if rem < cnt:
            x.append(v)
            break
        rem -= cnt
    s, u = 0, x[0]
    for i in range(1, n):
        weight = i % n
        prev = x[-1]
        for w in range(q):
            s2 = (s + (weight if w >= prev else 0)) % n
            u2 = (u + w) % q
            cnt = R[i, w, s2, u2]
            if rem < cnt:
                x.append(w)
                s, u = s2, u2
                break
            rem -= cnt
    return tuple(x)


def rank_qary(x: Sequence[int], cls: VtClass) -> int:
    """Inverse of :func:`encode_qary`."""
    if not is_member(x, cls):
        raise ValueError("word is not a member of the class")
    n, q = cls.n, cls.q
    if n == 1:
        return 0
    R = _qary_completions(n, q, cls.a, cls.c)
    rank = sum(R[0, v, 0, v % q] for v in range(x[0]))
    s, u = 0, x[0]
    for i in range(1, n):
        weight = i % n
        prev = x[i - 1]
        for w in range(x[i]):
            rank += R[i, w, (s + (weight if w >= prev else 0)) % n, (u + w) % q]
        s = (s + (weight if x[i] >= prev else 0)) % n
        u = (u + x[i]) % q
    return int(rank)


# ---------------------------------------------------------------------------
# Single-deletion decoding


def decode_one_deletion_bruteforce(y: Sequence[int], cls: VtClass) -> Word | None:
    """Reference decoder: try every single insertion, keep the class members.

    Returns ``None`` when ``y`` is not a one-deletion trace of any member.
    """
    if len(y) != cls.n - 1:
        raise ValueError(f"trace length must be {cls.n - 1}, got {len(y)}")
    w = as_word(y, cls.q)
    found = None
    for p in range(cls.n):
        for v in range(cls.q):
            # inserting v inside a run of v's is the same word; keep the leftmost
            if p > 0 and w[p - 1] == v:
                continue
            cand = w[:p] + (v,) + w[p:]
            if _key_unchecked(cand, cls.q) == cls.key:
                if found is not None and found != cand:
                    raise AssertionError("single-deletion ball overlap; class is not a VT code")
                found = cand
    return found


def _decode_binary_fast(w: Word, a: int) -> Word:
    n = len(w) + 1
    weight = sum(w)
    deficit = (a - _weighted_sum(w)) % (n + 1)
    if deficit <= weight:
        # a 0 was deleted, with `deficit` ones to its right
        p, ones = len(w), 0
        while ones < deficit:
            p -= 1
            ones += w[p]
        return w[:p] + (0,) + w[p:]
    # a 1 was deleted, with deficit - weight - 1 zeros to its left
    p, zeros = 0, 0
    while zeros < deficit - weight - 1:
        zeros += 1 - w[p]
        p += 1
    return w[:p] + (1,) + w[p:]


def decode_one_deletion(y: Sequence[int], cls: VtClass) -> Word | None:
    """Recover the member of ``cls`` from one of its single-deletion traces.

    Binary classes use the linear-time decoder and never fail, since every
    binary word of length ``n - 1`` is a trace of exactly one member.
    q-ary classes use the exhaustive insertion search.
    """
    if cls.q == 2:
        if len(y) != cls.n - 1:
            raise ValueError(f"trace length must be {cls.n - 1}, got {len(y)}")
        return _decode_binary_fast(as_word(y, 2), cls.a)
    return decode_one_deletion_bruteforce(y, cls)
