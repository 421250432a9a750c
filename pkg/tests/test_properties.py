"""Randomised properties over small codes."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from vttrace.block_code import BlockCode, decode_units, encode, is_valid, random_codewords
from vttrace.channel import DeletionPattern, apply_deletions, is_subsequence
from vttrace.decoder import Decoded, decode, embed_and_count
from vttrace.vt_core import (
    VtClass,
    class_of,
    decode_one_deletion,
    encode_binary,
    encode_qary,
    is_member,
    message_length,
    rank_qary,
)


@st.composite
def binary_member(draw, max_n=40):
    n = draw(st.integers(2, max_n))
    a = draw(st.integers(0, n))
    bits = draw(st.lists(st.integers(0, 1), min_size=message_length(n), max_size=message_length(n)))
    return encode_binary(bits, VtClass(n, 2, a)), VtClass(n, 2, a)


@st.composite
def qary_member(draw):
    q = draw(st.integers(3, 5))
    n = draw(st.integers(2, 14))
    word = tuple(draw(st.lists(st.integers(0, q - 1), min_size=n, max_size=n)))
    return word, class_of(word, q)


@given(binary_member(), st.data())
def test_binary_single_deletion_recovered(member, data):
    x, cls = member
    p = data.draw(st.integers(0, cls.n - 1))
    assert decode_one_deletion(x[:p] + x[p + 1:], cls) == x


@given(qary_member(), st.data())
def test_qary_single_deletion_recovered(member, data):
    x, cls = member
    p = data.draw(st.integers(0, cls.n - 1))
    assert decode_one_deletion(x[:p] + x[p + 1:], cls) == x


@given(qary_member())
def test_qary_rank_roundtrip(member):
    x, cls = member
    assert is_member(x, cls)
    assert encode_qary(rank_qary(x, cls), cls) == x


@given(st.lists(st.integers(0, 2), max_size=12), st.lists(st.integers(0, 2), max_size=12),
       st.integers(0, 12))
def test_embed_counts_add_up(cand, trace, start):
    start = min(start, len(trace))
    ins, cons = embed_and_count(cand, trace, start)
    assert ins + cons == len(cand)
    assert is_subsequence(trace[start:start + cons], cand)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(3, 9), st.sampled_from([2, 3, 4]), st.integers(1, 4), st.data())
def test_decoded_word_is_consistent_with_traces(l, nb, q, t, data):
    code = BlockCode.uniform(l, nb, q)
    n = code.n
    seed = data.draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    x = tuple(random_codewords(code, 1, rng)[0].tolist())
    traces = []
    for _ in range(t):
        k = data.draw(st.integers(0, min(3, n)))
        pos = data.draw(st.sets(st.integers(1, n), min_size=k, max_size=k))
        traces.append(apply_deletions(x, DeletionPattern(tuple(sorted(pos)), n)).word)
    out = decode(traces, code)
    if isinstance(out, Decoded):
        assert is_valid(out.word, code)
        assert all(is_subsequence(y, out.word) for y in traces)
    if all(len(y) == n for y in traces):
        assert out == Decoded(x)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(2, 12), st.data())
def test_block_encode_roundtrip(l, nb, data):
    code = BlockCode.uniform(l, nb)
    m = message_length(nb)
    msg = [tuple(data.draw(st.lists(st.integers(0, 1), min_size=m, max_size=m))) for _ in range(l)]
    x = encode(msg, code)
    assert is_valid(x, code) and decode_units(x, code) == msg
