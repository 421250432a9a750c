from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from vttrace.block_code import (
    BlockCode,
    batch_class_keys,
    binary_rate,
    block_classes,
    decode_units,
    encode,
    is_valid,
    qary_rate,
    qary_rate_lower_bound,
    random_codewords,
)
from vttrace.vt_core import VtClass, class_size, enumerate_class, is_member, largest_class

EX1 = tuple(int(c) for c in "010011100111111")


def test_example1_codeword_is_valid():
    code = BlockCode.from_syndromes(5, [1, 2, 3])
    assert code.n == 15
    assert is_valid(EX1, code)
    flipped = (1 - EX1[0],) + EX1[1:]
    assert not is_valid(flipped, code)
    with pytest.raises(ValueError):
        is_valid(EX1[:-1], code)


def test_systematic_image_is_a_subset_of_the_class():
    # 11111 lies in class 3 but shares its message bits with 10101
    code = BlockCode.from_syndromes(5, [1, 2, 3])
    units = decode_units(EX1, code)
    x = encode(units, code)
    assert is_valid(x, code)
    assert x[:10] == EX1[:10] and x[10:] == (1, 0, 1, 0, 1)


def test_binary_roundtrip_exhaustive_small():
    code = BlockCode.from_syndromes(6, [0, 3])
    m = 6 - 3
    words = set()
    for bits in product((0, 1), repeat=2 * m):
        msg = [bits[:m], bits[m:]]
        x = encode(msg, code)
        assert is_valid(x, code)
        assert [tuple(u) for u in decode_units(x, code)] == [tuple(u) for u in msg]
        words.add(x)
    assert len(words) == 2 ** (2 * m)


def test_qary_roundtrip():
    code = BlockCode.from_syndromes(4, [(0, 1), (2, 3), (1, 0)], q=4)
    sizes = [class_size(c) for c in code.classes]
    for msg in product(*(range(s) for s in sizes)):
        x = encode(list(msg), code)
        assert is_valid(x, code)
        assert decode_units(x, code) == list(msg)
    assert [c.key for c in block_classes(x, code)] == [(0, 1), (2, 3), (1, 0)]


def test_encode_errors():
    code = BlockCode.from_syndromes(5, [1, 2, 3])
    with pytest.raises(ValueError, match="expected 3"):
        encode([(0, 0)], code)
    with pytest.raises(ValueError, match="block 1"):
        encode([(0, 0), (0,), (0, 0)], code)


def test_code_validation():
    with pytest.raises(ValueError):
        BlockCode(2, 5, 2, (VtClass(5, 2, 0),))
    with pytest.raises(ValueError):
        BlockCode(1, 5, 2, (VtClass(6, 2, 0),))
    with pytest.raises(ValueError):
        BlockCode(0, 5, 2, ())


def test_uniform_uses_largest_class():
    code = BlockCode.uniform(3, 8, 4)
    assert code.classes == (largest_class(8, 4),) * 3


def test_describe_lists_syndromes():
    assert "syndromes = 1,2,3" in BlockCode.from_syndromes(5, [1, 2, 3]).describe()
    assert "syndromes = 0:1,2:3" in BlockCode.from_syndromes(4, [(0, 1), (2, 3)], q=4).describe()


def test_binary_rate():
    assert binary_rate(30) == Fraction(5, 6)
    assert binary_rate(1) == 0
    rates = [binary_rate(n) for n in range(20, 101, 10)]
    for n, r in zip(range(20, 101, 10), rates):
        assert r == 1 - Fraction(int(np.ceil(np.log2(n + 1))), n)
    assert rates == sorted(rates)


@pytest.mark.parametrize("n", range(2, 7))
def test_qary_rate_beats_lower_bound(n):
    assert qary_rate(n, 4) >= qary_rate_lower_bound(n, 4)


@pytest.mark.parametrize("q, nb", [(2, 7), (2, 20), (3, 5), (4, 6), (4, 20)])
def test_random_codewords_are_valid(q, nb):
    code = BlockCode.uniform(3, nb, q)
    x = random_codewords(code, 200, np.random.default_rng(1))
    assert x.shape == (200, 3 * nb) and x.dtype == np.int8
    for row in x[:50]:
        assert is_valid(row.tolist(), code)
    keys = batch_class_keys(x.reshape(-1, nb), q)
    cls = code.classes[0]
    assert (keys == (cls.a if q == 2 else cls.a * q + cls.c)).all()


def test_random_codewords_mixed_classes():
    code = BlockCode.from_syndromes(5, [(0, 1), (2, 3), (0, 1)], q=4)
    x = random_codewords(code, 300, np.random.default_rng(2))
    for row in x:
        assert is_valid(row.tolist(), code)


def test_qary_sampler_is_uniform():
    cls = VtClass(4, 3, 1, 2)
    members = enumerate_class(cls)
    code = BlockCode(1, 4, 3, (cls,))
    x = random_codewords(code, 60000, np.random.default_rng(3))
    idx = {m: i for i, m in enumerate(members)}
    counts = np.bincount([idx[tuple(r)] for r in x.tolist()], minlength=len(members))
    expected = 60000 / len(members)
    chi2 = ((counts - expected) ** 2 / expected).sum()
    # generous: 99.9% quantile for <= 10 degrees of freedom is below 30
    assert len(members) <= 11 and chi2 < 30


def test_random_codewords_deterministic():
    code = BlockCode.uniform(4, 10, 4)
    a = random_codewords(code, 50, np.random.default_rng(9))
    b = random_codewords(code, 50, np.random.default_rng(9))
    assert (a == b).all()


def test_batch_class_keys_match_scalar():
    rng = np.random.default_rng(4)
    for q in (2, 4):
        blocks = rng.integers(0, q, size=(100, 6))
        keys = batch_class_keys(blocks, q)
        for b, key in zip(blocks.tolist(), keys):
            cls = [c for c in (VtClass(6, 2, a) for a in range(7))] if q == 2 else \
                [VtClass(6, q, a, c) for a in range(6) for c in range(q)]
            (match,) = [c for c in cls if is_member(b, c)]
            assert key == (match.a if q == 2 else match.a * q + match.c)
