from itertools import combinations

import numpy as np
import pytest
from scipy.stats import chisquare

from vttrace.channel import (
    DeletionPattern,
    apply_deletions,
    batch_traces,
    floyd_subsets,
    generate_traces,
    is_subsequence,
    sample_pattern,
    stream,
)

X = tuple(int(c) for c in "100011101101010")


def w(s):
    return tuple(int(c) for c in s)


def test_intro_example_traces():
    assert apply_deletions(X, DeletionPattern((2, 9), 15)).word == w("1001110101010")
    assert apply_deletions(X, DeletionPattern((7, 8, 15), 15)).word == w("100011110101")


def test_empty_pattern_is_identity():
    tr = apply_deletions(X, DeletionPattern((), 15))
    assert tr.word == X and tr.deletions == 0


def test_pattern_validation():
    with pytest.raises(ValueError):
        DeletionPattern((3, 2), 5)
    with pytest.raises(ValueError):
        DeletionPattern((0,), 5)
    with pytest.raises(ValueError):
        DeletionPattern((6,), 5)
    with pytest.raises(ValueError):
        apply_deletions(X, DeletionPattern((1,), 14))


def test_sample_pattern_edges():
    rng = np.random.default_rng(0)
    assert sample_pattern(7, 0, rng).positions == ()
    assert sample_pattern(7, 7, rng).positions == tuple(range(1, 8))
    with pytest.raises(ValueError):
        sample_pattern(3, 4, rng)


def test_position_marginals():
    rng = np.random.default_rng(1)
    n, k, draws = 12, 3, 100000
    pos = floyd_subsets(n, k, (draws,), rng)
    freq = np.bincount(pos.ravel(), minlength=n) / draws
    sigma = np.sqrt((k / n) * (1 - k / n) / draws)
    assert np.all(np.abs(freq - k / n) < 3.5 * sigma)


def test_subset_uniformity_chi_square():
    rng = np.random.default_rng(2)
    n, k, draws = 7, 3, 10**6
    pos = np.sort(floyd_subsets(n, k, (draws,), rng), axis=1)
    code = (pos * n ** np.arange(k)).sum(axis=1)
    index = {sum(p * n**i for i, p in enumerate(c)): j for j, c in enumerate(combinations(range(n), k))}
    counts = np.zeros(len(index), dtype=np.int64)
    vals, cnt = np.unique(code, return_counts=True)
    for v, c in zip(vals, cnt):
        counts[index[int(v)]] = c
    assert counts.sum() == draws
    assert chisquare(counts).pvalue > 0.001


def test_generate_traces():
    rng = np.random.default_rng(3)
    trs = generate_traces(X, 4, 3, rng)
    assert len(trs) == 4
    for tr in trs:
        assert len(tr.word) == 12 and is_subsequence(tr.word, X)
    assert generate_traces(X, 1, 0, rng)[0].word == X
    lens = {len(tr.word) for tr in generate_traces(X, 200, 3, rng, "at-most-k")}
    assert lens == {12, 13, 14, 15}
    with pytest.raises(ValueError):
        generate_traces(X, 0, 1, rng)
    with pytest.raises(ValueError):
        generate_traces(X, 1, 1, rng, "sometimes")


def test_duplicate_traces_are_allowed():
    rng = np.random.default_rng(4)
    trs = generate_traces((0,) * 10, 3, 2, rng)
    assert len({tr.word for tr in trs}) == 1


def test_stream_determinism():
    a = stream(5, 1, 2).random(4)
    assert np.array_equal(a, stream(5, 1, 2).random(4))
    assert not np.array_equal(a, stream(5, 1, 3).random(4))
    assert not np.array_equal(a, stream(6, 1, 2).random(4))


@pytest.mark.parametrize("mode", ["exactly-k", "at-most-k"])
def test_batch_traces(mode):
    rng = np.random.default_rng(5)
    x = rng.integers(0, 4, size=(300, 20)).astype(np.int8)
    traces, lengths = batch_traces(x, 3, 4, rng, mode)
    assert traces.shape == (300, 3, 20) and lengths.shape == (300, 3)
    if mode == "exactly-k":
        assert (lengths == 16).all()
    else:
        assert set(np.unique(lengths)) == {16, 17, 18, 19, 20}
    for m in range(300):
        for j in range(3):
            assert is_subsequence(traces[m, j, :lengths[m, j]].tolist(), x[m].tolist())


def test_batch_traces_position_marginals():
    rng = np.random.default_rng(6)
    n, draws = 10, 40000
    x = np.tile(np.arange(n, dtype=np.int8), (draws, 1))
    traces, _ = batch_traces(x, 1, 2, rng)
    kept = np.zeros(n)
    for v in range(n):
        kept[v] = (traces[:, 0, :8] == v).any(axis=1).mean()
    assert np.all(np.abs((1 - kept) - 0.2) < 0.01)
