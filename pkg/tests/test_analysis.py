from fractions import Fraction
from itertools import product
from math import comb

import numpy as np
import pytest

from vttrace import analysis
from vttrace.analysis import (
    ExperimentResult,
    mc_end_to_end,
    mc_phase2_error,
    mc_q_r,
    occupancy_counts,
    p1_prime,
    p_s,
    prop1_bound_geom,
    prop1_bound_sum,
    q_r_exact,
)
from vttrace.config import ConfigError, ExperimentConfig, load_config, parse_config_text

BOUND_L6_K4 = [
    2.65714285714286, 0.308072820771234, 0.0421281372201441, 0.00617033816139136,
    0.000941680149513452, 0.000147703550473664, 2.36056273822832e-05,
    3.82152875068251e-06, 6.24185326959971e-07,
]


def compositions(k, l):
    for c in product(range(k + 1), repeat=l):
        if sum(c) == k:
            yield c


def test_p_s_examples():
    assert p_s(4, 6, 0) == Fraction(5, 9)
    assert p_s(4, 6, 1) == Fraction(5, 18)


@pytest.mark.parametrize("l", range(2, 8))
def test_p_s_matches_enumeration(l):
    for k in range(l):
        comps = list(compositions(k, l))
        for s in range(k + 1):
            assert p_s(k, l, s) == Fraction(sum(c[0] == s for c in comps), len(comps))
        assert sum(p_s(k, l, s) for s in range(k + 1)) == 1


def test_p_s_sums_to_one_up_to_12():
    for l in range(2, 13):
        for k in range(l):
            assert sum(p_s(k, l, s) for s in range(k + 1)) == 1


def test_p1_prime():
    assert p1_prime(4, 6) == Fraction(2, 7)
    assert p1_prime(2, 2) == 1
    for l in range(2, 7):
        for k in range(2, 6):
            comps = list(compositions(k, l))
            given = [c for c in comps if c[0] == 1]
            both = [c for c in given if c[1] == 1]
            assert p1_prime(k, l) == Fraction(len(both), len(given))


def test_domain_errors():
    with pytest.raises(ValueError):
        p_s(6, 6, 0)
    with pytest.raises(ValueError):
        p_s(4, 6, 5)
    with pytest.raises(ValueError):
        p1_prime(1, 6)
    with pytest.raises(ValueError):
        prop1_bound_geom(6, 6, 1)
    with pytest.raises(ValueError):
        prop1_bound_geom(6, 4, 0)
    with pytest.raises(ValueError):
        mc_phase2_error(4, 4, 1, trials=10)


@pytest.mark.parametrize("t", range(1, 10))
def test_bound_reproduces_reference_values(t):
    assert prop1_bound_geom(6, 4, t) == pytest.approx(BOUND_L6_K4[t - 1], rel=1e-9)


def test_sum_form_below_geometric_form():
    for l in range(3, 12):
        for k in range(2, l):
            for t in range(1, 10):
                assert prop1_bound_sum(l, k, t) <= prop1_bound_geom(l, k, t)


def test_k2_has_empty_third_term():
    p0, p1 = p_s(2, 5, 0), p_s(2, 5, 1)
    expected = 5 * ((1 - p0 - p1) ** 3 + ((1 - p0) ** 2 - p1 * p1_prime(2, 5)) ** 3)
    assert prop1_bound_sum(5, 2, 3) == pytest.approx(float(expected), rel=1e-15)


def test_bound_at_l7_k4_t5():
    assert prop1_bound_geom(7, 4, 5) == pytest.approx(3.41e-4, rel=2e-3)


def test_q_r_exact_matches_enumeration():
    for l, k in [(4, 3), (5, 4), (6, 4)]:
        comps = list(compositions(k, l))
        for r in range(1, k + 1):
            frac = Fraction(sum(all(c[i] >= 1 for i in range(r)) for c in comps), len(comps))
            assert q_r_exact(l, k, r) == frac
        assert q_r_exact(l, k, 1) == 1 - p_s(k, l, 0)


@pytest.mark.parametrize("model", ["uniform-positions", "compositions", "multinomial"])
def test_occupancy_counts_shape_and_total(model):
    c = occupancy_counts(model, 6, 4, (1000, 3), np.random.default_rng(0), n_b=5)
    assert c.shape == (1000, 3, 6)
    assert (c.sum(axis=-1) == 4).all() and (c >= 0).all()


def test_uniform_positions_respects_block_capacity():
    c = occupancy_counts("uniform-positions", 3, 5, (2000,), np.random.default_rng(1), n_b=2)
    assert c.max() <= 2


def test_compositions_model_is_uniform():
    rng = np.random.default_rng(2)
    c = occupancy_counts("compositions", 4, 3, (200000,), rng)
    keys, counts = np.unique(c, axis=0, return_counts=True)
    assert len(keys) == comb(3 + 3, 3)
    expected = 200000 / len(keys)
    assert np.all(np.abs(counts - expected) < 5 * np.sqrt(expected))


def test_q_r_monte_carlo_matches_exact():
    for r in (1, 2, 3):
        res = mc_q_r(6, 4, r, "compositions", trials=200000, seed=3)
        assert abs(res.estimate - float(q_r_exact(6, 4, r))) < 4 * res.sigma


def test_phase2_estimate_below_bound_compositions():
    for l, k, t in [(6, 4, 1), (6, 4, 2), (7, 4, 2), (10, 4, 2), (6, 3, 3)]:
        res = mc_phase2_error(l, k, t, "compositions", trials=200000, seed=4)
        assert res.estimate <= prop1_bound_geom(l, k, t) + 3 * res.sigma


def test_phase2_nonincreasing_in_t():
    prev = None
    for t in range(1, 5):
        res = mc_phase2_error(6, 4, t, trials=100000, seed=5)
        if prev is not None:
            assert res.estimate <= prev.estimate + 3 * (res.sigma + prev.sigma)
        prev = res


def test_single_block_rule_matches_exact_multinomial_value():
    # P(some block holds >= 2 deletions in every trace), by inclusion-exclusion
    res = mc_phase2_error(6, 4, 2, "multinomial", trials=400000, seed=6, rule="single-block")
    assert abs(res.estimate - 0.104135) < 4 * res.sigma


def test_results_independent_of_workers():
    a = mc_phase2_error(6, 4, 2, trials=150000, seed=7, workers=1)
    b = mc_phase2_error(6, 4, 2, trials=150000, seed=7, workers=2)
    assert a.errors == b.errors
    cfg = ExperimentConfig(l=4, n_b=10, k=3, t=2, trials=9000, seed=8)
    assert mc_end_to_end(cfg).breakdown == mc_end_to_end(cfg.replace(workers=3)).breakdown


def test_end_to_end_small():
    cfg = ExperimentConfig(l=4, n_b=10, k=0, t=1, trials=5000)
    res = mc_end_to_end(cfg)
    assert res.errors == 0 and res.trials == 5000
    res = mc_end_to_end(cfg.replace(k=3, t=2, trials=8000))
    assert 0 < res.errors < res.trials
    assert res.errors == sum(res.breakdown.values())


def test_experiment_result_intervals():
    r = ExperimentResult(1000, 0)
    assert r.estimate == 0 and r.interval[0] == 0 and 0.003 < r.interval[1] < 0.004
    r = ExperimentResult(10**6, 1000)
    lo, hi = r.interval
    assert lo < 1e-3 < hi and r.half_width == pytest.approx(1.96 * r.sigma)


def test_config_parsing(tmp_path):
    text = "# comment\nq = 4\nnb = 12   # trailing\nsyndromes = 0:1\ntrials=50\n"
    assert parse_config_text(text) == {"q": 4, "n_b": 12, "syndromes": "0:1", "trials": 50}
    with pytest.raises(ConfigError, match=":2:"):
        parse_config_text("q = 2\nbogus = 1\n")
    with pytest.raises(ConfigError, match=":1:"):
        parse_config_text("q = two\n")
    with pytest.raises(ConfigError, match=":1:"):
        parse_config_text("just words\n")
    p = tmp_path / "c.cfg"
    p.write_text(text)
    cfg = load_config(p, {"trials": 7, "k": None})
    assert (cfg.q, cfg.n_b, cfg.trials, cfg.k) == (4, 12, 7, 4)
    assert cfg.code().classes[0].key == (0, 1)


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig(q=1)
    with pytest.raises(ConfigError):
        ExperimentConfig(trials=0)
    with pytest.raises(ConfigError):
        ExperimentConfig(model="poisson")
    with pytest.raises(ConfigError):
        ExperimentConfig(l=3, syndromes="1,2").code()
    with pytest.raises(ConfigError):
        ExperimentConfig(n_b=5, l=1, syndromes="9").code()
    assert len(ExperimentConfig(l=3, n_b=5, syndromes="2").code().classes) == 3


def test_chunks_cover_trials():
    chunks = analysis._chunks(10, 4)
    assert chunks == [(0, 4), (1, 4), (2, 2)]
