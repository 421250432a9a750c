"""Phase-2 error bounds and Monte Carlo estimators.

Bounds are evaluated in exact rational arithmetic and converted to float at
the end. Every estimator splits its trials into fixed-size chunks; chunk
``c`` draws from ``stream(seed, tag, c)`` and per-chunk integer counts are
summed in chunk order, so a result depends only on the seed and the trial
count, never on the number of workers.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, sqrt

import numpy as np
from scipy.stats import beta

from . import kernels
from .block_code import random_codewords
from .channel import batch_traces, floyd_subsets, stream
from .config import MODELS, ExperimentConfig

# stream tags, one per estimator
_TAG_PHASE2, _TAG_QR, _TAG_E2E = 1, 2, 3

OCCUPANCY_CHUNK = 1 << 16
DECODE_CHUNK = 1 << 12


def _binom(m: int, r: int) -> int:
    """``C(m, r)`` with ``C(m, 0) = 1`` for every ``m`` and 0 outside the triangle."""
    if r == 0:
        return 1
    if r < 0 or m < r:
        return 0
    return comb(m, r)


def _check_kl(k: int, l: int, strict: bool = True):
    if k < 0 or l < 1:
        raise ValueError(f"need k >= 0 and l >= 1, got k={k}, l={l}")
    if strict and not k < l:
        raise ValueError(f"need k < l, got k={k}, l={l}")


def p_s(k: int, l: int, s: int, strict: bool = True) -> Fraction:
    """Probability that a given block holds exactly ``s`` of the ``k`` deletions.

    Counts weak compositions of ``k`` into ``l`` parts with the given part
    equal to ``s``.
    """
    _check_kl(k, l, strict)
    if not 0 <= s <= k:
        raise ValueError(f"need 0 <= s <= k, got s={s}, k={k}")
    return Fraction(_binom(k - s + l - 2, k - s), _binom(k + l - 1, k))


def p1_prime(k: int, l: int) -> Fraction:
    """Probability of one deletion in a block given one deletion in its neighbour."""
    if k < 2 or l < 2:
        raise ValueError(f"need k >= 2 and l >= 2, got k={k}, l={l}")
    return Fraction(_binom(k + l - 5, k - 2), _binom(k + l - 3, k - 1))


def _bound_terms(l: int, k: int, t: int, strict: bool) -> tuple[Fraction, Fraction, Fraction]:
    _check_kl(k, l, strict)
    if k < 2:
        raise ValueError("the bound needs k >= 2")
    if t < 1:
        raise ValueError("need t >= 1")
    p0, p1 = p_s(k, l, 0, strict), p_s(k, l, 1, strict)
    first = (1 - p0 - p1) ** t
    second = ((1 - p0) ** 2 - p1 * p1_prime(k, l)) ** t
    return first, second, (1 - p0) ** t


def prop1_bound_sum(l: int, k: int, t: int, strict: bool = True) -> float:
    """Phase-2 error bound with the finite sum over runs of length 3..k-1."""
    first, second, x = _bound_terms(l, k, t, strict)
    third = sum((x ** r for r in range(3, k)), Fraction(0))
    return float(l * (first + second + third))


def prop1_bound_geom(l: int, k: int, t: int, strict: bool = True) -> float:
    """Phase-2 error bound with the geometric-series tail."""
    first, second, x = _bound_terms(l, k, t, strict)
    third = x ** 3 / (1 - x) if x != 1 else Fraction(0)
    return float(l * (first + second + third))


def q_r_exact(l: int, k: int, r: int) -> Fraction:
    """Compositions-model probability that ``r`` given blocks all hold a deletion."""
    _check_kl(k, l)
    if not 1 <= r <= k:
        raise ValueError(f"need 1 <= r <= k, got r={r}")
    return Fraction(_binom(k - r + l - 1, k - r), _binom(k + l - 1, k))


# ---------------------------------------------------------------------------
# Results


@dataclass(frozen=True)
class ExperimentResult:
    trials: int
    errors: int
    wall_time: float = 0.0
    breakdown: dict = field(default_factory=dict)

    @property
    def estimate(self) -> float:
        return self.errors / self.trials

    @property
    def sigma(self) -> float:
        """Standard error of the estimate."""
        p = self.estimate
        return sqrt(p * (1 - p) / self.trials)

    @property
    def interval(self) -> tuple[float, float]:
        """95% interval: normal approximation, exact binomial below 10 errors."""
        p, n, e = self.estimate, self.trials, self.errors
        if e < 10:
            lo = 0.0 if e == 0 else float(beta.ppf(0.025, e, n - e + 1))
            hi = 1.0 if e == n else float(beta.ppf(0.975, e + 1, n - e))
            return lo, hi
        h = 1.96 * self.sigma
        return max(0.0, p - h), min(1.0, p + h)

    @property
    def half_width(self) -> float:
        lo, hi = self.interval
        return (hi - lo) / 2


# ---------------------------------------------------------------------------
# Occupancy models


def occupancy_counts(
    model: str, l: int, k: int, shape: tuple[int, ...], rng: np.random.Generator, n_b: int = 30
) -> np.ndarray:
    """Per-block deletion counts, shape ``shape + (l,)``.

    ``uniform-positions`` deletes a uniform k-subset of the ``l * n_b``
    positions; ``compositions`` is uniform over weak compositions of ``k``
    into ``l`` parts; ``multinomial`` sends each deletion to an independent
    uniform block.
    """
    if model == "uniform-positions":
        blocks = floyd_subsets(l * n_b, k, shape, rng) // n_b
    elif model == "multinomial":
        blocks = rng.integers(0, l, size=shape + (k,))
    elif model == "compositions":
        # stars and bars: l - 1 bars among k + l - 1 slots
        bars = np.sort(floyd_subsets(k + l - 1, l - 1, shape, rng), axis=-1)
        edges = np.concatenate(
            [np.full(shape + (1,), -1), bars, np.full(shape + (1,), k + l - 1)], axis=-1
        )
        return np.diff(edges, axis=-1) - 1
    else:
        raise ValueError(f"unknown occupancy model {model!r}; expected one of {MODELS}")
    return (blocks[..., None] == np.arange(l)).sum(axis=-2)


# ---------------------------------------------------------------------------
# Chunked execution


def _chunks(trials: int, size: int) -> list[tuple[int, int]]:
    return [(c, min(size, trials - c * size)) for c in range(-(-trials // size))]


def _phase2_chunk(args) -> dict:
    seed, c, m, l, k, t, model, n_b, rule, backend = args
    rng = stream(seed, _TAG_PHASE2, c)
    counts = np.ascontiguousarray(occupancy_counts(model, l, k, (m, t), rng, n_b), dtype=np.int64)
    fails = kernels.get_backend(backend).phase2_failures(counts, rule == "single-block")
    return {"errors": int(np.asarray(fails).sum())}


def _qr_chunk(args) -> dict:
    seed, c, m, l, k, r, model, n_b = args
    rng = stream(seed, _TAG_QR, c)
    counts = occupancy_counts(model, l, k, (m,), rng, n_b)
    return {"errors": int((counts[:, :r] >= 1).all(axis=1).sum())}


def _e2e_chunk(args) -> dict:
    cfg, c, m = args
    code = cfg.code()
    rng = stream(cfg.seed, _TAG_E2E, c)
    x = random_codewords(code, m, rng)
    traces, lengths = batch_traces(x, cfg.t, cfg.k, rng, cfg.mode)
    targets = np.asarray(kernels.class_targets(code), dtype=np.int64)
    status, words, _, _ = kernels.get_backend(cfg.backend).decode_batch(
        traces, lengths, code.l, code.n_b, code.q, targets, cfg.tie_break == "deletions"
    )
    status = np.asarray(status)
    out = {reason: int((status == s).sum()) for s, reason in kernels.STATUS_REASONS.items()}
    out["miscorrection"] = int(((status == 0) & (np.asarray(words) != x).any(axis=1)).sum())
    out["errors"] = int((status != 0).sum()) + out["miscorrection"]
    return out


def _run(fn, tasks: list, workers: int) -> dict:
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(fn, tasks))
    else:
        parts = [fn(task) for task in tasks]
    total: dict = {}
    for part in parts:
        for key, v in part.items():
            total[key] = total.get(key, 0) + v
    return total


def _result(total: dict, trials: int, t0: float) -> ExperimentResult:
    errors = total.pop("errors")
    return ExperimentResult(trials, errors, time.perf_counter() - t0, total)


# ---------------------------------------------------------------------------
# Estimators


def mc_phase2_error(
    l: int, k: int, t: int, model: str = "uniform-positions", trials: int = 100000, seed: int = 0,
    n_b: int = 30, rule: str = "runs", workers: int = 1, backend: str | None = None,
    strict: bool = True,
) -> ExperimentResult:
    """Frequency of unresolvable congestion from deletion occupancy alone.

    ``rule="runs"`` fails a trial when some maximal run of ``r`` congested
    blocks holds more than ``r`` deletions in every trace. ``"single-block"``
    fails it when some block holds two or more deletions in every trace.
    """
    _check_kl(k, l, strict)
    if t < 1 or trials < 1:
        raise ValueError("need t >= 1 and trials >= 1")
    if model not in MODELS:
        raise ValueError(f"unknown occupancy model {model!r}")
    t0 = time.perf_counter()
    tasks = [(seed, c, m, l, k, t, model, n_b, rule, backend) for c, m in _chunks(trials, OCCUPANCY_CHUNK)]
    return _result(_run(_phase2_chunk, tasks, workers), trials, t0)


def mc_q_r(
    l: int, k: int, r: int, model: str = "compositions", trials: int = 100000, seed: int = 0,
    n_b: int = 30, workers: int = 1,
) -> ExperimentResult:
    """Frequency with which blocks ``0..r-1`` each receive a deletion in one trace."""
    _check_kl(k, l)
    if not 1 <= r <= k:
        raise ValueError(f"need 1 <= r <= k, got r={r}")
    t0 = time.perf_counter()
    tasks = [(seed, c, m, l, k, r, model, n_b) for c, m in _chunks(trials, OCCUPANCY_CHUNK)]
    return _result(_run(_qr_chunk, tasks, workers), trials, t0)


def mc_end_to_end(config: ExperimentConfig) -> ExperimentResult:
    """Encode, transmit through ``t`` traces, decode; count anything but exact recovery.

    ``breakdown`` holds detected failures by reason plus ``miscorrection``
    (decoded to a different codeword).
    """
    config.code()  # fail early on a bad code description
    t0 = time.perf_counter()
    tasks = [(config, c, m) for c, m in _chunks(config.trials, DECODE_CHUNK)]
    return _result(_run(_e2e_chunk, tasks, config.workers), config.trials, t0)
