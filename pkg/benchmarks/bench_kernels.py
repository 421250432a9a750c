"""Compare the compiled and pure-Python kernels on identical inputs.

    python benchmarks/bench_kernels.py [--trials N] [--seed S]

For each setting both backends decode the same trace batch; the script
checks that their outputs agree and reports throughput and speedup.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from vttrace import kernels
from vttrace.analysis import occupancy_counts
from vttrace.block_code import BlockCode, random_codewords
from vttrace.channel import batch_traces, stream

SETTINGS = [  # q, l, n_b, k, t
    (2, 7, 20, 4, 5),
    (2, 6, 30, 4, 3),
    (2, 7, 100, 4, 5),
    (4, 7, 20, 4, 5),
]


def _time(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return time.perf_counter() - t0, out


def bench_decode(q, l, nb, k, t, trials, seed):
    code = BlockCode.uniform(l, nb, q)
    rng = stream(seed, 0)
    x = random_codewords(code, trials, rng)
    traces, lengths = batch_traces(x, t, k, rng)
    targets = np.asarray(kernels.class_targets(code), dtype=np.int64)
    args = (traces, lengths, l, nb, q, targets)
    res = {}
    for name in kernels.available():
        res[name] = _time(kernels.get_backend(name).decode_batch, *args)
    return res


def bench_phase2(trials, seed):
    counts = np.ascontiguousarray(occupancy_counts("uniform-positions", 6, 4, (trials, 5), stream(seed, 1)))
    return {name: _time(kernels.get_backend(name).phase2_failures, counts) for name in kernels.available()}


def _report(label, res, trials):
    py_time = res["python"][0]
    line = f"{label:<32} python {trials / py_time:>10.0f}/s"
    if "cython" in res:
        c_time = res["cython"][0]
        py_out, c_out = (o if isinstance(o, tuple) else (o,) for o in (res["python"][1], res["cython"][1]))
        same = all(np.array_equal(np.asarray(a), np.asarray(b)) for a, b in zip(py_out, c_out))
        line += f"  cython {trials / c_time:>10.0f}/s  speedup {py_time / c_time:6.1f}x  outputs {'agree' if same else 'DIFFER'}"
    print(line, flush=True)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--trials", type=int, default=2000, help="decoded trace sets per setting")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if "cython" not in kernels.available():
        print("compiled kernels not built; timing the Python backend only")
    for q, l, nb, k, t in SETTINGS:
        _report(f"decode q={q} l={l} nb={nb} k={k} t={t}", bench_decode(q, l, nb, k, t, args.trials, args.seed), args.trials)
    n = 50 * args.trials
    _report("phase-2 occupancy rule", bench_phase2(n, args.seed), n)


if __name__ == "__main__":
    main()
