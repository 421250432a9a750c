"""Command-line front end.

Words are written one per line as digit strings (``0..q-1``). A trace file
holds one group of trace lines per codeword, groups separated by blank
lines; ``-`` stands for an empty trace and lines starting with ``#`` are
comments. ``corrupt`` records each deletion pattern as a ``# deleted:``
comment above its trace.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import dataclass
from typing import Sequence, TextIO

import numpy as np

from . import analysis
from .block_code import BlockCode, decode_units, encode, random_codewords
from .channel import MODES, generate_traces, stream
from .config import MODELS, RULES, ConfigError, ExperimentConfig, load_config
from .decoder import TIE_BREAKS, Decoded, DetectedFailure, decode
from .vt_core import redundancy

EXIT_OK, EXIT_USAGE, EXIT_DETECTED = 0, 1, 2
_TAG_CLI = 100


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# Text formats


def parse_word(text: str, q: int, where: str) -> tuple[int, ...]:
    text = text.strip()
    if text == "-":
        return ()
    try:
        w = tuple(int(ch) for ch in text)
    except ValueError:
        raise UsageError(f"{where}: expected digits 0..{q - 1}, got {text!r}") from None
    if any(s >= q for s in w):
        raise UsageError(f"{where}: symbol out of range for q={q}")
    return w


def format_word(w: Sequence[int]) -> str:
    return "".join(str(int(s)) for s in w) or "-"


def read_words(f: TextIO, q: int, name: str) -> list[tuple[int, ...]]:
    out = []
    for lineno, line in enumerate(f, 1):
        if line.strip() and not line.lstrip().startswith("#"):
            out.append(parse_word(line, q, f"{name}:{lineno}"))
    return out


def read_trace_groups(f: TextIO, q: int, name: str) -> list[list[tuple[int, ...]]]:
    groups, cur = [], []
    for lineno, line in enumerate(f, 1):
        s = line.strip()
        if s.startswith("#"):
            continue
        if not s:
            if cur:
                groups.append(cur)
                cur = []
            continue
        cur.append(parse_word(s, q, f"{name}:{lineno}"))
    if cur:
        groups.append(cur)
    return groups


def parse_message(text: str, code: BlockCode, where: str) -> list:
    """One codeword's message: a bit string or ``0x`` hex (binary), else ``l`` rank indices."""
    text = text.strip()
    if code.q == 2:
        m = code.n_b - redundancy(code.n_b)
        total = code.l * m
        if text.lower().startswith("0x"):
            try:
                value = int(text, 16)
            except ValueError:
                raise UsageError(f"{where}: bad hex message {text!r}") from None
            if value >> total:
                raise UsageError(f"{where}: message does not fit in {total} bits")
            bits = [int(b) for b in format(value, f"0{total}b")] if total else []
        else:
            if any(ch not in "01" for ch in text):
                raise UsageError(f"{where}: expected a bit string or 0x hex, got {text!r}")
            bits = [int(b) for b in text]
            if len(bits) != total:
                raise UsageError(f"{where}: expected {total} message bits, got {len(bits)}")
        return [bits[i * m:(i + 1) * m] for i in range(code.l)]
    parts = text.replace(",", " ").split()
    try:
        units = [int(p) for p in parts]
    except ValueError:
        raise UsageError(f"{where}: expected {code.l} integer indices") from None
    if len(units) != code.l:
        raise UsageError(f"{where}: expected {code.l} message indices, got {len(units)}")
    return units


def format_message(units: list, code: BlockCode) -> str:
    if code.q == 2:
        return "".join(str(b) for u in units for b in u)
    return " ".join(str(u) for u in units)


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return np.format_float_positional(float(v), trim="-")


def write_csv(rows: list[dict], out: TextIO):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(list(rows[0]))
    for row in rows:
        w.writerow([_fmt(v) for v in row.values()])


# ---------------------------------------------------------------------------
# Commands


def _open_in(path: str | None) -> TextIO:
    if path in (None, "-"):
        return sys.stdin
    try:
        return open(path)
    except OSError as exc:
        raise UsageError(f"cannot open {path}: {exc.strerror}") from None


def _emit(text: str, path: str | None):
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", newline="") as f:
            f.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None


def cmd_encode(args, cfg: ExperimentConfig) -> int:
    code = cfg.code()
    out = []
    if args.random is not None:
        rng = stream(cfg.seed, _TAG_CLI, 0)
        for x in random_codewords(code, args.random, rng):
            out.append(format_word(x))
    else:
        f = _open_in(args.input)
        name = args.input or "<stdin>"
        for lineno, line in enumerate(f, 1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            units = parse_message(line, code, f"{name}:{lineno}")
            try:
                out.append(format_word(encode(units, code)))
            except ValueError as exc:
                raise UsageError(f"{name}:{lineno}: {exc}") from None
    _emit("".join(w + "\n" for w in out), cfg.out)
    return EXIT_OK


def cmd_corrupt(args, cfg: ExperimentConfig) -> int:
    words = read_words(_open_in(args.input), cfg.q, args.input or "<stdin>")
    rng = stream(cfg.seed, _TAG_CLI, 1)
    lines = []
    for idx, x in enumerate(words):
        if cfg.k > len(x) and cfg.mode == "exactly-k":
            raise UsageError(f"codeword {idx + 1}: cannot delete {cfg.k} of {len(x)} symbols")
        for tr in generate_traces(x, cfg.t, min(cfg.k, len(x)), rng, cfg.mode):
            lines.append("# deleted: " + ",".join(str(p) for p in tr.pattern.positions))
            lines.append(format_word(tr.word))
        lines.append("")
    _emit("\n".join(lines) + ("\n" if lines else ""), cfg.out)
    return EXIT_OK


def _verdict(out, truth) -> str:
    if isinstance(out, DetectedFailure):
        return "detected-failure"
    return "correct" if out.word == tuple(truth) else "miscorrection"


def cmd_decode(args, cfg: ExperimentConfig) -> int:
    code = cfg.code()
    if args.trace:
        groups = [[parse_word(s, cfg.q, f"--trace {i + 1}") for i, s in enumerate(args.trace)]]
    else:
        groups = read_trace_groups(_open_in(args.input), cfg.q, args.input or "<stdin>")
    truth = None
    if args.truth:
        truth = read_words(_open_in(args.truth), cfg.q, args.truth)
        if len(truth) != len(groups):
            raise UsageError(f"{len(groups)} trace groups but {len(truth)} truth words")
    lines, detected = [], 0
    for g, traces in enumerate(groups):
        if any(len(y) > code.n for y in traces):
            raise UsageError(f"trace group {g + 1}: trace longer than n={code.n}")
        out = decode(traces, code, tie_break=cfg.tie_break)
        if isinstance(out, Decoded):
            line = format_word(out.word)
            if args.message:
                line += "\t" + format_message(decode_units(out.word, code), code)
        else:
            detected += 1
            line = f"FAIL {out.reason} blocks {out.first_block + 1}-{out.last_block + 1}"
        if truth is not None:
            line += "\t" + _verdict(out, truth[g])
        lines.append(line)
    _emit("".join(s + "\n" for s in lines), cfg.out)
    if len(groups) == 1 and detected:
        return EXIT_DETECTED
    return EXIT_OK


def parse_t_list(text: str | None) -> list[int]:
    """``"5"``, ``"1,3,5"`` or ``"1-9"``."""
    if text is None:
        return list(range(1, 10))
    out = []
    try:
        for part in text.split(","):
            lo, sep, hi = part.partition("-")
            out.extend(range(int(lo), int(hi) + 1) if sep else [int(lo)])
    except ValueError:
        raise UsageError(f"cannot parse t list {text!r}") from None
    if not out or min(out) < 1:
        raise UsageError("t values must be positive")
    return out


def cmd_bound(args, cfg: ExperimentConfig) -> int:
    rows = []
    for t in parse_t_list(args.t):
        try:
            rows.append({
                "t": t,
                "sum_form": analysis.prop1_bound_sum(cfg.l, cfg.k, t),
                "geom_form": analysis.prop1_bound_geom(cfg.l, cfg.k, t),
            })
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    buf = io.StringIO()
    write_csv(rows, buf)
    _emit(buf.getvalue(), cfg.out)
    return EXIT_OK


def cmd_simulate(args, cfg: ExperimentConfig) -> int:
    r = analysis.mc_end_to_end(cfg)
    row = {"q": cfg.q, "l": cfg.l, "n_b": cfg.n_b, "k": cfg.k, "t": cfg.t, "trials": r.trials,
           "errors": r.errors, "estimate": r.estimate, "half_width": r.half_width}
    row.update(r.breakdown)
    buf = io.StringIO()
    write_csv([row], buf)
    _emit(buf.getvalue(), cfg.out)
    return EXIT_OK


def cmd_phase2(args, cfg: ExperimentConfig) -> int:
    try:
        r = analysis.mc_phase2_error(cfg.l, cfg.k, cfg.t, cfg.model, cfg.trials, cfg.seed,
                                     cfg.n_b, cfg.rule, cfg.workers, cfg.backend)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    row = {"l": cfg.l, "k": cfg.k, "t": cfg.t, "trials": r.trials, "errors": r.errors,
           "estimate": r.estimate, "half_width": r.half_width}
    buf = io.StringIO()
    write_csv([row], buf)
    _emit(buf.getvalue(), cfg.out)
    return EXIT_OK


# --- figures -----------------------------------------------------------------


@dataclass(frozen=True)
class Figure:
    axis: str
    values: tuple[int, ...]
    base: ExperimentConfig


FIGURES = {
    "fig-n": Figure("n_b", tuple(range(20, 101, 10)), ExperimentConfig(q=2, l=7, k=4, t=5)),
    "fig-t": Figure("t", tuple(range(1, 10)), ExperimentConfig(q=2, l=6, n_b=30, k=4)),
    "fig-k": Figure("k", (2, 4, 6, 8, 10), ExperimentConfig(q=2, l=10, n_b=30, t=5)),
}


def _point(cfg: ExperimentConfig) -> dict:
    r = analysis.mc_end_to_end(cfg)
    return {"error": r.estimate, "phase2_decoder": (r.errors - r.breakdown["miscorrection"]) / r.trials}


def _occupancy_and_bound(cfg: ExperimentConfig) -> dict:
    # k = l appears on the k axis; the bound formulas still evaluate there
    occ = analysis.mc_phase2_error(cfg.l, cfg.k, cfg.t, cfg.model, cfg.trials, cfg.seed, cfg.n_b,
                                   cfg.rule, cfg.workers, cfg.backend, strict=False)
    bound = analysis.prop1_bound_geom(cfg.l, cfg.k, cfg.t, strict=False) if cfg.k >= 2 else 0.0
    return {"phase2_occupancy": occ.estimate, "bound": bound}


def figure_rows(name: str, cfg: ExperimentConfig) -> list[dict]:
    fig = FIGURES[name]
    rows = []
    for v in fig.values:
        c = cfg.replace(**{fig.axis: v})
        row: dict = {fig.axis: v, "trials": c.trials}
        if name == "fig-n":
            for q in (2, 4):
                p = _point(c.replace(q=q, syndromes="largest"))
                row[f"error_q{q}"] = p["error"]
                row[f"phase2_decoder_q{q}"] = p["phase2_decoder"]
        else:
            row.update(_point(c))
        row.update(_occupancy_and_bound(c))
        rows.append(row)
    return rows


def cmd_figure(args, cfg: ExperimentConfig) -> int:
    buf = io.StringIO()
    write_csv(figure_rows(args.name, cfg), buf)
    _emit(buf.getvalue(), cfg.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("experiment settings (flags override --config)")
    g.add_argument("--config", help="key = value config file")
    g.add_argument("--seed", type=int)
    g.add_argument("--trials", type=int)
    g.add_argument("--q", type=int, help="alphabet size, 2..10")
    g.add_argument("--l", type=int, help="number of blocks")
    g.add_argument("--nb", type=int, dest="n_b", help="block length")
    g.add_argument("--syndromes", help='"largest", "a,a,..." or "a:c,..." for q > 2')
    g.add_argument("--k", type=int, help="deletions per trace")
    g.add_argument("--mode", choices=MODES)
    g.add_argument("--model", choices=MODELS, help="occupancy model for phase-2 estimates")
    g.add_argument("--rule", choices=RULES, help="phase-2 failure rule for occupancy estimates")
    g.add_argument("--tie-break", dest="tie_break", choices=TIE_BREAKS,
                   help="phase-1 rule among candidates with equal insertions (default deletions)")
    g.add_argument("--workers", type=int)
    g.add_argument("--backend", choices=("python", "cython"))
    g.add_argument("--out", help="output file (default stdout)")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="vttrace", description="Block VT codes over a multi-trace deletion channel.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_, t_help="number of traces", t_type=int):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.add_argument("--t", type=t_type, help=t_help)
        return sp

    sp = add("encode", "encode messages into codewords")
    sp.add_argument("input", nargs="?", help="message lines (default stdin)")
    sp.add_argument("--random", type=int, metavar="N", help="encode N random messages instead")
    sp.set_defaults(func=cmd_encode)

    sp = add("corrupt", "pass codewords through the deletion channel")
    sp.add_argument("input", nargs="?", help="codeword lines (default stdin)")
    sp.set_defaults(func=cmd_corrupt)

    sp = add("decode", "decode trace groups")
    sp.add_argument("input", nargs="?", help="trace file (default stdin)")
    sp.add_argument("--trace", action="append", help="one trace; repeat for single-shot decoding")
    sp.add_argument("--truth", help="transmitted codewords, one per group, to print verdicts")
    sp.add_argument("--message", action="store_true", help="also print the decoded message")
    sp.set_defaults(func=cmd_decode)

    sp = add("bound", "phase-2 error bound as CSV", t_help='t values, e.g. "1-9" or "1,3,5"', t_type=str)
    sp.set_defaults(func=cmd_bound)

    sp = add("simulate", "end-to-end error rate at one setting")
    sp.set_defaults(func=cmd_simulate)

    sp = add("phase2", "occupancy-only phase-2 error estimate")
    sp.set_defaults(func=cmd_phase2)

    sp = add("figure", "figure sweep as CSV")
    sp.add_argument("name", choices=sorted(FIGURES))
    sp.set_defaults(func=cmd_figure)
    return parser


_OVERRIDES = ("seed", "trials", "q", "l", "n_b", "syndromes", "k", "mode", "model", "rule", "tie_break", "workers", "backend", "out")


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    overrides = {name: getattr(args, name) for name in _OVERRIDES}
    if args.command != "bound":
        overrides["t"] = args.t
    base = FIGURES[args.name].base if args.command == "figure" else None
    try:
        cfg = load_config(args.config, overrides, base)
        return args.func(args, cfg)
    except (UsageError, ConfigError) as exc:
        print(f"vttrace {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
