"""Experiment configuration and the ``key = value`` config file format."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .block_code import BlockCode
from .channel import MODES
from .decoder import TIE_BREAKS

MODELS = ("uniform-positions", "compositions", "multinomial")
RULES = ("runs", "single-block")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    q: int = 2
    l: int = 7
    n_b: int = 20
    syndromes: str = "largest"      # "largest", "a,a,..." or "a:c,a:c,..."
    k: int = 4
    t: int = 5
    mode: str = "exactly-k"
    model: str = "uniform-positions"
    rule: str = "runs"
    tie_break: str = "deletions"
    trials: int = 10000
    seed: int = 0
    workers: int = 1
    backend: str | None = None
    out: str | None = None

    def __post_init__(self):
        if self.q < 2 or self.q > 10:
            raise ConfigError(f"q must be in 2..10, got {self.q}")
        if self.l < 1 or self.n_b < 1:
            raise ConfigError("l and nb must be positive")
        if self.k < 0 or self.k > self.l * self.n_b:
            raise ConfigError(f"k={self.k} is outside 0..{self.l * self.n_b}")
        if self.t < 1:
            raise ConfigError("t must be at least 1")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {', '.join(MODES)}")
        if self.model not in MODELS:
            raise ConfigError(f"model must be one of {', '.join(MODELS)}")
        if self.rule not in RULES:
            raise ConfigError(f"rule must be one of {', '.join(RULES)}")
        if self.tie_break not in TIE_BREAKS:
            raise ConfigError(f"tie_break must be one of {', '.join(TIE_BREAKS)}")
        if self.backend not in (None, "python", "cython"):
            raise ConfigError("backend must be python or cython")

    def code(self) -> BlockCode:
        """The block code described by ``q``, ``l``, ``n_b`` and ``syndromes``."""
        spec = self.syndromes.strip()
        if spec == "largest":
            return BlockCode.uniform(self.l, self.n_b, self.q)
        try:
            parts = [p.strip() for p in spec.split(",")]
            if self.q == 2:
                syn = [int(p) for p in parts]
            else:
                syn = [tuple(int(v) for v in p.split(":")) for p in parts]
                if any(len(s) != 2 for s in syn):
                    raise ValueError
        except ValueError:
            raise ConfigError(f"cannot parse syndromes {spec!r}") from None
        if len(syn) == 1:
            syn = syn * self.l
        if len(syn) != self.l:
            raise ConfigError(f"expected {self.l} syndromes, got {len(syn)}")
        try:
            return BlockCode.from_syndromes(self.n_b, syn, self.q)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


# config-file key -> (field name, converter)
_KEYS = {
    "q": ("q", int), "l": ("l", int), "nb": ("n_b", int), "n_b": ("n_b", int),
    "syndromes": ("syndromes", str), "k": ("k", int), "t": ("t", int),
    "mode": ("mode", str), "model": ("model", str), "rule": ("rule", str),
    "tie_break": ("tie_break", str),
    "trials": ("trials", int), "seed": ("seed", int), "workers": ("workers", int),
    "backend": ("backend", str), "out": ("out", str),
}


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Field values from ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip().lower(), value.strip()
        if not sep or not key:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        if key not in _KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        name, conv = _KEYS[key]
        try:
            values[name] = conv(value)
        except ValueError:
            raise ConfigError(f"{source}:{lineno}: bad value {value!r} for {key}") from None
    return values


def load_config(path: str | Path | None, overrides: dict | None = None, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """File values on top of ``base``, then ``overrides`` (ignoring ``None``) on top."""
    values = dataclasses.asdict(base or ExperimentConfig())
    if path is not None:
        p = Path(path)
        try:
            text = p.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {p}: {exc.strerror}") from None
        values.update(parse_config_text(text, str(p)))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return ExperimentConfig(**values)
