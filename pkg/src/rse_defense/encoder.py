"""Random substitution encoding.

Each call samples a rate ``sr`` uniformly in ``[r_min, r_max]``, picks
``round(sr * m)`` of the ``m`` substitutable tokens uniformly without
replacement, and swaps each for a uniformly drawn synonym. The same encoder
is used on training batches and on test inputs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .corpus import PAD_TOKEN, UNK_TOKEN, LabeledExample
from .lexicon import SynonymTable


@dataclass(frozen=True)
class RseConfig:
    r_min: float = 0.1
    r_max: float = 0.25
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.r_min <= self.r_max <= 1.0:
            raise ValueError(f"need 0 <= r_min <= r_max <= 1, got {self.r_min}, {self.r_max}")


@dataclass(frozen=True)
class SubstitutionPlan:
    rate: float
    positions: tuple[int, ...] = ()
    replacements: dict[int, str] = field(default_factory=dict)


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def substitutable_positions(tokens, table: SynonymTable) -> list[int]:
    return [i for i, t in enumerate(tokens)
            if t not in (PAD_TOKEN, UNK_TOKEN) and table.synonyms_of(t)]


def sample_rate(config: RseConfig, rng: np.random.Generator) -> float:
    if config.r_min == config.r_max:
        return float(config.r_min)
    return float(rng.uniform(config.r_min, config.r_max))


def plan_substitution(tokens, table: SynonymTable, config: RseConfig,
                      rng: np.random.Generator, rate: float | None = None) -> SubstitutionPlan:
    """Sample which positions to replace and by what.

    ``rate`` overrides the sampled rate; the rng is then not consumed for it.
    """
    if not tokens:
        raise ValueError("cannot plan a substitution for an empty token list")
    sr = sample_rate(config, rng) if rate is None else float(rate)
    candidates = substitutable_positions(tokens, table)
    k = min(round_half_up(sr * len(candidates)), len(candidates))
    if k == 0:
        return SubstitutionPlan(sr)
    chosen = sorted(int(candidates[j]) for j in rng.choice(len(candidates), size=k, replace=False))
    replacements = {}
    for pos in chosen:
        syns = table.synonyms_of(tokens[pos])
        replacements[pos] = syns[int(rng.integers(len(syns)))]
    return SubstitutionPlan(sr, tuple(chosen), replacements)


def apply_plan(tokens, plan: SubstitutionPlan) -> list[str]:
    out = list(tokens)
    for pos in plan.positions:
        if not 0 <= pos < len(out):
            raise IndexError(f"plan position {pos} outside token list of length {len(out)}")
        out[pos] = plan.replacements[pos]
    return out


def rse_encode(example: LabeledExample, table: SynonymTable, config: RseConfig,
               rng: np.random.Generator) -> LabeledExample:
    plan = plan_substitution(example.tokens, table, config, rng)
    if not plan.positions:
        return example
    return LabeledExample(tuple(apply_plan(example.tokens, plan)), example.label)


def derived_rng(*keys: int) -> np.random.Generator:
    """Independent stream for a tuple of integer keys, e.g. (seed, epoch, index)."""
    return np.random.default_rng(np.random.SeedSequence([int(k) & 0xFFFFFFFF for k in keys]))


class RseHook:
    """Training-time hook: a fresh neighbour per (epoch, example index)."""

    def __init__(self, table: SynonymTable, config: RseConfig):
        self.table = table
        self.config = config

    def __call__(self, example: LabeledExample, epoch: int, index: int) -> LabeledExample:
        return rse_encode(example, self.table, self.config,
                          derived_rng(self.config.seed, epoch, index))
