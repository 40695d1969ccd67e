"""Accuracy, accuracy shift, attack-success rate and substitution rate."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Iterable

from .attacks import AttackResult

_TOL = 1e-9


class MetricError(ValueError):
    pass


def accuracy(n_correct: int, n_total: int) -> float:
    if n_total <= 0:
        raise MetricError("accuracy over zero examples")
    return n_correct / n_total


def attack_success_rate(shift: float, no_attack: float) -> float:
    """Accuracy shift divided by clean accuracy."""
    if no_attack <= 0:
        raise MetricError("attack-success rate is undefined when clean accuracy is 0")
    if not (-_TOL <= shift <= no_attack + _TOL and no_attack <= 1 + _TOL):
        raise MetricError(f"need 0 <= shift <= no_attack <= 1, got {shift}, {no_attack}")
    return shift / no_attack


def substitution_rate(result: AttackResult) -> float:
    if not result.success:
        raise MetricError("substitution rate is only defined for successful attacks")
    return result.substituted_count / len(result.original_tokens)


def mean_substitution_rate(results: Iterable[AttackResult]) -> float | None:
    rates = [substitution_rate(r) for r in results if r.success]
    return sum(rates) / len(rates) if rates else None


@dataclass
class MetricsRecord:
    no_attack_accuracy: float
    after_attack_accuracy: float
    accuracy_shift: float
    attack_success_rate: float | None
    mean_substitution_rate: float | None
    n_examples: int
    n_attempted: int
    n_succeeded: int

    @classmethod
    def from_counts(cls, n_examples: int, n_correct: int, results: list[AttackResult]) -> "MetricsRecord":
        """``results`` holds one attack outcome per correctly classified example
        (empty when no attack was run)."""
        n_succ = sum(r.success for r in results)
        no_attack = accuracy(n_correct, n_examples)
        after = accuracy(n_correct - n_succ, n_examples)
        shift = no_attack - after
        asr = attack_success_rate(shift, no_attack) if no_attack > 0 else None
        return cls(no_attack, after, shift, asr, mean_substitution_rate(results),
                   n_examples, len(results), n_succ)

    def check(self) -> None:
        """Raise MetricError if the record's identities do not hold."""
        fracs = [self.no_attack_accuracy, self.after_attack_accuracy, self.accuracy_shift,
                 self.attack_success_rate, self.mean_substitution_rate]
        for v in fracs:
            if v is not None and not -_TOL <= v <= 1 + _TOL:
                raise MetricError(f"fraction out of range: {v}")
        if abs(self.accuracy_shift - (self.no_attack_accuracy - self.after_attack_accuracy)) > _TOL:
            raise MetricError("accuracy_shift != no_attack - after_attack")
        if self.no_attack_accuracy > 0:
            if self.attack_success_rate is None or \
                    abs(self.attack_success_rate - self.accuracy_shift / self.no_attack_accuracy) > _TOL:
                raise MetricError("attack_success_rate != shift / no_attack")
        if not 0 <= self.n_succeeded <= self.n_attempted <= self.n_examples:
            raise MetricError("inconsistent counts")

    def to_dict(self) -> dict:
        return asdict(self)
