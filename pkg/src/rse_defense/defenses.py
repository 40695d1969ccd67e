"""Training regimes NT, AT, SEM and RSE, each paired with its test-time input encoder."""
from __future__ import annotations

import logging
import math
from fractions import Fraction
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .attacks import pwws_attack
from .corpus import LabeledExample, Vocabulary, build_vocab
from .encoder import RseConfig, RseHook, derived_rng, plan_substitution, apply_plan
from .lexicon import SynonymTable
from .models import (TextClassifier, TrainConfig, build_classifier, load_checkpoint,
                     load_word_vectors, save_checkpoint, train)

log = logging.getLogger(__name__)

DEFENSES = ("nt", "at", "sem", "rse")


class SemEncoding:
    """Collapses every connected synonym component onto one representative."""

    def __init__(self, mapping: dict[str, str]):
        self.mapping = dict(mapping)

    def __call__(self, word: str) -> str:
        return self.mapping.get(word, word)

    def apply(self, tokens: Sequence[str]) -> list[str]:
        m = self.mapping
        return [m.get(t, t) for t in tokens]

    def __eq__(self, other):
        return isinstance(other, SemEncoding) and self.mapping == other.mapping


def build_sem_encoding(table: SynonymTable) -> SemEncoding:
    """Map each word to the lexicographically smallest member of its
    connected component in the (symmetric) synonym graph."""
    parent: dict[str, str] = {}

    def find(w):
        root = w
        while parent.setdefault(root, root) != root:
            root = parent[root]
        while parent[w] != root:
            parent[w], w = root, parent[w]
        return root

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            parent[rb] = ra

    for w, syns in table.entries.items():
        find(w)
        for s in syns:
            union(w, s)
    # the union rule keeps the smaller root, so roots are component minima
    return SemEncoding({w: find(w) for w in parent})


@dataclass
class DefenseSpec:
    kind: str
    rse: RseConfig | None = None
    table: SynonymTable | None = None
    sem: SemEncoding | None = None
    attack_fraction: float | None = None
    vote_k: int = 1
    report: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in DEFENSES:
            raise ValueError(f"unknown defense {self.kind!r}; expected one of {DEFENSES}")
        if self.kind == "rse" and (self.rse is None or self.table is None):
            raise ValueError("rse defense needs an RseConfig and a synonym table")
        if self.kind == "sem" and self.sem is None:
            raise ValueError("sem defense needs an encoding")
        if self.vote_k < 1:
            raise ValueError("vote_k must be >= 1")

    def train_hook(self):
        if self.kind == "rse":
            return RseHook(self.table, self.rse)
        if self.kind == "sem":
            sem = self.sem
            return lambda ex, epoch, index: LabeledExample(tuple(sem.apply(ex.tokens)), ex.label)
        return None

    def transform(self, tokens: Sequence[str], rng: np.random.Generator) -> list[str]:
        """Test-time input encoder; identity for NT and AT."""
        if self.kind == "rse":
            plan = plan_substitution(tokens, self.table, self.rse, rng)
            return apply_plan(tokens, plan)
        if self.kind == "sem":
            return self.sem.apply(tokens)
        return list(tokens)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "vote_k": self.vote_k, "report": self.report}
        if self.rse is not None:
            d["rse"] = {"r_min": self.rse.r_min, "r_max": self.rse.r_max, "seed": self.rse.seed}
        if self.table is not None:
            d["lexicon"] = {w: list(s) for w, s in self.table.entries.items()}
            d["lexicon_sha256"] = self.table.digest()
        if self.sem is not None:
            d["sem"] = dict(self.sem.mapping)
        if self.attack_fraction is not None:
            d["attack_fraction"] = self.attack_fraction
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DefenseSpec":
        table = SynonymTable(d["lexicon"], "checkpoint") if "lexicon" in d else None
        if table is not None and table.digest() != d.get("lexicon_sha256"):
            raise ValueError("embedded lexicon hash mismatch")
        return cls(kind=d["kind"],
                   rse=RseConfig(**d["rse"]) if "rse" in d else None,
                   table=table,
                   sem=SemEncoding(d["sem"]) if "sem" in d else None,
                   attack_fraction=d.get("attack_fraction"),
                   vote_k=d.get("vote_k", 1),
                   report=d.get("report", {}))


class DefendedModel:
    """A classifier together with its mandatory test-time encoder.

    This is what attacks and the evaluation harness query. Randomness of the
    encoder comes from an internal stream; call :meth:`reseed` to make a
    query sequence reproducible independently of earlier queries.
    """

    def __init__(self, clf: TextClassifier, spec: DefenseSpec, seed: int = 0):
        self.clf = clf
        self.spec = spec
        self.rng = np.random.default_rng(seed)

    @property
    def kind(self):
        return self.spec.kind

    @property
    def num_classes(self):
        return self.clf.num_classes

    def reseed(self, *keys: int) -> None:
        self.rng = derived_rng(*keys)

    def predict_proba_tokens(self, token_lists: Sequence[Sequence[str]]) -> np.ndarray:
        k = self.spec.vote_k if self.spec.kind == "rse" else 1
        if k == 1:
            encoded = [self.spec.transform(t, self.rng) for t in token_lists]
            return self.clf.predict_proba_tokens(encoded)
        encoded = [self.spec.transform(t, self.rng) for t in token_lists for _ in range(k)]
        probs = self.clf.predict_proba_tokens(encoded)
        votes = np.zeros_like(probs)
        votes[np.arange(len(probs)), probs.argmax(axis=1)] = 1.0
        return votes.reshape(len(token_lists), k, -1).mean(axis=1)

    def save(self, path) -> None:
        save_checkpoint(self.clf, path, defense=self.spec.to_dict())

    @classmethod
    def load(cls, path, seed: int = 0) -> "DefendedModel":
        clf, defense = load_checkpoint(path)
        if defense is None:
            raise ValueError(f"{path}: checkpoint carries no defense spec")
        return cls(clf, DefenseSpec.from_dict(defense), seed)


def _fit(data, arch, config, spec: DefenseSpec, vocab, num_classes, padding_length,
         max_vocab, static_vectors=None) -> DefendedModel:
    hook = spec.train_hook()
    if vocab is None:
        # SEM models only ever see mapped tokens, so the vocabulary is built on them
        source = [hook(ex, 0, i) for i, ex in enumerate(data)] if spec.kind == "sem" else data
        vocab = build_vocab(source, max_vocab)
    if num_classes is None:
        num_classes = max(ex.label for ex in data) + 1
    if isinstance(static_vectors, (str, Path)):
        static_vectors = load_word_vectors(static_vectors, vocab, config.embed_dim, config.seed)
    clf = build_classifier(arch, vocab, num_classes, padding_length, config, static_vectors)
    train(clf, data, config, encoder_hook=hook)
    return DefendedModel(clf, spec)


def train_nt(data: Sequence[LabeledExample], arch: str, config: TrainConfig, *,
             padding_length: int, vocab: Vocabulary | None = None, num_classes: int | None = None,
             max_vocab: int | None = 80_000, static_vectors=None) -> DefendedModel:
    return _fit(data, arch, config, DefenseSpec("nt"), vocab, num_classes, padding_length,
                max_vocab, static_vectors)


def train_sem(data, arch, config, encoding: SemEncoding, *, padding_length: int,
              vocab=None, num_classes=None, max_vocab=80_000, static_vectors=None) -> DefendedModel:
    return _fit(data, arch, config, DefenseSpec("sem", sem=encoding), vocab, num_classes,
                padding_length, max_vocab, static_vectors)


def train_rse(data, arch, config, rse: RseConfig, table: SynonymTable, *, padding_length: int,
              vocab=None, num_classes=None, max_vocab=80_000, vote_k: int = 1,
              static_vectors=None) -> DefendedModel:
    spec = DefenseSpec("rse", rse=rse, table=table, vote_k=vote_k)
    return _fit(data, arch, config, spec, vocab, num_classes, padding_length, max_vocab,
                static_vectors)


def craft_adversarial(nt: DefendedModel, data: Sequence[LabeledExample], table: SynonymTable,
                      attack_fraction: float, max_rate: float, seed: int = 0):
    """PWWS examples against ``nt`` until ``ceil(fraction * N)`` succeed.

    Returns ``(adversarial_examples, report)``. Each kept example is
    re-predicted by ``nt`` and must be misclassified.
    """
    if not 0 < attack_fraction <= 1:
        raise ValueError("attack_fraction must be in (0, 1]")
    # exact decimal arithmetic: 0.1 * 30 must give 3, not 4
    target = math.ceil(Fraction(str(attack_fraction)) * len(data))
    order = np.random.default_rng(seed).permutation(len(data))
    crafted, attempted = [], 0
    for i in order:
        if len(crafted) >= target:
            break
        ex = data[i]
        nt.reseed(seed, int(i))
        probs = nt.predict_proba_tokens([ex.tokens])[0]
        if int(np.argmax(probs)) != ex.label:
            continue
        attempted += 1
        res = pwws_attack(nt, ex.tokens, ex.label, table, max_rate, orig_probs=probs)
        if not res.success:
            continue
        nt.reseed(seed, int(i), 1)
        if int(np.argmax(nt.predict_proba_tokens([res.adversarial_tokens])[0])) == ex.label:
            continue
        crafted.append(LabeledExample(tuple(res.adversarial_tokens), ex.label))
    report = {"target": target, "crafted": len(crafted), "attempted": attempted,
              "shortfall": target - len(crafted)}
    if report["shortfall"]:
        log.warning("adversarial training: crafted %d of %d examples", len(crafted), target)
    return crafted, report


def train_at(data, arch, config, table: SynonymTable, attack_fraction: float = 0.1, *,
             padding_length: int, nt_model: DefendedModel | None = None, max_rate: float = 0.25,
             vocab=None, num_classes=None, max_vocab=80_000, seed: int = 0,
             static_vectors=None) -> DefendedModel:
    """Retrain on the original data mixed with PWWS examples crafted against an NT model."""
    if nt_model is None:
        nt_model = train_nt(data, arch, config, padding_length=padding_length, vocab=vocab,
                            num_classes=num_classes, max_vocab=max_vocab,
                            static_vectors=static_vectors)
    adversarial, report = craft_adversarial(nt_model, data, table, attack_fraction, max_rate, seed)
    augmented = list(data) + adversarial
    spec = DefenseSpec("at", attack_fraction=attack_fraction, report=report)
    if num_classes is None:
        num_classes = nt_model.num_classes
    model = _fit(augmented, arch, config, spec, vocab, num_classes, padding_length, max_vocab,
                 static_vectors)
    model.augmented = augmented
    return model


def train_defense(kind: str, data, arch: str, config: TrainConfig, *, table: SynonymTable,
                  padding_length: int, rse: RseConfig | None = None, attack_fraction: float = 0.1,
                  max_rate: float = 0.25, vote_k: int = 1, max_vocab=80_000,
                  num_classes=None, static_vectors=None) -> DefendedModel:
    kw = dict(padding_length=padding_length, max_vocab=max_vocab, num_classes=num_classes,
              static_vectors=static_vectors)
    if kind == "nt":
        return train_nt(data, arch, config, **kw)
    if kind == "at":
        return train_at(data, arch, config, table, attack_fraction, max_rate=max_rate,
                        seed=config.seed, **kw)
    if kind == "sem":
        return train_sem(data, arch, config, build_sem_encoding(table), **kw)
    if kind == "rse":
        return train_rse(data, arch, config, rse or RseConfig(seed=config.seed), table,
                         vote_k=vote_k, **kw)
    raise ValueError(f"unknown defense {kind!r}; expected one of {DEFENSES}")
