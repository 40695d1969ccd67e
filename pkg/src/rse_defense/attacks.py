"""Black-box synonym-substitution attacks: Random, Textfool-style and PWWS.

A victim is anything with ``predict_proba_tokens(list_of_token_lists)``
returning an ``(n, num_classes)`` array. Attacks see nothing else; every
row evaluated counts as one query.

PWWS is the probability-weighted word saliency search without the
named-entity swap. A word's saliency is the true-class probability drop
when the word is replaced by ``<unk>``; positions are visited in
decreasing order of ``best_synonym_drop * softmax(saliency)``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Mapping, Protocol, Sequence

import numpy as np

from .corpus import PAD_TOKEN, UNK_TOKEN
from .encoder import substitutable_positions
from .lexicon import SynonymTable

ATTACKS = ("random", "textfool", "pwws")
DEFAULT_MAX_RATE = 0.25


class Victim(Protocol):
    def predict_proba_tokens(self, token_lists: Sequence[Sequence[str]]) -> np.ndarray: ...


@dataclass
class AttackResult:
    original_tokens: list[str]
    adversarial_tokens: list[str]
    label: int
    success: bool
    substituted_count: int
    query_count: int
    original_prob: float
    final_prob: float
    attack: str = ""
    # true-class probability after each substitution, in order
    steps: list[float] = field(default_factory=list)

    def changed_positions(self) -> list[int]:
        return [i for i, (a, b) in enumerate(zip(self.original_tokens, self.adversarial_tokens)) if a != b]

    def to_json(self) -> dict:
        d = asdict(self)
        d["original_text"] = " ".join(d.pop("original_tokens"))
        d["adversarial_text"] = " ".join(d.pop("adversarial_tokens"))
        return d


class _Counted:
    def __init__(self, victim: Victim):
        self.victim = victim
        self.queries = 0

    def __call__(self, token_lists) -> np.ndarray:
        self.queries += len(token_lists)
        return np.asarray(self.victim.predict_proba_tokens(token_lists))


def substitution_budget(n_tokens: int, max_rate: float) -> int:
    """Most substitutions allowed; at least one so short texts stay attackable."""
    return max(1, int(math.floor(max_rate * n_tokens + 1e-9)))


def _start(query: _Counted, tokens, label, orig_probs):
    if orig_probs is None:
        orig_probs = query([list(tokens)])[0]
    orig_probs = np.asarray(orig_probs)
    if int(np.argmax(orig_probs)) != label:
        raise ValueError("attack requires an example the victim classifies correctly")
    return float(orig_probs[label])


def _result(name, tokens, cur, label, success, subs, query, p0, p_final, steps):
    return AttackResult(list(tokens), list(cur), label, bool(success), subs, query.queries,
                        p0, float(p_final), name, steps)


def random_attack(victim: Victim, tokens: Sequence[str], label: int, table: SynonymTable,
                  rng: np.random.Generator, max_rate: float = DEFAULT_MAX_RATE,
                  orig_probs=None) -> AttackResult:
    """Visit substitutable words in random order, each time swapping in a
    random synonym, until the prediction flips or the budget is spent."""
    query = _Counted(victim)
    p0 = _start(query, tokens, label, orig_probs)
    cur = list(tokens)
    positions = substitutable_positions(tokens, table)
    budget = substitution_budget(len(tokens), max_rate)
    p_cur, subs, success, steps = p0, 0, False, []
    for j in rng.permutation(len(positions)):
        if subs >= budget:
            break
        pos = positions[j]
        syns = table.synonyms_of(tokens[pos])
        cur[pos] = syns[int(rng.integers(len(syns)))]
        subs += 1
        probs = query([cur])[0]
        p_cur = float(probs[label])
        steps.append(p_cur)
        if int(np.argmax(probs)) != label:
            success = True
            break
    return _result("random", tokens, cur, label, success, subs, query, p0, p_cur, steps)


def _cosine(a, b) -> float:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def rank_candidates(word: str, table: SynonymTable,
                    vectors: Mapping[str, np.ndarray] | None) -> list[tuple[str, float | None]]:
    """Synonyms of ``word`` by decreasing cosine similarity.

    Candidates without a vector keep lexicon order after those that have one;
    with no vectors at all the lexicon order is returned unchanged.
    """
    syns = table.synonyms_of(word)
    if not vectors or word not in vectors:
        return [(s, None) for s in syns]
    scored = [(s, _cosine(vectors[word], vectors[s]) if s in vectors else None) for s in syns]
    return sorted(scored, key=lambda t: (t[1] is None, -(t[1] or 0.0)))


def textfool_attack(victim: Victim, tokens: Sequence[str], label: int, table: SynonymTable,
                    vectors: Mapping[str, np.ndarray] | None = None,
                    max_rate: float = DEFAULT_MAX_RATE, orig_probs=None) -> AttackResult:
    """Similarity-ranked greedy replacement.

    Words are visited in decreasing similarity of their closest synonym; for
    each, candidates are tried closest first and the first one that lowers
    the true-class probability is kept.
    """
    query = _Counted(victim)
    p0 = _start(query, tokens, label, orig_probs)
    ranked = {pos: rank_candidates(tokens[pos], table, vectors)
              for pos in substitutable_positions(tokens, table)}

    def best_sim(pos):
        sim = ranked[pos][0][1]
        return -math.inf if sim is None else sim

    order = sorted(ranked, key=lambda pos: (-best_sim(pos), pos))
    budget = substitution_budget(len(tokens), max_rate)
    cur = list(tokens)
    p_cur, subs, success, steps = p0, 0, False, []
    for pos in order:
        if subs >= budget or success:
            break
        for cand, _ in ranked[pos]:
            trial = list(cur)
            trial[pos] = cand
            probs = query([trial])[0]
            if probs[label] < p_cur:
                cur, p_cur = trial, float(probs[label])
                subs += 1
                steps.append(p_cur)
                success = int(np.argmax(probs)) != label
                break
    return _result("textfool", tokens, cur, label, success, subs, query, p0, p_cur, steps)


def word_saliency(victim: Victim, tokens: Sequence[str], label: int, position: int,
                  orig_prob: float | None = None) -> float:
    """P(label | x) - P(label | x with ``position`` replaced by <unk>)."""
    if not 0 <= position < len(tokens) or tokens[position] == PAD_TOKEN:
        raise ValueError(f"position {position} is outside the text")
    masked = list(tokens)
    masked[position] = UNK_TOKEN
    if orig_prob is None:
        p = victim.predict_proba_tokens([list(tokens), masked])
        return float(p[0][label] - p[1][label])
    return float(orig_prob - victim.predict_proba_tokens([masked])[0][label])


def _softmax(x: np.ndarray) -> np.ndarray:
    if x.size == 0:
        return x
    e = np.exp(x - x.max())
    return e / e.sum()


def pwws_scores(victim: Victim, tokens: Sequence[str], label: int, table: SynonymTable,
                p0: float, query=None):
    """Per substitutable position: (position, best synonym, best drop, saliency, score)."""
    query = query or _Counted(victim)
    positions = substitutable_positions(tokens, table)
    if not positions:
        return []
    masked = []
    for pos in positions:
        m = list(tokens)
        m[pos] = UNK_TOKEN
        masked.append(m)
    saliency = p0 - query(masked)[:, label]
    best = []
    for pos in positions:
        syns = table.synonyms_of(tokens[pos])
        trials = []
        for s in syns:
            t = list(tokens)
            t[pos] = s
            trials.append(t)
        drops = p0 - query(trials)[:, label]
        k = int(np.argmax(drops))
        best.append((syns[k], float(drops[k])))
    weights = _softmax(np.asarray(saliency, dtype=np.float64))
    return [(pos, s, d, float(sal), d * float(w))
            for pos, (s, d), sal, w in zip(positions, best, saliency, weights)]


def pwws_attack(victim: Victim, tokens: Sequence[str], label: int, table: SynonymTable,
                max_rate: float = DEFAULT_MAX_RATE, orig_probs=None) -> AttackResult:
    query = _Counted(victim)
    p0 = _start(query, tokens, label, orig_probs)
    scored = pwws_scores(victim, tokens, label, table, p0, query)
    order = sorted(scored, key=lambda t: (-t[4], t[0]))
    budget = substitution_budget(len(tokens), max_rate)
    cur = list(tokens)
    p_cur, subs, success, steps = p0, 0, False, []
    for pos, syn, *_ in order:
        if subs >= budget:
            break
        cur[pos] = syn
        subs += 1
        probs = query([cur])[0]
        p_cur = float(probs[label])
        steps.append(p_cur)
        if int(np.argmax(probs)) != label:
            success = True
            break
    return _result("pwws", tokens, cur, label, success, subs, query, p0, p_cur, steps)


def run_attack(name: str, victim: Victim, tokens, label, table, rng=None, vectors=None,
               max_rate: float = DEFAULT_MAX_RATE, orig_probs=None) -> AttackResult:
    if name == "random":
        if rng is None:
            raise ValueError("random attack needs an rng")
        return random_attack(victim, tokens, label, table, rng, max_rate, orig_probs)
    if name == "textfool":
        return textfool_attack(victim, tokens, label, table, vectors, max_rate, orig_probs)
    if name == "pwws":
        return pwws_attack(victim, tokens, label, table, max_rate, orig_probs)
    raise ValueError(f"unknown attack {name!r}; expected one of {ATTACKS}")
