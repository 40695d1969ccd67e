"""Seeded generator for a small four-class news corpus in the style of AG's News.

Used when the real dataset is not at hand. Every content word belongs to a
synonym cluster ``[head, common, rare, rarer]``; surface forms are drawn with
skewed frequencies so that, as in real text, most synonyms of a class keyword
are seen only a handful of times during training.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

CLASS_NAMES = ("world", "sports", "business", "scitech")

# head word first; the remaining members are its synonym candidates
TOPIC_CLUSTERS = {
    "world": [
        ["government", "administration", "regime", "cabinet"],
        ["minister", "secretary", "official", "envoy"],
        ["troops", "soldiers", "forces", "militia"],
        ["war", "conflict", "warfare", "hostilities"],
        ["election", "vote", "ballot", "poll"],
        ["president", "leader", "premier", "chief"],
        ["killed", "slain", "murdered", "massacred"],
        ["attack", "assault", "raid", "offensive"],
        ["rebels", "insurgents", "militants", "guerrillas"],
        ["peace", "truce", "ceasefire", "accord"],
        ["embassy", "consulate", "legation", "chancery"],
        ["nuclear", "atomic", "fissile", "radioactive"],
        ["border", "frontier", "boundary", "borderland"],
        ["protest", "demonstration", "rally", "riot"],
        ["parliament", "legislature", "assembly", "congress"],
        ["bomb", "explosive", "blast", "device"],
        ["refugees", "exiles", "evacuees", "displaced"],
        ["diplomats", "ambassadors", "emissaries", "negotiators"],
        ["talks", "negotiations", "discussions", "dialogue"],
        ["police", "authorities", "cops", "constabulary"],
        ["hostage", "captive", "prisoner", "detainee"],
    ],
    "sports": [
        ["team", "squad", "side", "club"],
        ["game", "match", "contest", "fixture"],
        ["win", "victory", "triumph", "success"],
        ["coach", "manager", "trainer", "mentor"],
        ["season", "campaign", "stint", "tenure"],
        ["championship", "title", "tournament", "cup"],
        ["player", "athlete", "competitor", "sportsman"],
        ["scored", "netted", "tallied", "notched"],
        ["defeated", "beat", "thrashed", "trounced"],
        ["league", "division", "conference", "federation"],
        ["goal", "score", "target", "tally"],
        ["striker", "forward", "attacker", "marksman"],
        ["stadium", "arena", "ballpark", "venue"],
        ["fans", "supporters", "spectators", "crowd"],
        ["injury", "wound", "ailment", "strain"],
        ["final", "decider", "showdown", "climax"],
        ["race", "sprint", "dash", "heat"],
        ["medal", "award", "prize", "honor"],
        ["champion", "titleholder", "winner", "victor"],
        ["record", "mark", "best", "milestone"],
    ],
    "business": [
        ["company", "firm", "corporation", "enterprise"],
        ["profit", "earnings", "income", "gain"],
        ["shares", "stocks", "equities", "securities"],
        ["market", "marketplace", "exchange", "mart"],
        ["prices", "costs", "rates", "charges"],
        ["sales", "revenue", "turnover", "receipts"],
        ["investors", "shareholders", "backers", "financiers"],
        ["deal", "agreement", "transaction", "bargain"],
        ["economy", "finances", "prosperity", "commerce"],
        ["bank", "lender", "creditor", "depository"],
        ["quarter", "period", "span", "interval"],
        ["executive", "manager", "director", "administrator"],
        ["merger", "acquisition", "takeover", "buyout"],
        ["growth", "expansion", "increase", "rise"],
        ["fell", "dropped", "declined", "slumped"],
        ["rose", "climbed", "gained", "rallied"],
        ["jobs", "employment", "positions", "vacancies"],
        ["retailer", "merchant", "seller", "vendor"],
        ["debt", "liability", "obligation", "arrears"],
        ["forecast", "outlook", "projection", "estimate"],
    ],
    "scitech": [
        ["software", "program", "application", "code"],
        ["computer", "pc", "machine", "workstation"],
        ["internet", "web", "net", "online"],
        ["users", "customers", "subscribers", "members"],
        ["researchers", "scientists", "investigators", "experts"],
        ["technology", "tech", "engineering", "innovation"],
        ["study", "research", "survey", "experiment"],
        ["space", "cosmos", "universe", "orbit"],
        ["launch", "release", "unveil", "introduce"],
        ["gadget", "device", "appliance", "gizmo"],
        ["network", "system", "grid", "web"],
        ["virus", "worm", "malware", "bug"],
        ["security", "protection", "safety", "defense"],
        ["chip", "semiconductor", "microchip", "wafer"],
        ["phone", "handset", "mobile", "cellphone"],
        ["search", "query", "lookup", "hunt"],
        ["data", "information", "statistics", "figures"],
        ["wireless", "cordless", "radio", "wifi"],
        ["planet", "world", "globe", "earth"],
        ["mission", "expedition", "voyage", "flight"],
        ["version", "edition", "update", "upgrade"],
    ],
}

GENERAL_CLUSTERS = [
    ["said", "stated", "reported", "claimed"],
    ["new", "fresh", "novel", "latest"],
    ["big", "large", "major", "huge"],
    ["plan", "scheme", "proposal", "strategy"],
    ["show", "reveal", "display", "indicate"],
    ["people", "persons", "individuals", "folks"],
    ["help", "aid", "assist", "support"],
    ["make", "create", "produce", "build"],
    ["report", "account", "statement", "bulletin"],
    ["expected", "anticipated", "predicted", "projected"],
    ["early", "initial", "first", "opening"],
    ["top", "leading", "foremost", "highest"],
    ["strong", "powerful", "robust", "solid"],
    ["move", "step", "action", "measure"],
    ["told", "informed", "advised", "notified"],
    ["key", "crucial", "vital", "essential"],
    ["set", "poised", "ready", "prepared"],
    ["high", "elevated", "tall", "lofty"],
    ["start", "begin", "commence", "onset"],
    ["continue", "proceed", "persist", "resume"],
    ["time", "moment", "occasion", "era"],
    ["hit", "struck", "smashed", "battered"],
    ["power", "strength", "force", "energy"],
    ["news", "tidings", "headlines", "coverage"],
    ["hope", "expectation", "wish", "aspiration"],
    ["fight", "battle", "struggle", "clash"],
    ["face", "confront", "encounter", "meet"],
    ["big", "giant", "vast", "massive"],
    ["week", "weekend", "fortnight", "days"],
    ["announced", "declared", "unveiled", "disclosed"],
]

PROPER_NOUNS = {
    "world": ["iraq", "baghdad", "israel", "palestinian", "un", "kabul"],
    "sports": ["olympic", "nfl", "yankees", "nba", "athens", "redskins"],
    "business": ["nasdaq", "fed", "dollar", "opec", "wal-mart", "dow"],
    "scitech": ["microsoft", "google", "linux", "nasa", "ibm", "apple"],
}

FUNCTION_WORDS = [
    "the", "a", "of", "in", "on", "to", "and", "for", "with", "at", "by",
    "from", "after", "as", "its", "their", "is", "was", "has", "will",
    "that", "this", "over", "against", "into", "more", "than",
]

# head, common synonym, rare, rarer
SURFACE_WEIGHTS = np.array([0.72, 0.20, 0.05, 0.03])


def lexicon_lines() -> list[str]:
    """TSV lines (head<TAB>synonyms) for every cluster defined above."""
    lines = []
    for clusters in list(TOPIC_CLUSTERS.values()) + [GENERAL_CLUSTERS]:
        for head, *syns in clusters:
            lines.append(f"{head}\t{','.join(syns)}")
    return lines


def _surface(cluster, rng) -> str:
    return cluster[rng.choice(len(cluster), p=SURFACE_WEIGHTS)]


def generate_document(label: int, rng: np.random.Generator,
                      topic_p: float = 0.32, offtopic_p: float = 0.08,
                      proper_p: float = 0.05) -> list[str]:
    name = CLASS_NAMES[label]
    others = [c for c in CLASS_NAMES if c != name]
    tokens = []
    for _ in range(rng.integers(2, 4)):
        for _ in range(rng.integers(5, 9)):
            u = rng.random()
            if u < proper_p:
                tokens.append(str(rng.choice(PROPER_NOUNS[name])))
            elif u < proper_p + topic_p:
                clusters = TOPIC_CLUSTERS[name]
                tokens.append(_surface(clusters[rng.integers(len(clusters))], rng))
            elif u < proper_p + topic_p + offtopic_p:
                clusters = TOPIC_CLUSTERS[others[rng.integers(len(others))]]
                tokens.append(_surface(clusters[rng.integers(len(clusters))], rng))
            else:
                tokens.append(_surface(GENERAL_CLUSTERS[rng.integers(len(GENERAL_CLUSTERS))], rng))
            if rng.random() < 0.6:
                tokens.append(str(rng.choice(FUNCTION_WORDS)))
        tokens.append(".")
    return tokens


def generate_corpus(per_class: int, seed: int, label_noise: float = 0.03,
                    **doc_kwargs) -> list[tuple[int, str]]:
    """Class-balanced ``(label, text)`` rows in a seeded shuffled order."""
    rng = np.random.default_rng(seed)
    rows = []
    for label in range(len(CLASS_NAMES)):
        for _ in range(per_class):
            text = " ".join(generate_document(label, rng, **doc_kwargs))
            y = label
            if rng.random() < label_noise:
                y = int(rng.integers(len(CLASS_NAMES)))
            rows.append((y, text))
    order = rng.permutation(len(rows))
    return [rows[i] for i in order]


def write_corpus_csv(rows, path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        for label, text in rows:
            w.writerow([label, text])
