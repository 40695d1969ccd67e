"""Synonym candidate sets keyed by lowercased word.

The on-disk format is a UTF-8 TSV, one headword per line::

    good<TAB>great,fine,decent

Lines starting with ``#`` and blank lines are ignored.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping


class LexiconError(ValueError):
    """Raised for malformed lexicon files."""


@dataclass(frozen=True)
class SynonymTable:
    entries: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    source_name: str = ""

    def __post_init__(self):
        clean = {}
        for word, syns in self.entries.items():
            key = word.lower()
            merged = list(clean.get(key, ()))
            for s in syns:
                s = s.lower()
                if s != key and s not in merged:
                    merged.append(s)
            clean[key] = tuple(merged)
        object.__setattr__(self, "entries", clean)

    def __contains__(self, word: str) -> bool:
        return bool(self.entries.get(word.lower()))

    def __len__(self) -> int:
        return len(self.entries)

    def synonyms_of(self, word: str) -> list[str]:
        return list(self.entries.get(word.lower(), ()))

    def words(self) -> set[str]:
        """Every word mentioned anywhere in the table."""
        out = set(self.entries)
        for syns in self.entries.values():
            out.update(syns)
        return out

    def restrict(self, allowed: Iterable[str]) -> "SynonymTable":
        allowed = set(allowed)
        entries = {}
        for w, syns in self.entries.items():
            if w not in allowed:
                continue
            kept = [s for s in syns if s in allowed]
            if kept:
                entries[w] = kept
        return SynonymTable(entries, self.source_name)

    def digest(self) -> str:
        h = hashlib.sha256()
        for w in sorted(self.entries):
            h.update(f"{w}\t{','.join(self.entries[w])}\n".encode())
        return h.hexdigest()


def synonyms_of(table: SynonymTable, word: str) -> list[str]:
    return table.synonyms_of(word)


def _check_word(word: str, lineno: int, path) -> str:
    if not word:
        raise LexiconError(f"{path}:{lineno}: empty word")
    if any(c.isspace() for c in word) or "_" in word:
        raise LexiconError(f"{path}:{lineno}: multi-word entry {word!r} not supported")
    return word.lower()


def parse_lexicon(lines: Iterable[str], source_name: str = "<memory>") -> SynonymTable:
    entries: dict[str, list[str]] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise LexiconError(f"{source_name}:{lineno}: expected 'word<TAB>syn1,syn2,...'")
        head = _check_word(parts[0].strip(), lineno, source_name)
        syns = [_check_word(s.strip(), lineno, source_name)
                for s in parts[1].split(",") if s.strip()]
        bucket = entries.setdefault(head, [])
        bucket.extend(syns)
    if not entries:
        raise LexiconError(f"{source_name}: lexicon is empty")
    return SynonymTable(entries, source_name)


def load_lexicon(path, format: str = "tsv") -> SynonymTable:
    if format != "tsv":
        raise LexiconError(f"unsupported lexicon format: {format}")
    path = Path(path)
    with path.open(encoding="utf-8") as f:
        return parse_lexicon(f, source_name=path.name)


def save_lexicon(table: SynonymTable, path) -> None:
    with Path(path).open("w", encoding="utf-8") as f:
        if table.source_name:
            f.write(f"# source: {table.source_name}\n")
        for word, syns in table.entries.items():
            if syns:
                f.write(f"{word}\t{','.join(syns)}\n")


def symmetric_closure(table: SynonymTable) -> SynonymTable:
    """Smallest superset where s in entries[w] implies w in entries[s].

    Existing list order is preserved; reverse links are appended in the
    order they are discovered.
    """
    entries = {w: list(syns) for w, syns in table.entries.items()}
    for w, syns in table.entries.items():
        for s in syns:
            back = entries.setdefault(s, [])
            if w not in back:
                back.append(w)
    return SynonymTable(entries, table.source_name)


def bundled_lexicon(closed: bool = True) -> SynonymTable:
    """The small news-domain lexicon shipped with the package."""
    ref = resources.files("rse_defense") / "data" / "news_lexicon.tsv"
    with ref.open(encoding="utf-8") as f:
        table = parse_lexicon(f, source_name="news_lexicon.tsv")
    return symmetric_closure(table) if closed else table
