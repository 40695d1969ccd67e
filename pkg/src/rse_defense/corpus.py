"""Datasets, tokenization, vocabulary and fixed-length id encoding."""
from __future__ import annotations

import csv
import hashlib
import logging
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

log = logging.getLogger(__name__)

PAD, UNK = 0, 1
PAD_TOKEN, UNK_TOKEN = "<pad>", "<unk>"

# padding lengths per dataset as used in the original experiments
PADDING_LENGTH = {"imdb": 300, "agnews": 50, "yahoo": 100}
VOCAB_SIZE = 80_000


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class LabeledExample:
    tokens: tuple[str, ...]
    label: int

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if not self.tokens:
            raise DatasetError("example has no tokens")
        if self.label < 0:
            raise DatasetError(f"negative label {self.label}")


@dataclass(frozen=True)
class EncodedExample:
    ids: np.ndarray
    label: int
    true_length: int


_TOKEN_RE = re.compile(r"<pad>|<unk>|[\w'-]+|[^\w\s]")


def tokenize(text: str) -> list[str]:
    """Lowercase; words and single punctuation marks become separate tokens."""
    return _TOKEN_RE.findall(text.lower())


def load_dataset(path, schema: str = "label_text_csv", header: bool = False,
                 label_map: Mapping[str, int] | None = None) -> list[LabeledExample]:
    """Read ``label,text`` rows.

    Labels are 0-based integers unless ``label_map`` is given, in which case
    every label string must be a key of it. Rows with empty text are skipped.
    """
    if schema != "label_text_csv":
        raise DatasetError(f"unsupported schema {schema!r}")
    out, skipped = [], 0
    with Path(path).open(encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        if header:
            next(reader, None)
        for lineno, row in enumerate(reader, start=2 if header else 1):
            if not row:
                continue
            if len(row) < 2:
                raise DatasetError(f"{path}:{lineno}: expected label,text")
            raw_label, text = row[0].strip(), ",".join(row[1:])
            if label_map is not None:
                if raw_label not in label_map:
                    raise DatasetError(f"{path}:{lineno}: unknown label {raw_label!r}")
                label = label_map[raw_label]
            else:
                try:
                    label = int(raw_label)
                except ValueError:
                    raise DatasetError(f"{path}:{lineno}: unknown label {raw_label!r}") from None
            tokens = tokenize(text)
            if not tokens:
                skipped += 1
                continue
            out.append(LabeledExample(tuple(tokens), label))
    if skipped:
        log.warning("%s: skipped %d rows with empty text", path, skipped)
    counts = Counter(ex.label for ex in out)
    log.info("%s: %d examples, class counts %s", path, len(out), dict(sorted(counts.items())))
    return out


def class_counts(examples: Iterable[LabeledExample]) -> dict[int, int]:
    return dict(sorted(Counter(ex.label for ex in examples).items()))


def balanced_sample(examples: Sequence[LabeledExample], n: int,
                    seed: int) -> list[LabeledExample]:
    """Draw ``n`` examples with per-class counts equal up to one.

    Leftover slots (when ``n`` does not divide evenly) go to the lowest labels.
    """
    rng = np.random.default_rng(seed)
    by_label: dict[int, list[int]] = {}
    for i, ex in enumerate(examples):
        by_label.setdefault(ex.label, []).append(i)
    labels = sorted(by_label)
    base, extra = divmod(n, len(labels))
    picked = []
    for k, y in enumerate(labels):
        want = base + (1 if k < extra else 0)
        pool = by_label[y]
        if want > len(pool):
            raise DatasetError(f"class {y} has {len(pool)} examples, need {want}")
        picked.extend(pool[j] for j in rng.choice(len(pool), size=want, replace=False))
    picked = [picked[j] for j in rng.permutation(len(picked))]
    return [examples[i] for i in picked]


class Vocabulary:
    def __init__(self, words: Sequence[str], max_size: int | None = None):
        """``words`` excludes the reserved PAD/UNK entries."""
        self.itos = [PAD_TOKEN, UNK_TOKEN] + [w for w in words if w not in (PAD_TOKEN, UNK_TOKEN)]
        if len(set(self.itos)) != len(self.itos):
            raise ValueError("duplicate vocabulary words")
        self.stoi = {w: i for i, w in enumerate(self.itos)}
        self.max_size = max_size if max_size is not None else len(self.itos)
        if len(self.itos) > self.max_size:
            raise ValueError("vocabulary larger than max_size")

    def __len__(self):
        return len(self.itos)

    def __contains__(self, word):
        return word in self.stoi

    def id_of(self, word: str) -> int:
        return self.stoi.get(word, UNK)

    def digest(self) -> str:
        return hashlib.sha256("\n".join(self.itos).encode()).hexdigest()

    def save(self, path) -> None:
        Path(path).write_text("\n".join(self.itos) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        words = Path(path).read_text(encoding="utf-8").split("\n")
        words = [w for w in words if w]
        if words[:2] != [PAD_TOKEN, UNK_TOKEN]:
            raise ValueError(f"{path}: vocabulary must start with PAD and UNK")
        return cls(words[2:])


def build_vocab(examples: Iterable[LabeledExample], max_size: int | None = VOCAB_SIZE) -> Vocabulary:
    """Keep the ``max_size - 2`` most frequent words; ties go to the
    lexicographically smaller word. ``max_size=None`` keeps everything."""
    if max_size is not None and max_size < 2:
        raise ValueError("max_size must be >= 2")
    counts = Counter()
    for ex in examples:
        counts.update(t for t in ex.tokens if t not in (PAD_TOKEN, UNK_TOKEN))
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    if max_size is not None:
        ranked = ranked[: max_size - 2]
    return Vocabulary([w for w, _ in ranked], max_size=max_size)


def encode_tokens(tokens: Sequence[str], vocab: Vocabulary, padding_length: int) -> tuple[np.ndarray, int]:
    if padding_length < 1:
        raise ValueError("padding_length must be >= 1")
    n = min(len(tokens), padding_length)
    ids = np.zeros(padding_length, dtype=np.int64)
    stoi = vocab.stoi
    for i in range(n):
        ids[i] = stoi.get(tokens[i], UNK)
    return ids, n


def encode(example: LabeledExample, vocab: Vocabulary, padding_length: int) -> EncodedExample:
    ids, n = encode_tokens(example.tokens, vocab, padding_length)
    return EncodedExample(ids, example.label, n)


def decode(encoded: EncodedExample, vocab: Vocabulary) -> list[str]:
    return [vocab.itos[i] for i in encoded.ids[: encoded.true_length]]
