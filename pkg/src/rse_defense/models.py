"""Text classifiers: LSTM, Bi-LSTM and multichannel Word-CNN.

All dimensions are configurable; the defaults are desk-scale. Full-size
settings are 100-dim embeddings and 100 hidden units per LSTM cell.
"""
from __future__ import annotations

import copy
import hashlib
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F
from torch.nn.utils.rnn import pack_padded_sequence

from .corpus import EncodedExample, LabeledExample, Vocabulary, encode_tokens

log = logging.getLogger(__name__)

ARCHITECTURES = ("lstm", "bilstm", "word_cnn")
CHECKPOINT_FORMAT = "rse-defense-checkpoint/1"

TrainHook = Callable[[LabeledExample, int, int], LabeledExample]


class TrainingError(RuntimeError):
    pass


@dataclass
class TrainConfig:
    epochs: int = 10
    batch_size: int = 32
    lr: float = 0.5
    embed_dim: int = 32
    hidden_dim: int = 32
    num_layers: int = 2
    num_filters: int = 32
    filter_sizes: tuple[int, ...] = (3, 4, 5)
    optimizer: str = "sgd"
    grad_clip: float | None = 5.0
    seed: int = 0
    encoder_hook: TrainHook | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        for name in ("epochs", "batch_size", "embed_dim", "hidden_dim", "num_layers", "num_filters"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.lr < 0:
            raise ValueError("lr must be non-negative")
        if self.optimizer not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        self.filter_sizes = tuple(int(k) for k in self.filter_sizes)

    def model_hparams(self) -> dict:
        return {k: v for k, v in asdict(self).items()
                if k in ("embed_dim", "hidden_dim", "num_layers", "num_filters", "filter_sizes")}


class LSTMNet(nn.Module):
    def __init__(self, vocab_size, embed_dim, hidden_dim, num_classes,
                 num_layers=2, bidirectional=False, **_):
        super().__init__()
        self.embedding = nn.Embedding(vocab_size, embed_dim, padding_idx=0)
        self.lstm = nn.LSTM(embed_dim, hidden_dim, num_layers=num_layers,
                            batch_first=True, bidirectional=bidirectional)
        self.bidirectional = bidirectional
        self.fc = nn.Linear(hidden_dim * (2 if bidirectional else 1), num_classes)

    def forward(self, ids, lengths):
        emb = self.embedding(ids)
        packed = pack_padded_sequence(emb, lengths.clamp(min=1).cpu(), batch_first=True,
                                      enforce_sorted=False)
        _, (h, _) = self.lstm(packed)
        if self.bidirectional:
            last = torch.cat([h[-2], h[-1]], dim=1)
        else:
            last = h[-1]
        return self.fc(last)


class WordCNN(nn.Module):
    """Kim-style CNN with a frozen static channel and a trainable channel."""

    def __init__(self, vocab_size, embed_dim, num_classes, num_filters=32,
                 filter_sizes=(3, 4, 5), static_vectors=None, **_):
        super().__init__()
        self.embedding = nn.Embedding(vocab_size, embed_dim, padding_idx=0)
        self.static_embedding = nn.Embedding(vocab_size, embed_dim, padding_idx=0)
        with torch.no_grad():
            if static_vectors is not None:
                self.static_embedding.weight.copy_(torch.as_tensor(static_vectors))
            else:
                self.static_embedding.weight.copy_(self.embedding.weight)
        self.static_embedding.weight.requires_grad_(False)
        self.filter_sizes = tuple(filter_sizes)
        self.convs = nn.ModuleList(nn.Conv2d(2, num_filters, (k, embed_dim)) for k in self.filter_sizes)
        self.fc = nn.Linear(num_filters * len(self.filter_sizes), num_classes)

    def forward(self, ids, lengths):
        need = max(self.filter_sizes)
        if ids.shape[1] < need:
            ids = F.pad(ids, (0, need - ids.shape[1]))
        x = torch.stack([self.static_embedding(ids), self.embedding(ids)], dim=1)
        pooled = [F.relu(conv(x)).squeeze(3).amax(dim=2) for conv in self.convs]
        return self.fc(torch.cat(pooled, dim=1))


def _make_net(arch, vocab_size, num_classes, hparams, static_vectors=None):
    if arch == "lstm":
        return LSTMNet(vocab_size, num_classes=num_classes, **hparams)
    if arch == "bilstm":
        return LSTMNet(vocab_size, num_classes=num_classes, bidirectional=True, **hparams)
    if arch == "word_cnn":
        return WordCNN(vocab_size, num_classes=num_classes, static_vectors=static_vectors, **hparams)
    raise ValueError(f"unknown architecture {arch!r}; expected one of {ARCHITECTURES}")


class TextClassifier:
    """A trainable network bound to its vocabulary and padding length."""

    def __init__(self, arch: str, vocab: Vocabulary, num_classes: int, padding_length: int,
                 hparams: dict, net: nn.Module | None = None, seed: int = 0,
                 static_vectors: np.ndarray | None = None):
        self.arch = arch
        self.vocab = vocab
        self.num_classes = num_classes
        self.padding_length = padding_length
        self.hparams = dict(hparams)
        if net is None:
            with torch.random.fork_rng(devices=[]):
                torch.manual_seed(seed)
                net = _make_net(arch, len(vocab), num_classes, self.hparams, static_vectors)
        self.net = net
        self.history: list[float] = []

    def encode_batch(self, token_lists: Sequence[Sequence[str]]):
        ids = np.zeros((len(token_lists), self.padding_length), dtype=np.int64)
        lengths = np.zeros(len(token_lists), dtype=np.int64)
        for i, toks in enumerate(token_lists):
            ids[i], lengths[i] = encode_tokens(toks, self.vocab, self.padding_length)
        return torch.from_numpy(ids), torch.from_numpy(lengths)

    def logits(self, ids: torch.Tensor, lengths: torch.Tensor) -> torch.Tensor:
        return self.net(ids, lengths)

    @torch.no_grad()
    def predict_proba_ids(self, ids, lengths) -> np.ndarray:
        ids = torch.as_tensor(ids)
        lengths = torch.as_tensor(lengths)
        if ids.ndim != 2 or ids.shape[1] != self.padding_length:
            raise ValueError(f"expected ids of shape (n, {self.padding_length}), got {tuple(ids.shape)}")
        self.net.eval()
        out = self.net(ids, lengths).double()
        return torch.softmax(out, dim=1).numpy()

    def predict_proba(self, example: EncodedExample) -> np.ndarray:
        ids = np.asarray(example.ids)
        if ids.shape != (self.padding_length,):
            raise ValueError(f"expected {self.padding_length} ids, got shape {ids.shape}")
        return self.predict_proba_ids(ids[None, :], np.array([example.true_length]))[0]

    def predict_proba_tokens(self, token_lists: Sequence[Sequence[str]]) -> np.ndarray:
        if not token_lists:
            return np.zeros((0, self.num_classes))
        return self.predict_proba_ids(*self.encode_batch(token_lists))

    # -- persistence ----------------------------------------------------
    def state(self, defense: dict | None = None) -> dict:
        return {
            "format": CHECKPOINT_FORMAT,
            "arch": self.arch,
            "hparams": {k: list(v) if isinstance(v, tuple) else v for k, v in self.hparams.items()},
            "num_classes": self.num_classes,
            "padding_length": self.padding_length,
            "vocab": list(self.vocab.itos),
            "vocab_sha256": self.vocab.digest(),
            "state_dict": {k: v.detach().clone() for k, v in self.net.state_dict().items()},
            "defense": defense,
        }

    def parameter_digest(self) -> str:
        h = hashlib.sha256()
        for k, v in sorted(self.net.state_dict().items()):
            h.update(k.encode())
            h.update(v.detach().cpu().contiguous().numpy().tobytes())
        return h.hexdigest()


def build_classifier(arch: str, vocab: Vocabulary, num_classes: int, padding_length: int,
                     config: TrainConfig, static_vectors=None) -> TextClassifier:
    return TextClassifier(arch, vocab, num_classes, padding_length, config.model_hparams(),
                          seed=config.seed, static_vectors=static_vectors)


def save_checkpoint(clf: TextClassifier, path, defense: dict | None = None) -> None:
    torch.save(clf.state(defense), Path(path))


def load_checkpoint(path) -> tuple[TextClassifier, dict | None]:
    state = torch.load(Path(path), map_location="cpu", weights_only=True)
    if state.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"{path}: not a checkpoint of format {CHECKPOINT_FORMAT}")
    vocab = Vocabulary(state["vocab"][2:])
    if vocab.digest() != state["vocab_sha256"]:
        raise ValueError(f"{path}: vocabulary hash mismatch")
    hparams = dict(state["hparams"])
    if "filter_sizes" in hparams:
        hparams["filter_sizes"] = tuple(hparams["filter_sizes"])
    net = _make_net(state["arch"], len(vocab), state["num_classes"], hparams)
    net.load_state_dict(state["state_dict"])
    clf = TextClassifier(state["arch"], vocab, state["num_classes"], state["padding_length"],
                         hparams, net=net)
    return clf, state.get("defense")


def load_word_vectors(path, vocab: Vocabulary, dim: int, seed: int = 0) -> np.ndarray:
    """Matrix for the static CNN channel from a ``word<SPACE>floats`` file.

    Words missing from the file get small random vectors; PAD is zero.
    """
    rng = np.random.default_rng(seed)
    mat = rng.uniform(-0.25, 0.25, size=(len(vocab), dim)).astype(np.float32)
    mat[0] = 0.0
    with Path(path).open(encoding="utf-8") as f:
        for line in f:
            parts = line.rstrip().split(" ")
            if len(parts) != dim + 1:
                continue
            idx = vocab.stoi.get(parts[0])
            if idx is not None and idx > 1:
                mat[idx] = np.asarray(parts[1:], dtype=np.float32)
    return mat


def _make_optimizer(params, config: TrainConfig):
    if config.optimizer == "adam":
        return torch.optim.Adam(params, lr=config.lr)
    return torch.optim.SGD(params, lr=config.lr)


def train(clf: TextClassifier, data: Sequence[LabeledExample], config: TrainConfig,
          encoder_hook: TrainHook | None = None) -> TextClassifier:
    """Mini-batch NLL minimisation.

    When a hook is set, every example of every batch is replaced by
    ``hook(example, epoch, index)`` before encoding, so each epoch sees a
    fresh neighbour of each training example.
    """
    if not data:
        raise ValueError("no training data")
    hook = encoder_hook if encoder_hook is not None else config.encoder_hook
    bad = [ex.label for ex in data if not 0 <= ex.label < clf.num_classes]
    if bad:
        raise ValueError(f"label {bad[0]} outside [0, {clf.num_classes})")
    rng = np.random.default_rng(config.seed)
    params = [p for p in clf.net.parameters() if p.requires_grad]
    opt = _make_optimizer(params, config)
    labels = torch.tensor([ex.label for ex in data])
    for epoch in range(config.epochs):
        clf.net.train()
        order = rng.permutation(len(data))
        total, count = 0.0, 0
        for start in range(0, len(data), config.batch_size):
            idx = order[start:start + config.batch_size]
            batch = [data[i] for i in idx]
            if hook is not None:
                batch = [hook(ex, epoch, int(i)) for ex, i in zip(batch, idx)]
            ids, lengths = clf.encode_batch([ex.tokens for ex in batch])
            loss = F.cross_entropy(clf.logits(ids, lengths), labels[torch.as_tensor(idx)])
            if not torch.isfinite(loss):
                raise TrainingError(f"non-finite loss {loss.item()} at epoch {epoch}, batch starting {start}")
            opt.zero_grad()
            loss.backward()
            if config.grad_clip:
                nn.utils.clip_grad_norm_(params, config.grad_clip)
            opt.step()
            total += loss.item() * len(idx)
            count += len(idx)
        clf.history.append(total / count)
        log.info("epoch %d/%d  mean nll %.4f", epoch + 1, config.epochs, clf.history[-1])
    clf.net.eval()
    return clf


def evaluate_accuracy(clf, data: Sequence[LabeledExample], transform=None, seed: int = 0,
                      batch_size: int = 256) -> float:
    """Fraction of examples whose argmax prediction equals the label.

    ``transform(tokens, rng)`` is the defense's test-time input encoder; each
    example gets its own stream derived from ``(seed, index)``.
    """
    from .encoder import derived_rng

    if not data:
        raise ValueError("no evaluation data")
    correct = 0
    for start in range(0, len(data), batch_size):
        chunk = data[start:start + batch_size]
        toks = [ex.tokens if transform is None else transform(ex.tokens, derived_rng(seed, start + j))
                for j, ex in enumerate(chunk)]
        probs = clf.predict_proba_tokens(toks)
        correct += int(sum(int(np.argmax(p)) == ex.label for p, ex in zip(probs, chunk)))
    return correct / len(data)


def nll(clf: TextClassifier, ids, lengths, labels) -> torch.Tensor:
    return F.cross_entropy(clf.logits(ids, lengths), labels, reduction="sum")


def gradient_check(clf: TextClassifier, examples: Sequence[LabeledExample], n_coords: int = 20,
                   eps: float = 1e-6, seed: int = 0) -> list[dict]:
    """Compare autograd gradients of the summed NLL with central differences.

    Runs on a float64 copy. Coordinates are drawn uniformly from parameter
    entries with a non-zero analytic gradient (embedding rows of words absent
    from ``examples`` have exactly zero gradient on both sides).
    """
    net = copy.deepcopy(clf.net).double()
    net.train()
    probe = TextClassifier(clf.arch, clf.vocab, clf.num_classes, clf.padding_length,
                           clf.hparams, net=net)
    ids, lengths = probe.encode_batch([ex.tokens for ex in examples])
    labels = torch.tensor([ex.label for ex in examples])
    params = [(n, p) for n, p in net.named_parameters() if p.requires_grad]
    net.zero_grad()
    nll(probe, ids, lengths, labels).backward()
    pool = []
    for pi, (name, p) in enumerate(params):
        nz = torch.nonzero(p.grad.reshape(-1).abs() > 1e-10).reshape(-1)
        pool.extend((pi, int(j)) for j in nz)
    rng = np.random.default_rng(seed)
    picks = [pool[j] for j in rng.choice(len(pool), size=min(n_coords, len(pool)), replace=False)]
    out = []
    with torch.no_grad():
        for pi, j in picks:
            name, p = params[pi]
            flat = p.view(-1)
            analytic = float(p.grad.view(-1)[j])
            orig = float(flat[j])
            flat[j] = orig + eps
            up = float(nll(probe, ids, lengths, labels))
            flat[j] = orig - eps
            down = float(nll(probe, ids, lengths, labels))
            flat[j] = orig
            numeric = (up - down) / (2 * eps)
            denom = max(abs(analytic), abs(numeric))
            rel = 0.0 if denom == 0 else abs(analytic - numeric) / denom
            out.append({"param": name, "index": j, "analytic": analytic,
                        "numeric": numeric, "rel_error": rel})
    return out
