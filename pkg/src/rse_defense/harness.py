"""Experiment grid: (dataset x architecture x defense x attack) -> metrics.

Layout under ``out_dir``::

    checkpoints/<dataset>_<arch>_<defense>_s<seed>.pt
    cells/<cell key>.json          one finished cell each; reused on resume
    attacks/<cell key>.jsonl       per-example attack records
    results.json                   every cell, sorted by key
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from . import synthetic
from .attacks import ATTACKS, run_attack
from .config import config_digest
from .corpus import LabeledExample, balanced_sample, load_dataset
from .defenses import DEFENSES, DefendedModel, train_at, train_defense
from .encoder import RseConfig, derived_rng
from .lexicon import bundled_lexicon, load_lexicon, symmetric_closure
from .metrics import MetricsRecord
from .models import ARCHITECTURES, TrainConfig

log = logging.getLogger(__name__)

SYNTHETIC = "agnews_synthetic"


@dataclass
class DatasetSplit:
    name: str
    train: list[LabeledExample]
    test: list[LabeledExample]
    padding_length: int
    num_classes: int


def setup_determinism() -> None:
    torch.set_num_threads(1)
    torch.use_deterministic_algorithms(True)


def train_config(cfg: dict) -> TrainConfig:
    return TrainConfig(
        epochs=cfg["train.epochs"], batch_size=cfg["train.batch_size"], lr=cfg["train.lr"],
        embed_dim=cfg["train.embed_dim"], hidden_dim=cfg["train.hidden_dim"],
        num_layers=cfg["train.num_layers"], num_filters=cfg["train.num_filters"],
        filter_sizes=tuple(cfg["train.filter_sizes"]), optimizer=cfg["train.optimizer"],
        grad_clip=cfg["train.grad_clip"] or None, seed=cfg["seed"])


def rse_config(cfg: dict) -> RseConfig:
    return RseConfig(cfg["rse.r_min"], cfg["rse.r_max"], cfg["rse.seed"])


def load_table(cfg: dict):
    path = cfg["lexicon.path"]
    table = bundled_lexicon(closed=False) if path == "bundled" else load_lexicon(path)
    return symmetric_closure(table) if cfg["lexicon.symmetric"] else table


def load_split(name: str, cfg: dict) -> DatasetSplit:
    """Class-balanced train/eval subsets of one dataset, seeded by ``seed``."""
    seed = cfg["seed"]
    if name == SYNTHETIC:
        per_class = cfg["data.synthetic_pool_per_class"]
        train_pool = [LabeledExample(tuple(t.split()), y)
                      for y, t in synthetic.generate_corpus(per_class, seed=10_000 + seed)]
        test_pool = [LabeledExample(tuple(t.split()), y)
                     for y, t in synthetic.generate_corpus(max(per_class // 4, 1), seed=20_000 + seed)]
        padding = cfg["data.padding_length"]
    else:
        try:
            train_path, test_path = cfg[f"dataset.{name}.train"], cfg[f"dataset.{name}.test"]
        except KeyError:
            raise KeyError(f"dataset {name!r} needs dataset.{name}.train and dataset.{name}.test") from None
        train_pool = load_dataset(train_path, header=cfg["data.header"])
        test_pool = load_dataset(test_path, header=cfg["data.header"])
        padding = cfg.get(f"dataset.{name}.padding_length", cfg["data.padding_length"])
    num_classes = max(ex.label for ex in train_pool) + 1
    train = balanced_sample(train_pool, min(cfg["data.train_size"], len(train_pool)), seed)
    test = balanced_sample(test_pool, min(cfg["data.eval_size"], len(test_pool)), seed + 1)
    return DatasetSplit(name, train, test, padding, num_classes)


def checkpoint_path(out_dir: Path, dataset: str, arch: str, defense: str, seed: int) -> Path:
    return out_dir / "checkpoints" / f"{dataset}_{arch}_{defense}_s{seed}.pt"


def train_model(split: DatasetSplit, arch: str, defense: str, cfg: dict, table,
                nt_model: DefendedModel | None = None) -> DefendedModel:
    """Train one defense on ``split.train`` with the settings in ``cfg``.

    AT needs an NT model to attack; one is trained here if not supplied.
    """
    tc = train_config(cfg)
    vectors = cfg["word_vectors.path"] if arch == "word_cnn" and cfg["word_vectors.path"] else None
    common = dict(padding_length=split.padding_length, max_vocab=cfg["data.max_vocab"],
                  num_classes=split.num_classes, static_vectors=vectors)
    log.info("training %s/%s/%s seed %d", split.name, arch, defense, cfg["seed"])
    if defense == "at":
        nt = nt_model or train_model(split, arch, "nt", cfg, table)
        return train_at(split.train, arch, tc, table, cfg["at.attack_fraction"], nt_model=nt,
                        max_rate=cfg["attack.max_rate"], seed=cfg["seed"], **common)
    return train_defense(defense, split.train, arch, tc, table=table, rse=rse_config(cfg),
                         vote_k=cfg["rse.vote_k"], **common)


def obtain_model(split: DatasetSplit, arch: str, defense: str, cfg: dict, table, out_dir: Path,
                 train_missing: bool = True) -> DefendedModel:
    """Load the cell's checkpoint, training and saving it first if allowed."""
    path = checkpoint_path(out_dir, split.name, arch, defense, cfg["seed"])
    if path.exists():
        return DefendedModel.load(path)
    if not train_missing:
        raise FileNotFoundError(f"missing checkpoint {path}")
    nt = obtain_model(split, arch, "nt", cfg, table, out_dir) if defense == "at" else None
    model = train_model(split, arch, defense, cfg, table, nt_model=nt)
    path.parent.mkdir(parents=True, exist_ok=True)
    model.save(path)
    return model


def evaluate_cell(model: DefendedModel, examples: list[LabeledExample], attack: str, table,
                  eval_seed: int, max_rate: float):
    """Clean pass over ``examples`` then ``attack`` on every correctly
    classified one. Returns ``(MetricsRecord, attack_results)``."""
    if not isinstance(model, DefendedModel):
        raise TypeError("evaluation needs a DefendedModel (classifier plus its test-time encoder)")
    if attack != "none" and attack not in ATTACKS:
        raise ValueError(f"unknown attack {attack!r}")
    correct, results = 0, []
    for i, ex in enumerate(examples):
        model.reseed(eval_seed, i, 0)
        probs = model.predict_proba_tokens([ex.tokens])[0]
        if int(np.argmax(probs)) != ex.label:
            continue
        correct += 1
        if attack == "none":
            continue
        model.reseed(eval_seed, i, 1)
        res = run_attack(attack, model, ex.tokens, ex.label, table,
                         rng=derived_rng(eval_seed, i, 2), max_rate=max_rate, orig_probs=probs)
        results.append(res)
    return MetricsRecord.from_counts(len(examples), correct, results), results


def cell_key(dataset, arch, defense, attack, seed) -> str:
    return f"{dataset}__{arch}__{defense}__{attack}__s{seed}"


def run_grid(cfg: dict, out_dir, train_missing: bool = True) -> list[dict]:
    """Run every configured cell, skipping cells already on disk."""
    setup_determinism()
    out_dir = Path(out_dir)
    (out_dir / "cells").mkdir(parents=True, exist_ok=True)
    (out_dir / "attacks").mkdir(parents=True, exist_ok=True)
    for a in cfg["grid.architectures"]:
        if a not in ARCHITECTURES:
            raise ValueError(f"unknown architecture {a!r}")
    for d in cfg["grid.defenses"]:
        if d not in DEFENSES:
            raise ValueError(f"unknown defense {d!r}")
    table = load_table(cfg)
    seed, eval_seed = cfg["seed"], cfg["eval.seed"]
    cfg_hash = config_digest(cfg)
    for ds in cfg["grid.datasets"]:
        split = None
        for arch in cfg["grid.architectures"]:
            for defense in cfg["grid.defenses"]:
                pending = [a for a in cfg["grid.attacks"]
                           if not (out_dir / "cells" / f"{cell_key(ds, arch, defense, a, seed)}.json").exists()]
                if not pending:
                    continue
                split = split or load_split(ds, cfg)
                model = obtain_model(split, arch, defense, cfg, table, out_dir, train_missing)
                for attack in pending:
                    key = cell_key(ds, arch, defense, attack, seed)
                    record, results = evaluate_cell(model, split.test, attack, table, eval_seed,
                                                    cfg["attack.max_rate"])
                    record.check()
                    cell = {
                        "key": key, "dataset": ds, "architecture": arch, "defense": defense,
                        "attack": attack, "train_seed": seed, "eval_seed": eval_seed,
                        **record.to_dict(),
                        "provenance": {
                            "config_sha256": cfg_hash,
                            "checkpoint_sha256": model.clf.parameter_digest(),
                            "vocab_sha256": model.clf.vocab.digest(),
                            "lexicon_sha256": table.digest(),
                        },
                    }
                    with (out_dir / "attacks" / f"{key}.jsonl").open("w", encoding="utf-8") as f:
                        for r in results:
                            f.write(json.dumps(r.to_json(), sort_keys=True) + "\n")
                    _write_json(out_dir / "cells" / f"{key}.json", cell)
                    log.info("%s: %s", key, json.dumps(record.to_dict()))
    return collect_results(out_dir)


def collect_results(out_dir) -> list[dict]:
    out_dir = Path(out_dir)
    cells = [json.loads(p.read_text(encoding="utf-8"))
             for p in sorted((out_dir / "cells").glob("*.json"))]
    cells.sort(key=lambda c: c["key"])
    _write_json(out_dir / "results.json", cells)
    return cells


def _write_json(path: Path, obj) -> None:
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    tmp.replace(path)


def load_results(path) -> list[dict]:
    """Load a results file and verify the metric identities of every cell."""
    cells = json.loads(Path(path).read_text(encoding="utf-8"))
    fields = MetricsRecord.__dataclass_fields__
    for c in cells:
        MetricsRecord(**{k: c[k] for k in fields}).check()
    return cells
