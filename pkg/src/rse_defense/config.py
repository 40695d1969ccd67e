"""Flat ``key = value`` experiment configuration.

Unknown keys are rejected. Values are cast to the type of their default;
list-valued keys take comma-separated values. ``#`` starts a comment.
"""
from __future__ import annotations

import hashlib
from pathlib import Path

DEFAULTS: dict[str, object] = {
    "seed": 0,
    "grid.datasets": ["agnews_synthetic"],
    "grid.architectures": ["lstm"],
    "grid.defenses": ["nt", "rse"],
    "grid.attacks": ["none", "pwws"],
    "data.train_size": 2000,
    "data.eval_size": 200,
    "data.padding_length": 50,
    "data.max_vocab": 80000,
    "data.header": False,
    "data.synthetic_pool_per_class": 1000,
    "lexicon.path": "bundled",
    "lexicon.symmetric": True,
    "train.epochs": 10,
    "train.batch_size": 32,
    "train.lr": 0.5,
    "train.optimizer": "sgd",
    "train.grad_clip": 5.0,
    "train.embed_dim": 32,
    "train.hidden_dim": 32,
    "train.num_layers": 2,
    "train.num_filters": 32,
    "train.filter_sizes": [3, 4, 5],
    "word_vectors.path": "",
    "rse.r_min": 0.1,
    "rse.r_max": 0.25,
    "rse.seed": 0,
    "rse.vote_k": 1,
    "attack.max_rate": 0.25,
    "at.attack_fraction": 0.1,
    "eval.seed": 1000,
}

# keys of the form dataset.<name>.train / .test / .padding_length / .label_map
_DATASET_FIELDS = {"train": str, "test": str, "padding_length": int}


class ConfigError(ValueError):
    pass


def _cast(key: str, raw: str, default):
    raw = raw.strip()
    try:
        if isinstance(default, bool):
            low = raw.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return low in ("true", "1", "yes")
        if isinstance(default, list):
            items = [s.strip() for s in raw.split(",") if s.strip()]
            if default and isinstance(default[0], int):
                return [int(s) for s in items]
            return items
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None


def parse_config(lines, overrides: dict | None = None) -> dict:
    cfg = {k: (list(v) if isinstance(v, list) else v) for k, v in DEFAULTS.items()}
    items = []
    for lineno, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        k, v = line.split("=", 1)
        items.append((k.strip(), v))
    for k, v in (overrides or {}).items():
        items.append((k, v if isinstance(v, str) else _unparse(v)))
    for k, v in items:
        if k in DEFAULTS:
            cfg[k] = _cast(k, v, DEFAULTS[k])
        elif k.startswith("dataset.") and k.rsplit(".", 1)[-1] in _DATASET_FIELDS:
            cfg[k] = _cast(k, v, _DATASET_FIELDS[k.rsplit(".", 1)[-1]]())
        else:
            raise ConfigError(f"unknown config key {k!r}")
    if not 0 <= cfg["rse.r_min"] <= cfg["rse.r_max"] <= 1:
        raise ConfigError("need 0 <= rse.r_min <= rse.r_max <= 1")
    return cfg


def load_config(path=None, overrides: dict | None = None) -> dict:
    lines = Path(path).read_text(encoding="utf-8").splitlines() if path else []
    return parse_config(lines, overrides)


def _unparse(v) -> str:
    if isinstance(v, (list, tuple)):
        return ",".join(str(x) for x in v)
    return str(v).lower() if isinstance(v, bool) else str(v)


def dump_config(cfg: dict) -> str:
    return "".join(f"{k} = {_unparse(cfg[k])}\n" for k in sorted(cfg))


def config_digest(cfg: dict) -> str:
    return hashlib.sha256(dump_config(cfg).encode()).hexdigest()
