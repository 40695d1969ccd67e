"""Command-line entry point: ``rse-defense <command> [options]``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import synthetic
from .attacks import ATTACKS
from .config import ConfigError, dump_config, load_config
from .defenses import DEFENSES, DefendedModel
from .harness import (SYNTHETIC, evaluate_cell, load_results, load_split, load_table, run_grid,
                      setup_determinism, train_model)
from .lexicon import save_lexicon
from .models import ARCHITECTURES
from .report import render_report


def _parser() -> argparse.ArgumentParser:
    # global options are accepted before or after the command; SUPPRESS keeps
    # the subparser from overwriting a value given before it
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", type=Path, help="flat key = value config file")
    common.add_argument("--seed", type=int, help="override the config's seed")
    common.add_argument("--out-dir", type=Path, help="default: ./runs")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override one config key (repeatable)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="rse-defense", description=__doc__, parents=[common])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("make-data", parents=[common], help="write a synthetic 4-class news CSV")
    s.add_argument("--per-class", type=int, default=500)
    s.add_argument("--output", type=Path, required=True)

    s = sub.add_parser("build-lexicon", parents=[common],
                       help="normalise a synonym TSV (default: the bundled one) and write it out")
    s.add_argument("--input", help="TSV lexicon; defaults to lexicon.path from the config")
    s.add_argument("--output", type=Path, required=True)

    s = sub.add_parser("train", parents=[common], help="train one defended model")
    s.add_argument("--defense", choices=DEFENSES, required=True)
    s.add_argument("--arch", choices=ARCHITECTURES, required=True)
    s.add_argument("--dataset", default=SYNTHETIC)
    s.add_argument("--output", type=Path, required=True, help="checkpoint path")

    s = sub.add_parser("attack", parents=[common],
                       help="attack a checkpoint on the evaluation split; JSON lines out")
    s.add_argument("--checkpoint", type=Path, required=True)
    s.add_argument("--attack", choices=ATTACKS, required=True)
    s.add_argument("--dataset", default=SYNTHETIC)
    s.add_argument("--output", type=Path, required=True, help="per-example .jsonl")

    s = sub.add_parser("evaluate", parents=[common], help="run the configured grid into --out-dir")
    s.add_argument("--no-train", action="store_true", help="fail on missing checkpoints")

    s = sub.add_parser("report", parents=[common], help="print result tables")
    s.add_argument("--results", type=Path, help="default: <out-dir>/results.json")
    s.add_argument("--output", type=Path, help="also write the tables here")
    return p


def _config(args) -> dict:
    overrides = {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        overrides[k.strip()] = v.strip()
    if args.seed is not None:
        overrides["seed"] = str(args.seed)
    return load_config(args.config, overrides)


def _make_data(args, cfg):
    rows = synthetic.generate_corpus(args.per_class, seed=cfg["seed"])
    synthetic.write_corpus_csv(rows, args.output)
    print(f"wrote {len(rows)} rows to {args.output}")


def _build_lexicon(args, cfg):
    if args.input:
        cfg = {**cfg, "lexicon.path": args.input}
    table = load_table(cfg)
    save_lexicon(table, args.output)
    print(f"wrote {len(table)} entries ({len(table.words())} words) to {args.output}")


def _train(args, cfg):
    setup_determinism()
    split = load_split(args.dataset, cfg)
    model = train_model(split, args.arch, args.defense, cfg, load_table(cfg))
    args.output.parent.mkdir(parents=True, exist_ok=True)
    model.save(args.output)
    print(f"saved {args.defense}/{args.arch} to {args.output}")


def _attack(args, cfg):
    setup_determinism()
    model = DefendedModel.load(args.checkpoint)
    split = load_split(args.dataset, cfg)
    record, results = evaluate_cell(model, split.test, args.attack, load_table(cfg),
                                    cfg["eval.seed"], cfg["attack.max_rate"])
    args.output.parent.mkdir(parents=True, exist_ok=True)
    with args.output.open("w", encoding="utf-8") as f:
        for r in results:
            f.write(json.dumps(r.to_json(), sort_keys=True) + "\n")
    print(json.dumps(record.to_dict(), indent=2, sort_keys=True))


def _evaluate(args, cfg):
    args.out_dir.mkdir(parents=True, exist_ok=True)
    (args.out_dir / "config.cfg").write_text(dump_config(cfg), encoding="utf-8")
    cells = run_grid(cfg, args.out_dir, train_missing=not args.no_train)
    print(render_report(cells), end="")


def _report(args, cfg):
    text = render_report(load_results(args.results or args.out_dir / "results.json"))
    if args.output:
        args.output.write_text(text, encoding="utf-8")
    print(text, end="")


GLOBAL_DEFAULTS = {"config": None, "seed": None, "out_dir": Path("runs"), "set": [],
                   "verbose": False}

COMMANDS = {"make-data": _make_data, "build-lexicon": _build_lexicon, "train": _train,
            "attack": _attack, "evaluate": _evaluate, "report": _report}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    for name, default in GLOBAL_DEFAULTS.items():
        if not hasattr(args, name):
            setattr(args, name, default)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args, _config(args))
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"rse-defense: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
