"""Aligned-text tables from grid results.

Three layouts:

* accuracy: clean and under-attack accuracy per (dataset, attack) row and
  (architecture, defense) column;
* sem_vs_rse: before/after accuracy, shift and attack-success rate under
  PWWS, SEM next to RSE;
* substitution: mean substitution rate of successful attacks.

All numbers are percentages. Missing cells print as ``-``.
"""
from __future__ import annotations

from .attacks import ATTACKS
from .defenses import DEFENSES
from .models import ARCHITECTURES


def _ordered(values, canonical):
    known = [v for v in canonical if v in values]
    return known + sorted(v for v in values if v not in canonical)


def _pct(v, digits=1) -> str:
    return "-" if v is None else f"{100 * v:.{digits}f}"


def _render(title: str, header: list[list[str]], rows: list[list[str]]) -> str:
    lines = header + rows
    widths = [max(len(r[i]) for r in lines) for i in range(len(lines[0]))]
    fmt = lambda r: "  ".join(c.ljust(w) if i < 2 else c.rjust(w)  # noqa: E731
                              for i, (c, w) in enumerate(zip(r, widths)))
    rule = "-" * len(fmt(lines[0]))
    body = [fmt(r) for r in header] + [rule] + [fmt(r) for r in rows]
    return "\n".join([title, rule, *body, rule])


def _index(cells):
    return {(c["dataset"], c["architecture"], c["defense"], c["attack"]): c for c in cells}


def accuracy_table(cells: list[dict]) -> str:
    idx = _index(cells)
    datasets = _ordered({c["dataset"] for c in cells}, [])
    archs = _ordered({c["architecture"] for c in cells}, ARCHITECTURES)
    defenses = _ordered({c["defense"] for c in cells}, DEFENSES)
    attacks = _ordered({c["attack"] for c in cells if c["attack"] != "none"}, ATTACKS)
    cols = [(a, d) for a in archs for d in defenses]
    header = [["dataset", "attack", *[a for a, _ in cols]], ["", "", *[d for _, d in cols]]]
    rows = []
    for ds in datasets:
        clean = []
        for a, d in cols:
            # clean accuracy does not depend on the attack; take any cell
            hit = next((c for (x, y, z, _), c in idx.items() if (x, y, z) == (ds, a, d)), None)
            clean.append(_pct(hit and hit["no_attack_accuracy"]))
        rows.append([ds, "no attack", *clean])
        for atk in attacks:
            rows.append([ds, atk, *[_pct(idx[(ds, a, d, atk)]["after_attack_accuracy"])
                                    if (ds, a, d, atk) in idx else "-" for a, d in cols]])
    return _render("Accuracy (%)", header, rows)


def sem_vs_rse_table(cells: list[dict], attack: str = "pwws") -> str:
    idx = _index(cells)
    datasets = _ordered({c["dataset"] for c in cells}, [])
    archs = _ordered({c["architecture"] for c in cells}, ARCHITECTURES)
    cols = [(ds, d) for ds in datasets for d in ("sem", "rse")]
    header = [["metric", "model", *[ds for ds, _ in cols]], ["", "", *[d for _, d in cols]]]
    metrics = [("before-attack", "no_attack_accuracy", 1), ("after-attack", "after_attack_accuracy", 1),
               ("shift", "accuracy_shift", 1), ("success rate", "attack_success_rate", 2)]
    rows = []
    for label, field, digits in metrics:
        for a in archs:
            rows.append([label, a, *[_pct(idx[(ds, a, d, attack)][field], digits)
                                     if (ds, a, d, attack) in idx else "-" for ds, d in cols]])
    return _render(f"SEM vs RSE under {attack} (%)", header, rows)


def substitution_table(cells: list[dict]) -> str:
    idx = _index(cells)
    datasets = _ordered({c["dataset"] for c in cells}, [])
    archs = _ordered({c["architecture"] for c in cells}, ARCHITECTURES)
    defenses = _ordered({c["defense"] for c in cells}, DEFENSES)
    attacks = _ordered({c["attack"] for c in cells if c["attack"] != "none"}, ATTACKS)
    cols = [(a, d) for a in archs for d in defenses]
    header = [["dataset", "attack", *[a for a, _ in cols]], ["", "", *[d for _, d in cols]]]
    rows = [[ds, atk, *[_pct(idx[(ds, a, d, atk)]["mean_substitution_rate"], 2)
                        if (ds, a, d, atk) in idx else "-" for a, d in cols]]
            for ds in datasets for atk in attacks]
    return _render("Substitution rate of successful attacks (%)", header, rows)


def render_report(cells: list[dict]) -> str:
    parts = [accuracy_table(cells)]
    if any(c["defense"] in ("sem", "rse") and c["attack"] == "pwws" for c in cells):
        parts.append(sem_vs_rse_table(cells))
    if any(c["attack"] != "none" for c in cells):
        parts.append(substitution_table(cells))
    return "\n\n".join(parts) + "\n"
