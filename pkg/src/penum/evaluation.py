"""Gold test sets and disambiguation metrics.

Test sets are TSV files (tablet, entry line, system, evidence note); every
item is validated against the loaded corpus so a stale reference or an
impossible gold label is reported rather than silently scored.

Scoring covers the 4-way setting (which system exactly) and the 2-way
setting (capacity vs everything else, obtained by collapsing labels).
Micro averaging is the default: with one prediction per item and full
coverage it makes precision, recall and F1 all equal the accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping

from .atf import Corpus, extract_numerals
from .bootstrap import NON_CAPACITY, collapse_label
from .numsys import SYSTEM_ORDER, System, TableSet, readings


@dataclass(frozen=True)
class TestItem:
    __test__ = False  # not a pytest class, despite the name

    tablet_id: str
    line_no: int
    gold: System
    evidence: str = ""


@dataclass
class TestSetLoad:
    items: list[TestItem]
    errors: list[str]


def parse_test_set(lines: Iterable[str]) -> TestSetLoad:
    """Parse TSV rows without corpus validation (see ``load_test_set``)."""
    items: list[TestItem] = []
    errors: list[str] = []
    for idx, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t") if "\t" in line else line.split()
        if len(parts) < 3:
            errors.append(f"row {idx}: expected tablet, line, system[, evidence]")
            continue
        tablet_id, line_text, system_text = parts[0], parts[1], parts[2]
        evidence = parts[3] if len(parts) > 3 else ""
        try:
            line_no = int(line_text)
        except ValueError:
            errors.append(f"row {idx}: bad line number {line_text!r}")
            continue
        try:
            gold = System(system_text)
        except ValueError:
            errors.append(f"row {idx}: unknown system {system_text!r}")
            continue
        items.append(TestItem(tablet_id, line_no, gold, evidence))
    return TestSetLoad(items, errors)


def load_test_set(
    path_or_lines: str | Path | Iterable[str],
    corpus: Corpus,
    tables: TableSet,
) -> TestSetLoad:
    """Load and validate a gold test set against a corpus.

    Validation failures (unknown tablet or entry, no intact numeral on the
    line, gold system invalid for the numeral) are listed, not dropped
    silently; only valid items are returned.
    """
    if isinstance(path_or_lines, (str, Path)):
        with open(path_or_lines, "r", encoding="utf-8") as handle:
            loaded = parse_test_set(handle)
    else:
        loaded = parse_test_set(path_or_lines)

    valid_items: list[TestItem] = []
    for item in loaded.items:
        ref = f"{item.tablet_id}:{item.line_no}"
        tablet = corpus.tablet(item.tablet_id)
        if tablet is None:
            loaded.errors.append(f"{ref}: unknown tablet")
            continue
        if tablet.entry_at(item.line_no) is None:
            loaded.errors.append(f"{ref}: no such entry line")
            continue
        intact = [
            n for n in extract_numerals(tablet).intact if n.location[1] == item.line_no
        ]
        if not intact:
            loaded.errors.append(f"{ref}: entry has no intact numeral")
            continue
        valid = readings(intact[0], tables).valid_systems
        if item.gold not in valid:
            loaded.errors.append(
                f"{ref}: gold system {item.gold.value} is not a valid reading "
                f"(valid: {','.join(s.value for s in valid) or 'none'})"
            )
            continue
        valid_items.append(item)
    loaded.items = valid_items
    return loaded


class EvalMode(Enum):
    FOUR_WAY = "4-way"
    TWO_WAY = "2-way"


class Averaging(Enum):
    MICRO = "micro"
    MACRO = "macro"


@dataclass
class Metrics:
    mode: EvalMode
    averaging: Averaging
    labels: tuple[str, ...]
    precision: float
    recall: float
    f1: float
    confusion: dict[str, dict[str, int]]  # confusion[gold][predicted]
    gold_counts: dict[str, int]

    @property
    def accuracy(self) -> float:
        total = sum(self.gold_counts.values())
        correct = sum(self.confusion[l][l] for l in self.labels)
        return correct / total if total else 0.0


def _prf(tp: int, predicted: int, gold: int) -> tuple[float, float, float]:
    precision = tp / predicted if predicted else 0.0
    recall = tp / gold if gold else 0.0
    if precision == recall:
        f1 = precision  # exact: the harmonic mean of equal values is the value
    elif precision + recall:
        f1 = 2 * precision * recall / (precision + recall)
    else:
        f1 = 0.0
    return precision, recall, f1


def evaluate(
    predictions: Mapping[tuple[str, int], System | str],
    items: Iterable[TestItem],
    mode: EvalMode = EvalMode.FOUR_WAY,
    averaging: Averaging = Averaging.MICRO,
) -> Metrics:
    """Score predictions against gold items.

    ``predictions`` maps (tablet id, line) to a system (or an already
    collapsed 2-way label); a gold item without a prediction is an error.
    In TWO_WAY mode both sides are collapsed to C vs non-C before scoring.
    """
    items = list(items)
    if mode is EvalMode.TWO_WAY:
        labels = (System.C.value, NON_CAPACITY)
    else:
        labels = tuple(s.value for s in SYSTEM_ORDER)

    confusion: dict[str, dict[str, int]] = {
        g: {p: 0 for p in labels} for g in labels
    }
    for item in items:
        key = (item.tablet_id, item.line_no)
        if key not in predictions:
            raise KeyError(f"missing prediction for gold item {key[0]}:{key[1]}")
        predicted = predictions[key]
        predicted_label = predicted.value if isinstance(predicted, System) else str(predicted)
        gold_label = item.gold.value
        if mode is EvalMode.TWO_WAY:
            predicted_label = collapse_label(predicted_label)
            gold_label = collapse_label(gold_label)
        confusion[gold_label][predicted_label] += 1

    gold_counts = {l: sum(confusion[l].values()) for l in labels}
    predicted_counts = {l: sum(confusion[g][l] for g in labels) for l in labels}

    if averaging is Averaging.MICRO:
        tp = sum(confusion[l][l] for l in labels)
        precision, recall, f1 = _prf(
            tp, sum(predicted_counts.values()), sum(gold_counts.values())
        )
    else:
        per_class = [
            _prf(confusion[l][l], predicted_counts[l], gold_counts[l])
            for l in labels
            if gold_counts[l] or predicted_counts[l]
        ]
        if per_class:
            precision = sum(p for p, _, _ in per_class) / len(per_class)
            recall = sum(r for _, r, _ in per_class) / len(per_class)
            f1 = sum(f for _, _, f in per_class) / len(per_class)
        else:
            precision = recall = f1 = 0.0

    return Metrics(mode, averaging, labels, precision, recall, f1, confusion, gold_counts)
