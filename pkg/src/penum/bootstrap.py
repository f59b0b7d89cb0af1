"""Self-training decision-list classifier over contextual features.

Notations that are valid in exactly one system act as seeds; a decision
list of per-feature rules is then grown iteratively, labelling further
examples whose predicted distribution is confident enough.  Rule rows give
each label a weight, combined multiplicatively and renormalized over the
systems in which the example is actually valid, so a prediction can never
name a system the notation cannot be read in.

Two cautious selection strategies are provided:

* ``FREQ_CAUTIOUS``: candidate rules are sorted by support and only the
  top n overall are kept, with n growing by a fixed step per iteration.
* ``CONF_CAUTIOUS``: every candidate is visited in a fresh random order
  each iteration and a rule row is replaced only if doing so strictly
  increases its largest weight.

Weights are exact rationals (rows sum to exactly 1); only the final
product/normalization runs in floating point.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .atf import Corpus, NumeralNotation, SignKind, SignToken, Tablet, extract_numerals
from .numsys import SYSTEM_ORDER, System, TableSet, format_rational, parse_rational, readings
from .sumcheck import AssignmentEvidence, SystemAssignment

FOUR_WAY_LABELS: tuple[str, ...] = tuple(s.value for s in SYSTEM_ORDER)
NON_CAPACITY = "NONC"
TWO_WAY_LABELS: tuple[str, ...] = (System.C.value, NON_CAPACITY)


def collapse_label(label: str) -> str:
    """4-way system label -> 2-way label (capacity vs everything else)."""
    return System.C.value if label == System.C.value else NON_CAPACITY


class FeatureKind(str, Enum):
    TABLET = "TABLET"
    FIRST_SIGN = "FIRST_SIGN"
    SAME_ENTRY = "SAME_ENTRY"
    SAME_TABLET = "SAME_TABLET"
    OBJECT = "OBJECT"
    IMPLICIT_OBJECT = "IMPLICIT_OBJECT"


@dataclass(frozen=True, order=True)
class Feature:
    kind: FeatureKind
    value: str

    def __str__(self) -> str:
        return f"{self.kind.value}={self.value}"


def extract_features(tablet: Tablet, notation: NumeralNotation) -> frozenset[Feature]:
    """Contextual features of one numeral.

    TABLET and SAME_TABLET describe the whole document, FIRST_SIGN its
    (putative) header position, SAME_ENTRY the text signs sharing the
    numeral's entry, OBJECT the sign immediately before the numeral (the
    expected counted object), IMPLICIT_OBJECT the last text sign of the
    first entry.  Positions that do not exist are simply absent.
    """
    features = {Feature(FeatureKind.TABLET, tablet.id)}

    first_sign = None
    if tablet.header:
        first_sign = tablet.header[0].name
    elif tablet.entries:
        first = tablet.entries[0].tokens[0]
        first_sign = first.name if isinstance(first, SignToken) else first.sign.name
    if first_sign is not None:
        features.add(Feature(FeatureKind.FIRST_SIGN, first_sign))

    tablet_signs: set[str] = set()
    if tablet.header:
        tablet_signs.update(
            sign.name for sign in tablet.header if sign.kind is SignKind.TEXT
        )
    for entry in tablet.entries:
        tablet_signs.update(entry.text_sign_names)
    features.update(Feature(FeatureKind.SAME_TABLET, name) for name in tablet_signs)

    if tablet.entries:
        first_entry_text = tablet.entries[0].text_sign_names
        if first_entry_text:
            features.add(Feature(FeatureKind.IMPLICIT_OBJECT, first_entry_text[-1]))

    if notation.location is not None:
        entry = tablet.entry_at(notation.location[1])
        if entry is not None:
            features.update(
                Feature(FeatureKind.SAME_ENTRY, name) for name in entry.text_sign_names
            )
            groups = entry.digit_groups()
            if notation.ordinal < len(groups):
                start = groups[notation.ordinal][0]
                if start > 0:
                    before = entry.tokens[start - 1]
                    if isinstance(before, SignToken) and before.kind is SignKind.TEXT:
                        features.add(Feature(FeatureKind.OBJECT, before.name))
    return frozenset(features)


# --------------------------------------------------------------------------
# Examples and seed collection
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class NumeralExample:
    key: tuple[str, int, int]  # (tablet id, line, ordinal)
    features: frozenset[Feature]
    valid: tuple[str, ...]  # labels this example may take
    seed_label: str | None = None


@dataclass
class TrainingData:
    labels: tuple[str, ...]
    seeds: tuple[NumeralExample, ...]
    unlabeled: tuple[NumeralExample, ...]
    warnings: tuple[str, ...] = ()


def build_examples(
    corpus: Corpus, tables: TableSet, two_way: bool = False
) -> list[NumeralExample]:
    """One example per intact notation with at least one valid reading."""
    labels = TWO_WAY_LABELS if two_way else FOUR_WAY_LABELS
    examples = []
    for tablet in corpus.tablets:
        for notation in extract_numerals(tablet).intact:
            valid_systems = readings(notation, tables).valid_systems
            if not valid_systems:
                continue
            raw = [s.value for s in valid_systems]
            if two_way:
                raw = [collapse_label(v) for v in raw]
            valid = tuple(l for l in labels if l in raw)
            seed_label = valid[0] if len(valid) == 1 else None
            examples.append(
                NumeralExample(
                    key=notation.key,
                    features=extract_features(tablet, notation),
                    valid=valid,
                    seed_label=seed_label,
                )
            )
    return examples


def collect_seeds(
    corpus: Corpus,
    tables: TableSet,
    balance: bool = True,
    seed: int = 0,
    two_way: bool = False,
) -> TrainingData:
    """Split the corpus into seed and unlabeled pools.

    Unambiguous notations become seeds labeled with their sole system; with
    ``balance`` the rarer seed labels are upsampled with replacement (the
    duplicates are ordinary pool members) to the majority count.
    """
    labels = TWO_WAY_LABELS if two_way else FOUR_WAY_LABELS
    examples = build_examples(corpus, tables, two_way=two_way)
    seeds = [ex for ex in examples if ex.seed_label is not None]
    unlabeled = tuple(ex for ex in examples if ex.seed_label is None)

    warnings = []
    by_label: dict[str, list[NumeralExample]] = {label: [] for label in labels}
    for ex in seeds:
        by_label[ex.seed_label].append(ex)
    for label in labels:
        if not by_label[label]:
            warnings.append(
                f"label {label} has no seed examples and can never be predicted"
            )

    if balance and seeds:
        rng = random.Random(seed)
        largest = max(len(pool) for pool in by_label.values())
        for label in labels:
            pool = by_label[label]
            if pool and len(pool) < largest:
                seeds.extend(rng.choices(pool, k=largest - len(pool)))

    return TrainingData(labels, tuple(seeds), unlabeled, tuple(warnings))


# --------------------------------------------------------------------------
# Decision list
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Rule:
    feature: Feature
    weights: Mapping[str, Fraction]  # rows sum to exactly 1
    support: int
    admitted_at: int


@dataclass(frozen=True)
class TrainLogEntry:
    iteration: int
    candidates: int
    rules: int
    admitted: int
    updated: int
    bootstrap_labeled: int
    label_changes: int


@dataclass
class DecisionList:
    labels: tuple[str, ...]
    rules: dict[Feature, Rule]
    iterations: int = 0
    converged: bool = False
    log: tuple[TrainLogEntry, ...] = ()
    max_weight_history: dict[Feature, list[Fraction]] | None = None


class Strategy(str, Enum):
    FREQ_CAUTIOUS = "freq-cautious"
    CONF_CAUTIOUS = "conf-cautious"


@dataclass(frozen=True)
class TrainParams:
    strategy: Strategy = Strategy.FREQ_CAUTIOUS
    rule_budget: int = 5  # initial cap for FREQ_CAUTIOUS
    rule_budget_step: int = 5  # growth per iteration
    confidence_threshold: Fraction = Fraction(19, 20)
    smoothing: Fraction = Fraction(1, 10)
    max_iterations: int = 500
    seed: int = 0
    record_history: bool = False

    def __post_init__(self) -> None:
        if not Fraction(1, 2) < self.confidence_threshold <= 1:
            raise ValueError("confidence threshold must be in (0.5, 1]")
        if self.smoothing <= 0:
            raise ValueError("smoothing must be positive")
        if self.rule_budget < 1 or self.rule_budget_step < 0:
            raise ValueError("rule budget must be >= 1 and its step >= 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


def classify(
    features: Iterable[Feature],
    dl: DecisionList,
    valid: Sequence[str],
) -> dict[str, float]:
    """Label distribution: product of matching rule weights, restricted to
    ``valid`` and renormalized.  With no matching rule the prior is uniform
    over the valid labels."""
    if not valid:
        raise ValueError("classify requires a non-empty valid label set")
    matched = [dl.rules[f] for f in sorted(features) if f in dl.rules]
    if not matched:
        return {label: 1.0 / len(valid) for label in valid}
    log_scores: dict[str, float] = {}
    for label in valid:
        total = 0.0
        for rule in matched:
            w = rule.weights.get(label, Fraction(0))
            if w == 0:
                total = -math.inf
                break
            total += math.log(w.numerator) - math.log(w.denominator)
        log_scores[label] = total
    peak = max(log_scores.values())
    if peak == -math.inf:
        return {label: 1.0 / len(valid) for label in valid}
    raw = {label: math.exp(s - peak) for label, s in log_scores.items()}
    norm = sum(raw.values())
    return {label: v / norm for label, v in raw.items()}


def _argmax(dist: Mapping[str, float], order: Sequence[str]) -> str:
    best = None
    best_p = -1.0
    for label in order:
        p = dist.get(label, 0.0)
        if p > best_p:
            best, best_p = label, p
    return best


def predict(example: NumeralExample, dl: DecisionList) -> str:
    """Most likely label among the example's valid ones (ties break in the
    fixed label order).  Unambiguous examples need no rules at all."""
    if len(example.valid) == 1:
        return example.valid[0]
    dist = classify(example.features, dl, example.valid)
    return _argmax(dist, [l for l in dl.labels if l in example.valid])


def _feature_counts(
    pool: Iterable[tuple[NumeralExample, str]], labels: Sequence[str]
) -> dict[Feature, dict[str, int]]:
    counts: dict[Feature, dict[str, int]] = {}
    for example, label in pool:
        for feature in example.features:
            row = counts.get(feature)
            if row is None:
                row = {l: 0 for l in labels}
                counts[feature] = row
            row[label] += 1
    return counts


def _smoothed_row(
    row: Mapping[str, int], labels: Sequence[str], smoothing: Fraction
) -> dict[str, Fraction]:
    total = sum(row.values())
    denom = total + len(labels) * smoothing
    return {l: (row[l] + smoothing) / denom for l in labels}


def train(data: TrainingData, params: TrainParams) -> DecisionList:
    """Bootstrap a decision list from the seed pool.

    Each iteration: (a) label unlabeled examples whose current prediction
    clears the confidence threshold (unsmoothed counts decide candidacy,
    smoothed rows become weights); (b) recompute candidate rules; (c) admit
    rules per the selected strategy; stop when an iteration changes neither
    rules nor labels, or at the iteration cap.
    """
    if not data.seeds:
        raise ValueError("training requires at least one seed example")
    labels = data.labels
    zeta = params.confidence_threshold
    zeta_f = float(zeta)
    rng = random.Random(params.seed)

    dl = DecisionList(labels=labels, rules={})
    history: dict[Feature, list[Fraction]] = {}
    log: list[TrainLogEntry] = []
    bootstrap_labels: list[str | None] = [None] * len(data.unlabeled)
    first_admitted: dict[Feature, int] = {}
    iterations_with_changes = 0
    converged = False

    for iteration in range(1, params.max_iterations + 1):
        # (a) re-label the unlabeled pool with the current decision list
        new_labels: list[str | None] = []
        for example in data.unlabeled:
            if len(example.valid) == 1:
                new_labels.append(example.valid[0])
                continue
            dist = classify(example.features, dl, example.valid)
            top = _argmax(dist, [l for l in labels if l in example.valid])
            new_labels.append(top if dist[top] > zeta_f else None)
        label_changes = sum(1 for a, b in zip(bootstrap_labels, new_labels) if a != b)
        bootstrap_labels = new_labels

        # (b) candidate rules from the labeled pool, thresholded unsmoothed
        pool = [(ex, ex.seed_label) for ex in data.seeds]
        pool += [
            (ex, label)
            for ex, label in zip(data.unlabeled, bootstrap_labels)
            if label is not None
        ]
        counts = _feature_counts(pool, labels)
        candidates: list[tuple[Feature, dict[str, int], int]] = []
        for feature in sorted(counts):
            row = counts[feature]
            support = sum(row.values())
            if support and Fraction(max(row.values()), support) > zeta:
                candidates.append((feature, row, support))

        # (c) admit rules per strategy
        admitted = 0
        updated = 0
        if params.strategy is Strategy.FREQ_CAUTIOUS:
            budget = params.rule_budget + params.rule_budget_step * (iteration - 1)
            chosen = sorted(candidates, key=lambda c: (-c[2], c[0]))[:budget]
            new_rules: dict[Feature, Rule] = {}
            for feature, row, support in chosen:
                weights = _smoothed_row(row, labels, params.smoothing)
                prior = dl.rules.get(feature)
                if prior is None:
                    admitted += 1
                    first_admitted.setdefault(feature, iteration)
                elif prior.weights != weights or prior.support != support:
                    updated += 1
                new_rules[feature] = Rule(
                    feature, weights, support, first_admitted.get(feature, iteration)
                )
            rules_changed = (
                set(new_rules) != set(dl.rules)
                or any(
                    new_rules[f].weights != dl.rules[f].weights
                    or new_rules[f].support != dl.rules[f].support
                    for f in new_rules
                )
            )
        else:  # CONF_CAUTIOUS
            new_rules = dict(dl.rules)
            visit = [c for c in candidates]
            rng.shuffle(visit)
            for feature, row, support in visit:
                weights = _smoothed_row(row, labels, params.smoothing)
                prior = new_rules.get(feature)
                if prior is None:
                    new_rules[feature] = Rule(feature, weights, support, iteration)
                    first_admitted.setdefault(feature, iteration)
                    admitted += 1
                elif max(weights.values()) > max(prior.weights.values()):
                    new_rules[feature] = Rule(
                        feature, weights, support, prior.admitted_at
                    )
                    updated += 1
            rules_changed = admitted > 0 or updated > 0

        if params.record_history:
            for feature in sorted(new_rules):
                history.setdefault(feature, []).append(
                    max(new_rules[feature].weights.values())
                )

        dl = DecisionList(labels=labels, rules=new_rules)
        n_bootstrap = sum(1 for l in bootstrap_labels if l is not None)
        log.append(
            TrainLogEntry(
                iteration, len(candidates), len(new_rules),
                admitted, updated, n_bootstrap, label_changes,
            )
        )
        if not rules_changed and label_changes == 0:
            converged = True
            break
        iterations_with_changes = iteration

    dl.iterations = iterations_with_changes
    dl.converged = converged
    dl.log = tuple(log)
    dl.max_weight_history = history if params.record_history else None
    return dl


# --------------------------------------------------------------------------
# Corpus-wide prediction and model persistence
# --------------------------------------------------------------------------


def predict_corpus(
    corpus: Corpus, tables: TableSet, dl: DecisionList, two_way: bool = False
) -> list[SystemAssignment]:
    """Assign every classifiable intact numeral to a label: its sole valid
    system where unambiguous, otherwise the decision list's pick."""
    assignments = []
    for example in build_examples(corpus, tables, two_way=two_way):
        tablet_id, line_no, ordinal = example.key
        if len(example.valid) == 1:
            evidence = AssignmentEvidence.UNAMBIGUOUS
            label = example.valid[0]
            note = "sole valid reading"
        else:
            evidence = AssignmentEvidence.CLASSIFIER
            dist = classify(example.features, dl, example.valid)
            label = _argmax(dist, [l for l in dl.labels if l in example.valid])
            note = f"pi={dist[label]:.4f}"
        try:
            assigned: System | str = System(label)
        except ValueError:
            assigned = label  # collapsed two-way label
        assignments.append(
            SystemAssignment(tablet_id, line_no, ordinal, assigned, evidence, note)
        )
    return assignments


def dump_model(dl: DecisionList, params: TrainParams | None = None) -> dict:
    rules = []
    for feature in sorted(dl.rules):
        rule = dl.rules[feature]
        rules.append(
            {
                "kind": feature.kind.value,
                "value": feature.value,
                "weights": {
                    label: format_rational(rule.weights[label]) for label in dl.labels
                },
                "support": rule.support,
                "admitted_at": rule.admitted_at,
            }
        )
    payload = {
        "labels": list(dl.labels),
        "iterations": dl.iterations,
        "converged": dl.converged,
        "rules": rules,
    }
    if params is not None:
        payload["params"] = {
            "strategy": params.strategy.value,
            "rule_budget": params.rule_budget,
            "rule_budget_step": params.rule_budget_step,
            "confidence_threshold": format_rational(params.confidence_threshold),
            "smoothing": format_rational(params.smoothing),
            "max_iterations": params.max_iterations,
            "seed": params.seed,
        }
    return payload


def load_model(payload: Mapping) -> DecisionList:
    labels = tuple(payload["labels"])
    rules: dict[Feature, Rule] = {}
    for entry in payload["rules"]:
        feature = Feature(FeatureKind(entry["kind"]), entry["value"])
        weights = {
            label: parse_rational(text) for label, text in entry["weights"].items()
        }
        rules[feature] = Rule(feature, weights, entry["support"], entry["admitted_at"])
    return DecisionList(
        labels=labels,
        rules=rules,
        iterations=payload.get("iterations", 0),
        converged=payload.get("converged", False),
    )
