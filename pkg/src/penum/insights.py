"""Corpus analytics: invalid notations, mixed systems, object associations,
ratio checks, and magnitude statistics.

Everything here reports exact rationals and deterministic orderings so runs
can be diffed.  Magnitudes are never pooled across systems: capacity
measures are unitful and not commensurable with the cardinal systems.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Mapping, Sequence

from .atf import Corpus, Entry, NumeralNotation, SignKind, SignToken, Tablet, extract_numerals
from .bootstrap import Feature, FeatureKind, extract_features
from .numsys import (
    NotRepresentableError,
    SYSTEM_ORDER,
    System,
    SystemTable,
    TableSet,
    canonicalize,
    readings,
    value_of,
)


class InvalidReason(Enum):
    BUNDLING_VIOLATION = "bundling-violation"
    UNKNOWN_SIGN = "unknown-sign"
    INCOMPATIBLE_SIGNS = "incompatible-signs"


@dataclass(frozen=True)
class InvalidFinding:
    tablet_id: str
    line_no: int
    ordinal: int
    notation: str
    reason: InvalidReason


def invalid_report(corpus: Corpus, tables: TableSet) -> list[InvalidFinding]:
    """Intact notations with no valid reading in any system.

    A sign outside every system's digit inventory is an UNKNOWN_SIGN (often
    a stray digit from a related script); a known inventory whose counts
    break the bundling limits is a BUNDLING_VIOLATION; signs that are each
    known but never share a system are INCOMPATIBLE_SIGNS.
    """
    findings: list[InvalidFinding] = []
    for tablet in corpus.tablets:
        for notation in extract_numerals(tablet).intact:
            if readings(notation, tables).valid_systems:
                continue
            signs = set(notation.sign_names())
            known_somewhere = {
                sign
                for sign in signs
                if any(sign in tables[s].values for s in SYSTEM_ORDER)
            }
            if signs - known_somewhere:
                reason = InvalidReason.UNKNOWN_SIGN
            elif any(
                all(sign in tables[s].values for sign in signs) for s in SYSTEM_ORDER
            ):
                reason = InvalidReason.BUNDLING_VIOLATION
            else:
                reason = InvalidReason.INCOMPATIBLE_SIGNS
            findings.append(
                InvalidFinding(
                    tablet.id, notation.location[1], notation.ordinal,
                    str(notation), reason,
                )
            )
    return findings


def mixed_system_report(corpus: Corpus, tables: TableSet) -> dict[str, tuple[System, ...]]:
    """Tablets whose unambiguous notations attest two or more systems."""
    report: dict[str, tuple[System, ...]] = {}
    for tablet in corpus.tablets:
        attested: set[System] = set()
        for notation in extract_numerals(tablet).intact:
            sole = readings(notation, tables).sole_system
            if sole is not None:
                attested.add(sole)
        if len(attested) >= 2:
            report[tablet.id] = tuple(s for s in SYSTEM_ORDER if s in attested)
    return report


@dataclass(frozen=True)
class ObjectAssociation:
    sign: str
    counts: Mapping[System, int]  # unambiguous notations following the sign
    multi_system: bool


def _object_sign(entry: Entry, start_index: int) -> str | None:
    if start_index <= 0:
        return None
    before = entry.tokens[start_index - 1]
    if isinstance(before, SignToken) and before.kind is SignKind.TEXT:
        return before.name
    return None


def _intact_with_positions(tablet: Tablet):
    """Yield (entry, group start index, notation) for intact notations."""
    intact = {
        (n.location[1], n.ordinal): n for n in extract_numerals(tablet).intact
    }
    for entry in tablet.entries:
        for ordinal, (start, _end, _runs) in enumerate(entry.digit_groups()):
            notation = intact.get((entry.line_no, ordinal))
            if notation is not None:
                yield entry, start, notation


def object_system_associations(
    corpus: Corpus, tables: TableSet, min_notations: int = 2
) -> list[ObjectAssociation]:
    """Systems attested by unambiguous notations right after each sign.

    Signs preceding notations from several systems are flagged: they look
    like qualifiers rather than counted objects.
    """
    counts: dict[str, dict[System, int]] = {}
    for tablet in corpus.tablets:
        for entry, start, notation in _intact_with_positions(tablet):
            sign = _object_sign(entry, start)
            if sign is None:
                continue
            sole = readings(notation, tables).sole_system
            if sole is None:
                continue
            counts.setdefault(sign, {s: 0 for s in SYSTEM_ORDER})[sole] += 1
    result = []
    for sign in sorted(counts):
        total = sum(counts[sign].values())
        if total < min_notations:
            continue
        attested = [s for s in SYSTEM_ORDER if counts[sign][s]]
        result.append(
            ObjectAssociation(sign, counts[sign], multi_system=len(attested) > 1)
        )
    return result


class RatioScope(Enum):
    WITHIN_TABLET = "within-tablet"
    ADJACENT_ENTRIES = "adjacent-entries"


@dataclass(frozen=True)
class RatioSpec:
    antecedent: str  # object sign of the numerator entries
    consequent: str  # object sign of the denominator entries
    expected: Fraction
    scope: RatioScope = RatioScope.WITHIN_TABLET

    def __post_init__(self) -> None:
        if self.expected <= 0:
            raise ValueError("expected ratio must be positive")


class RatioVerdict(Enum):
    MATCH = "match"
    DEVIATION = "deviation"


@dataclass(frozen=True)
class RatioFinding:
    tablet_id: str
    antecedent_lines: tuple[int, ...]
    consequent_lines: tuple[int, ...]
    observed: Fraction
    expected: Fraction
    verdict: RatioVerdict
    suggestion: NumeralNotation | None = None
    note: str = ""


@dataclass(frozen=True)
class _ResolvedEntry:
    line_no: int
    position: int  # index within the tablet's entry sequence
    object_sign: str
    system: System
    value: Fraction


def _resolve_entries(
    tablet: Tablet,
    tables: TableSet,
    assignments: Mapping[tuple[str, int, int], System] | None,
    signs_of_interest: frozenset[str],
) -> tuple[list[_ResolvedEntry], list[str]]:
    """Entries reduced to (object sign, single-system value); relevant
    entries whose system cannot be pinned down are reported as warnings."""
    resolved: list[_ResolvedEntry] = []
    warnings: list[str] = []
    position = {entry.line_no: i for i, entry in enumerate(tablet.entries)}
    for entry, start, notation in _intact_with_positions(tablet):
        if notation.ordinal != 0:
            continue  # the entry's leading notation carries the amount
        sign = _object_sign(entry, start)
        if sign is None or sign not in signs_of_interest:
            continue
        reading = readings(notation, tables)
        system = reading.sole_system
        if system is None and assignments is not None:
            system = assignments.get((tablet.id, entry.line_no, 0))
        if system is None or reading[system] is None:
            warnings.append(
                f"{tablet.id}:{entry.line_no}: no single-system value; skipped"
            )
            continue
        resolved.append(
            _ResolvedEntry(
                entry.line_no, position[entry.line_no], sign, system, reading[system]
            )
        )
    return resolved, warnings


def _suggest(value: Fraction, table: SystemTable) -> NumeralNotation | None:
    try:
        return canonicalize(value, table)
    except NotRepresentableError:
        return None


def ratio_check(
    corpus: Corpus,
    spec: RatioSpec,
    tables: TableSet,
    assignments: Mapping[tuple[str, int, int], System] | None = None,
) -> tuple[list[RatioFinding], list[str]]:
    """Compare observed antecedent/consequent magnitude ratios to a spec.

    WITHIN_TABLET compares per-tablet totals; ADJACENT_ENTRIES compares each
    pair of neighbouring entries matching the two signs (either order).  On
    a deviation the finding suggests the canonical notation the consequent
    should have carried.  Tablets or pairs missing one side are skipped with
    a warning (that covers the degenerate zero-denominator case too).
    """
    findings: list[RatioFinding] = []
    warnings: list[str] = []
    relevant = frozenset({spec.antecedent, spec.consequent})
    for tablet in corpus.tablets:
        resolved, entry_warnings = _resolve_entries(tablet, tables, assignments, relevant)
        ante = [e for e in resolved if e.object_sign == spec.antecedent]
        cons = [e for e in resolved if e.object_sign == spec.consequent]
        if not ante and not cons:
            continue
        warnings.extend(entry_warnings)

        if spec.scope is RatioScope.WITHIN_TABLET:
            if not ante or not cons:
                warnings.append(
                    f"{tablet.id}: only one side of {spec.antecedent}/"
                    f"{spec.consequent} present; skipped"
                )
                continue
            ante_total = sum(e.value for e in ante)
            cons_total = sum(e.value for e in cons)
            if cons_total == 0:
                warnings.append(f"{tablet.id}: consequent total is zero; skipped")
                continue
            observed = ante_total / cons_total
            finding = _build_finding(
                tablet.id,
                tuple(e.line_no for e in ante),
                tuple(e.line_no for e in cons),
                observed,
                spec,
                ante_total,
                cons,
                tables,
            )
            findings.append(finding)
        else:
            for left, right in zip(resolved, resolved[1:]):
                if right.position != left.position + 1:
                    continue  # not physically adjacent on the tablet
                pair = {left.object_sign, right.object_sign}
                if pair != {spec.antecedent, spec.consequent}:
                    continue
                a, c = (
                    (left, right)
                    if left.object_sign == spec.antecedent
                    else (right, left)
                )
                if c.value == 0:
                    warnings.append(
                        f"{tablet.id}:{c.line_no}: consequent value is zero; skipped"
                    )
                    continue
                findings.append(
                    _build_finding(
                        tablet.id, (a.line_no,), (c.line_no,),
                        a.value / c.value, spec, a.value, [c], tables,
                    )
                )
    return findings, warnings


def _build_finding(
    tablet_id: str,
    ante_lines: tuple[int, ...],
    cons_lines: tuple[int, ...],
    observed: Fraction,
    spec: RatioSpec,
    ante_total: Fraction,
    cons_entries: Sequence[_ResolvedEntry],
    tables: TableSet,
) -> RatioFinding:
    if observed == spec.expected:
        return RatioFinding(
            tablet_id, ante_lines, cons_lines, observed, spec.expected,
            RatioVerdict.MATCH,
        )
    suggestion = None
    note = ""
    cons_systems = {e.system for e in cons_entries}
    if len(cons_systems) == 1:
        system = next(iter(cons_systems))
        expected_value = ante_total / spec.expected
        suggestion = _suggest(expected_value, tables[system])
        note = f"expected consequent value {expected_value} in {system.value}"
    return RatioFinding(
        tablet_id, ante_lines, cons_lines, observed, spec.expected,
        RatioVerdict.DEVIATION, suggestion, note,
    )


@dataclass(frozen=True)
class FeatureMagnitude:
    feature: Feature
    system: System
    count: int
    mean: Fraction
    median: Fraction


def _median(values: Sequence[Fraction]) -> Fraction:
    ordered = sorted(values)
    mid = len(ordered) // 2
    if len(ordered) % 2:
        return ordered[mid]
    return (ordered[mid - 1] + ordered[mid]) / 2


def magnitude_stats(
    corpus: Corpus,
    assignments: Mapping[tuple[str, int, int], System],
    tables: TableSet,
    kinds: Sequence[FeatureKind] | None = None,
) -> list[FeatureMagnitude]:
    """Average and median magnitude of the numerals carrying each feature,
    kept separate per assigned system.  Every intact numeral with a valid
    reading must carry an assignment (unambiguous or classified).
    """
    groups: dict[tuple[Feature, System], list[Fraction]] = {}
    wanted = set(kinds) if kinds is not None else None
    for tablet in corpus.tablets:
        for notation in extract_numerals(tablet).intact:
            if not readings(notation, tables).valid_systems:
                continue
            system = assignments.get(notation.key)
            if system is None:
                raise ValueError(
                    f"no system assignment for numeral "
                    f"{notation.key[0]}:{notation.key[1]}#{notation.key[2]}"
                )
            value = value_of(notation, tables[system])
            if value is None:
                raise ValueError(
                    f"assignment {system.value} is not a valid reading for "
                    f"{notation.key[0]}:{notation.key[1]}#{notation.key[2]}"
                )
            for feature in extract_features(tablet, notation):
                if wanted is not None and feature.kind not in wanted:
                    continue
                groups.setdefault((feature, system), []).append(value)

    rows = [
        FeatureMagnitude(feature, system, len(values), sum(values) / len(values), _median(values))
        for (feature, system), values in groups.items()
    ]
    rows.sort(key=lambda r: (-r.mean, r.feature, r.system.value))
    return rows
