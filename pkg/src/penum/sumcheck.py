"""Summary detection and exact subset-sum disambiguation.

Accounts often close with a summary entry totalling the preceding entries.
Summaries record larger amounts, so they are more likely to use digits that
pin down the system; when some combination of obverse readings adds up
exactly to a summary reading, the whole group can be argued into one
system.  All sums are exact rationals: values are scaled by the LCM of
their denominators and solved as an integer subset-sum.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import lcm
from typing import Mapping, Sequence

from .atf import Corpus, NumeralNotation, Surface, Tablet, extract_numerals
from .numsys import SYSTEM_ORDER, System, TableSet, value_of

#: Reverse sides holding at most this many numeral-bearing entries are
#: treated as candidate summaries.
REVERSE_ENTRY_LIMIT = 2

DEFAULT_DP_BOUND = 10_000_000
DEFAULT_MITM_LIMIT = 40


class SummaryReason(Enum):
    ANNOTATED = "annotated"
    REVERSE_FEW_ENTRIES = "reverse-few-entries"


@dataclass(frozen=True)
class SummaryCandidate:
    tablet_id: str
    line_no: int
    reason: SummaryReason


class SubsetSumStatus(Enum):
    FOUND = "found"
    NOT_FOUND = "not-found"
    RESOURCE_EXCEEDED = "resource-exceeded"


@dataclass(frozen=True)
class SubsetSumResult:
    status: SubsetSumStatus
    indices: tuple[int, ...] | None = None

    @property
    def found(self) -> bool:
        return self.status is SubsetSumStatus.FOUND


@dataclass(frozen=True)
class SumMatch:
    tablet_id: str
    system: System
    summary_line: int
    component_lines: tuple[int, ...]
    summary_value: Fraction
    full_cover: bool


class AssignmentEvidence(Enum):
    SUMMARY_MATCH = "summary-match"
    UNAMBIGUOUS = "unambiguous"
    CLASSIFIER = "classifier"
    MANUAL = "manual"


@dataclass(frozen=True)
class SystemAssignment:
    tablet_id: str
    line_no: int
    ordinal: int
    system: System
    evidence: AssignmentEvidence
    note: str = ""

    @property
    def key(self) -> tuple[str, int, int]:
        return (self.tablet_id, self.line_no, self.ordinal)


@dataclass(frozen=True)
class SystemConstraint:
    """A summary that matches in several systems narrows the possibilities
    without picking one (e.g. ruling out a capacity reading)."""

    tablet_id: str
    lines: tuple[int, ...]
    allowed: tuple[System, ...]
    note: str = ""


@dataclass
class SumcheckResult:
    tablet_id: str
    matches: list[SumMatch] = field(default_factory=list)
    assignments: list[SystemAssignment] = field(default_factory=list)
    constraints: list[SystemConstraint] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)


def detect_summaries(tablet: Tablet) -> list[SummaryCandidate]:
    """Annotated summary entries anywhere, plus every reverse entry when the
    reverse carries only one or two numeral-bearing entries."""
    extraction = extract_numerals(tablet)
    bearing = {n.location[1] for n in extraction.intact}

    candidates: list[SummaryCandidate] = []
    seen: set[int] = set()
    for entry in tablet.entries:
        if entry.summary_annotation and entry.line_no in bearing:
            candidates.append(
                SummaryCandidate(tablet.id, entry.line_no, SummaryReason.ANNOTATED)
            )
            seen.add(entry.line_no)

    reverse_lines = [
        e.line_no
        for e in tablet.entries
        if e.surface is Surface.REVERSE and e.line_no in bearing
    ]
    if 1 <= len(reverse_lines) <= REVERSE_ENTRY_LIMIT:
        for line_no in reverse_lines:
            if line_no not in seen:
                candidates.append(
                    SummaryCandidate(tablet.id, line_no, SummaryReason.REVERSE_FEW_ENTRIES)
                )
    return candidates


def subset_sum(
    values: Sequence[Fraction],
    target: Fraction,
    dp_bound: int = DEFAULT_DP_BOUND,
    mitm_limit: int = DEFAULT_MITM_LIMIT,
) -> SubsetSumResult:
    """Find a subset with the exact sum ``target``, or report that none exists.

    Ties break to the lexicographically smallest index set.  Values are
    scaled to integers, then solved by bitset dynamic programming; if the
    scaled target exceeds ``dp_bound`` a meet-in-the-middle search takes
    over for up to ``mitm_limit`` values, and past both limits the result is
    RESOURCE_EXCEEDED (distinct from a proven NOT_FOUND).
    """
    for v in values:
        if v < 0:
            raise ValueError("subset_sum requires non-negative values")
    if target < 0:
        raise ValueError("subset_sum requires a non-negative target")

    scale = lcm(target.denominator, *(v.denominator for v in values)) if values else target.denominator
    scaled = [int(v * scale) for v in values]
    scaled_target = int(target * scale)

    if scaled_target == 0:
        return SubsetSumResult(SubsetSumStatus.FOUND, ())
    if scaled_target > sum(scaled):
        return SubsetSumResult(SubsetSumStatus.NOT_FOUND)

    if scaled_target <= dp_bound:
        return _subset_sum_bitset(scaled, scaled_target)
    if len(scaled) <= mitm_limit:
        return _subset_sum_mitm(scaled, scaled_target)
    return SubsetSumResult(SubsetSumStatus.RESOURCE_EXCEEDED)


def _subset_sum_bitset(values: list[int], target: int) -> SubsetSumResult:
    n = len(values)
    mask = (1 << (target + 1)) - 1
    # reach[i] bit s set <=> some subset of values[i:] sums to s
    reach = [0] * (n + 1)
    reach[n] = 1
    for i in range(n - 1, -1, -1):
        r = reach[i + 1]
        reach[i] = (r | (r << values[i])) & mask
    if not (reach[0] >> target) & 1:
        return SubsetSumResult(SubsetSumStatus.NOT_FOUND)
    # Prefer including each index in turn (lexicographically smallest set);
    # stop as soon as the target is met, or trailing zero-valued items would
    # be picked up and lengthen the set.
    chosen: list[int] = []
    remaining = target
    for i in range(n):
        if remaining == 0:
            break
        if values[i] <= remaining and (reach[i + 1] >> (remaining - values[i])) & 1:
            chosen.append(i)
            remaining -= values[i]
    return SubsetSumResult(SubsetSumStatus.FOUND, tuple(chosen))


def _half_sums(values: Sequence[int], bound: int) -> set[int]:
    sums = {0}
    for v in values:
        sums |= {s + v for s in sums if s + v <= bound}
    return sums


def _mitm_feasible(values: Sequence[int], target: int) -> bool:
    if target == 0:
        return True
    if target < 0 or target > sum(values):
        return False
    mid = len(values) // 2
    left = _half_sums(values[:mid], target)
    right = _half_sums(values[mid:], target)
    return any(target - s in right for s in left)


def _subset_sum_mitm(values: list[int], target: int) -> SubsetSumResult:
    if not _mitm_feasible(values, target):
        return SubsetSumResult(SubsetSumStatus.NOT_FOUND)
    chosen: list[int] = []
    remaining = target
    for i in range(len(values)):
        if remaining == 0:
            break
        if values[i] <= remaining and _mitm_feasible(values[i + 1 :], remaining - values[i]):
            chosen.append(i)
            remaining -= values[i]
    return SubsetSumResult(SubsetSumStatus.FOUND, tuple(chosen))


# --------------------------------------------------------------------------
# Per-tablet disambiguation
# --------------------------------------------------------------------------


def _entry_readings(
    tablet: Tablet, tables: TableSet
) -> dict[int, dict[System, Fraction | None]]:
    """Per-entry reading: sum of the entry's intact notations per system,
    with invalidity absorbing.  Entries without intact numerals are absent."""
    by_line: dict[int, list[NumeralNotation]] = {}
    for notation in extract_numerals(tablet).intact:
        by_line.setdefault(notation.location[1], []).append(notation)
    result: dict[int, dict[System, Fraction | None]] = {}
    for line_no, notations in by_line.items():
        totals: dict[System, Fraction | None] = {}
        for system in SYSTEM_ORDER:
            values = [value_of(n, tables[system]) for n in notations]
            totals[system] = None if any(v is None for v in values) else sum(values)
        result[line_no] = totals
    return result


def _valid_systems(reading: Mapping[System, Fraction | None]) -> tuple[System, ...]:
    return tuple(s for s in SYSTEM_ORDER if reading[s] is not None)


def disambiguate_by_summary(
    tablet: Tablet,
    tables: TableSet,
    dp_bound: int = DEFAULT_DP_BOUND,
    mitm_limit: int = DEFAULT_MITM_LIMIT,
) -> SumcheckResult:
    """Match summary candidates against obverse entries by exact subset sum.

    Emits a SumMatch per (candidate, system) hit.  Assignments are only
    emitted when exactly one system matches and the summary or a component
    is unambiguous in it; when several systems match, a SystemConstraint
    narrows the options instead (ruling out the rest).  Multiple summaries
    claim disjoint component subsets, larger summaries first.  Tablets with
    damaged notations are flagged and skipped rather than asserted.
    """
    result = SumcheckResult(tablet.id)
    extraction = extract_numerals(tablet)
    if extraction.damaged:
        result.notes.append(
            f"{tablet.id}: {len(extraction.damaged)} damaged notation(s); "
            "summary analysis skipped"
        )
        return result

    candidates = detect_summaries(tablet)
    if not candidates:
        return result

    entry_reading = _entry_readings(tablet, tables)
    candidate_lines = {c.line_no for c in candidates}
    component_lines = [
        e.line_no
        for e in tablet.entries
        if e.surface is not Surface.REVERSE
        and e.line_no in entry_reading
        and e.line_no not in candidate_lines
    ]

    def candidate_sort_key(cand: SummaryCandidate):
        reading = entry_reading[cand.line_no]
        largest = max((v for v in reading.values() if v is not None), default=Fraction(0))
        return (-largest, cand.line_no)

    notations_by_line: dict[int, list[NumeralNotation]] = {}
    for notation in extraction.intact:
        notations_by_line.setdefault(notation.location[1], []).append(notation)

    def assign(line_no: int, system: System, note: str) -> None:
        for notation in notations_by_line[line_no]:
            result.assignments.append(
                SystemAssignment(
                    tablet.id, line_no, notation.ordinal, system,
                    AssignmentEvidence.SUMMARY_MATCH, note,
                )
            )

    used: dict[System, set[int]] = {s: set() for s in SYSTEM_ORDER}

    for cand in sorted(candidates, key=candidate_sort_key):
        summary_reading = entry_reading[cand.line_no]
        cand_matches: list[SumMatch] = []
        for system in SYSTEM_ORDER:
            target = summary_reading[system]
            if target is None:
                continue
            pool = [
                ln
                for ln in component_lines
                if entry_reading[ln][system] is not None and ln not in used[system]
            ]
            if not pool:
                continue
            outcome = subset_sum(
                [entry_reading[ln][system] for ln in pool], target,
                dp_bound=dp_bound, mitm_limit=mitm_limit,
            )
            if outcome.status is SubsetSumStatus.RESOURCE_EXCEEDED:
                result.notes.append(
                    f"{tablet.id}:{cand.line_no} [{system}]: subset-sum budget exceeded"
                )
                continue
            if not outcome.found or not outcome.indices:
                continue
            matched = tuple(pool[i] for i in outcome.indices)
            cand_matches.append(
                SumMatch(
                    tablet.id, system, cand.line_no, matched, target,
                    full_cover=set(matched) == set(component_lines),
                )
            )

        if not cand_matches:
            continue
        for match in cand_matches:
            used[match.system].update(match.component_lines)
        result.matches.extend(cand_matches)

        def anchored(match: SumMatch) -> bool:
            if _valid_systems(summary_reading) == (match.system,):
                return True
            return any(
                _valid_systems(entry_reading[ln]) == (match.system,)
                for ln in match.component_lines
            )

        anchored_matches = [m for m in cand_matches if anchored(m)]
        if len(cand_matches) == 1 and anchored_matches:
            match = cand_matches[0]
            note = (
                f"summary {tablet.id}:{match.summary_line}"
                f"{' (full cover)' if match.full_cover else ''}"
            )
            assign(match.summary_line, match.system, note)
            for line_no in match.component_lines:
                assign(line_no, match.system, note)
        elif len(cand_matches) > 1:
            systems = tuple(
                s for s in SYSTEM_ORDER if any(m.system is s for m in cand_matches)
            )
            lines = sorted(
                {cand.line_no}
                | {ln for m in cand_matches for ln in m.component_lines}
            )
            ruled_out = [s.value for s in SYSTEM_ORDER if s not in systems]
            result.constraints.append(
                SystemConstraint(
                    tablet.id,
                    tuple(lines),
                    systems,
                    note=(
                        f"summary {tablet.id}:{cand.line_no} matches in "
                        f"{'/'.join(s.value for s in systems)}"
                        + (f"; rules out {'/'.join(ruled_out)}" if ruled_out else "")
                    ),
                )
            )
        else:
            result.notes.append(
                f"{tablet.id}:{cand.line_no}: sum matches but no unambiguous anchor; "
                "no assignment"
            )
    return result


def corpus_sumcheck(
    corpus: Corpus,
    tables: TableSet,
    dp_bound: int = DEFAULT_DP_BOUND,
    mitm_limit: int = DEFAULT_MITM_LIMIT,
) -> list[SumcheckResult]:
    return [
        disambiguate_by_summary(tablet, tables, dp_bound=dp_bound, mitm_limit=mitm_limit)
        for tablet in corpus.tablets
    ]
