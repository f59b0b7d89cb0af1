import random
from fractions import Fraction
from itertools import combinations

import pytest

from penum.atf import parse_corpus
from penum.numsys import System, canonicalize, value_of
from penum.sumcheck import (
    AssignmentEvidence,
    SubsetSumStatus,
    SummaryReason,
    corpus_sumcheck,
    detect_summaries,
    disambiguate_by_summary,
    subset_sum,
)

from planted import ambiguous_notation


def exhaustive_subset(values, target):
    """Oracle: smallest index set (lexicographically) summing to target."""
    best = None
    for size in range(len(values) + 1):
        for combo in combinations(range(len(values)), size):
            if sum(values[i] for i in combo) == target:
                if best is None or combo < best:
                    best = combo
    return best


class TestSubsetSum:
    def test_fraction_example(self):
        values = [Fraction(3), Fraction(5, 2), Fraction(2), Fraction(4)]
        target = Fraction(15, 2)
        result = subset_sum(values, target)
        assert result.found
        assert result.indices == (0, 1, 2)
        assert result.indices == exhaustive_subset(values, target)

    def test_zero_target_empty_subset(self):
        result = subset_sum([Fraction(5), Fraction(1)], Fraction(0))
        assert result.found
        assert result.indices == ()

    def test_unreachable_target(self):
        result = subset_sum([Fraction(1), Fraction(2)], Fraction(4))
        assert result.status is SubsetSumStatus.NOT_FOUND

    def test_negative_inputs_rejected(self):
        with pytest.raises(ValueError):
            subset_sum([Fraction(-1)], Fraction(1))
        with pytest.raises(ValueError):
            subset_sum([Fraction(1)], Fraction(-1))

    def test_agrees_with_exhaustive_enumeration(self):
        rng = random.Random(1)
        denominators = [1, 2, 3, 4, 5, 6, 8, 10, 12, 120]
        for _ in range(250):
            n = rng.randint(1, 12)
            values = [
                Fraction(rng.randint(0, 8), rng.choice(denominators))
                for _ in range(n)
            ]
            if rng.random() < 0.5:
                picked = [v for v in values if rng.random() < 0.5]
                target = sum(picked, Fraction(0))
            else:
                target = Fraction(rng.randint(0, 30), rng.choice(denominators))
            expected = exhaustive_subset(values, target)
            result = subset_sum(values, target)
            if expected is None:
                assert result.status is SubsetSumStatus.NOT_FOUND
            else:
                assert result.found
                assert result.indices == expected
                assert sum(values[i] for i in result.indices) == target

    def test_mitm_path_matches_dp(self):
        rng = random.Random(2)
        for _ in range(40):
            n = rng.randint(3, 18)
            values = [Fraction(rng.randint(0, 50)) for _ in range(n)]
            picked = [v for v in values if rng.random() < 0.5]
            target = sum(picked, Fraction(0))
            via_dp = subset_sum(values, target)
            via_mitm = subset_sum(values, target, dp_bound=0)
            assert via_dp.status == via_mitm.status
            assert via_dp.indices == via_mitm.indices

    def test_resource_exceeded_distinct_from_not_found(self):
        result = subset_sum(
            [Fraction(10**9), Fraction(1)], Fraction(10**9), dp_bound=100, mitm_limit=1
        )
        assert result.status is SubsetSumStatus.RESOURCE_EXCEEDED
        assert not result.found


CAPACITY_TABLET = """\
&F008014
@obverse
1. M288 , 1(N01)
2. M054 , 2(N01)
3. M054 , 3(N01)
4. M054 , 4(N01)
5. M054 , 5(N01)
6. M054 , 1(N14)
7. M054 , 2(N14)
8. M054 , 1(N39B)
9. M054 , 2(N39B)
10. M054 , 3(N39B)
11. M054 , 1(N01) 4(N39B)
@reverse
12. M288 , 6(N14)
"""

SEXAGESIMAL_TABLET = """\
&F008173
@obverse
1. M376 , 3(N01)
2. M376 , 2(N01) 1(N8B)
3. M376 , 2(N01)
4. M054 , 2(N14)
5. M054 , 1(N34)
@reverse
6. M376 , 7(N01) 1(N8B)
"""

CONSTRAINT_TABLET = """\
&F008012
@obverse
1. M367 , 7(N01)
2. M367 , 3(N01)
@reverse
3. M388 , 1(N14)
"""


class TestDetectSummaries:
    def test_single_reverse_entry(self, tables):
        corpus = parse_corpus(CAPACITY_TABLET)
        candidates = detect_summaries(corpus.tablets[0])
        assert [(c.line_no, c.reason) for c in candidates] == [
            (12, SummaryReason.REVERSE_FEW_ENTRIES)
        ]

    def test_three_reverse_entries_is_too_many(self):
        corpus = parse_corpus(
            "&P1\n@obverse\n1. M288 , 1(N01)\n@reverse\n"
            "2. M288 , 1(N01)\n3. M288 , 1(N01)\n4. M288 , 1(N01)\n"
        )
        assert detect_summaries(corpus.tablets[0]) == []

    def test_annotated_obverse_entry(self):
        corpus = parse_corpus(
            "&P1\n@obverse\n1. M288 , 1(N01)\n# summary\n2. M288 , 2(N01)\n"
        )
        candidates = detect_summaries(corpus.tablets[0])
        assert [(c.line_no, c.reason) for c in candidates] == [
            (2, SummaryReason.ANNOTATED)
        ]


class TestDisambiguateBySummary:
    def test_capacity_full_cover(self, tables):
        corpus = parse_corpus(CAPACITY_TABLET)
        tablet = corpus.tablets[0]
        result = disambiguate_by_summary(tablet, tables)

        assert len(result.matches) == 1
        match = result.matches[0]
        assert match.system is System.C
        assert match.summary_line == 12
        assert set(match.component_lines) == set(range(1, 12))
        assert match.full_cover

        # the match re-verifies by direct rational addition
        table = tables[System.C]
        component_sum = Fraction(0)
        for entry in tablet.entries:
            if entry.line_no in match.component_lines:
                component_sum += value_of(entry.numeral, table)
        assert component_sum == match.summary_value == 36

        assigned_lines = {a.line_no for a in result.assignments}
        assert assigned_lines == set(range(1, 13))
        assert all(a.system is System.C for a in result.assignments)
        assert all(
            a.evidence is AssignmentEvidence.SUMMARY_MATCH for a in result.assignments
        )
        assert result.constraints == []

    def test_sexagesimal_subset(self, tables):
        corpus = parse_corpus(SEXAGESIMAL_TABLET)
        result = disambiguate_by_summary(corpus.tablets[0], tables)
        assert len(result.matches) == 1
        match = result.matches[0]
        assert match.system is System.S
        assert match.summary_value == Fraction(15, 2)
        assert match.component_lines == (1, 2, 3)
        assert not match.full_cover
        assert {a.line_no for a in result.assignments} == {1, 2, 3, 6}
        assert all(a.system is System.S for a in result.assignments)

    def test_multi_system_match_becomes_constraint(self, tables):
        corpus = parse_corpus(CONSTRAINT_TABLET)
        result = disambiguate_by_summary(corpus.tablets[0], tables)
        assert {m.system for m in result.matches} == {System.B, System.D, System.S}
        assert result.assignments == []
        assert len(result.constraints) == 1
        constraint = result.constraints[0]
        assert constraint.allowed == (System.B, System.D, System.S)
        assert System.C not in constraint.allowed
        assert set(constraint.lines) == {1, 2, 3}

    def test_damaged_tablet_flagged_and_skipped(self, tables):
        corpus = parse_corpus(
            "&P1\n@obverse\n1. M288 , 1(N01) X\n2. M288 , 2(N01)\n"
            "@reverse\n3. M288 , 3(N01)\n"
        )
        result = disambiguate_by_summary(corpus.tablets[0], tables)
        assert result.matches == []
        assert result.assignments == []
        assert any("damaged" in note for note in result.notes)

    def test_match_without_anchor_gives_no_assignment(self, tables):
        # only the capacity sum works out, but every entry stays ambiguous:
        # evidence is suggestive, not conclusive, so nothing is assigned
        corpus = parse_corpus(
            "&P1\n@obverse\n1. M288 , 9(N14) 5(N01)\n2. M288 , 5(N01)\n"
            "@reverse\n3. M288 , 1(N45) 4(N01)\n"
        )
        result = disambiguate_by_summary(corpus.tablets[0], tables)
        assert [m.system for m in result.matches] == [System.C]
        assert result.assignments == []
        assert result.constraints == []
        assert any("no unambiguous anchor" in note for note in result.notes)

    def test_all_unit_sums_constrain_nothing(self, tables):
        # N01-only entries sum identically in all four systems: the match
        # set is the full system set, so no system is ruled out
        corpus = parse_corpus(
            "&P1\n@obverse\n1. M288 , 1(N01)\n2. M288 , 2(N01)\n"
            "@reverse\n3. M288 , 3(N01)\n"
        )
        result = disambiguate_by_summary(corpus.tablets[0], tables)
        assert len(result.matches) == 4
        assert result.assignments == []
        assert len(result.constraints) == 1
        assert result.constraints[0].allowed == (System.B, System.C, System.D, System.S)

    def test_assignments_never_contradict_readings(self, tables):
        rng = random.Random(5)
        for round_no in range(15):
            lines = [f"&G{round_no:03d}", "@obverse"]
            c_table = tables[System.C]
            totals = []
            n = rng.randint(3, 8)
            for line_no in range(1, n + 1):
                text = ambiguous_notation(rng)
                lines.append(f"{line_no}. M288 , {text}")
            corpus_text = "\n".join(lines) + "\n"
            parsed = parse_corpus(corpus_text)
            chosen = [
                e for e in parsed.tablets[0].entries if rng.random() < 0.6
            ] or list(parsed.tablets[0].entries)
            total = sum(value_of(e.numeral, c_table) for e in chosen)
            summary = canonicalize(total, c_table)
            corpus_text += f"@reverse\n{n + 1}. M288 , {summary}\n"
            corpus = parse_corpus(corpus_text)
            result = disambiguate_by_summary(corpus.tablets[0], tables)
            for match in result.matches:
                table = tables[match.system]
                total = Fraction(0)
                for entry in corpus.tablets[0].entries:
                    if entry.line_no in match.component_lines:
                        total += value_of(entry.numeral, table)
                assert total == match.summary_value
            for assignment in result.assignments:
                entry = corpus.tablets[0].entry_at(assignment.line_no)
                assert value_of(entry.numeral, tables[assignment.system]) is not None

    def test_two_summaries_claim_disjoint_components(self, tables):
        corpus = parse_corpus(
            "&P2S\n@obverse\n"
            "1. M288 , 1(N01) 1(N39B)\n"   # C = 6/5
            "2. M288 , 2(N01) 1(N39B)\n"   # C = 11/5
            "3. M288 , 3(N01) 1(N39B)\n"   # C = 16/5
            "4. M288 , 4(N01) 1(N39B)\n"   # C = 21/5
            "@reverse\n"
            "5. M288 , 1(N14) 1(N01) 2(N39B)\n"  # C = 37/5 = entries 3+4
            "6. M288 , 3(N01) 2(N39B)\n"         # C = 17/5 = entries 1+2
        )
        result = disambiguate_by_summary(corpus.tablets[0], tables)
        by_summary = {m.summary_line: m for m in result.matches}
        assert set(by_summary) == {5, 6}
        assert by_summary[5].component_lines == (3, 4)
        assert by_summary[6].component_lines == (1, 2)
        assert {a.line_no for a in result.assignments} == {1, 2, 3, 4, 5, 6}

    def test_wide_instance_through_mitm(self):
        rng = random.Random(77)
        values = [Fraction(rng.randint(1, 10**6)) for _ in range(24)]
        target = sum(v for i, v in enumerate(values) if i % 3 == 0)
        result = subset_sum(values, target, dp_bound=100)
        assert result.found
        assert sum(values[i] for i in result.indices) == target

    def test_corpus_sumcheck_runs_per_tablet(self, tables):
        corpus = parse_corpus(CAPACITY_TABLET + SEXAGESIMAL_TABLET)
        results = corpus_sumcheck(corpus, tables)
        assert [r.tablet_id for r in results] == ["F008014", "F008173"]
        assert all(r.matches for r in results)
