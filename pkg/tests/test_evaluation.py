import random

import pytest

from penum.evaluation import (
    Averaging,
    EvalMode,
    TestItem,
    evaluate,
    load_test_set,
    parse_test_set,
)
from penum.numsys import System


class TestLoadTestSet:
    def test_valid_row_against_worked_tablet(self, fig_corpus, tables):
        loaded = load_test_set(["P008805\t1\tS\tworked-example"], fig_corpus, tables)
        assert loaded.errors == []
        assert loaded.items == [TestItem("P008805", 1, System.S, "worked-example")]

    def test_comments_and_blank_lines_skipped(self, fig_corpus, tables):
        loaded = load_test_set(
            ["# a comment", "", "P008805\t2\tC\tfig"], fig_corpus, tables
        )
        assert loaded.errors == []
        assert len(loaded.items) == 1

    def test_unknown_tablet_listed(self, fig_corpus, tables):
        loaded = load_test_set(["P999999\t1\tS\tx"], fig_corpus, tables)
        assert loaded.items == []
        assert any("unknown tablet" in e for e in loaded.errors)

    def test_gold_must_be_a_valid_reading(self, fig_corpus, tables):
        loaded = load_test_set(["P008805\t1\tC\twrong"], fig_corpus, tables)
        assert loaded.items == []
        assert any("not a valid reading" in e for e in loaded.errors)

    def test_damaged_numeral_rejected(self, tables):
        from penum.atf import parse_corpus

        corpus = parse_corpus("&P1\n1. M288 , 1(N01) X\n")
        loaded = load_test_set(["P1\t1\tS\tx"], corpus, tables)
        assert loaded.items == []
        assert any("no intact numeral" in e for e in loaded.errors)

    def test_malformed_rows_reported(self):
        loaded = parse_test_set(["just-one-column", "P1\tx\tS", "P1\t1\tQ"])
        assert loaded.items == []
        assert len(loaded.errors) == 3

    def test_distribution_shape_bisexagesimal_smallest(self, tables):
        # our fixture test sets keep B smallest, like real gold sets: B
        # notations are rarely identifiable
        rows = ["T1\t1\tB\tx"] + [f"T{i}\t1\tC\tx" for i in range(6)] + [
            f"U{i}\t1\tD\tx" for i in range(4)
        ] + [f"V{i}\t1\tS\tx" for i in range(4)]
        loaded = parse_test_set(rows)
        counts = {}
        for item in loaded.items:
            counts[item.gold] = counts.get(item.gold, 0) + 1
        assert counts[System.B] == min(counts.values())


def items_from(labels):
    return [TestItem(f"T{i}", 1, System(g), "") for i, g in enumerate(labels)]


def predictions_from(items, predicted):
    return {
        (item.tablet_id, item.line_no): System(p) for item, p in zip(items, predicted)
    }


class TestEvaluate:
    def test_all_correct(self):
        items = items_from(["C", "S", "D", "B"])
        metrics = evaluate(predictions_from(items, ["C", "S", "D", "B"]), items)
        assert metrics.precision == metrics.recall == metrics.f1 == 1.0

    def test_capacity_recall_row(self):
        # 25 capacity items, 7 predicted wrong: recall 18/25 = 0.72
        gold = ["C"] * 25 + ["S"] * 10
        predicted = ["D"] * 7 + ["C"] * 18 + ["S"] * 10
        items = items_from(gold)
        metrics = evaluate(predictions_from(items, predicted), items)
        c_row = metrics.confusion["C"]
        assert c_row["C"] / sum(c_row.values()) == pytest.approx(0.72)

    def test_two_way_hides_noncapacity_confusion(self):
        gold = ["S", "D", "S", "D", "C"]
        predicted = ["D", "S", "D", "S", "C"]  # S and D swapped throughout
        items = items_from(gold)
        four = evaluate(predictions_from(items, predicted), items, EvalMode.FOUR_WAY)
        two = evaluate(predictions_from(items, predicted), items, EvalMode.TWO_WAY)
        assert four.f1 == pytest.approx(0.2)
        assert two.precision == two.recall == two.f1 == 1.0

    def test_missing_prediction_is_an_error(self):
        items = items_from(["C", "S"])
        with pytest.raises(KeyError):
            evaluate({("T0", 1): System.C}, items)

    def test_micro_identity_and_collapse_dominance(self):
        rng = random.Random(17)
        labels = ["B", "C", "D", "S"]
        for _ in range(100):
            n = rng.randint(1, 40)
            gold = [rng.choice(labels) for _ in range(n)]
            predicted = [rng.choice(labels) for _ in range(n)]
            items = items_from(gold)
            predictions = predictions_from(items, predicted)
            four = evaluate(predictions, items, EvalMode.FOUR_WAY)
            two = evaluate(predictions, items, EvalMode.TWO_WAY)
            # micro precision = recall = F1 for full-coverage single-label sets
            assert four.precision == four.recall == four.f1
            assert two.precision == two.recall == two.f1
            # collapsing can only merge errors among the non-C classes
            assert two.f1 >= four.f1

    def test_confusion_row_sums_match_gold_counts(self):
        rng = random.Random(23)
        labels = ["B", "C", "D", "S"]
        for _ in range(50):
            n = rng.randint(1, 30)
            gold = [rng.choice(labels) for _ in range(n)]
            predicted = [rng.choice(labels) for _ in range(n)]
            items = items_from(gold)
            metrics = evaluate(predictions_from(items, predicted), items)
            for label in labels:
                assert sum(metrics.confusion[label].values()) == gold.count(label)

    def test_macro_averaging_option(self):
        gold = ["C", "C", "S"]
        predicted = ["C", "S", "S"]
        items = items_from(gold)
        metrics = evaluate(
            predictions_from(items, predicted), items, averaging=Averaging.MACRO
        )
        # per-class precision: C=1, S=1/2 -> macro over classes present
        assert metrics.precision == pytest.approx((1.0 + 0.5) / 2)
