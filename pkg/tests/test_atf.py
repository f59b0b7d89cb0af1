import pytest

from penum.atf import (
    Corpus,
    DigitRun,
    NumeralNotation,
    ParseError,
    SignKind,
    SignToken,
    Surface,
    extract_numerals,
    parse_corpus,
    parse_notation,
    serialize_corpus,
)

from planted import random_corpus


class TestSignToken:
    def test_kinds(self):
        assert SignToken("M288").kind is SignKind.TEXT
        assert SignToken("M056~f").kind is SignKind.TEXT
        assert SignToken("N01").kind is SignKind.DIGIT
        assert SignToken("N39B").kind is SignKind.DIGIT
        assert SignToken("N8B").kind is SignKind.DIGIT
        assert SignToken("X").kind is SignKind.DAMAGE
        assert SignToken("...").kind is SignKind.DAMAGE

    def test_digit_run_requires_digit_sign(self):
        with pytest.raises(ValueError):
            DigitRun(1, SignToken("M288"))
        with pytest.raises(ValueError):
            DigitRun(0, SignToken("N01"))


class TestParseNotation:
    def test_counted_tokens(self):
        runs = parse_notation("1(N45) 2(N14) 7(N01)")
        assert [(r.count, r.sign.name) for r in runs] == [
            (1, "N45"), (2, "N14"), (7, "N01"),
        ]

    def test_bare_sign_counts_once(self):
        assert parse_notation("N01") == (DigitRun(1, SignToken("N01")),)

    def test_adjacent_duplicates_merge(self):
        merged = parse_notation("2(N01) 3(N01)")
        assert merged == (DigitRun(5, SignToken("N01")),)
        # direct evaluation: the merged run is worth the sum of the parts
        unmerged = [(2, "N01"), (3, "N01")]
        assert sum(count for count, _ in unmerged) == merged[0].count

    @pytest.mark.parametrize(
        "bad", ["1(N01", "N01)", "0(N01)", "-2(N01)", "2(M288)", "", "M288"]
    )
    def test_malformed(self, bad):
        with pytest.raises(ParseError):
            parse_notation(bad)


class TestParseCorpus:
    def test_two_line_tablet(self, fig_corpus):
        assert len(fig_corpus.tablets) == 1
        tablet = fig_corpus.tablets[0]
        assert tablet.id == "P008805"
        assert len(tablet.entries) == 2
        first, second = tablet.entries
        assert [t.name for t in first.text] == ["M056~f"]
        assert first.numeral is not None
        assert [(r.count, r.sign.name) for r in first.numeral.runs] == [
            (1, "N34"), (5, "N14"), (1, "N01"), (1, "N8B"),
        ]
        assert [t.name for t in second.text] == ["M341", "M288"]

    def test_empty_stream(self):
        corpus = parse_corpus("")
        assert corpus.tablets == ()
        assert corpus.warnings == ()

    def test_surfaces_and_summary(self):
        corpus = parse_corpus(
            "&P1\n@obverse\n1. M288 , 1(N01)\n@reverse\n# summary\n5. M288 , 2(N01)\n"
        )
        tablet = corpus.tablets[0]
        assert tablet.entries[0].surface is Surface.OBVERSE
        assert tablet.entries[1].surface is Surface.REVERSE
        assert not tablet.entries[0].summary_annotation
        assert tablet.entries[1].summary_annotation

    def test_header_heuristic(self):
        corpus = parse_corpus("&P1\nM327 M342\n1. M288 , 1(N01)\n")
        tablet = corpus.tablets[0]
        assert tablet.header is not None
        assert [s.name for s in tablet.header] == ["M327", "M342"]
        assert len(tablet.entries) == 1

    def test_duplicate_tablet_id_always_fatal(self):
        text = "&P1\n1. M288 , 1(N01)\n&P1\n1. M288 , 1(N01)\n"
        with pytest.raises(ParseError):
            parse_corpus(text)
        with pytest.raises(ParseError):
            parse_corpus(text, strict=True)

    def test_lenient_skips_malformed_lines(self):
        text = (
            "&P1\n"
            "1. M288 , 1(N01)\n"
            "not an entry line\n"
            "2. ,\n"  # both sides empty
            "1. M288 , 1(N01)\n"  # line number went backwards
            "@tablet\n"  # unknown annotation: by-design skip, no warning
            "3. M288 , 2(N01)\n"
        )
        corpus = parse_corpus(text)
        tablet = corpus.tablets[0]
        assert [e.line_no for e in tablet.entries] == [1, 3]
        assert len(corpus.warnings) == 3

    def test_strict_aborts_on_malformed(self):
        with pytest.raises(ParseError):
            parse_corpus("&P1\n1. M288 , 1(N01\n", strict=True)
        with pytest.raises(ParseError):
            parse_corpus("&P1\n@tablet\n", strict=True)

    def test_corpus_rejects_duplicate_ids_directly(self, fig_tablet):
        with pytest.raises(ParseError):
            Corpus((fig_tablet, fig_tablet))

    def test_round_trip_random_corpora(self):
        for seed in range(20):
            corpus = random_corpus(seed)
            replayed = parse_corpus(serialize_corpus(corpus))
            assert replayed.tablets == corpus.tablets, f"seed {seed}"

    def test_fig_round_trip(self, fig_corpus):
        assert parse_corpus(serialize_corpus(fig_corpus)).tablets == fig_corpus.tablets


class TestExtractNumerals:
    def test_text_then_runs_is_one_notation(self):
        corpus = parse_corpus("&P1\n1. M341 M288 , 7(N14) 2(N01) 3(N39B)\n")
        extraction = extract_numerals(corpus.tablets[0])
        assert len(extraction.intact) == 1
        assert len(extraction.damaged) == 0
        assert len(extraction.intact[0].runs) == 3

    def test_damage_adjacent_is_excluded(self):
        corpus = parse_corpus("&P1\n1. , 1(N01) X\n")
        extraction = extract_numerals(corpus.tablets[0])
        assert extraction.intact == ()
        assert len(extraction.damaged) == 1
        assert extraction.damaged[0].damaged

    def test_damage_before_run_counts_too(self):
        corpus = parse_corpus("&P1\n1. M288 X , 1(N01)\n")
        extraction = extract_numerals(corpus.tablets[0])
        assert extraction.intact == ()
        assert len(extraction.damaged) == 1

    def test_ellipsis_damage_token(self):
        corpus = parse_corpus("&P1\n1. M288 , 2(N14) ...\n")
        extraction = extract_numerals(corpus.tablets[0])
        assert extraction.intact == ()
        assert len(extraction.damaged) == 1

    def test_damage_not_adjacent_is_fine(self):
        corpus = parse_corpus("&P1\n1. X M288 , 1(N01)\n")
        extraction = extract_numerals(corpus.tablets[0])
        assert len(extraction.intact) == 1

    def test_no_digits_no_notations(self):
        corpus = parse_corpus("&P1\n1. M288 M341 ,\n")
        extraction = extract_numerals(corpus.tablets[0])
        assert extraction.intact == ()
        assert extraction.damaged == ()

    def test_damage_splits_runs_both_damaged(self):
        corpus = parse_corpus("&P1\n1. , 1(N01) X 2(N14)\n")
        extraction = extract_numerals(corpus.tablets[0])
        assert extraction.intact == ()
        assert len(extraction.damaged) == 2

    def test_notations_never_contain_text_or_damage(self):
        for seed in range(20):
            for tablet in random_corpus(seed).tablets:
                extraction = extract_numerals(tablet)
                for notation in extraction.intact + extraction.damaged:
                    for run in notation.runs:
                        assert run.sign.kind is SignKind.DIGIT

    def test_coverage_partition(self):
        # together, intact + damaged account for every digit token once
        for seed in range(20):
            for tablet in random_corpus(seed).tablets:
                written: dict[str, int] = {}
                for entry in tablet.entries:
                    for token in entry.tokens:
                        if isinstance(token, DigitRun):
                            name = token.sign.name
                            written[name] = written.get(name, 0) + token.count
                extraction = extract_numerals(tablet)
                extracted: dict[str, int] = {}
                for notation in extraction.intact + extraction.damaged:
                    for run in notation.runs:
                        extracted[run.sign.name] = (
                            extracted.get(run.sign.name, 0) + run.count
                        )
                assert written == extracted


class TestNotationModel:
    def test_merges_on_construction(self):
        notation = NumeralNotation(
            (DigitRun(2, SignToken("N01")), DigitRun(3, SignToken("N01")))
        )
        assert notation.runs == (DigitRun(5, SignToken("N01")),)

    def test_requires_runs(self):
        with pytest.raises(ValueError):
            NumeralNotation(())

    def test_str_form(self):
        assert str(NumeralNotation(parse_notation("1(N45) 3(N14) 1(N01)"))) == (
            "1(N45) 3(N14) 1(N01)"
        )

    def test_serialized_form_reparses_to_same_runs(self):
        import random

        rng = random.Random(31)
        digits = ["N01", "N14", "N34", "N39B", "N45", "N51"]
        for _ in range(200):
            runs = tuple(
                DigitRun(rng.randint(1, 11), SignToken(rng.choice(digits)))
                for _ in range(rng.randint(1, 5))
            )
            canonical = NumeralNotation(runs)
            assert parse_notation(str(canonical)) == canonical.runs
