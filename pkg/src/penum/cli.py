"""Command-line front end.

Subcommands form a pipeline with file handoffs so intermediate results can
be inspected: ``convert`` (readings per numeral), ``sumcheck`` (summary
subset-sum analysis), ``train`` / ``classify`` (bootstrap model and
corpus-wide assignments), ``evaluate`` (metrics against a gold test set),
and ``report`` (invalid notations, mixed systems, object associations,
ratio checks, magnitude statistics).

Outputs are deterministic for a fixed config and seed; every file starts
with a ``# config=<fingerprint>`` header identifying the run settings.
Report-style outputs are TSV plus JSON, with matplotlib figures rendered
alongside.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from fractions import Fraction
from itertools import combinations
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from . import insights, plotting, sumcheck as sumcheck_mod
from .atf import Corpus, ParseError, corpus_numerals, parse_corpus
from .bootstrap import (
    NON_CAPACITY,
    Strategy,
    TrainParams,
    collect_seeds,
    dump_model,
    load_model,
    predict_corpus,
    train,
)
from .evaluation import EvalMode, evaluate, load_test_set
from .numsys import (
    PROFILE_PAPER_EXAMPLES,
    PROFILES,
    SYSTEM_ORDER,
    System,
    TableError,
    TableSet,
    builtin_tables,
    format_rational,
    load_tables_config,
    parse_rational,
    readings,
)
from .sumcheck import SystemAssignment, corpus_sumcheck


def _fingerprint(settings: Mapping) -> str:
    canonical = json.dumps(settings, sort_keys=True, default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


def _write_tsv(
    path: Path, fingerprint: str, columns: Sequence[str], rows: Iterable[Sequence[str]]
) -> Path:
    lines = [f"# config={fingerprint}", "\t".join(columns)]
    lines.extend("\t".join(str(cell) for cell in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _write_json(path: Path, fingerprint: str, payload: dict) -> Path:
    document = {"config": fingerprint, **payload}
    path.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _load_corpus(paths: Sequence[str], strict: bool) -> Corpus:
    tablets = []
    warnings = []
    for path in paths:
        text = Path(path).read_text(encoding="utf-8")
        corpus = parse_corpus(text, strict=strict)
        tablets.extend(corpus.tablets)
        warnings.extend(corpus.warnings)
    return Corpus(tuple(tablets), tuple(warnings))


def _load_tables(args: argparse.Namespace) -> TableSet:
    if args.tables:
        return load_tables_config(args.tables)
    return builtin_tables(args.profile)


def _common_settings(args: argparse.Namespace, command: str) -> dict:
    return {
        "command": command,
        "corpus": list(args.corpus),
        "tables": args.tables or args.profile,
        "strict": args.strict,
        "seed": getattr(args, "seed", 0),
    }


def _emit(path: Path) -> None:
    print(f"wrote {path}")


def _report_warnings(corpus: Corpus) -> None:
    for warning in corpus.warnings:
        print(f"parse warning: {warning}", file=sys.stderr)


# --------------------------------------------------------------------------
# convert
# --------------------------------------------------------------------------

_AMBIGUITY_CLASSES = ["none"] + [
    ",".join(combo)
    for size in (1, 2, 3, 4)
    for combo in combinations([s.value for s in SYSTEM_ORDER], size)
]


def cmd_convert(args: argparse.Namespace) -> int:
    corpus = _load_corpus(args.corpus, args.strict)
    _report_warnings(corpus)
    tables = _load_tables(args)
    settings = _common_settings(args, "convert") | {
        "no_max_count": args.no_max_count, "slack": args.slack,
    }
    fp = _fingerprint(settings)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    enforce = not args.no_max_count
    rows = []
    class_counts = {name: 0 for name in _AMBIGUITY_CLASSES}
    for tablet, notation in corpus_numerals(corpus):
        reading = readings(notation, tables, enforce_max_counts=enforce, slack=args.slack)
        valid = reading.valid_systems
        label = ",".join(s.value for s in valid) if valid else "none"
        class_counts[label] += 1
        rows.append(
            [
                tablet.id,
                notation.location[1],
                notation.ordinal,
                str(notation),
                *(
                    format_rational(reading[s]) if reading[s] is not None else "-"
                    for s in SYSTEM_ORDER
                ),
                label,
            ]
        )

    _emit(
        _write_tsv(
            out / "readings.tsv", fp,
            ["tablet", "line", "ordinal", "notation",
             *(f"value_{s.value}" for s in SYSTEM_ORDER), "readings"],
            rows,
        )
    )
    _emit(
        _write_tsv(
            out / "ambiguity_summary.tsv", fp,
            ["readings", "notations"],
            [[name, class_counts[name]] for name in _AMBIGUITY_CLASSES],
        )
    )
    _emit(plotting.save_ambiguity_distribution(class_counts, out / "ambiguity_summary.png"))
    print(f"{len(rows)} intact numerals")
    return 0


# --------------------------------------------------------------------------
# sumcheck
# --------------------------------------------------------------------------


def cmd_sumcheck(args: argparse.Namespace) -> int:
    corpus = _load_corpus(args.corpus, args.strict)
    _report_warnings(corpus)
    tables = _load_tables(args)
    settings = _common_settings(args, "sumcheck") | {
        "dp_bound": args.dp_bound, "mitm_limit": args.mitm_limit,
    }
    fp = _fingerprint(settings)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    rows = []
    n_matches = n_assignments = 0
    for result in corpus_sumcheck(
        corpus, tables, dp_bound=args.dp_bound, mitm_limit=args.mitm_limit
    ):
        for match in result.matches:
            n_matches += 1
            rows.append(
                [
                    "match", match.tablet_id, match.summary_line, match.system.value,
                    f"components={','.join(str(l) for l in match.component_lines)}"
                    + (";full-cover" if match.full_cover else ""),
                    format_rational(match.summary_value),
                ]
            )
        for assignment in result.assignments:
            n_assignments += 1
            rows.append(
                [
                    "assign", assignment.tablet_id, assignment.line_no,
                    assignment.system.value, assignment.evidence.value, assignment.note,
                ]
            )
        for constraint in result.constraints:
            rows.append(
                [
                    "constraint", constraint.tablet_id,
                    ",".join(str(l) for l in constraint.lines),
                    ",".join(s.value for s in constraint.allowed),
                    "summary-match", constraint.note,
                ]
            )
        for note in result.notes:
            rows.append(["note", result.tablet_id, "", "", "", note])

    _emit(
        _write_tsv(
            out / "sumcheck.tsv", fp,
            ["record", "tablet", "line", "system", "evidence", "value"],
            rows,
        )
    )
    print(f"{n_matches} matches, {n_assignments} assignments")
    return 0


# --------------------------------------------------------------------------
# train / classify / evaluate
# --------------------------------------------------------------------------


def _train_params(args: argparse.Namespace) -> TrainParams:
    return TrainParams(
        strategy=Strategy(args.strategy),
        confidence_threshold=parse_rational(args.zeta),
        smoothing=parse_rational(args.epsilon),
        max_iterations=args.max_iterations,
        seed=args.seed,
    )


def cmd_train(args: argparse.Namespace) -> int:
    corpus = _load_corpus(args.corpus, args.strict)
    _report_warnings(corpus)
    tables = _load_tables(args)
    params = _train_params(args)
    settings = _common_settings(args, "train") | {
        "strategy": params.strategy.value,
        "zeta": args.zeta,
        "epsilon": args.epsilon,
        "max_iterations": args.max_iterations,
        "balance": not args.no_balance,
        "two_way": args.two_way,
    }
    fp = _fingerprint(settings)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    data = collect_seeds(
        corpus, tables,
        balance=not args.no_balance, seed=args.seed, two_way=args.two_way,
    )
    for warning in data.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    dl = train(data, params)

    model_path = out / "model.json"
    _write_json(model_path, fp, dump_model(dl, params))
    _emit(model_path)
    _emit(
        _write_tsv(
            out / "training_log.tsv", fp,
            ["iteration", "candidates", "rules", "admitted", "updated",
             "bootstrap_labeled", "label_changes"],
            [
                [e.iteration, e.candidates, e.rules, e.admitted, e.updated,
                 e.bootstrap_labeled, e.label_changes]
                for e in dl.log
            ],
        )
    )
    _emit(plotting.save_training_curve(dl.log, out / "training_curve.png"))
    print(
        f"{len(data.seeds)} seeds, {len(data.unlabeled)} unlabeled; "
        f"{len(dl.rules)} rules after {dl.iterations} iterations "
        f"({'converged' if dl.converged else 'iteration cap reached'})"
    )
    return 0


def _assignment_rows(assignments: Sequence[SystemAssignment]) -> list[list]:
    rows = []
    for a in sorted(assignments, key=lambda a: a.key):
        label = a.system.value if isinstance(a.system, System) else str(a.system)
        rows.append([a.tablet_id, a.line_no, a.ordinal, label, a.evidence.value, a.note])
    return rows


def cmd_classify(args: argparse.Namespace) -> int:
    corpus = _load_corpus(args.corpus, args.strict)
    _report_warnings(corpus)
    tables = _load_tables(args)
    settings = _common_settings(args, "classify") | {"model": args.model}
    fp = _fingerprint(settings)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    with open(args.model, "r", encoding="utf-8") as handle:
        dl = load_model(json.load(handle))
    two_way = NON_CAPACITY in dl.labels
    assignments = predict_corpus(corpus, tables, dl, two_way=two_way)

    _emit(
        _write_tsv(
            out / "assignments.tsv", fp,
            ["tablet", "line", "ordinal", "system", "evidence", "note"],
            _assignment_rows(assignments),
        )
    )
    by_evidence: dict[str, int] = {}
    for a in assignments:
        by_evidence[a.evidence.value] = by_evidence.get(a.evidence.value, 0) + 1
    print(
        f"{len(assignments)} assignments "
        f"({', '.join(f'{k}={v}' for k, v in sorted(by_evidence.items()))})"
    )
    return 0


def _load_assignments(path: str | Path) -> dict[tuple[str, int, int], str]:
    assignments: dict[tuple[str, int, int], str] = {}
    with open(path, "r", encoding="utf-8") as handle:
        header_seen = False
        for line in handle:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            if not header_seen:
                header_seen = True  # column header row
                continue
            tablet_id, line_no, ordinal, label = line.split("\t")[:4]
            assignments[(tablet_id, int(line_no), int(ordinal))] = label
    return assignments


def cmd_evaluate(args: argparse.Namespace) -> int:
    corpus = _load_corpus(args.corpus, args.strict)
    _report_warnings(corpus)
    tables = _load_tables(args)
    settings = _common_settings(args, "evaluate") | {
        "test_set": args.test_set, "assignments": args.assignments,
    }
    fp = _fingerprint(settings)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    loaded = load_test_set(args.test_set, corpus, tables)
    for error in loaded.errors:
        print(f"test-set problem: {error}", file=sys.stderr)
    if not loaded.items:
        print("no valid test items", file=sys.stderr)
        return 2

    raw = _load_assignments(args.assignments)
    predictions: dict[tuple[str, int], str] = {}
    for (tablet_id, line_no, ordinal), label in sorted(raw.items()):
        predictions.setdefault((tablet_id, line_no), label)

    modes = [(EvalMode.FOUR_WAY, "4way"), (EvalMode.TWO_WAY, "2way")]
    if any(label == NON_CAPACITY for label in predictions.values()):
        # collapsed two-way assignments cannot be scored four ways
        modes = modes[1:]
        print("assignments carry two-way labels; skipping 4-way scoring", file=sys.stderr)

    payload: dict = {"items": len(loaded.items), "errors": loaded.errors}
    for mode, name in modes:
        metrics = evaluate(predictions, loaded.items, mode=mode)
        payload[name] = {
            "precision": metrics.precision,
            "recall": metrics.recall,
            "f1": metrics.f1,
            "accuracy": metrics.accuracy,
            "labels": list(metrics.labels),
            "gold_counts": metrics.gold_counts,
        }
        _emit(
            _write_tsv(
                out / f"confusion_{name}.tsv", fp,
                ["gold\\predicted", *metrics.labels],
                [
                    [gold, *(metrics.confusion[gold][p] for p in metrics.labels)]
                    for gold in metrics.labels
                ],
            )
        )
        _emit(
            plotting.save_confusion_heatmap(
                metrics.confusion, metrics.labels,
                out / f"confusion_{name}.png",
                title=f"{mode.value} confusion",
            )
        )
        print(f"{mode.value}: P={metrics.precision:.4f} R={metrics.recall:.4f} F1={metrics.f1:.4f}")
    _emit(_write_json(out / "metrics.json", fp, payload))
    return 0


# --------------------------------------------------------------------------
# report
# --------------------------------------------------------------------------


def _parse_ratio_spec(text: str) -> insights.RatioSpec:
    parts = text.split(":")
    if len(parts) not in (3, 4):
        raise ValueError(
            f"--ratio wants ANTECEDENT:CONSEQUENT:P/Q[:within|adjacent], got {text!r}"
        )
    scope = insights.RatioScope.WITHIN_TABLET
    if len(parts) == 4:
        scope = {
            "within": insights.RatioScope.WITHIN_TABLET,
            "adjacent": insights.RatioScope.ADJACENT_ENTRIES,
        }[parts[3]]
    return insights.RatioSpec(parts[0], parts[1], Fraction(parts[2]), scope)


def cmd_report(args: argparse.Namespace) -> int:
    corpus = _load_corpus(args.corpus, args.strict)
    _report_warnings(corpus)
    tables = _load_tables(args)
    settings = _common_settings(args, "report") | {
        "assignments": args.assignments, "ratios": list(args.ratio or []),
    }
    fp = _fingerprint(settings)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    summary: dict = {}

    invalid = insights.invalid_report(corpus, tables)
    _emit(
        _write_tsv(
            out / "invalid.tsv", fp,
            ["tablet", "line", "ordinal", "notation", "reason"],
            [
                [f.tablet_id, f.line_no, f.ordinal, f.notation, f.reason.value]
                for f in invalid
            ],
        )
    )
    summary["invalid_notations"] = len(invalid)

    mixed = insights.mixed_system_report(corpus, tables)
    _emit(
        _write_tsv(
            out / "mixed_systems.tsv", fp,
            ["tablet", "systems"],
            [
                [tablet_id, ",".join(s.value for s in systems)]
                for tablet_id, systems in sorted(mixed.items())
            ],
        )
    )
    summary["mixed_system_tablets"] = len(mixed)

    associations = insights.object_system_associations(corpus, tables)
    _emit(
        _write_tsv(
            out / "object_associations.tsv", fp,
            ["sign", *(f"count_{s.value}" for s in SYSTEM_ORDER), "multi_system"],
            [
                [
                    a.sign,
                    *(a.counts[s] for s in SYSTEM_ORDER),
                    "yes" if a.multi_system else "no",
                ]
                for a in associations
            ],
        )
    )
    summary["object_signs"] = len(associations)
    summary["multi_system_signs"] = sum(1 for a in associations if a.multi_system)

    assignments: dict[tuple[str, int, int], System] | None = None
    no_assignments_reason = (
        "no assignments file; magnitude statistics skipped "
        "(run `penum classify` first and pass --assignments)"
    )
    if args.assignments and Path(args.assignments).exists():
        loaded = _load_assignments(args.assignments)
        try:
            assignments = {key: System(label) for key, label in loaded.items()}
        except ValueError:
            no_assignments_reason = (
                "assignments use collapsed two-way labels; magnitude statistics "
                "need 4-way assignments (re-run `penum classify` with a 4-way model)"
            )

    ratio_rows = []
    warnings: list[str] = []
    for spec_text in args.ratio or []:
        spec = _parse_ratio_spec(spec_text)
        findings, ratio_warnings = insights.ratio_check(corpus, spec, tables, assignments)
        warnings.extend(ratio_warnings)
        for f in findings:
            ratio_rows.append(
                [
                    f.tablet_id,
                    spec.antecedent, ",".join(str(l) for l in f.antecedent_lines),
                    spec.consequent, ",".join(str(l) for l in f.consequent_lines),
                    format_rational(f.observed), format_rational(f.expected),
                    f.verdict.value,
                    str(f.suggestion) if f.suggestion is not None else "-",
                ]
            )
    if args.ratio:
        _emit(
            _write_tsv(
                out / "ratios.tsv", fp,
                ["tablet", "antecedent", "antecedent_lines", "consequent",
                 "consequent_lines", "observed", "expected", "verdict", "suggestion"],
                ratio_rows,
            )
        )
        summary["ratio_findings"] = len(ratio_rows)
    for warning in warnings:
        print(f"ratio warning: {warning}", file=sys.stderr)

    if assignments is not None:
        try:
            rows = insights.magnitude_stats(corpus, assignments, tables)
        except ValueError as exc:
            print(
                f"magnitude statistics skipped: {exc}; run `penum classify` first "
                "so every numeral has an assignment",
                file=sys.stderr,
            )
        else:
            _emit(
                _write_tsv(
                    out / "magnitude_by_feature.tsv", fp,
                    ["feature_kind", "feature_value", "system", "count", "mean", "median"],
                    [
                        [
                            r.feature.kind.value, r.feature.value, r.system.value,
                            r.count, format_rational(r.mean), format_rational(r.median),
                        ]
                        for r in rows
                    ],
                )
            )
            _emit(plotting.save_magnitude_chart(rows, out / "magnitude_by_feature.png"))
            summary["magnitude_rows"] = len(rows)
    else:
        print(no_assignments_reason, file=sys.stderr)

    _emit(_write_json(out / "report_summary.json", fp, summary))
    return 0


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def _add_common(parser: argparse.ArgumentParser, seed: bool = True) -> None:
    parser.add_argument(
        "--corpus", nargs="+", required=True, help="transliteration file(s)"
    )
    parser.add_argument(
        "--tables", default=None, help="system-table config JSON (overrides --profile)"
    )
    parser.add_argument(
        "--profile", default=PROFILE_PAPER_EXAMPLES, choices=PROFILES,
        help="built-in table profile",
    )
    parser.add_argument(
        "--strict", action="store_true", help="abort on malformed input lines"
    )
    parser.add_argument("--out", default="out", help="output directory")
    if seed:
        parser.add_argument("--seed", type=int, default=0, help="RNG seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="penum",
        description="Readings and disambiguation for proto-Elamite numeral notations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="per-numeral readings and ambiguity summary")
    _add_common(p)
    p.add_argument(
        "--no-max-count", action="store_true",
        help="diagnostic: ignore bundling limits when reading",
    )
    p.add_argument(
        "--slack", type=int, default=0,
        help="extra repeats allowed past each bundling limit (lenient scans)",
    )
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("sumcheck", help="summary subset-sum disambiguation")
    _add_common(p)
    p.add_argument("--dp-bound", type=int, default=sumcheck_mod.DEFAULT_DP_BOUND)
    p.add_argument("--mitm-limit", type=int, default=sumcheck_mod.DEFAULT_MITM_LIMIT)
    p.set_defaults(func=cmd_sumcheck)

    p = sub.add_parser("train", help="train the bootstrap classifier")
    _add_common(p)
    p.add_argument(
        "--strategy", default=Strategy.FREQ_CAUTIOUS.value,
        choices=[s.value for s in Strategy],
    )
    p.add_argument("--zeta", default="0.95", help="confidence threshold (0.5, 1]")
    p.add_argument("--epsilon", default="0.1", help="rule-weight smoothing (> 0)")
    p.add_argument("--max-iterations", type=int, default=500)
    p.add_argument("--no-balance", action="store_true", help="skip seed upsampling")
    p.add_argument(
        "--two-way", action="store_true",
        help="train on collapsed labels (capacity vs rest)",
    )
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("classify", help="assign a system to every numeral")
    _add_common(p)
    p.add_argument("--model", required=True, help="model.json from `train`")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("evaluate", help="score assignments against a gold test set")
    _add_common(p)
    p.add_argument("--test-set", required=True, help="gold TSV: tablet, line, system, evidence")
    p.add_argument("--assignments", required=True, help="assignments.tsv from `classify`")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="corpus insights bundle")
    _add_common(p)
    p.add_argument("--assignments", default=None, help="assignments.tsv from `classify`")
    p.add_argument(
        "--ratio", action="append", default=[],
        metavar="ANT:CONS:P/Q[:within|adjacent]",
        help="expected magnitude ratio to check (repeatable)",
    )
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, TableError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
