"""Readings, disambiguation, and analytics for proto-Elamite numerals."""

from .atf import (
    Corpus,
    DigitRun,
    Entry,
    NumeralNotation,
    ParseError,
    ParseWarning,
    SignKind,
    SignToken,
    Surface,
    Tablet,
    corpus_numerals,
    extract_numerals,
    parse_corpus,
    parse_notation,
    serialize_corpus,
)
from .bootstrap import (
    DecisionList,
    Feature,
    FeatureKind,
    NumeralExample,
    Strategy,
    TrainParams,
    classify,
    collect_seeds,
    extract_features,
    predict,
    predict_corpus,
    train,
)
from .evaluation import EvalMode, Metrics, TestItem, evaluate, load_test_set
from .insights import (
    InvalidReason,
    RatioScope,
    RatioSpec,
    invalid_report,
    magnitude_stats,
    mixed_system_report,
    object_system_associations,
    ratio_check,
)
from .numsys import (
    PROFILE_FIGURE1_CHAIN,
    PROFILE_PAPER_EXAMPLES,
    ReadingSet,
    SYSTEM_ORDER,
    System,
    SystemTable,
    TableError,
    build_table,
    builtin_tables,
    canonicalize,
    is_canonical,
    load_tables_config,
    readings,
    value_of,
)
from .sumcheck import (
    SubsetSumStatus,
    SumMatch,
    SummaryCandidate,
    SystemAssignment,
    detect_summaries,
    disambiguate_by_summary,
    subset_sum,
)

__version__ = "0.1.0"
