"""Citation-index engine: reference resolution, index variants, audits."""

from .corpus import (
    Corpus,
    DocumentRecord,
    JournalRecord,
    RawReference,
    dedupe_documents,
    load_corpus,
    save_corpus,
    validate_corpus,
)
from .indices import (
    DenominatorMode,
    IndexEngine,
    IndexResult,
    IndexVariantSpec,
    NumeratorMode,
    RoundingPolicy,
    SelfCitePolicy,
    SuspensionPolicy,
    bootstrap_ci,
    check_window_consistency,
    compute_denominator,
    compute_index,
    compute_numerator,
    index_from_counts,
    merge_journal_history,
    rank_journals,
    round_display,
)
from .resolver import (
    MatchClass,
    ResolutionConfig,
    ResolvedLink,
    normalize_work_title,
    resolve_corpus,
    resolve_reference,
)
from .stats import (
    AccrualCurve,
    DistributionSummary,
    accrual_curve,
    distribution_summary,
    suggest_window,
)

__version__ = "0.1.0"
