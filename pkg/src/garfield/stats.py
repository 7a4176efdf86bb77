"""Distribution statistics and citation-accrual curves.

Citation counts are heavily skewed, so the mean alone misleads; the
summary carries mode, median, extremes and the uncited share alongside
it. Accrual curves bucket verified citations by years since publication
and drive the window-length heuristic.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

from .corpus import Corpus
from .indices import EmptyCohort, IndexVariantSpec, UnknownJournal, _resolve_journal
from .resolver import MatchClass, ResolvedLink


class DegenerateCurve(Exception):
    """No citations at positive offsets: no window can cover anything."""


VERIFIED = (MatchClass.COMPLETE_CORRECT, MatchClass.INCOMPLETE_CORRECT)


@dataclass(frozen=True)
class DistributionSummary:
    n_docs: int
    mean: Fraction
    median: Fraction
    mode: int
    min: int
    max: int
    share_uncited: Fraction


@dataclass(frozen=True)
class AccrualCurve:
    journal_id: str
    cohort_year: int
    counts_by_offset: tuple[tuple[int, int], ...]
    peak_offset: int
    # citations dated before the cohort year; audit material, not curve data
    pre_publication: tuple[tuple[str, int], ...] = ()


def distribution_summary(per_document_counts) -> DistributionSummary:
    """Summary statistics; ties on the mode go to the smallest value."""
    counts = sorted(per_document_counts)
    if not counts:
        raise EmptyCohort("distribution over an empty cohort")
    n = len(counts)
    mid = n // 2
    median = (
        Fraction(counts[mid])
        if n % 2
        else Fraction(counts[mid - 1] + counts[mid], 2)
    )
    freq = Counter(counts)
    best = max(freq.values())
    mode = min(v for v, f in freq.items() if f == best)
    return DistributionSummary(
        n_docs=n,
        mean=Fraction(sum(counts), n),
        median=median,
        mode=mode,
        min=counts[0],
        max=counts[-1],
        share_uncited=Fraction(sum(1 for c in counts if c == 0), n),
    )


def per_document_citation_counts(
    journal, corpus: Corpus, links: list[ResolvedLink], spec: IndexVariantSpec
) -> dict[str, int]:
    """Verified census-year citations per citable cohort document."""
    journal = _resolve_journal(journal, corpus)
    counts: dict[str, int] = {}
    for jid in journal.member_ids:
        for year in spec.window:
            for doc_id in corpus.indexes["by_journal_year"].get((jid, year), []):
                if corpus.documents[doc_id].citable:
                    counts[doc_id] = 0
    for link in links:
        if link.match_class not in VERIFIED or link.target_doc_id not in counts:
            continue
        citing = corpus.documents[link.citing_doc_id]
        if citing.year == spec.census_year:
            counts[link.target_doc_id] += 1
    return counts


def accrual_curve(
    journal, cohort_year: int, corpus: Corpus, links: list[ResolvedLink]
) -> AccrualCurve:
    """Verified citations to one publication-year cohort, bucketed by
    years since publication. Citations from any document type count;
    negative offsets are collected separately for the audit."""
    journal = _resolve_journal(journal, corpus)
    cohort: set[str] = set()
    for jid in journal.member_ids:
        for doc_id in corpus.indexes["by_journal_year"].get((jid, cohort_year), []):
            if corpus.documents[doc_id].citable:
                cohort.add(doc_id)
    if not cohort:
        raise EmptyCohort(
            f"{journal.journal_id}: no citable documents in {cohort_year}"
        )
    buckets: Counter[int] = Counter()
    early: list[tuple[str, int]] = []
    for link in links:
        if link.match_class not in VERIFIED or link.target_doc_id not in cohort:
            continue
        offset = corpus.documents[link.citing_doc_id].year - cohort_year
        if offset < 0:
            early.append((link.citing_doc_id, link.ref_index))
        else:
            buckets[offset] += 1
    counts = tuple(sorted(buckets.items()))
    peak = 0
    if counts:
        best = max(c for _, c in counts)
        peak = min(o for o, c in counts if c == best)
    return AccrualCurve(
        journal_id=journal.journal_id,
        cohort_year=cohort_year,
        counts_by_offset=counts,
        peak_offset=peak,
        pre_publication=tuple(sorted(early)),
    )


def suggest_window(curve: AccrualCurve, coverage_target: float) -> int:
    """Smallest window length whose offsets 1..W capture the target share
    of window-eligible citations (offset >= 1)."""
    if not 0 < coverage_target <= 1:
        raise ValueError("coverage_target must be in (0, 1]")
    eligible = {o: c for o, c in curve.counts_by_offset if o >= 1}
    total = sum(eligible.values())
    if total == 0:
        raise DegenerateCurve(
            f"{curve.journal_id}/{curve.cohort_year}: no citations after publication year"
        )
    target = coverage_target * total
    cum = 0
    for w in range(1, max(eligible) + 1):
        cum += eligible.get(w, 0)
        if cum >= target:
            return w
    return max(eligible)
