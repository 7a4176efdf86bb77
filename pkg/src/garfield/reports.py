"""CSV report emission and re-ingestion.

Every report has a fixed header row (documented here and in the README)
and deterministic row ordering; numeric columns carry full precision,
with rounded values confined to the dedicated display column.
"""

from __future__ import annotations

import csv
from fractions import Fraction
from pathlib import Path

from .audit import AuditFlag
from .corpus import LoadIssue, MergeEvent, ValidationIssue
from .indices import IndexResult
from .resolver import MatchClass, ResolvedLink
from .stats import AccrualCurve, DistributionSummary

VALIDATION_HEADER = ["severity", "code", "subject", "message"]
LOAD_HEADER = ["file", "line", "reason"]
MERGE_HEADER = ["kind", "survivor", "members", "detail"]
LINKS_HEADER = [
    "citing_doc_id",
    "ref_index",
    "target_doc_id",
    "target_journal_id",
    "match_class",
    "score",
]
INDEX_HEADER = [
    "journal_id",
    "numerator_mode",
    "denominator_mode",
    "self_cites",
    "window",
    "N",
    "D",
    "value",
    "ci_low",
    "ci_high",
    "display",
    "rank",
]
DISTRIBUTION_HEADER = [
    "journal_id",
    "n_docs",
    "mean",
    "median",
    "mode",
    "min",
    "max",
    "share_uncited",
]
ACCRUAL_HEADER = ["journal_id", "cohort_year", "offset", "count"]
AUDIT_HEADER = ["code", "subject", "magnitude", "detail", "evidence"]


def _num(value) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, Fraction):
        return repr(float(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: str | Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def validation_rows(issues: list[ValidationIssue]):
    return [[i.severity, i.code, i.subject, i.message] for i in issues]


def load_rows(issues: list[LoadIssue]):
    return [[i.file, i.line, i.reason] for i in issues]


def merge_rows(events: list[MergeEvent]):
    return [[e.kind, e.survivor, ";".join(e.members), e.detail] for e in events]


def link_rows(links: list[ResolvedLink]):
    return [
        [
            l.citing_doc_id,
            l.ref_index,
            l.target_doc_id or "",
            l.target_journal_id or "",
            l.match_class.value,
            _num(l.score),
        ]
        for l in links
    ]


def read_links_csv(path: str | Path) -> list[ResolvedLink]:
    """Reload a links report (field evidence is not round-tripped)."""
    links = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            links.append(
                ResolvedLink(
                    citing_doc_id=row["citing_doc_id"],
                    ref_index=int(row["ref_index"]),
                    target_doc_id=row["target_doc_id"] or None,
                    target_journal_id=row["target_journal_id"] or None,
                    match_class=MatchClass(row["match_class"]),
                    score=float(row["score"]),
                )
            )
    links.sort(key=ResolvedLink.sort_key)
    return links


def index_rows(ranked: list[tuple[IndexResult, int | None]]):
    rows = []
    for result, rank in ranked:
        spec = result.spec
        rows.append(
            [
                result.journal_id,
                spec.numerator_mode.value,
                spec.denominator_mode.value,
                spec.self_cites.value,
                spec.window_years,
                result.numerator,
                result.denominator,
                _num(result.value),
                _num(result.ci[0]) if result.ci else "n/a",
                _num(result.ci[1]) if result.ci else "n/a",
                result.display,
                rank if rank is not None else "",
            ]
        )
    return rows


def distribution_rows(summaries: list[tuple[str, DistributionSummary]]):
    return [
        [
            jid,
            s.n_docs,
            _num(s.mean),
            _num(s.median),
            s.mode,
            s.min,
            s.max,
            _num(s.share_uncited),
        ]
        for jid, s in summaries
    ]


def accrual_rows(curves: list[AccrualCurve]):
    return [
        [c.journal_id, c.cohort_year, offset, count]
        for c in curves
        for offset, count in c.counts_by_offset
    ]


def audit_rows(flags: list[AuditFlag]):
    return [
        [f.code, f.subject, _num(f.magnitude), f.detail, ";".join(f.evidence)]
        for f in flags
    ]
