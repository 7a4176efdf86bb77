"""Anomaly and manipulation audits over a resolved corpus.

Each audit is a pure function of (corpus, links); re-running produces
identical flags in identical order. Rates that cannot be computed
(no incoming citations, no outgoing references) are returned as None
and reported as "n/a" rather than zero.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import Corpus
from .indices import (
    IndexEngine,
    IndexVariantSpec,
    NumeratorMode,
    SelfCitePolicy,
    _resolve_journal,
)
from .resolver import MatchClass, ResolutionConfig, ResolvedLink, normalize_work_title

VERIFIED = (MatchClass.COMPLETE_CORRECT, MatchClass.INCOMPLETE_CORRECT)
BROKEN = (MatchClass.GHOST, MatchClass.FAULTY)

DEFAULT_DENYLIST = ("TEST",)


@dataclass(frozen=True)
class AuditThresholds:
    # observed norms, not laws: most journals self-cite below 20%, and
    # a quarter of a numerator arriving via editorials warrants a look
    self_citation: float = 0.20
    editorial_share: float = 0.25
    citing_error_rate: float = 0.25


@dataclass(frozen=True)
class AuditFlag:
    code: str
    subject: str
    magnitude: float
    detail: str
    evidence: tuple[str, ...] = ()


def _verified_incoming(journal, corpus, links, spec):
    journal = _resolve_journal(journal, corpus)
    members = set(journal.member_ids)
    incoming = []
    for link in links:
        if link.match_class not in VERIFIED or link.target_doc_id is None:
            continue
        target = corpus.documents.get(link.target_doc_id)
        if target is None or target.journal_id not in members:
            continue
        if target.year not in spec.window:
            continue
        citing = corpus.documents[link.citing_doc_id]
        if citing.year != spec.census_year:
            continue
        incoming.append((link, citing))
    return journal, members, incoming


def self_citation_report(
    journal, corpus: Corpus, links: list[ResolvedLink], spec: IndexVariantSpec
) -> tuple[float | None, list[tuple[str, int]]]:
    """Self-citation rate plus a per-source breakdown.

    Rate is self-citations over all verified citations received in the
    window; sources are sorted by count descending. None when the journal
    received no verified citations.
    """
    journal, members, incoming = _verified_incoming(journal, corpus, links, spec)
    by_source: dict[str, int] = {}
    self_cites = 0
    for _, citing in incoming:
        by_source[citing.journal_id] = by_source.get(citing.journal_id, 0) + 1
        if citing.journal_id in members:
            self_cites += 1
    if not incoming:
        return None, []
    sources = sorted(by_source.items(), key=lambda kv: (-kv[1], kv[0]))
    return self_cites / len(incoming), sources


def _contribution_specs(spec: IndexVariantSpec):
    """Title-match and citing-checked variants of the given window, with
    self-citations kept (excluding them would hide the manipulation)."""
    mm_spec = IndexVariantSpec(
        numerator_mode=NumeratorMode.TITLE_MATCH,
        denominator_mode=spec.denominator_mode,
        self_cites=SelfCitePolicy.INCLUDE,
        census_year=spec.census_year,
        window_years=spec.window_years,
        suspension_policy=spec.suspension_policy,
        merge_renames=spec.merge_renames,
    )
    am_spec = IndexVariantSpec(
        numerator_mode=NumeratorMode.CITING_CHECKED,
        denominator_mode=spec.denominator_mode,
        self_cites=SelfCitePolicy.INCLUDE,
        census_year=spec.census_year,
        window_years=spec.window_years,
        suspension_policy=spec.suspension_policy,
        merge_renames=spec.merge_renames,
    )
    return mm_spec, am_spec


def editorial_contribution(
    journal,
    corpus: Corpus,
    links: list[ResolvedLink],
    spec: IndexVariantSpec,
    cfg: ResolutionConfig | None = None,
) -> float | None:
    """Share of the title-match numerator contributed by non-citable
    citing documents (the editorial self-citation lever)."""
    engine = IndexEngine(corpus, links, cfg)
    mm_spec, am_spec = _contribution_specs(spec)
    total = sum(engine.numerator_by_year(journal, mm_spec).values())
    if total == 0:
        return None
    citable_part = sum(engine.numerator_by_year(journal, am_spec).values())
    return (total - citable_part) / total


def citing_error_rate(
    journal, corpus: Corpus, links: list[ResolvedLink]
) -> float | None:
    """Fraction of a journal's outgoing references that are ghost or
    faulty; a quality proxy for the citing side."""
    journal = _resolve_journal(journal, corpus)
    members = set(journal.member_ids)
    total = 0
    broken = 0
    for link in links:
        citing = corpus.documents[link.citing_doc_id]
        if citing.journal_id not in members:
            continue
        total += 1
        if link.match_class in BROKEN:
            broken += 1
    if total == 0:
        return None
    return broken / total


def temporal_anomalies(
    corpus: Corpus,
    links: list[ResolvedLink],
    denylist: tuple[str, ...] = DEFAULT_DENYLIST,
    cfg: ResolutionConfig | None = None,
) -> list[AuditFlag]:
    """Per-reference anomalies: citations predating a journal or falling
    in its coverage gaps, volume/year contradictions, and references to
    denylisted work titles that resolve to nothing real."""
    cfg = cfg or ResolutionConfig()
    deny = {normalize_work_title(t, cfg.truncation_length) for t in denylist}
    flags: list[AuditFlag] = []
    for link in sorted(links, key=ResolvedLink.sort_key):
        ref = corpus.documents[link.citing_doc_id].references[link.ref_index]
        handle = f"{link.citing_doc_id}#{link.ref_index}"
        journal = None
        if link.target_doc_id is not None:
            target = corpus.documents.get(link.target_doc_id)
            if target is not None:
                journal = corpus.journals.get(target.journal_id)
        elif link.target_journal_id is not None:
            journal = corpus.journals.get(link.target_journal_id)
        if journal is not None and ref.cited_year is not None:
            if ref.cited_year < journal.commencement_year:
                flags.append(
                    AuditFlag(
                        "PRE_COMMENCEMENT_CITE",
                        link.citing_doc_id,
                        1.0,
                        f"cites {journal.journal_id} in {ref.cited_year}, before "
                        f"commencement {journal.commencement_year}",
                        (handle, journal.journal_id),
                    )
                )
            elif journal.in_coverage_gap(ref.cited_year):
                flags.append(
                    AuditFlag(
                        "PRE_COMMENCEMENT_CITE",
                        link.citing_doc_id,
                        1.0,
                        f"cites {journal.journal_id} in coverage gap year {ref.cited_year}",
                        (handle, journal.journal_id),
                    )
                )
            if ref.cited_volume is not None:
                mapped = journal.year_for_volume(ref.cited_volume)
                if mapped is not None and mapped != ref.cited_year:
                    flags.append(
                        AuditFlag(
                            "VOLUME_YEAR_MISMATCH",
                            link.citing_doc_id,
                            1.0,
                            f"volume {ref.cited_volume} of {journal.journal_id} is "
                            f"{mapped}, reference says {ref.cited_year}",
                            (handle, journal.journal_id),
                        )
                    )
        if (
            link.match_class in BROKEN
            and normalize_work_title(ref.cited_work, cfg.truncation_length) in deny
        ):
            flags.append(
                AuditFlag(
                    "TEST_ARTIFACT",
                    link.citing_doc_id,
                    1.0,
                    f"unresolvable reference to denylisted work "
                    f"'{ref.cited_work.strip()}'",
                    (handle,),
                )
            )
    return flags


def _duplicate_targets(corpus: Corpus) -> list[AuditFlag]:
    """Documents still colliding on dedupe keys (kept apart by a doc_type
    conflict, or loaded that way): citations to them are ambiguous."""
    groups: dict[tuple, list[str]] = {}
    for doc_id in sorted(corpus.documents):
        doc = corpus.documents[doc_id]
        if doc.doi is not None:
            groups.setdefault(("doi", doc.doi), []).append(doc_id)
        surname = doc.first_author_surname()
        if surname is not None:
            groups.setdefault(
                ("core", doc.journal_id, doc.year, doc.volume, surname), []
            ).append(doc_id)
    flags = []
    seen: set[tuple[str, ...]] = set()
    for key in sorted(groups, key=str):
        ids = groups[key]
        if len(ids) < 2 or tuple(ids) in seen:
            continue
        seen.add(tuple(ids))
        flags.append(
            AuditFlag(
                "DUPLICATE_TARGET",
                ids[0],
                1.0,
                f"{len(ids)} records are plausibly one document",
                tuple(ids),
            )
        )
    return flags


def run_audit(
    corpus: Corpus,
    links: list[ResolvedLink],
    spec: IndexVariantSpec,
    cfg: ResolutionConfig | None = None,
    thresholds: AuditThresholds | None = None,
    denylist: tuple[str, ...] = DEFAULT_DENYLIST,
) -> list[AuditFlag]:
    """All audits over every journal, deterministically ordered.

    Equivalent to calling the per-journal operations one by one, but the
    link list is scanned once instead of once per journal.
    """
    thresholds = thresholds or AuditThresholds()
    engine = IndexEngine(corpus, links, cfg)
    incoming: dict[str, dict[str, int]] = {}
    outgoing_total: dict[str, int] = {}
    outgoing_broken: dict[str, int] = {}
    for link in links:
        citing = corpus.documents[link.citing_doc_id]
        outgoing_total[citing.journal_id] = outgoing_total.get(citing.journal_id, 0) + 1
        if link.match_class in BROKEN:
            outgoing_broken[citing.journal_id] = (
                outgoing_broken.get(citing.journal_id, 0) + 1
            )
        if link.match_class not in VERIFIED or link.target_doc_id is None:
            continue
        target = corpus.documents.get(link.target_doc_id)
        if (
            target is None
            or target.year not in spec.window
            or citing.year != spec.census_year
        ):
            continue
        sources = incoming.setdefault(target.journal_id, {})
        sources[citing.journal_id] = sources.get(citing.journal_id, 0) + 1

    flags: list[AuditFlag] = []
    for jid in sorted(corpus.journals):
        sources = incoming.get(jid, {})
        total_in = sum(sources.values())
        if total_in:
            rate = sources.get(jid, 0) / total_in
            if rate > thresholds.self_citation:
                top = sorted(sources.items(), key=lambda kv: (-kv[1], kv[0]))[:5]
                flags.append(
                    AuditFlag(
                        "SELF_CITATION_HIGH",
                        jid,
                        rate,
                        f"self-citation rate {rate:.4f} exceeds "
                        f"{thresholds.self_citation}",
                        tuple(f"{j}:{n}" for j, n in top),
                    )
                )
        mm_spec, am_spec = _contribution_specs(spec)
        total_mm = sum(engine.numerator_by_year(jid, mm_spec).values())
        if total_mm:
            citable_part = sum(engine.numerator_by_year(jid, am_spec).values())
            share = (total_mm - citable_part) / total_mm
            if share > thresholds.editorial_share:
                flags.append(
                    AuditFlag(
                        "EDITORIAL_NUMERATOR",
                        jid,
                        share,
                        f"non-citable citing documents contribute {share:.4f} "
                        f"of the title-match numerator",
                        (),
                    )
                )
        total_out = outgoing_total.get(jid, 0)
        if total_out:
            err = outgoing_broken.get(jid, 0) / total_out
            # fires at the threshold: a quarter of references pointing
            # nowhere is already the reported error floor
            if err >= thresholds.citing_error_rate:
                flags.append(
                    AuditFlag(
                        "GHOST_HEAVY_CITER",
                        jid,
                        err,
                        f"{err:.4f} of outgoing references are ghost or faulty",
                        (),
                    )
                )
    flags.extend(temporal_anomalies(corpus, links, denylist, cfg))
    flags.extend(_duplicate_targets(corpus))
    flags.sort(key=lambda f: (f.code, f.subject, f.detail))
    return flags
