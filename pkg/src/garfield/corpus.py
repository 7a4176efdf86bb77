"""Corpus data model: ingest, validation, deduplication, and lookups.

Input is line-delimited JSON (one journal or document per line, with
references embedded in the document record). Records are stored verbatim
except for first_page, which keeps only the first token before a dash at
ingest. A loaded corpus is immutable and safe for concurrent reads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

CITABLE_TYPES = frozenset({"article", "review"})
DOC_TYPES = frozenset(
    {"article", "review", "editorial", "letter", "correction", "news", "other"}
)

MALFORMED_LINE_TOLERANCE = 0.10


class CorpusError(Exception):
    """Base class for corpus ingest errors."""


class FileMissing(CorpusError):
    pass


class SchemaError(CorpusError):
    """A record is missing a required field or violates a type invariant."""


class TooManyMalformed(CorpusError):
    """More than 10% of a file's lines failed to parse."""


def normalize_page(page: str | None) -> str:
    """Canonical page token for comparison: first dash token, upper, no leading zeros."""
    if page is None:
        return ""
    token = page.split("-", 1)[0].strip().upper()
    return token.lstrip("0") or ("0" if token else "")


def ingest_page(page: str | None) -> str | None:
    """Page string as stored: first token before a dash, whitespace trimmed."""
    if page is None:
        return None
    return page.split("-", 1)[0].strip()


@dataclass(frozen=True)
class RawReference:
    """One as-cited reference, fields kept verbatim (possibly wrong or missing)."""

    ref_index: int
    cited_work: str
    cited_author: tuple[str, str] | None = None
    cited_year: int | None = None
    cited_volume: int | None = None
    cited_page: str | None = None
    cited_doi: str | None = None
    cited_title: str | None = None

    def content_key(self) -> tuple:
        """Identity of the reference ignoring its position in the list."""
        return (
            self.cited_author,
            self.cited_work,
            self.cited_year,
            self.cited_volume,
            self.cited_page,
            self.cited_doi,
            self.cited_title,
        )


@dataclass(frozen=True)
class JournalRecord:
    journal_id: str
    issns: tuple[str, ...]
    title_history: tuple[tuple[str, int, int], ...]
    commencement_year: int
    coverage: tuple[tuple[int, int], ...]
    volume_year_map: tuple[tuple[int, int], ...] | None = None
    # Lineage this record stands for; more than one entry only on virtual
    # records produced by merge_journal_history.
    member_ids: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.member_ids:
            object.__setattr__(self, "member_ids", (self.journal_id,))

    def covers(self, year: int) -> bool:
        return any(lo <= year <= hi for lo, hi in self.coverage)

    def in_coverage_gap(self, year: int) -> bool:
        """True for years the journal existed but was not indexed."""
        return year >= self.commencement_year and not self.covers(year)

    def year_for_volume(self, volume: int) -> int | None:
        if self.volume_year_map is None:
            return None
        for vol, year in self.volume_year_map:
            if vol == volume:
                return year
        return None

    def titles_in_force(self, year: int | None) -> tuple[str, ...]:
        """Titles valid at the given year (all titles when year is None)."""
        if year is None:
            return tuple(t for t, _, _ in self.title_history)
        return tuple(t for t, lo, hi in self.title_history if lo <= year <= hi)


@dataclass(frozen=True)
class DocumentRecord:
    doc_id: str
    journal_id: str
    year: int
    title: str
    authors: tuple[tuple[str, str], ...]
    doc_type: str
    volume: int | None = None
    first_page: str | None = None
    doi: str | None = None
    references: tuple[RawReference, ...] = ()

    @property
    def citable(self) -> bool:
        return self.doc_type in CITABLE_TYPES

    def first_author_surname(self) -> str | None:
        return self.authors[0][0].casefold() if self.authors else None

    def filled_field_count(self) -> int:
        """Non-empty optional fields, used to pick dedupe survivors."""
        return sum(
            1
            for v in (
                self.volume,
                self.first_page,
                self.doi,
                self.title or None,
                self.authors or None,
                self.references or None,
            )
            if v is not None
        )


@dataclass(frozen=True)
class ValidationIssue:
    severity: str
    code: str
    subject: str
    message: str


@dataclass(frozen=True)
class LoadIssue:
    file: str
    line: int
    reason: str


@dataclass(frozen=True)
class MergeEvent:
    kind: str  # "merge" or "conflict"
    survivor: str
    members: tuple[str, ...]
    detail: str


@dataclass
class Corpus:
    """Immutable document/journal store with derived lookup indexes."""

    journals: dict[str, JournalRecord]
    documents: dict[str, DocumentRecord]
    _indexes: dict | None = field(default=None, compare=False, repr=False)

    def journal_for(self, doc: DocumentRecord) -> JournalRecord | None:
        return self.journals.get(doc.journal_id)

    @property
    def indexes(self) -> dict:
        """Pure-function lookups over journals+documents, built on first use.

        doi:    doi -> doc_id
        exact:  (journal_id, year, volume, page_norm) -> [doc_id]
        yv/yp/vp: two-field blocks by (journal_id, a, b) -> [doc_id]
        by_journal_year: (journal_id, year) -> [doc_id]
        by_year: year -> [doc_id]
        """
        if self._indexes is None:
            doi: dict[str, str] = {}
            exact: dict[tuple, list[str]] = {}
            yv: dict[tuple, list[str]] = {}
            yp: dict[tuple, list[str]] = {}
            vp: dict[tuple, list[str]] = {}
            by_jy: dict[tuple, list[str]] = {}
            by_year: dict[int, list[str]] = {}
            for doc_id in sorted(self.documents):
                doc = self.documents[doc_id]
                if doc.doi is not None and doc.doi not in doi:
                    doi[doc.doi] = doc_id
                page = normalize_page(doc.first_page) if doc.first_page else None
                j = doc.journal_id
                by_jy.setdefault((j, doc.year), []).append(doc_id)
                by_year.setdefault(doc.year, []).append(doc_id)
                if doc.volume is not None:
                    yv.setdefault((j, doc.year, doc.volume), []).append(doc_id)
                if page:
                    yp.setdefault((j, doc.year, page), []).append(doc_id)
                if doc.volume is not None and page:
                    vp.setdefault((j, doc.volume, page), []).append(doc_id)
                if doc.volume is not None and page:
                    exact.setdefault((j, doc.year, doc.volume, page), []).append(doc_id)
            self._indexes = {
                "doi": doi,
                "exact": exact,
                "yv": yv,
                "yp": yp,
                "vp": vp,
                "by_journal_year": by_jy,
                "by_year": by_year,
            }
        return self._indexes

    def total_reference_count(self) -> int:
        return sum(len(d.references) for d in self.documents.values())


# ---------------------------------------------------------------------------
# parsing


def _require(obj: dict, key: str):
    if key not in obj or obj[key] is None:
        raise SchemaError(f"missing required field '{key}'")
    return obj[key]


def _parse_journal(obj: dict) -> JournalRecord:
    journal_id = str(_require(obj, "journal_id"))
    commencement = int(_require(obj, "commencement_year"))
    history = tuple(
        (str(t), int(lo), int(hi)) for t, lo, hi in _require(obj, "title_history")
    )
    coverage = tuple((int(lo), int(hi)) for lo, hi in _require(obj, "coverage"))
    for (a0, a1), (b0, b1) in zip(coverage, coverage[1:]):
        if b0 <= a1:
            raise SchemaError("coverage intervals overlap or are unsorted")
    spans = sorted((lo, hi) for _, lo, hi in history)
    for (_, a1), (b0, _) in zip(spans, spans[1:]):
        if b0 <= a1:
            raise SchemaError("title_history intervals overlap")
    if spans and spans[0][0] < commencement:
        raise SchemaError("title_history precedes commencement_year")
    vmap = obj.get("volume_year_map")
    volume_year_map = None
    if vmap is not None:
        volume_year_map = tuple((int(v), int(y)) for v, y in vmap)
        vols = [v for v, _ in volume_year_map]
        if len(vols) != len(set(vols)):
            raise SchemaError("volume_year_map maps a volume to multiple years")
    return JournalRecord(
        journal_id=journal_id,
        issns=tuple(str(s) for s in obj.get("issns", [])),
        title_history=history,
        commencement_year=commencement,
        coverage=coverage,
        volume_year_map=volume_year_map,
    )


def _parse_reference(obj: dict, position: int) -> RawReference:
    work = str(_require(obj, "cited_work"))
    if not work.strip():
        raise SchemaError("cited_work is empty")
    author = obj.get("cited_author")
    return RawReference(
        ref_index=position,
        cited_work=work,
        cited_author=(str(author[0]), str(author[1])) if author else None,
        cited_year=int(obj["cited_year"]) if obj.get("cited_year") is not None else None,
        cited_volume=(
            int(obj["cited_volume"]) if obj.get("cited_volume") is not None else None
        ),
        cited_page=str(obj["cited_page"]) if obj.get("cited_page") is not None else None,
        cited_doi=str(obj["cited_doi"]) if obj.get("cited_doi") is not None else None,
        cited_title=(
            str(obj["cited_title"]) if obj.get("cited_title") is not None else None
        ),
    )


def _parse_document(obj: dict) -> DocumentRecord:
    doc_type = str(_require(obj, "doc_type"))
    if doc_type not in DOC_TYPES:
        raise SchemaError(f"unknown doc_type '{doc_type}'")
    refs = tuple(
        _parse_reference(r, i) for i, r in enumerate(obj.get("references", []))
    )
    return DocumentRecord(
        doc_id=str(_require(obj, "doc_id")),
        journal_id=str(_require(obj, "journal_id")),
        year=int(_require(obj, "year")),
        title=str(_require(obj, "title")),
        authors=tuple((str(s), str(i)) for s, i in _require(obj, "authors")),
        doc_type=doc_type,
        volume=int(obj["volume"]) if obj.get("volume") is not None else None,
        first_page=ingest_page(obj.get("first_page")),
        doi=str(obj["doi"]) if obj.get("doi") is not None else None,
        references=refs,
    )


def _load_lines(path: Path, parse, seen_ids: set, issues: list[LoadIssue]):
    records = []
    total = 0
    bad = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            total += 1
            try:
                rec = parse(json.loads(line))
                key = rec.journal_id if isinstance(rec, JournalRecord) else rec.doc_id
                if key in seen_ids:
                    raise SchemaError(f"duplicate id '{key}'")
                seen_ids.add(key)
                records.append(rec)
            except (json.JSONDecodeError, SchemaError, ValueError, TypeError, KeyError) as e:
                bad += 1
                issues.append(LoadIssue(file=path.name, line=lineno, reason=str(e)))
    if total and bad / total > MALFORMED_LINE_TOLERANCE:
        raise TooManyMalformed(
            f"{path}: {bad} of {total} lines malformed (>{MALFORMED_LINE_TOLERANCE:.0%})"
        )
    return records


def load_corpus(
    journals_path: str | Path, documents_path: str | Path
) -> tuple[Corpus, list[LoadIssue]]:
    """Load a corpus from JSONL files.

    Malformed lines are collected into the returned load report rather
    than aborting, unless more than 10% of a file's lines are bad.
    """
    journals_path = Path(journals_path)
    documents_path = Path(documents_path)
    for p in (journals_path, documents_path):
        if not p.exists():
            raise FileMissing(str(p))
    issues: list[LoadIssue] = []
    journals = _load_lines(journals_path, _parse_journal, set(), issues)
    documents = _load_lines(documents_path, _parse_document, set(), issues)
    corpus = Corpus(
        journals={j.journal_id: j for j in journals},
        documents={d.doc_id: d for d in documents},
    )
    return corpus, issues


def save_corpus(
    corpus: Corpus, journals_path: str | Path, documents_path: str | Path
) -> None:
    """Write a corpus back out in the ingest schema (sorted, round-trippable)."""

    def drop_none(obj: dict) -> dict:
        return {k: v for k, v in obj.items() if v is not None}

    with open(journals_path, "w", encoding="utf-8") as fh:
        for jid in sorted(corpus.journals):
            j = corpus.journals[jid]
            fh.write(
                json.dumps(
                    drop_none(
                        {
                            "journal_id": j.journal_id,
                            "issns": list(j.issns),
                            "title_history": [list(t) for t in j.title_history],
                            "commencement_year": j.commencement_year,
                            "coverage": [list(c) for c in j.coverage],
                            "volume_year_map": (
                                [list(v) for v in j.volume_year_map]
                                if j.volume_year_map is not None
                                else None
                            ),
                        }
                    ),
                    sort_keys=True,
                )
                + "\n"
            )
    with open(documents_path, "w", encoding="utf-8") as fh:
        for did in sorted(corpus.documents):
            d = corpus.documents[did]
            refs = [
                drop_none(
                    {
                        "cited_author": list(r.cited_author) if r.cited_author else None,
                        "cited_work": r.cited_work,
                        "cited_year": r.cited_year,
                        "cited_volume": r.cited_volume,
                        "cited_page": r.cited_page,
                        "cited_doi": r.cited_doi,
                        "cited_title": r.cited_title,
                    }
                )
                for r in d.references
            ]
            fh.write(
                json.dumps(
                    drop_none(
                        {
                            "doc_id": d.doc_id,
                            "journal_id": d.journal_id,
                            "year": d.year,
                            "volume": d.volume,
                            "first_page": d.first_page,
                            "doi": d.doi,
                            "title": d.title,
                            "authors": [list(a) for a in d.authors],
                            "doc_type": d.doc_type,
                            "references": refs,
                        }
                    ),
                    sort_keys=True,
                )
                + "\n"
            )


# ---------------------------------------------------------------------------
# validation


def validate_corpus(corpus: Corpus) -> list[ValidationIssue]:
    """Report-only consistency checks, deterministically ordered."""
    issues: list[ValidationIssue] = []
    by_doi: dict[str, list[str]] = {}
    for doc_id in corpus.documents:
        doc = corpus.documents[doc_id]
        journal = corpus.journals.get(doc.journal_id)
        if journal is None:
            issues.append(
                ValidationIssue(
                    "error",
                    "UNKNOWN_JOURNAL",
                    doc_id,
                    f"journal_id '{doc.journal_id}' not in corpus",
                )
            )
            continue
        if doc.year < journal.commencement_year:
            issues.append(
                ValidationIssue(
                    "warning",
                    "PRE_COMMENCEMENT",
                    doc_id,
                    f"document year {doc.year} precedes commencement "
                    f"{journal.commencement_year} of {journal.journal_id}",
                )
            )
        elif not journal.covers(doc.year):
            issues.append(
                ValidationIssue(
                    "warning",
                    "COVERAGE_GAP",
                    doc_id,
                    f"document year {doc.year} falls in a coverage gap of "
                    f"{journal.journal_id}",
                )
            )
        if doc.volume is not None:
            mapped = journal.year_for_volume(doc.volume)
            if mapped is not None and mapped != doc.year:
                issues.append(
                    ValidationIssue(
                        "warning",
                        "VOLUME_YEAR_MISMATCH",
                        doc_id,
                        f"volume {doc.volume} maps to {mapped}, document says {doc.year}",
                    )
                )
        if doc.doi is not None:
            by_doi.setdefault(doc.doi, []).append(doc_id)
    for doi, ids in by_doi.items():
        if len(ids) > 1:
            ids = sorted(ids)
            issues.append(
                ValidationIssue(
                    "warning",
                    "DUPLICATE_DOI",
                    ids[0],
                    f"doi '{doi}' shared by {','.join(ids)}",
                )
            )
    issues.sort(key=lambda i: (i.subject, i.code, i.message))
    return issues


# ---------------------------------------------------------------------------
# deduplication


def _merge_references(docs: list[DocumentRecord]) -> tuple[RawReference, ...]:
    merged: list[RawReference] = []
    seen: set[tuple] = set()
    for doc in docs:
        for ref in doc.references:
            key = ref.content_key()
            if key in seen:
                continue
            seen.add(key)
            merged.append(ref)
    return tuple(replace(r, ref_index=i) for i, r in enumerate(merged))


def dedupe_documents(corpus: Corpus) -> tuple[Corpus, list[MergeEvent]]:
    """Merge duplicate document records.

    Duplicates are records sharing a DOI, or sharing journal, year and
    volume with the same first-author surname (page numbers are not part
    of the key: near-duplicate records routinely disagree on pagination).
    The survivor is the record with the most non-empty fields, ties going
    to the smallest doc_id; reference lists are concatenated with exact
    duplicates removed. Groups mixing doc_types are kept apart and
    reported as conflicts. Idempotent.
    """
    parent: dict[str, str] = {d: d for d in corpus.documents}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a: str, b: str) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    by_doi: dict[str, str] = {}
    by_core: dict[tuple, str] = {}
    for doc_id in sorted(corpus.documents):
        doc = corpus.documents[doc_id]
        if doc.doi is not None:
            if doc.doi in by_doi:
                union(by_doi[doc.doi], doc_id)
            else:
                by_doi[doc.doi] = doc_id
        surname = doc.first_author_surname()
        if surname is not None:
            key = (doc.journal_id, doc.year, doc.volume, surname)
            if key in by_core:
                union(by_core[key], doc_id)
            else:
                by_core[key] = doc_id

    groups: dict[str, list[str]] = {}
    for doc_id in sorted(corpus.documents):
        groups.setdefault(find(doc_id), []).append(doc_id)

    report: list[MergeEvent] = []
    new_docs: dict[str, DocumentRecord] = {}
    for root in sorted(groups):
        members = groups[root]
        if len(members) == 1:
            new_docs[members[0]] = corpus.documents[members[0]]
            continue
        docs = [corpus.documents[m] for m in members]
        types = {d.doc_type for d in docs}
        if len(types) > 1:
            report.append(
                MergeEvent(
                    kind="conflict",
                    survivor=members[0],
                    members=tuple(members),
                    detail=f"doc_type disagreement: {','.join(sorted(types))}",
                )
            )
            for d in docs:
                new_docs[d.doc_id] = d
            continue
        survivor = None
        for d in sorted(docs, key=lambda d: d.doc_id):
            if survivor is None or d.filled_field_count() > survivor.filled_field_count():
                survivor = d
        others = [d for d in docs if d.doc_id != survivor.doc_id]
        merged = replace(
            survivor,
            references=_merge_references([survivor] + sorted(others, key=lambda d: d.doc_id)),
        )
        new_docs[survivor.doc_id] = merged
        report.append(
            MergeEvent(
                kind="merge",
                survivor=survivor.doc_id,
                members=tuple(members),
                detail="duplicate records merged",
            )
        )
    return Corpus(journals=dict(corpus.journals), documents=new_docs), report
