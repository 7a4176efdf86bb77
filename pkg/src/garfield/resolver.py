"""Reference resolution: links each raw reference to a document, a journal,
or nothing, and classifies the link.

The four link classes partition (in)complete x (in)correct:

* COMPLETE_CORRECT   - a document was identified and every field the
  reference carries agrees with it (exactly, or near for title typos
  within the edit-distance budget and +/-1 print-vs-online years).
* INCOMPLETE_CORRECT - a document was identified despite typos or
  missing fields (fuzzy title plus at least two exact locator fields).
* FAULTY             - fields are complete enough to point somewhere but
  contradict the target (a DOI contradicting the stated fields, or a
  year/volume impossible for the identified journal).
* GHOST              - no known document matches.

Resolution never mutates stored references; it only classifies.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

from . import kernels
from .corpus import Corpus, DocumentRecord, RawReference, normalize_page


class MatchClass(str, Enum):
    COMPLETE_CORRECT = "complete_correct"
    INCOMPLETE_CORRECT = "incomplete_correct"
    FAULTY = "faulty"
    GHOST = "ghost"


@dataclass(frozen=True)
class ResolutionConfig:
    title_edit_distance_max: int = 2
    truncation_length: int = 20
    # whether the verified-link numerator also counts INCOMPLETE_CORRECT
    count_incomplete_links: bool = True
    doi_overrides_fields: bool = True

    def __post_init__(self):
        if self.title_edit_distance_max < 0:
            raise ValueError("title_edit_distance_max must be >= 0")
        if self.truncation_length < 1:
            raise ValueError("truncation_length must be >= 1")


@dataclass(frozen=True)
class ResolvedLink:
    citing_doc_id: str
    ref_index: int
    target_doc_id: str | None
    target_journal_id: str | None
    match_class: MatchClass
    score: float
    field_evidence: dict = field(default_factory=dict)

    def sort_key(self) -> tuple[str, int]:
        return (self.citing_doc_id, self.ref_index)


EXACT = "exact"
NEAR = "near"
MISMATCH = "mismatch"
ABSENT = "absent"

_WEIGHTS = {"doi": 0.4, "title": 0.25, "year": 0.15, "volume": 0.1, "page": 0.1}
_CREDIT = {EXACT: 1.0, NEAR: 0.5, MISMATCH: 0.0}


def normalize_work_title(title: str, truncation_length: int = 20) -> str:
    """Uppercase, drop punctuation, collapse whitespace, truncate."""
    kept = [
        ch if ch.isalnum() else " "
        for ch in title.upper()
        if ch.isalnum() or ch.isspace()
    ]
    collapsed = " ".join("".join(kept).split())
    return collapsed[:truncation_length].rstrip()


def _score(evidence: dict) -> float:
    weight = 0.0
    got = 0.0
    for fld, status in evidence.items():
        if fld not in _WEIGHTS or status == ABSENT:
            continue
        weight += _WEIGHTS[fld]
        got += _WEIGHTS[fld] * _CREDIT[status]
    return got / weight if weight else 0.0


class _Resolver:
    """Prepared lookup state for one (corpus, config) pair."""

    def __init__(self, corpus: Corpus, cfg: ResolutionConfig):
        self.corpus = corpus
        self.cfg = cfg
        self.idx = corpus.indexes
        # normalized title -> journal ids carrying it anywhere in their history
        self.title_owners: dict[str, list[str]] = {}
        for jid in sorted(corpus.journals):
            journal = corpus.journals[jid]
            for title, _, _ in journal.title_history:
                norm = normalize_work_title(title, cfg.truncation_length)
                owners = self.title_owners.setdefault(norm, [])
                if jid not in owners:
                    owners.append(jid)
        self._titles = sorted(self.title_owners)
        # per normalized work: [(distance, journal_id)] sorted, distance <= max
        self._fuzzy: dict[str, list[tuple[int, str]]] = {}

    def prepare(self, works: list[str]) -> None:
        """Batch-compute title distances for every normalized work string."""
        todo = sorted({w for w in works if w not in self._fuzzy})
        if not todo:
            return
        maxd = self.cfg.title_edit_distance_max
        if not self._titles:
            for w in todo:
                self._fuzzy[w] = []
            return
        q_codes, q_lens = kernels.encode_strings(todo)
        c_codes, c_lens = kernels.encode_strings(self._titles)
        dist = kernels.levenshtein_matrix(q_codes, q_lens, c_codes, c_lens, maxd)
        for i, work in enumerate(todo):
            found: dict[str, int] = {}
            for j, title in enumerate(self._titles):
                d = int(dist[i, j])
                if d > maxd:
                    continue
                for jid in self.title_owners[title]:
                    if jid not in found or d < found[jid]:
                        found[jid] = d
            self._fuzzy[work] = sorted((d, jid) for jid, d in found.items())

    def journal_candidates(self, work_norm: str) -> list[tuple[int, str]]:
        if work_norm not in self._fuzzy:
            self.prepare([work_norm])
        return self._fuzzy[work_norm]

    # -- field evidence -----------------------------------------------------

    def _title_status(self, work_norm: str, journal_id: str | None) -> str:
        if journal_id is None:
            return MISMATCH
        for d, jid in self.journal_candidates(work_norm):
            if jid == journal_id:
                return EXACT if d == 0 else NEAR
        return MISMATCH

    def evidence_against_doc(
        self, ref: RawReference, work_norm: str, doc: DocumentRecord
    ) -> dict:
        ev = {}
        ev["title"] = self._title_status(work_norm, doc.journal_id)
        if ref.cited_year is None:
            ev["year"] = ABSENT
        elif ref.cited_year == doc.year:
            ev["year"] = EXACT
        elif abs(ref.cited_year - doc.year) == 1:
            ev["year"] = NEAR
        else:
            ev["year"] = MISMATCH
        if ref.cited_volume is None or doc.volume is None:
            ev["volume"] = ABSENT
        else:
            ev["volume"] = EXACT if ref.cited_volume == doc.volume else MISMATCH
        ref_page = normalize_page(ref.cited_page)
        doc_page = normalize_page(doc.first_page)
        if not ref_page or not doc_page:
            ev["page"] = ABSENT
        else:
            ev["page"] = EXACT if ref_page == doc_page else MISMATCH
        if ref.cited_doi is None or doc.doi is None:
            ev["doi"] = ABSENT
        else:
            ev["doi"] = EXACT if ref.cited_doi == doc.doi else MISMATCH
        return ev

    # -- rule cascade -------------------------------------------------------

    def resolve(self, doc_id: str, ref: RawReference) -> ResolvedLink:
        work_norm = normalize_work_title(ref.cited_work, self.cfg.truncation_length)

        # 1. DOI rule: a resolving DOI picks the target outright.
        if ref.cited_doi is not None and self.cfg.doi_overrides_fields:
            target_id = self.idx["doi"].get(ref.cited_doi)
            if target_id is not None:
                target = self.corpus.documents[target_id]
                ev = self.evidence_against_doc(ref, work_norm, target)
                clean = all(s in (EXACT, NEAR, ABSENT) for s in ev.values())
                if clean:
                    return ResolvedLink(
                        doc_id, ref.ref_index, target_id, None,
                        MatchClass.COMPLETE_CORRECT, 1.0, ev,
                    )
                return ResolvedLink(
                    doc_id, ref.ref_index, target_id, None,
                    MatchClass.FAULTY, _score(ev), ev,
                )

        journals = self.journal_candidates(work_norm)

        # 2. exact rule: exact title and exact year/volume/page.
        if (
            ref.cited_year is not None
            and ref.cited_volume is not None
            and normalize_page(ref.cited_page)
        ):
            page = normalize_page(ref.cited_page)
            candidates = []
            for d, jid in journals:
                if d != 0:
                    continue
                key = (jid, ref.cited_year, ref.cited_volume, page)
                candidates.extend(self.idx["exact"].get(key, []))
            picked = self._pick(ref, work_norm, candidates)
            if picked is not None:
                return self._link(doc_id, ref, picked, MatchClass.COMPLETE_CORRECT)

        # 3. fuzzy rule: near title, two exact locator fields, no contradiction.
        candidates = self._fuzzy_candidates(ref, journals)
        picked = self._pick(ref, work_norm, candidates)
        if picked is not None:
            return self._link(doc_id, ref, picked, MatchClass.INCOMPLETE_CORRECT)

        # 4. contradiction rule: journal identified, fields impossible for it.
        for d, jid in journals:
            journal = self.corpus.journals[jid]
            contradiction = None
            if ref.cited_year is not None and not journal.covers(ref.cited_year):
                contradiction = "year"
            elif ref.cited_year is not None and ref.cited_volume is not None:
                mapped = journal.year_for_volume(ref.cited_volume)
                if mapped is not None and mapped != ref.cited_year:
                    contradiction = "volume"
            if contradiction is None:
                continue
            ev = {
                "title": EXACT if d == 0 else NEAR,
                "year": MISMATCH if ref.cited_year is not None else ABSENT,
                "volume": ABSENT,
                "page": ABSENT if not normalize_page(ref.cited_page) else MISMATCH,
                "doi": ABSENT if ref.cited_doi is None else MISMATCH,
            }
            if ref.cited_volume is not None:
                mapped = journal.year_for_volume(ref.cited_volume)
                if mapped is None:
                    ev["volume"] = ABSENT
                else:
                    ev["volume"] = EXACT if mapped == ref.cited_year else MISMATCH
            return ResolvedLink(
                doc_id, ref.ref_index, None, jid, MatchClass.FAULTY, _score(ev), ev
            )

        # 5. ghost.
        best_title = MISMATCH
        if journals:
            best_title = EXACT if journals[0][0] == 0 else NEAR
        ev = {
            "title": best_title,
            "year": ABSENT if ref.cited_year is None else MISMATCH,
            "volume": ABSENT if ref.cited_volume is None else MISMATCH,
            "page": ABSENT if not normalize_page(ref.cited_page) else MISMATCH,
            "doi": ABSENT if ref.cited_doi is None else MISMATCH,
        }
        return ResolvedLink(
            doc_id, ref.ref_index, None, None, MatchClass.GHOST, 0.0, ev
        )

    def _fuzzy_candidates(
        self, ref: RawReference, journals: list[tuple[int, str]]
    ) -> list[str]:
        page = normalize_page(ref.cited_page)
        pairs = []
        if ref.cited_year is not None and ref.cited_volume is not None:
            pairs.append(("yv", ref.cited_year, ref.cited_volume))
        if ref.cited_year is not None and page:
            pairs.append(("yp", ref.cited_year, page))
        if ref.cited_volume is not None and page:
            pairs.append(("vp", ref.cited_volume, page))
        if not pairs:
            return []
        seen = []
        for _, jid in journals:
            for block, a, b in pairs:
                for cand in self.idx[block].get((jid, a, b), []):
                    if cand not in seen:
                        seen.append(cand)
        out = []
        for cand in seen:
            doc = self.corpus.documents[cand]
            statuses = []
            if ref.cited_year is not None:
                statuses.append(EXACT if ref.cited_year == doc.year else MISMATCH)
            else:
                statuses.append(ABSENT)
            if ref.cited_volume is not None and doc.volume is not None:
                statuses.append(EXACT if ref.cited_volume == doc.volume else MISMATCH)
            else:
                statuses.append(ABSENT)
            doc_page = normalize_page(doc.first_page)
            if page and doc_page:
                statuses.append(EXACT if page == doc_page else MISMATCH)
            else:
                statuses.append(ABSENT)
            if statuses.count(EXACT) < 2 or MISMATCH in statuses:
                continue
            if (
                ref.cited_doi is not None
                and doc.doi is not None
                and ref.cited_doi != doc.doi
            ):
                continue
            out.append(cand)
        return out

    def _pick(self, ref: RawReference, work_norm: str, candidates: list[str]):
        """Score candidates; best score wins, ties go to the smallest doc_id."""
        if not candidates:
            return None
        scored = []
        for cand in sorted(set(candidates)):
            ev = self.evidence_against_doc(ref, work_norm, self.corpus.documents[cand])
            if ev["doi"] == MISMATCH:
                continue
            scored.append((-_score(ev), cand, ev))
        if not scored:
            return None
        scored.sort(key=lambda t: (t[0], t[1]))
        top = [s for s in scored if s[0] == scored[0][0]]
        neg_score, cand, ev = scored[0]
        if len(top) > 1:
            ev = dict(ev)
            ev["tie"] = f"{len(top)} candidates share score"
        return (-neg_score, cand, ev)

    def _link(self, doc_id, ref, picked, match_class) -> ResolvedLink:
        score, cand, ev = picked
        return ResolvedLink(doc_id, ref.ref_index, cand, None, match_class, score, ev)


def resolve_reference(
    ref: RawReference, corpus: Corpus, cfg: ResolutionConfig | None = None
) -> ResolvedLink:
    """Classify a single reference. Every reference receives a class."""
    cfg = cfg or ResolutionConfig()
    return _Resolver(corpus, cfg).resolve("", ref)


def resolve_corpus(
    corpus: Corpus, cfg: ResolutionConfig | None = None, workers: int = 1
) -> list[ResolvedLink]:
    """Resolve every reference in the corpus.

    Output is sorted by (citing_doc_id, ref_index) and does not depend on
    the worker count: references are independent and the prepared lookup
    state is read-only.
    """
    cfg = cfg or ResolutionConfig()
    resolver = _Resolver(corpus, cfg)
    works = [
        normalize_work_title(r.cited_work, cfg.truncation_length)
        for d in corpus.documents.values()
        for r in d.references
    ]
    resolver.prepare(works)
    tasks = [
        (doc_id, ref)
        for doc_id in sorted(corpus.documents)
        for ref in corpus.documents[doc_id].references
    ]
    if workers <= 1:
        links = [resolver.resolve(doc_id, ref) for doc_id, ref in tasks]
    else:
        chunks = [tasks[i::workers] for i in range(workers)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(
                lambda chunk: [resolver.resolve(d, r) for d, r in chunk], chunks
            )
            links = [link for part in parts for link in part]
    links.sort(key=ResolvedLink.sort_key)
    return links
