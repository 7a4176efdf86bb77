"""Citation-index variants over a resolved corpus.

An index is citations-received divided by cited documents over a trailing
window. Three numerator modes trade fault-tolerance for verification:

* TITLE_MATCH ("mm")   - any reference whose cited work string equals a
  journal title and whose cited year is in the window; no check that the
  cited document exists.
* CITING_CHECKED ("am") - the same count restricted to citable citing
  documents (articles and reviews), dropping editorial-origin citations.
* ONE_TO_ONE ("oneone") - verified links only: citable citing document,
  resolved citable target in the window.

Denominators count citable items or all items. Self-citations, rename
merging, suspension repairs, bootstrap confidence intervals, display
rounding and competition ranking are all policy knobs on the variant.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal, localcontext
from enum import Enum
from fractions import Fraction

import numpy as np

from . import kernels
from .corpus import Corpus, JournalRecord
from .resolver import MatchClass, ResolutionConfig, ResolvedLink, normalize_work_title


class NumeratorMode(str, Enum):
    TITLE_MATCH = "mm"
    CITING_CHECKED = "am"
    ONE_TO_ONE = "oneone"


class DenominatorMode(str, Enum):
    CITABLE_ONLY = "citable"
    ALL_ITEMS = "all"


class SelfCitePolicy(str, Enum):
    INCLUDE = "include"
    EXCLUDE = "exclude"


class SuspensionPolicy(str, Enum):
    OMIT_CITATIONS = "omit-cites"
    INCLUDE_DOCUMENTS = "include-docs"


class RoundingPolicy(str, Enum):
    THREE_DECIMAL = "3dp"
    ONE_DECIMAL = "1dp"
    ERROR_AWARE = "error-aware"


class IndexError_(Exception):
    """Base class for index computation errors."""


class UnknownJournal(IndexError_):
    pass


class UndefinedIndex(IndexError_):
    """Empty cohort: the denominator is zero, the index has no value."""


class MissingDocuments(IndexError_):
    pass


class OverlapConflict(IndexError_):
    pass


class MixedSpecs(IndexError_):
    pass


class EmptyCohort(IndexError_):
    pass


@dataclass(frozen=True)
class IndexVariantSpec:
    numerator_mode: NumeratorMode = NumeratorMode.ONE_TO_ONE
    denominator_mode: DenominatorMode = DenominatorMode.CITABLE_ONLY
    self_cites: SelfCitePolicy = SelfCitePolicy.INCLUDE
    census_year: int = 0
    window_years: int = 2
    suspension_policy: SuspensionPolicy = SuspensionPolicy.OMIT_CITATIONS
    merge_renames: bool = True

    def __post_init__(self):
        if self.window_years < 1:
            raise ValueError("window_years must be >= 1")

    @property
    def window(self) -> range:
        """Cohort years [census - W, census - 1]."""
        return range(self.census_year - self.window_years, self.census_year)


@dataclass(frozen=True)
class IndexResult:
    journal_id: str
    spec: IndexVariantSpec | None
    numerator: int
    denominator: int
    value: Fraction | None
    ci: tuple[float, float] | None
    display: str
    per_year: tuple[tuple[int, int, int], ...] = ()  # (year, cites, docs)


# ---------------------------------------------------------------------------
# rounding and ranking


def _to_decimal(value) -> Decimal:
    if isinstance(value, Fraction):
        with localcontext() as ctx:
            ctx.prec = 50
            return Decimal(value.numerator) / Decimal(value.denominator)
    return Decimal(str(value))


def round_display(
    value, policy: RoundingPolicy, ci: tuple[float, float] | None = None
) -> str:
    """Half-away-from-zero rounding to the policy's number of decimals.

    ERROR_AWARE rounds at the first digit where the CI half-width exceeds
    half a unit (capped at 3 decimals; one decimal when no CI is given).
    """
    if policy == RoundingPolicy.THREE_DECIMAL:
        places = 3
    elif policy == RoundingPolicy.ONE_DECIMAL:
        places = 1
    else:
        if ci is None:
            places = 1
        else:
            half = abs(ci[1] - ci[0]) / 2.0
            places = 3
            for d in range(0, 4):
                if half > 0.5 * 10 ** (-d):
                    places = d
                    break
    quantum = Decimal(1).scaleb(-places)
    return str(_to_decimal(value).quantize(quantum, rounding=ROUND_HALF_UP))


def index_from_counts(
    numerator: int,
    denominator: int,
    rounding: RoundingPolicy = RoundingPolicy.THREE_DECIMAL,
    ci: tuple[float, float] | None = None,
    journal_id: str = "",
    spec: IndexVariantSpec | None = None,
) -> IndexResult:
    """Build a result straight from counts (no corpus walk)."""
    if denominator == 0:
        return IndexResult(journal_id, spec, numerator, 0, None, ci, "n/a")
    value = Fraction(numerator, denominator)
    return IndexResult(
        journal_id, spec, numerator, denominator, value, ci,
        round_display(value, rounding, ci),
    )


def rank_journals(
    results: list[IndexResult], policy: RoundingPolicy
) -> list[tuple[int, str, str]]:
    """Competition ranking ("1224") on the rounded display value.

    Tied display values share the smallest rank; journal_id only breaks
    output order, never ranks. Undefined results ("n/a") sort last and
    share the rank after all ranked journals.
    """
    if not results:
        return []
    spec0 = results[0].spec
    if any(r.spec != spec0 for r in results):
        raise MixedSpecs("rank_journals requires results from a single variant spec")
    defined = []
    undefined = []
    for r in results:
        if r.value is None:
            undefined.append(r)
        else:
            defined.append((Decimal(round_display(r.value, policy, r.ci)), r))
    defined.sort(key=lambda t: (-t[0], t[1].journal_id))
    out: list[tuple[int, str, str]] = []
    prev_val = None
    prev_rank = 0
    for pos, (val, r) in enumerate(defined, 1):
        rank = prev_rank if val == prev_val else pos
        out.append((rank, r.journal_id, str(val)))
        prev_val, prev_rank = val, rank
    tail_rank = len(defined) + 1
    for r in sorted(undefined, key=lambda r: r.journal_id):
        out.append((tail_rank, r.journal_id, "n/a"))
    return out


# ---------------------------------------------------------------------------
# bootstrap confidence intervals


def bootstrap_ci(
    per_document_citation_counts,
    level: float = 0.95,
    replicates: int = 1000,
    seed: int = 0,
) -> tuple[float, float]:
    """Percentile bootstrap interval for the mean per-document citation count.

    Documents are resampled with replacement; replicate r uses a stream
    derived from seed + r, so the result is independent of evaluation
    order and exactly reproducible for a fixed seed.
    """
    counts = np.asarray(list(per_document_citation_counts), dtype=np.int64)
    if counts.size == 0:
        raise EmptyCohort("bootstrap over an empty cohort")
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    means = kernels.bootstrap_means(counts, int(replicates), int(seed))
    alpha = (1.0 - level) / 2.0
    lo, hi = np.quantile(means, [alpha, 1.0 - alpha])
    return float(lo), float(hi)


# ---------------------------------------------------------------------------
# journal lineages


def merge_journal_history(journal_ids: list[str], corpus: Corpus) -> JournalRecord:
    """Combine a rename lineage into one virtual journal.

    The union covers title histories, coverage, ISSNs and the volume map;
    self-citation identity and document ownership span every member.
    """
    if not journal_ids:
        raise ValueError("merge_journal_history needs at least one journal id")
    members = []
    for jid in journal_ids:
        if jid not in corpus.journals:
            raise UnknownJournal(jid)
        members.append(corpus.journals[jid])
    if len(members) == 1:
        return members[0]

    seen_vol_year: dict[tuple[int, int], str] = {}
    for m in members:
        for doc in corpus.documents.values():
            if doc.journal_id != m.journal_id or doc.volume is None:
                continue
            key = (doc.year, doc.volume)
            owner = seen_vol_year.get(key)
            if owner is not None and owner != m.journal_id:
                raise OverlapConflict(
                    f"{owner} and {m.journal_id} both publish volume {key[1]} in {key[0]}"
                )
            seen_vol_year[key] = m.journal_id
    merged_map: dict[int, int] = {}
    has_map = False
    for m in members:
        if m.volume_year_map is None:
            continue
        has_map = True
        for vol, year in m.volume_year_map:
            if vol in merged_map and merged_map[vol] != year:
                raise OverlapConflict(
                    f"volume {vol} maps to both {merged_map[vol]} and {year}"
                )
            merged_map[vol] = year

    coverage = sorted(c for m in members for c in m.coverage)
    coalesced: list[tuple[int, int]] = []
    for lo, hi in coverage:
        if coalesced and lo <= coalesced[-1][1] + 1:
            coalesced[-1] = (coalesced[-1][0], max(coalesced[-1][1], hi))
        else:
            coalesced.append((lo, hi))
    member_ids = tuple(sorted(m.journal_id for m in members))
    return JournalRecord(
        journal_id=member_ids[0],
        issns=tuple(sorted({s for m in members for s in m.issns})),
        title_history=tuple(
            sorted((t for m in members for t in m.title_history), key=lambda t: (t[1], t[0]))
        ),
        commencement_year=min(m.commencement_year for m in members),
        coverage=tuple(coalesced),
        volume_year_map=tuple(sorted(merged_map.items())) if has_map else None,
        member_ids=member_ids,
    )


# ---------------------------------------------------------------------------
# suspension repair


def check_window_consistency(
    journal: JournalRecord,
    spec: IndexVariantSpec,
    corpus: Corpus | None = None,
) -> list[tuple[int, str]]:
    """Repairs needed so numerator and denominator cover the same years.

    Cohort years inside a coverage gap either lose their citations
    ("omit_citations") or contribute their documents ("include_documents",
    which requires those documents in the corpus).
    """
    repairs: list[tuple[int, str]] = []
    for year in spec.window:
        if not journal.in_coverage_gap(year):
            continue
        if spec.suspension_policy == SuspensionPolicy.OMIT_CITATIONS:
            repairs.append((year, "omit_citations"))
        else:
            if corpus is not None:
                present = any(
                    corpus.indexes["by_journal_year"].get((jid, year))
                    for jid in journal.member_ids
                )
                if not present:
                    raise MissingDocuments(
                        f"{journal.journal_id}: no documents for gap year {year}"
                    )
            repairs.append((year, "include_documents"))
    return repairs


# ---------------------------------------------------------------------------
# counting engine


def _resolve_journal(journal, corpus: Corpus) -> JournalRecord:
    if isinstance(journal, JournalRecord):
        return journal
    if journal not in corpus.journals:
        raise UnknownJournal(str(journal))
    return corpus.journals[journal]


class IndexEngine:
    """Shared counting state for one (corpus, links, resolution-config).

    Building the engine once and asking it for many journal/variant
    combinations avoids rescanning the reference lists per journal;
    results are identical to the module-level one-shot functions.
    """

    def __init__(
        self,
        corpus: Corpus,
        links: list[ResolvedLink],
        cfg: ResolutionConfig | None = None,
    ):
        self.corpus = corpus
        self.cfg = cfg or ResolutionConfig()
        self.links_by_target: dict[str, list[ResolvedLink]] = {}
        self.link_by_ref: dict[tuple[str, int], ResolvedLink] = {}
        for link in links:
            self.link_by_ref[(link.citing_doc_id, link.ref_index)] = link
            if link.target_doc_id is not None:
                target = corpus.documents.get(link.target_doc_id)
                if target is not None:
                    self.links_by_target.setdefault(target.journal_id, []).append(link)
        # per census year: normalized work -> [(doc_id, ref_index, journal, citable, cited_year)]
        self._ref_buckets: dict[int, dict[str, list[tuple]]] = {}

    def _refs_for_census(self, census: int) -> dict[str, list[tuple]]:
        if census not in self._ref_buckets:
            buckets: dict[str, list[tuple]] = {}
            for doc_id in sorted(self.corpus.documents):
                doc = self.corpus.documents[doc_id]
                if doc.year != census:
                    continue
                for ref in doc.references:
                    if ref.cited_year is None:
                        continue
                    work = normalize_work_title(
                        ref.cited_work, self.cfg.truncation_length
                    )
                    buckets.setdefault(work, []).append(
                        (doc_id, ref.ref_index, doc.journal_id, doc.citable, ref.cited_year)
                    )
            self._ref_buckets[census] = buckets
        return self._ref_buckets[census]

    def _identity_titles(self, journal: JournalRecord, spec: IndexVariantSpec):
        """Normalized title strings the journal answers to under this spec."""
        if spec.merge_renames:
            entries = journal.title_history
        else:
            entries = tuple(
                t for t in journal.title_history if t[1] <= spec.census_year <= t[2]
            )
        titles = {
            normalize_work_title(t[0], self.cfg.truncation_length) for t in entries
        }
        intervals = tuple((t[1], t[2]) for t in entries)
        return sorted(titles), intervals

    def _doc_in_identity(self, doc, journal, spec, intervals) -> bool:
        if doc.journal_id not in journal.member_ids:
            return False
        if spec.merge_renames:
            return True
        return any(lo <= doc.year <= hi for lo, hi in intervals)

    def numerator_by_year(
        self, journal, spec: IndexVariantSpec
    ) -> dict[int, int]:
        journal = _resolve_journal(journal, self.corpus)
        window = spec.window
        out = {y: 0 for y in window}
        members = set(journal.member_ids)
        exclude_self = spec.self_cites == SelfCitePolicy.EXCLUDE
        if spec.numerator_mode in (NumeratorMode.TITLE_MATCH, NumeratorMode.CITING_CHECKED):
            titles, _ = self._identity_titles(journal, spec)
            buckets = self._refs_for_census(spec.census_year)
            citable_only = spec.numerator_mode == NumeratorMode.CITING_CHECKED
            for title in titles:
                for _, _, citing_jid, citable, cited_year in buckets.get(title, []):
                    if cited_year not in window:
                        continue
                    if citable_only and not citable:
                        continue
                    if exclude_self and citing_jid in members:
                        continue
                    out[cited_year] += 1
            return out
        _, intervals = self._identity_titles(journal, spec)
        for jid in journal.member_ids:
            for link in self.links_by_target.get(jid, []):
                if not self._link_verified(link):
                    continue
                citing = self.corpus.documents[link.citing_doc_id]
                if citing.year != spec.census_year or not citing.citable:
                    continue
                target = self.corpus.documents[link.target_doc_id]
                if target.year not in window or not target.citable:
                    continue
                if not self._doc_in_identity(target, journal, spec, intervals):
                    continue
                if exclude_self and citing.journal_id in members:
                    continue
                out[target.year] += 1
        return out

    def _link_verified(self, link: ResolvedLink) -> bool:
        if link.match_class == MatchClass.COMPLETE_CORRECT:
            return True
        return (
            link.match_class == MatchClass.INCOMPLETE_CORRECT
            and self.cfg.count_incomplete_links
        )

    def denominator_by_year(
        self, journal, spec: IndexVariantSpec
    ) -> dict[int, int]:
        journal = _resolve_journal(journal, self.corpus)
        out = {y: 0 for y in spec.window}
        _, intervals = self._identity_titles(journal, spec)
        citable_only = spec.denominator_mode == DenominatorMode.CITABLE_ONLY
        for jid in journal.member_ids:
            for year in spec.window:
                for doc_id in self.corpus.indexes["by_journal_year"].get((jid, year), []):
                    doc = self.corpus.documents[doc_id]
                    if citable_only and not doc.citable:
                        continue
                    if not self._doc_in_identity(doc, journal, spec, intervals):
                        continue
                    out[year] += 1
        return out

    def _attribution(
        self, journal, spec: IndexVariantSpec, allowed_years, denominator_docs
    ) -> tuple[dict[str, int], int]:
        """Split the numerator into per-cohort-document counts plus an
        unattributable remainder (title/year matches with no verified
        target in the cohort)."""
        journal = _resolve_journal(journal, self.corpus)
        members = set(journal.member_ids)
        exclude_self = spec.self_cites == SelfCitePolicy.EXCLUDE
        counts = {d: 0 for d in denominator_docs}
        ghost = 0
        if spec.numerator_mode == NumeratorMode.ONE_TO_ONE:
            _, intervals = self._identity_titles(journal, spec)
            for jid in journal.member_ids:
                for link in self.links_by_target.get(jid, []):
                    if not self._link_verified(link):
                        continue
                    citing = self.corpus.documents[link.citing_doc_id]
                    if citing.year != spec.census_year or not citing.citable:
                        continue
                    target = self.corpus.documents[link.target_doc_id]
                    if target.year not in allowed_years or not target.citable:
                        continue
                    if not self._doc_in_identity(target, journal, spec, intervals):
                        continue
                    if exclude_self and citing.journal_id in members:
                        continue
                    counts[link.target_doc_id] += 1
            return counts, ghost
        titles, _ = self._identity_titles(journal, spec)
        buckets = self._refs_for_census(spec.census_year)
        citable_only = spec.numerator_mode == NumeratorMode.CITING_CHECKED
        for title in titles:
            for doc_id, ref_index, citing_jid, citable, cited_year in buckets.get(title, []):
                if cited_year not in allowed_years:
                    continue
                if citable_only and not citable:
                    continue
                if exclude_self and citing_jid in members:
                    continue
                link = self.link_by_ref.get((doc_id, ref_index))
                if (
                    link is not None
                    and link.target_doc_id in counts
                    and self.corpus.documents[link.target_doc_id].year == cited_year
                ):
                    counts[link.target_doc_id] += 1
                else:
                    ghost += 1
        return counts, ghost

    def compute_index(
        self,
        journal,
        spec: IndexVariantSpec,
        *,
        replicates: int = 0,
        level: float = 0.95,
        seed: int | None = None,
        rounding: RoundingPolicy = RoundingPolicy.THREE_DECIMAL,
        allow_undefined: bool = False,
    ) -> IndexResult:
        journal = _resolve_journal(journal, self.corpus)
        cites = self.numerator_by_year(journal, spec)
        docs = self.denominator_by_year(journal, spec)
        repairs = check_window_consistency(journal, spec, self.corpus)
        for year, action in repairs:
            if action == "omit_citations":
                cites[year] = 0
                docs[year] = 0
        allowed_years = {
            y for y in spec.window if (y, "omit_citations") not in repairs
        }
        numerator = sum(cites.values())
        denominator = sum(docs.values())
        per_year = tuple((y, cites[y], docs[y]) for y in spec.window)
        if denominator == 0:
            if allow_undefined:
                return IndexResult(
                    journal.journal_id, spec, numerator, 0, None, None, "n/a", per_year
                )
            raise UndefinedIndex(
                f"{journal.journal_id}: no documents in window {list(spec.window)}"
            )
        value = Fraction(numerator, denominator)
        ci = None
        if replicates and seed is not None:
            den_docs = self._denominator_doc_ids(journal, spec, allowed_years)
            counts, ghost = self._attribution(journal, spec, allowed_years, den_docs)
            vector = [counts[d] for d in sorted(counts)]
            lo, hi = bootstrap_ci(vector, level=level, replicates=replicates, seed=seed)
            shift = ghost / denominator
            ci = (lo + shift, hi + shift)
        display = round_display(value, rounding, ci)
        return IndexResult(
            journal.journal_id, spec, numerator, denominator, value, ci, display, per_year
        )

    def _denominator_doc_ids(self, journal, spec, allowed_years) -> list[str]:
        journal = _resolve_journal(journal, self.corpus)
        _, intervals = self._identity_titles(journal, spec)
        citable_only = spec.denominator_mode == DenominatorMode.CITABLE_ONLY
        out = []
        for jid in journal.member_ids:
            for year in sorted(allowed_years):
                for doc_id in self.corpus.indexes["by_journal_year"].get((jid, year), []):
                    doc = self.corpus.documents[doc_id]
                    if citable_only and not doc.citable:
                        continue
                    if not self._doc_in_identity(doc, journal, spec, intervals):
                        continue
                    out.append(doc_id)
        return sorted(out)


# ---------------------------------------------------------------------------
# one-shot convenience wrappers (the module-level operation surface)


def compute_numerator(
    journal,
    corpus: Corpus,
    links: list[ResolvedLink],
    spec: IndexVariantSpec,
    cfg: ResolutionConfig | None = None,
) -> int:
    """Raw numerator for one journal/variant (no suspension repair)."""
    engine = IndexEngine(corpus, links, cfg)
    return sum(engine.numerator_by_year(journal, spec).values())


def compute_denominator(
    journal,
    corpus: Corpus,
    spec: IndexVariantSpec,
    cfg: ResolutionConfig | None = None,
) -> int:
    """Raw denominator for one journal/variant (no suspension repair)."""
    engine = IndexEngine(corpus, [], cfg)
    return sum(engine.denominator_by_year(journal, spec).values())


def compute_index(
    journal,
    corpus: Corpus,
    links: list[ResolvedLink],
    spec: IndexVariantSpec,
    cfg: ResolutionConfig | None = None,
    **kwargs,
) -> IndexResult:
    """Full index for one journal/variant, suspension repair applied."""
    return IndexEngine(corpus, links, cfg).compute_index(journal, spec, **kwargs)
