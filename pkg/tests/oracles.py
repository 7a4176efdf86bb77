"""Independent brute-force oracles.

Everything here scores every (reference, document) pair exhaustively and
counts numerators by enumerating (citing doc, reference, cohort doc)
triples. No lookup indexes, no shared kernels, no engine code: the point
is that a slow, obviously-correct implementation agrees with the fast one.
"""

from garfield.indices import (
    DenominatorMode,
    NumeratorMode,
    SelfCitePolicy,
)
from garfield.resolver import MatchClass, ResolvedLink

WEIGHTS = {"title": 0.25, "year": 0.15, "volume": 0.1, "page": 0.1, "doi": 0.4}
FIELD_ORDER = ("title", "year", "volume", "page", "doi")


def levenshtein(a: str, b: str) -> int:
    prev = list(range(len(a) + 1))
    for k, ch in enumerate(b):
        cur = [k + 1]
        for l in range(1, len(a) + 1):
            cur.append(
                min(prev[l - 1] + (a[l - 1] != ch), prev[l] + 1, cur[l - 1] + 1)
            )
        prev = cur
    return prev[len(a)]


def norm_title(s: str, trunc: int = 20) -> str:
    kept = []
    for ch in s.upper():
        if ch.isalnum():
            kept.append(ch)
        elif ch.isspace():
            kept.append(" ")
    return " ".join("".join(kept).split())[:trunc].rstrip()


def norm_page(p):
    if p is None:
        return ""
    tok = p.split("-", 1)[0].strip().upper()
    return tok.lstrip("0") or ("0" if tok else "")


def title_distance(corpus, work_norm, journal_id, trunc):
    journal = corpus.journals.get(journal_id)
    if journal is None:
        return None
    best = None
    for t, _, _ in journal.title_history:
        d = levenshtein(work_norm, norm_title(t, trunc))
        if best is None or d < best:
            best = d
    return best


def covers(journal, year):
    return any(lo <= year <= hi for lo, hi in journal.coverage)


def vol_year(journal, volume):
    if journal.volume_year_map is None:
        return None
    for v, y in journal.volume_year_map:
        if v == volume:
            return y
    return None


def statuses(corpus, ref, work_norm, doc, cfg):
    ev = {}
    d = title_distance(corpus, work_norm, doc.journal_id, cfg.truncation_length)
    if d is None or d > cfg.title_edit_distance_max:
        ev["title"] = "mismatch"
    else:
        ev["title"] = "exact" if d == 0 else "near"
    if ref.cited_year is None:
        ev["year"] = "absent"
    elif ref.cited_year == doc.year:
        ev["year"] = "exact"
    elif abs(ref.cited_year - doc.year) == 1:
        ev["year"] = "near"
    else:
        ev["year"] = "mismatch"
    if ref.cited_volume is None or doc.volume is None:
        ev["volume"] = "absent"
    else:
        ev["volume"] = "exact" if ref.cited_volume == doc.volume else "mismatch"
    rp, dp = norm_page(ref.cited_page), norm_page(doc.first_page)
    ev["page"] = "absent" if not rp or not dp else ("exact" if rp == dp else "mismatch")
    if ref.cited_doi is None or doc.doi is None:
        ev["doi"] = "absent"
    else:
        ev["doi"] = "exact" if ref.cited_doi == doc.doi else "mismatch"
    return ev


def score(ev):
    total = 0.0
    got = 0.0
    for f in FIELD_ORDER:
        s = ev.get(f, "absent")
        if s == "absent":
            continue
        total += WEIGHTS[f]
        got += WEIGHTS[f] * {"exact": 1.0, "near": 0.5, "mismatch": 0.0}[s]
    return got / total if total else 0.0


def resolve_oracle(corpus, citing_doc_id, ref, cfg) -> ResolvedLink:
    work = norm_title(ref.cited_work, cfg.truncation_length)
    maxd = cfg.title_edit_distance_max
    all_docs = [corpus.documents[i] for i in sorted(corpus.documents)]

    # rule 1: DOI
    if ref.cited_doi is not None and cfg.doi_overrides_fields:
        for doc in all_docs:
            if doc.doi == ref.cited_doi:
                ev = statuses(corpus, ref, work, doc, cfg)
                if all(s != "mismatch" for s in ev.values()):
                    return ResolvedLink(
                        citing_doc_id, ref.ref_index, doc.doc_id, None,
                        MatchClass.COMPLETE_CORRECT, 1.0, ev,
                    )
                return ResolvedLink(
                    citing_doc_id, ref.ref_index, doc.doc_id, None,
                    MatchClass.FAULTY, score(ev), ev,
                )

    def pick(cands):
        scored = []
        for doc in cands:
            ev = statuses(corpus, ref, work, doc, cfg)
            if ev["doi"] == "mismatch":
                continue
            scored.append((-score(ev), doc.doc_id, ev))
        if not scored:
            return None
        scored.sort(key=lambda t: (t[0], t[1]))
        top = [s for s in scored if s[0] == scored[0][0]]
        neg, did, ev = scored[0]
        if len(top) > 1:
            ev = dict(ev)
            ev["tie"] = f"{len(top)} candidates share score"
        return -neg, did, ev

    # rule 2: exact
    if (
        ref.cited_year is not None
        and ref.cited_volume is not None
        and norm_page(ref.cited_page)
    ):
        cands = []
        for doc in all_docs:
            d = title_distance(corpus, work, doc.journal_id, cfg.truncation_length)
            if d != 0:
                continue
            if (
                doc.year == ref.cited_year
                and doc.volume == ref.cited_volume
                and norm_page(doc.first_page) == norm_page(ref.cited_page)
                and norm_page(doc.first_page)
            ):
                cands.append(doc)
        got = pick(cands)
        if got:
            sc, did, ev = got
            return ResolvedLink(
                citing_doc_id, ref.ref_index, did, None,
                MatchClass.COMPLETE_CORRECT, sc, ev,
            )

    # rule 3: fuzzy
    cands = []
    for doc in all_docs:
        d = title_distance(corpus, work, doc.journal_id, cfg.truncation_length)
        if d is None or d > maxd:
            continue
        ev = statuses(corpus, ref, work, doc, cfg)
        locators = [ev["year"], ev["volume"], ev["page"]]
        if locators.count("exact") >= 2 and all(
            s in ("exact", "absent") for s in locators
        ):
            if ev["doi"] != "mismatch":
                cands.append(doc)
    got = pick(cands)
    if got:
        sc, did, ev = got
        return ResolvedLink(
            citing_doc_id, ref.ref_index, did, None,
            MatchClass.INCOMPLETE_CORRECT, sc, ev,
        )

    # rule 4: contradiction
    ranked = []
    for jid in sorted(corpus.journals):
        d = title_distance(corpus, work, jid, cfg.truncation_length)
        if d is not None and d <= maxd:
            ranked.append((d, jid))
    ranked.sort()
    for d, jid in ranked:
        journal = corpus.journals[jid]
        hit = False
        if ref.cited_year is not None and not covers(journal, ref.cited_year):
            hit = True
        elif ref.cited_year is not None and ref.cited_volume is not None:
            mapped = vol_year(journal, ref.cited_volume)
            hit = mapped is not None and mapped != ref.cited_year
        if not hit:
            continue
        ev = {
            "title": "exact" if d == 0 else "near",
            "year": "mismatch" if ref.cited_year is not None else "absent",
            "volume": "absent",
            "page": "absent" if not norm_page(ref.cited_page) else "mismatch",
            "doi": "absent" if ref.cited_doi is None else "mismatch",
        }
        if ref.cited_volume is not None:
            mapped = vol_year(journal, ref.cited_volume)
            if mapped is not None:
                ev["volume"] = "exact" if mapped == ref.cited_year else "mismatch"
        return ResolvedLink(
            citing_doc_id, ref.ref_index, None, jid, MatchClass.FAULTY, score(ev), ev
        )

    # rule 5: ghost
    best = "mismatch"
    if ranked:
        best = "exact" if ranked[0][0] == 0 else "near"
    ev = {
        "title": best,
        "year": "absent" if ref.cited_year is None else "mismatch",
        "volume": "absent" if ref.cited_volume is None else "mismatch",
        "page": "absent" if not norm_page(ref.cited_page) else "mismatch",
        "doi": "absent" if ref.cited_doi is None else "mismatch",
    }
    return ResolvedLink(
        citing_doc_id, ref.ref_index, None, None, MatchClass.GHOST, 0.0, ev
    )


def resolve_all_oracle(corpus, cfg):
    out = []
    for doc_id in sorted(corpus.documents):
        for ref in corpus.documents[doc_id].references:
            out.append(resolve_oracle(corpus, doc_id, ref, cfg))
    return out


# ---------------------------------------------------------------------------
# index oracle


def oracle_counts(corpus, links, journal_id, spec, cfg):
    """(numerator, denominator) by triple enumeration, no repairs."""
    journal = corpus.journals[journal_id]
    window = set(spec.window)
    entries = [
        t
        for t in journal.title_history
        if spec.merge_renames or t[1] <= spec.census_year <= t[2]
    ]
    titles = {norm_title(t[0], cfg.truncation_length) for t in entries}
    intervals = [(t[1], t[2]) for t in entries]
    exclude = spec.self_cites == SelfCitePolicy.EXCLUDE

    def in_identity(doc):
        if doc.journal_id != journal_id:
            return False
        return spec.merge_renames or any(lo <= doc.year <= hi for lo, hi in intervals)

    n = 0
    if spec.numerator_mode in (NumeratorMode.TITLE_MATCH, NumeratorMode.CITING_CHECKED):
        for did in sorted(corpus.documents):
            citing = corpus.documents[did]
            if citing.year != spec.census_year:
                continue
            if (
                spec.numerator_mode == NumeratorMode.CITING_CHECKED
                and citing.doc_type not in ("article", "review")
            ):
                continue
            if exclude and citing.journal_id == journal_id:
                continue
            for ref in citing.references:
                if ref.cited_year not in window:
                    continue
                if norm_title(ref.cited_work, cfg.truncation_length) in titles:
                    n += 1
    else:
        allowed = {MatchClass.COMPLETE_CORRECT}
        if cfg.count_incomplete_links:
            allowed.add(MatchClass.INCOMPLETE_CORRECT)
        for link in links:
            if link.match_class not in allowed or link.target_doc_id is None:
                continue
            citing = corpus.documents[link.citing_doc_id]
            target = corpus.documents[link.target_doc_id]
            if citing.year != spec.census_year:
                continue
            if citing.doc_type not in ("article", "review"):
                continue
            if target.year not in window:
                continue
            if target.doc_type not in ("article", "review"):
                continue
            if not in_identity(target):
                continue
            if exclude and citing.journal_id == journal_id:
                continue
            n += 1

    d = 0
    for did in sorted(corpus.documents):
        doc = corpus.documents[did]
        if doc.year not in window or not in_identity(doc):
            continue
        if (
            spec.denominator_mode == DenominatorMode.CITABLE_ONLY
            and doc.doc_type not in ("article", "review")
        ):
            continue
        d += 1
    return n, d
