"""Seeded random corpus generator for property and scale tests."""

import random

from garfield.corpus import Corpus, DocumentRecord, JournalRecord, RawReference

TITLE_POOL = [
    "Acta Alpha",
    "Acta Alphb",  # one edit away from Acta Alpha: exercises fuzzy ambiguity
    "Beta Bulletin",
    "Annals of Gamma Research",
    "Delta Letters",
    "Epsilon Review",
    "Journal of Zeta Studies",
    "Eta Notices",
    "Theta Quarterly",
    "Iota Proceedings",
]

DIRTY_MODES = [
    ("exact", 40),
    ("typo1", 14),
    ("typo2", 8),
    ("wrong_year", 7),
    ("near_year", 5),
    ("wrong_page", 7),
    ("drop_page", 6),
    ("drop_volume", 4),
    ("ghost_title", 5),
    ("pre_commencement", 2),
    ("doi_only", 2),
]


def _mutate(rng: random.Random, s: str, edits: int) -> str:
    chars = list(s)
    for _ in range(edits):
        if not chars:
            chars = ["X"]
            continue
        op = rng.choice(("sub", "ins", "del"))
        pos = rng.randrange(len(chars))
        if op == "sub":
            chars[pos] = rng.choice("ABCDEFGHX")
        elif op == "ins":
            chars.insert(pos, rng.choice("ABCDEFGHX"))
        elif len(chars) > 1:
            del chars[pos]
    return "".join(chars)


def _pick_mode(rng: random.Random) -> str:
    total = sum(w for _, w in DIRTY_MODES)
    roll = rng.randrange(total)
    for mode, w in DIRTY_MODES:
        roll -= w
        if roll < 0:
            return mode
    return "exact"


def _reference(rng: random.Random, target: DocumentRecord, title: str, mode: str) -> dict:
    ref = {
        "cited_work": title,
        "cited_year": target.year,
        "cited_volume": target.volume,
        "cited_page": target.first_page,
        "cited_doi": target.doi if target.doi and rng.random() < 0.5 else None,
    }
    if mode == "typo1":
        ref["cited_work"] = _mutate(rng, title, 1)
        ref["cited_doi"] = None
    elif mode == "typo2":
        ref["cited_work"] = _mutate(rng, title, 2)
        ref["cited_doi"] = None
    elif mode == "wrong_year":
        ref["cited_year"] = target.year + rng.choice((-3, -2, 2, 3))
        ref["cited_doi"] = None
    elif mode == "near_year":
        ref["cited_year"] = target.year + rng.choice((-1, 1))
    elif mode == "wrong_page":
        ref["cited_page"] = str(rng.randint(900, 999))
        ref["cited_doi"] = None
    elif mode == "drop_page":
        ref["cited_page"] = None
    elif mode == "drop_volume":
        ref["cited_volume"] = None
    elif mode == "ghost_title":
        ref["cited_work"] = rng.choice(("Unknown Gazette", "Phantom Reports"))
        ref["cited_doi"] = None
    elif mode == "pre_commencement":
        ref["cited_year"] = 1980
        ref["cited_doi"] = None
    elif mode == "doi_only":
        if target.doi:
            ref.update(cited_year=None, cited_volume=None, cited_page=None,
                       cited_doi=target.doi)
    return ref


def random_corpus(
    seed: int,
    max_docs: int = 50,
    clean: bool = False,
    n_journals: int | None = None,
    citable_citing_only: bool = False,
) -> Corpus:
    rng = random.Random(seed)
    n_journals = n_journals or rng.randint(2, 4)
    titles = rng.sample(TITLE_POOL, n_journals)
    journals = {}
    for i, title in enumerate(titles):
        jid = f"J{i:02d}"
        commence = rng.choice((1990, 1995, 2000))
        if rng.random() < 0.25:
            coverage = ((commence, 2004), (2006, 2024))
        else:
            coverage = ((commence, 2024),)
        vmap = None
        if rng.random() < 0.5:
            vmap = tuple((y - 1970, y) for y in range(2004, 2011))
        journals[jid] = JournalRecord(
            journal_id=jid,
            issns=(f"{1000 + i}-{2000 + i}",),
            title_history=((title, commence, 2024),),
            commencement_year=commence,
            coverage=coverage,
            volume_year_map=vmap,
        )

    jids = sorted(journals)
    n_docs = rng.randint(max(6, max_docs // 2), max_docs)
    n_citing = max(2, n_docs // 3)
    documents = {}
    targets = []
    for i in range(n_docs - n_citing):
        jid = rng.choice(jids)
        year = rng.choice((2006, 2007, 2008, 2008, 2009, 2009))
        doc_type = rng.choices(
            ("article", "review", "editorial", "letter"), weights=(6, 1, 2, 1)
        )[0]
        doc = DocumentRecord(
            doc_id=f"d{i:03d}",
            journal_id=jid,
            year=year,
            title=f"Study number {i}",
            authors=((f"Surname{i}", "A"),),
            doc_type=doc_type,
            volume=year - 1970 if rng.random() < 0.9 else None,
            first_page=str(rng.randint(1, 400)),
            doi=f"10.{i}/x{i}" if rng.random() < 0.4 else None,
        )
        documents[doc.doc_id] = doc
        targets.append(doc)

    for i in range(n_citing):
        jid = rng.choice(jids)
        doc_type = (
            "article"
            if citable_citing_only
            else rng.choices(("article", "review", "editorial"), weights=(6, 1, 3))[0]
        )
        refs = []
        for k in range(rng.randint(0, 6)):
            if not targets:
                break
            target = rng.choice(targets)
            title = journals[target.journal_id].title_history[0][0]
            mode = "exact" if clean else _pick_mode(rng)
            refs.append(_reference(rng, target, title, mode))
        doc = DocumentRecord(
            doc_id=f"c{i:03d}",
            journal_id=jid,
            year=2010,
            title=f"Citing item {i}",
            authors=((f"Citer{i}", "B"),),
            doc_type=doc_type,
            volume=2010 - 1970,
            first_page=str(rng.randint(1, 400)),
            doi=None,
            references=tuple(
                RawReference(ref_index=k, **{key: r[key] for key in
                             ("cited_work", "cited_year", "cited_volume",
                              "cited_page", "cited_doi")})
                for k, r in enumerate(refs)
            ),
        )
        documents[doc.doc_id] = doc

    return Corpus(journals=journals, documents=documents)


def big_corpus(seed: int, n_refs: int = 100_000) -> Corpus:
    """Scale corpus: ~n_refs references from census-year documents."""
    rng = random.Random(seed)
    journals = {}
    for i in range(50):
        jid = f"J{i:02d}"
        journals[jid] = JournalRecord(
            journal_id=jid,
            issns=(f"{3000 + i}-{4000 + i}",),
            title_history=((f"Journal of Topic {i:02d}", 1990, 2024),),
            commencement_year=1990,
            coverage=((1990, 2024),),
            volume_year_map=tuple((y - 1970, y) for y in range(2006, 2011)),
        )
    jids = sorted(journals)
    documents = {}
    targets = []
    for i in range(3000):
        jid = jids[i % len(jids)]
        year = 2008 if i % 2 else 2009
        doc = DocumentRecord(
            doc_id=f"d{i:05d}",
            journal_id=jid,
            year=year,
            title=f"Paper {i}",
            authors=((f"Author{i}", "A"),),
            doc_type="article" if i % 7 else "editorial",
            volume=year - 1970,
            first_page=str(1 + (i % 397)),
            doi=f"10.9/{i}" if i % 3 == 0 else None,
        )
        documents[doc.doc_id] = doc
        targets.append(doc)
    refs_per_doc = 20
    n_citing = n_refs // refs_per_doc
    for i in range(n_citing):
        jid = jids[i % len(jids)]
        refs = []
        for k in range(refs_per_doc):
            target = targets[rng.randrange(len(targets))]
            title = journals[target.journal_id].title_history[0][0]
            refs.append(_reference(rng, target, title, _pick_mode(rng)))
        documents[f"c{i:05d}"] = DocumentRecord(
            doc_id=f"c{i:05d}",
            journal_id=jid,
            year=2010,
            title=f"Citing {i}",
            authors=((f"Citer{i}", "C"),),
            doc_type="article" if i % 5 else "editorial",
            volume=40,
            first_page=str(1 + (i % 211)),
            references=tuple(
                RawReference(ref_index=k, **{key: r[key] for key in
                             ("cited_work", "cited_year", "cited_volume",
                              "cited_page", "cited_doi")})
                for k, r in enumerate(refs)
            ),
        )
    return Corpus(journals=journals, documents=documents)
