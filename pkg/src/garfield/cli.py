"""Command-line pipeline.

Subcommands mirror the stages: validate, resolve, compute, stats, audit,
and report (all-in-one). Each stage consumes the previous stage's files,
so they can run independently. Configuration comes from a flat key=value
file (GARFIELD_CONFIG or --config) with every key overridable by the
command-line flag of the same name.

Exit codes: 0 ok, 1 config error, 2 ingest failure, 3 audit threshold
breach (audit subcommand always; report only under --strict).
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import audit as audit_mod
from . import reports
from .corpus import (
    Corpus,
    CorpusError,
    dedupe_documents,
    load_corpus,
    validate_corpus,
)
from .indices import (
    DenominatorMode,
    IndexEngine,
    IndexVariantSpec,
    NumeratorMode,
    RoundingPolicy,
    SelfCitePolicy,
    SuspensionPolicy,
    rank_journals,
)
from .resolver import ResolutionConfig, resolve_corpus
from .stats import (
    EmptyCohort,
    accrual_curve,
    distribution_summary,
    per_document_citation_counts,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INGEST = 2
EXIT_AUDIT = 3


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    journals: Path
    documents: Path
    out: Path
    census_year: int | None
    window: int
    numerators: list[NumeratorMode]
    denominator: DenominatorMode
    self_cites: SelfCitePolicy
    suspension: SuspensionPolicy
    merge_renames: bool
    resolution: ResolutionConfig
    replicates: int
    level: float
    seed: int | None
    rounding: RoundingPolicy
    thresholds: audit_mod.AuditThresholds
    denylist: tuple[str, ...]
    workers: int
    strict: bool


_DEFAULTS = {
    "out": "out",
    "census-year": None,
    "window": 2,
    "numerator": None,  # None = all three variants
    "denominator": "citable",
    "self-cites": "include",
    "suspension": "omit-cites",
    "merge-renames": True,
    "edit-distance-max": 2,
    "truncation-length": 20,
    "count-incomplete": True,
    "doi-overrides": True,
    "replicates": 1000,
    "level": 0.95,
    "seed": None,
    "rounding": "3dp",
    "self-cite-threshold": 0.20,
    "editorial-threshold": 0.25,
    "error-threshold": 0.25,
    "denylist": "TEST",
    "workers": 1,
    "strict": False,
}


def parse_config_file(path: Path) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def _as_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    if str(value).lower() in ("1", "true", "yes", "on"):
        return True
    if str(value).lower() in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {value!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value config file (or GARFIELD_CONFIG)")
    common.add_argument("--journals", help="journals JSONL file")
    common.add_argument("--documents", help="documents JSONL file")
    common.add_argument("--out", help="output directory (default: out)")
    common.add_argument("--census-year", type=int, dest="census_year")
    common.add_argument("--window", type=int, help="window length in years")
    common.add_argument("--numerator", choices=["mm", "am", "oneone"])
    common.add_argument("--denominator", choices=["citable", "all"])
    common.add_argument("--self-cites", choices=["include", "exclude"], dest="self_cites")
    common.add_argument(
        "--suspension", choices=["omit-cites", "include-docs"], dest="suspension"
    )
    common.add_argument(
        "--merge-renames", action=argparse.BooleanOptionalAction, dest="merge_renames"
    )
    common.add_argument("--edit-distance-max", type=int, dest="edit_distance_max")
    common.add_argument("--truncation-length", type=int, dest="truncation_length")
    common.add_argument(
        "--count-incomplete", action=argparse.BooleanOptionalAction,
        dest="count_incomplete",
    )
    common.add_argument(
        "--doi-overrides", action=argparse.BooleanOptionalAction, dest="doi_overrides"
    )
    common.add_argument("--seed", type=int)
    common.add_argument("--replicates", type=int)
    common.add_argument("--level", type=float)
    common.add_argument("--rounding", choices=["3dp", "1dp", "error-aware"])
    common.add_argument("--self-cite-threshold", type=float, dest="self_cite_threshold")
    common.add_argument("--editorial-threshold", type=float, dest="editorial_threshold")
    common.add_argument("--error-threshold", type=float, dest="error_threshold")
    common.add_argument("--denylist", help="comma-separated denylisted work titles")
    common.add_argument("--workers", type=int)
    common.add_argument("--strict", action="store_true", default=None)

    parser = argparse.ArgumentParser(
        prog="garfield", description="citation-index pipeline"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in [
        ("validate", "load, validate and dedupe the corpus; write reports"),
        ("resolve", "resolve references and write the links report"),
        ("compute", "compute index variants from the links report"),
        ("stats", "distribution summaries and accrual curves"),
        ("audit", "anomaly and manipulation audit (exit 3 on any flag)"),
        ("report", "run the whole pipeline and print a summary"),
    ]:
        sub.add_parser(name, parents=[common], help=doc)
    return parser


def make_run_config(args: argparse.Namespace) -> RunConfig:
    file_values: dict[str, str] = {}
    config_path = args.config or os.environ.get("GARFIELD_CONFIG")
    if config_path:
        path = Path(config_path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        file_values = parse_config_file(path)

    def pick(key: str, flag_value):
        if flag_value is not None:
            return flag_value
        if key in file_values:
            return file_values[key]
        return _DEFAULTS.get(key)

    journals = pick("journals", args.journals)
    documents = pick("documents", args.documents)
    if not journals or not documents:
        raise ConfigError("--journals and --documents are required")
    numerator = pick("numerator", args.numerator)
    numerators = (
        [NumeratorMode(numerator)]
        if numerator
        else [NumeratorMode.TITLE_MATCH, NumeratorMode.CITING_CHECKED, NumeratorMode.ONE_TO_ONE]
    )
    census = pick("census-year", args.census_year)
    replicates = int(pick("replicates", args.replicates))
    seed = pick("seed", args.seed)
    seed = int(seed) if seed is not None else None
    if replicates > 0 and seed is None:
        raise ConfigError("--seed is required when bootstrap is enabled "
                          "(set --replicates 0 to disable)")
    resolution = ResolutionConfig(
        title_edit_distance_max=int(pick("edit-distance-max", args.edit_distance_max)),
        truncation_length=int(pick("truncation-length", args.truncation_length)),
        count_incomplete_links=_as_bool(pick("count-incomplete", args.count_incomplete)),
        doi_overrides_fields=_as_bool(pick("doi-overrides", args.doi_overrides)),
    )
    denylist = tuple(
        t.strip() for t in str(pick("denylist", args.denylist)).split(",") if t.strip()
    )
    return RunConfig(
        journals=Path(journals),
        documents=Path(documents),
        out=Path(pick("out", args.out)),
        census_year=int(census) if census is not None else None,
        window=int(pick("window", args.window)),
        numerators=numerators,
        denominator=DenominatorMode(pick("denominator", args.denominator)),
        self_cites=SelfCitePolicy(pick("self-cites", args.self_cites)),
        suspension=SuspensionPolicy(pick("suspension", args.suspension)),
        merge_renames=_as_bool(pick("merge-renames", args.merge_renames)),
        resolution=resolution,
        replicates=replicates,
        level=float(pick("level", args.level)),
        seed=seed,
        rounding=RoundingPolicy(pick("rounding", args.rounding)),
        thresholds=audit_mod.AuditThresholds(
            self_citation=float(pick("self-cite-threshold", args.self_cite_threshold)),
            editorial_share=float(pick("editorial-threshold", args.editorial_threshold)),
            citing_error_rate=float(pick("error-threshold", args.error_threshold)),
        ),
        denylist=denylist,
        workers=int(pick("workers", args.workers)),
        strict=_as_bool(pick("strict", args.strict)),
    )


# ---------------------------------------------------------------------------
# pipeline stages


def _ingest(cfg: RunConfig):
    corpus, load_issues = load_corpus(cfg.journals, cfg.documents)
    validation = validate_corpus(corpus)
    corpus, merges = dedupe_documents(corpus)
    return corpus, load_issues, validation, merges


def _census_year(cfg: RunConfig, corpus: Corpus) -> int | None:
    if cfg.census_year is not None:
        return cfg.census_year
    years = [d.year for d in corpus.documents.values()]
    return max(years) if years else None


def _variant_specs(cfg: RunConfig, census: int) -> list[IndexVariantSpec]:
    return [
        IndexVariantSpec(
            numerator_mode=mode,
            denominator_mode=cfg.denominator,
            self_cites=cfg.self_cites,
            census_year=census,
            window_years=cfg.window,
            suspension_policy=cfg.suspension,
            merge_renames=cfg.merge_renames,
        )
        for mode in cfg.numerators
    ]


def _base_spec(cfg: RunConfig, census: int) -> IndexVariantSpec:
    return IndexVariantSpec(
        census_year=census,
        window_years=cfg.window,
        suspension_policy=cfg.suspension,
        merge_renames=cfg.merge_renames,
    )


def _write_ingest_reports(cfg, load_issues, validation, merges) -> None:
    cfg.out.mkdir(parents=True, exist_ok=True)
    reports.write_csv(
        cfg.out / "load_report.csv", reports.LOAD_HEADER, reports.load_rows(load_issues)
    )
    reports.write_csv(
        cfg.out / "validation.csv",
        reports.VALIDATION_HEADER,
        reports.validation_rows(validation),
    )
    reports.write_csv(
        cfg.out / "merge_report.csv", reports.MERGE_HEADER, reports.merge_rows(merges)
    )


def _resolve(cfg: RunConfig, corpus: Corpus):
    return resolve_corpus(corpus, cfg.resolution, workers=cfg.workers)


def _links_from_disk(cfg: RunConfig):
    path = cfg.out / "links.csv"
    if not path.exists():
        raise ConfigError(f"{path} not found; run the resolve stage first")
    return reports.read_links_csv(path)


def _compute_indices(cfg: RunConfig, corpus: Corpus, links):
    """Index results plus per-variant competition ranks."""
    census = _census_year(cfg, corpus)
    ranked_rows: list[tuple] = []
    results = []
    if census is None:
        return results, ranked_rows
    engine = IndexEngine(corpus, links, cfg.resolution)
    for spec in _variant_specs(cfg, census):
        variant_results = []
        for jid in sorted(corpus.journals):
            result = engine.compute_index(
                jid,
                spec,
                replicates=cfg.replicates,
                level=cfg.level,
                seed=cfg.seed if cfg.seed is not None else 0,
                rounding=cfg.rounding,
                allow_undefined=True,
            )
            variant_results.append(result)
        ranks = {
            jid: rank for rank, jid, _ in rank_journals(variant_results, cfg.rounding)
        }
        for result in variant_results:
            ranked_rows.append((result, ranks.get(result.journal_id)))
        results.extend(variant_results)
    return results, ranked_rows


def _compute_stats(cfg: RunConfig, corpus: Corpus, links):
    census = _census_year(cfg, corpus)
    summaries = []
    curves = []
    if census is None:
        return summaries, curves
    base = _base_spec(cfg, census)
    # one pass: the per-journal operations only look at links targeting
    # that journal, so hand each journal its own slice
    by_target: dict[str, list] = {jid: [] for jid in corpus.journals}
    for link in links:
        if link.target_doc_id is None:
            continue
        target = corpus.documents.get(link.target_doc_id)
        if target is not None and target.journal_id in by_target:
            by_target[target.journal_id].append(link)
    for jid in sorted(corpus.journals):
        slice_ = by_target[jid]
        counts = per_document_citation_counts(jid, corpus, slice_, base)
        if counts:
            summaries.append((jid, distribution_summary(list(counts.values()))))
        for year in base.window:
            try:
                curves.append(accrual_curve(jid, year, corpus, slice_))
            except EmptyCohort:
                continue
    return summaries, curves


def _write_plot_curves(cfg: RunConfig, curves) -> None:
    plot_dir = cfg.out / "accrual_plot"
    plot_dir.mkdir(parents=True, exist_ok=True)
    for curve in curves:
        path = plot_dir / f"{curve.journal_id}_{curve.cohort_year}.csv"
        reports.write_csv(path, ["offset", "count"], list(curve.counts_by_offset))


def _run_audit(cfg: RunConfig, corpus: Corpus, links):
    census = _census_year(cfg, corpus)
    if census is None:
        return []
    return audit_mod.run_audit(
        corpus,
        links,
        _base_spec(cfg, census),
        cfg.resolution,
        cfg.thresholds,
        cfg.denylist,
    )


def _print_summary(corpus, links, ranked_rows, flags) -> None:
    classes: dict[str, int] = {}
    for link in links:
        classes[link.match_class.value] = classes.get(link.match_class.value, 0) + 1
    print(
        f"corpus: {len(corpus.journals)} journals, {len(corpus.documents)} documents, "
        f"{corpus.total_reference_count()} references"
    )
    print(
        "links:  "
        + ", ".join(f"{k}={classes.get(k, 0)}" for k in
                    ("complete_correct", "incomplete_correct", "faulty", "ghost"))
    )
    for result, rank in ranked_rows:
        spec = result.spec
        print(
            f"  {result.journal_id:<12} {spec.numerator_mode.value:>6}/"
            f"{spec.denominator_mode.value}/{spec.self_cites.value}  "
            f"N={result.numerator} D={result.denominator}  {result.display}"
            + (f"  rank {rank}" if rank is not None else "")
        )
    print(f"audit:  {len(flags)} flag(s)")
    for flag in flags[:10]:
        print(f"  {flag.code} {flag.subject} {flag.magnitude:.4f}")


def run_pipeline(cfg: RunConfig, command: str = "report") -> int:
    corpus, load_issues, validation, merges = _ingest(cfg)
    _write_ingest_reports(cfg, load_issues, validation, merges)
    if command == "validate":
        return EXIT_OK

    if command in ("resolve", "report"):
        links = _resolve(cfg, corpus)
        reports.write_csv(
            cfg.out / "links.csv", reports.LINKS_HEADER, reports.link_rows(links)
        )
        if command == "resolve":
            return EXIT_OK
    else:
        links = _links_from_disk(cfg)

    if command in ("compute", "report"):
        _, ranked_rows = _compute_indices(cfg, corpus, links)
        reports.write_csv(
            cfg.out / "indices.csv", reports.INDEX_HEADER, reports.index_rows(ranked_rows)
        )
        if command == "compute":
            return EXIT_OK

    if command in ("stats", "report"):
        summaries, curves = _compute_stats(cfg, corpus, links)
        reports.write_csv(
            cfg.out / "distribution.csv",
            reports.DISTRIBUTION_HEADER,
            reports.distribution_rows(summaries),
        )
        reports.write_csv(
            cfg.out / "accrual.csv", reports.ACCRUAL_HEADER, reports.accrual_rows(curves)
        )
        _write_plot_curves(cfg, curves)
        if command == "stats":
            return EXIT_OK

    flags = _run_audit(cfg, corpus, links)
    reports.write_csv(
        cfg.out / "audit.csv", reports.AUDIT_HEADER, reports.audit_rows(flags)
    )
    if command == "audit":
        return EXIT_AUDIT if flags else EXIT_OK

    _print_summary(corpus, links, ranked_rows, flags)
    if cfg.strict and flags:
        return EXIT_AUDIT
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_CONFIG
    try:
        cfg = make_run_config(args)
    except (ConfigError, ValueError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return run_pipeline(cfg, args.command)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except CorpusError as e:
        print(f"ingest error: {e}", file=sys.stderr)
        return EXIT_INGEST


if __name__ == "__main__":
    sys.exit(main())
