"""Command-line front end.

Exit codes: 0 success, 2 validation failure, 3 computation-stage failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .corpus import corpus_summary, load_corpus, load_gold, load_roster, load_specialties, load_weights
from .indicators import OVERALL
from .io import file_digest, read_csv, write_json
from .match import DEFAULT_RULES, AmbiguityPolicy, MatchRuleConfig, NamePolicy, evaluate_matching, match_authorships
from .models import SciwealthError, ValidationError
from .pipeline import (
    InputPaths,
    StageError,
    _stage,
    manifest_digest,
    record_outputs,
    run_pipeline,
    run_summary,
    write_score_outputs,
)
from .report import emit_choropleth, emit_region_overview, emit_scatter, emit_summary, slug
from .territory import Level, build_index

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_COMPUTATION = 3

log = logging.getLogger("sciwealth")


def _add_inputs(p: argparse.ArgumentParser, *, needs=()):
    p.add_argument("--corpus", type=Path, required="corpus" in needs, help="publications JSON-lines file")
    p.add_argument("--journals", type=Path, required="journals" in needs)
    p.add_argument("--institutions", type=Path, required="institutions" in needs)
    p.add_argument("--roster", type=Path, required="roster" in needs)
    p.add_argument("--costs", type=Path, required="costs" in needs)
    p.add_argument("--weights", type=Path)
    p.add_argument("--gazetteer", type=Path, required="gazetteer" in needs)
    p.add_argument("--population", type=Path)
    p.add_argument("--specialties", type=Path, required="specialties" in needs)
    p.add_argument("--gold", type=Path, required="gold" in needs)
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--default-weight", type=float, default=None,
                   help="citation weight used where the weights table has no entry (opt-in)")


def _add_rules(p: argparse.ArgumentParser):
    p.add_argument("--name-policy", choices=[x.value for x in NamePolicy], default=DEFAULT_RULES.name_policy.value)
    p.add_argument("--ambiguity-policy", choices=[x.value for x in AmbiguityPolicy],
                   default=DEFAULT_RULES.ambiguity_policy.value)
    p.add_argument("--no-university-match", action="store_true",
                   help="do not require the authorship affiliation to be the professor's university")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sciwealth", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    full = ("corpus", "journals", "institutions", "roster", "costs", "gazetteer", "specialties")

    p = sub.add_parser("validate", help="validate inputs only")
    _add_inputs(p, needs=("corpus", "journals", "institutions"))

    p = sub.add_parser("summary", help="publication/citation/authorship counts per specialty")
    _add_inputs(p, needs=("corpus", "journals", "institutions", "gazetteer", "specialties"))

    for name, help_ in (("score", "compute impact, FSS and KC indicators"),
                        ("report", "score, then emit scatter, choropleth and table data")):
        p = sub.add_parser(name, help=help_)
        _add_inputs(p, needs=full)
        _add_rules(p)
        p.add_argument("--level", choices=[lvl.label for lvl in Level if lvl is not Level.NATION],
                       default="nuts2")
        p.add_argument("--emit-credit", action="store_true", help="also write the per-split credit.csv")
        if name == "report":
            p.add_argument("--specialty", default=OVERALL, help="specialty name or 'overall'")
            p.add_argument("--metric", choices=("normalized_kc_pc", "kc_pc", "kc"), default="normalized_kc_pc",
                           help="choropleth metric")
            p.add_argument("--values", type=Path,
                           help="externally supplied choropleth series (CSV: code,value) to pass through")

    p = sub.add_parser("match-eval", help="compare authorship matching with a gold standard")
    _add_inputs(p, needs=("corpus", "journals", "institutions", "roster", "costs", "gold"))
    _add_rules(p)
    return parser


def _rules(args) -> MatchRuleConfig:
    return MatchRuleConfig(
        require_university_match=not args.no_university_match,
        name_policy=NamePolicy(args.name_policy),
        ambiguity_policy=AmbiguityPolicy(args.ambiguity_policy),
    )


def _paths(args) -> InputPaths:
    return InputPaths(corpus=args.corpus, journals=args.journals, institutions=args.institutions,
                      gazetteer=args.gazetteer, specialties=args.specialties, roster=args.roster,
                      costs=args.costs, population=args.population, weights=args.weights, gold=args.gold)


def _levels(label: str) -> tuple[Level, ...]:
    chosen = Level.parse(label)
    levels = {Level.NUTS3, Level.NUTS2, Level.NUTS1, chosen}
    return tuple(sorted(levels))


def cmd_validate(args) -> int:
    with _stage("load"):
        window = None
        country = "Italy"
        if args.specialties:
            config = load_specialties(args.specialties)
            window, country = config.window, config.country
        corpus = load_corpus(args.corpus, args.journals, args.institutions, country=country)
        counts = {"publications": len(corpus), "journals": len(corpus.journals),
                  "institutions": len(corpus.institutions)}
        if args.roster:
            if not args.costs:
                raise ValidationError("--roster needs --costs")
            counts["professors"] = len(load_roster(args.roster, args.costs, window=window,
                                                   institutions=corpus.institutions))
        if args.weights:
            counts["weights"] = len(load_weights(args.weights))
        if args.gold:
            counts["gold"] = len(load_gold(args.gold))
    if args.gazetteer:
        with _stage("territory"):
            counts["territories"] = len(build_index(args.gazetteer, args.population, country=country))
    for key, value in counts.items():
        print(f"{key}: {value}")
    print("inputs valid")
    return EXIT_OK


def cmd_summary(args) -> int:
    _, rows = run_summary(_paths(args))
    if args.out:
        emit_summary(rows, args.out / "summary.csv")
    print("specialty,publications,citations,authorships,provinces,regions")
    for r in rows:
        print(f"{r.specialty},{r.publications},{r.citations},{r.authorships},{r.provinces},{r.regions}")
    return EXIT_OK


def cmd_score(args) -> int:
    result = run_pipeline(_paths(args), args.out, rules=_rules(args), default_weight=args.default_weight,
                          levels=_levels(args.level), emit_credit=args.emit_credit)
    counts = result.manifest["counts"]
    print(f"scored {counts['publications']} publications, {counts['professors']} professors "
          f"(manifest {result.manifest_digest[:12]})")
    return EXIT_OK


def _external_values(path: Path) -> dict[str, float]:
    values = {}
    for line, row in read_csv(path, ("code", "value")):
        try:
            values[row["code"].strip()] = float(row["value"])
        except ValueError:
            raise ValidationError("value must be numeric", path=path, line=line, field="value") from None
    return values


def cmd_report(args) -> int:
    level = Level.parse(args.level)
    paths = _paths(args)
    out = args.out or Path(".")
    result = run_pipeline(paths, None, rules=_rules(args), default_weight=args.default_weight,
                          levels=_levels(args.level))
    loaded = result.inputs
    with _stage("report"):
        if args.values:
            result.manifest["inputs"]["values"] = {"file": args.values.name, "sha256": file_digest(args.values)}
        result.manifest_digest = digest = manifest_digest(result.manifest)
        write_score_outputs(result, out, emit_credit=args.emit_credit)
        written = []
        _, scatter_paths = emit_scatter(result.territory_scores, level, args.specialty, loaded.index, out,
                                        fmt=args.format, manifest=digest)
        written += scatter_paths
        if args.values:
            values, metric = _external_values(args.values), args.values.stem
        else:
            values = {
                s.territory_code: getattr(s, args.metric)
                for s in result.territory_scores if s.level is level and s.specialty == args.specialty
            }
            metric = args.metric
        written.append(emit_choropleth(values, level, loaded.index,
                                       out / f"choropleth_{level.label}_{slug(args.specialty)}",
                                       fmt=args.format, manifest=digest, metric=metric))
        written.append(emit_region_overview(result.territory_scores, loaded.config, loaded.index,
                                            out / "region_overview.csv", level=level, manifest=digest))
        written.append(emit_summary(corpus_summary(loaded.corpus, loaded.config, loaded.index),
                                    out / "summary.csv", manifest=digest))
        record_outputs(result, out, written)
    print(f"report written to {out}")
    return EXIT_OK


def cmd_match_eval(args) -> int:
    with _stage("load"):
        window, country = None, "Italy"
        if args.specialties:
            config = load_specialties(args.specialties)
            window, country = config.window, config.country
        corpus = load_corpus(args.corpus, args.journals, args.institutions, country=country)
        roster = load_roster(args.roster, args.costs, window=window, institutions=corpus.institutions)
        gold = load_gold(args.gold)
        if window is not None:
            corpus = corpus.within(window)
    with _stage("match"):
        result = match_authorships(corpus, roster, _rules(args))
        quality = evaluate_matching(result, gold, pub_ids=corpus)
    print(f"precision={quality.precision:.6f} recall={quality.recall:.6f} f_measure={quality.f_measure:.6f} "
          f"tp={quality.tp} fp={quality.fp} fn={quality.fn}")
    if args.out:
        write_json(args.out / "match_quality.json", {
            "precision": quality.precision, "recall": quality.recall, "f_measure": quality.f_measure,
            "tp": quality.tp, "fp": quality.fp, "fn": quality.fn,
            "ambiguous": len(result.ambiguous), "rules": _rules(args).as_dict(),
        })
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "summary": cmd_summary,
    "score": cmd_score,
    "report": cmd_report,
    "match-eval": cmd_match_eval,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except StageError as exc:
        print(f"error in {exc.stage} stage: {exc.cause}", file=sys.stderr)
        return EXIT_VALIDATION if exc.is_validation else EXIT_COMPUTATION
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SciwealthError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTATION


if __name__ == "__main__":
    sys.exit(main())
