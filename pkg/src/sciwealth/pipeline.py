"""End-to-end orchestration: load -> baselines -> impact -> credit -> match -> indicators -> outputs."""
from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import __version__
from .corpus import corpus_summary, load_corpus, load_roster, load_specialties, load_weights
from .credit import TerritoryShares, credit_shares, territory_shares
from .indicators import (
    ProfessorScore,
    TerritoryScore,
    professor_contributions,
    professor_locations,
    score_professors,
    territory_scores,
)
from .io import file_digest, write_csv, write_json
from .match import DEFAULT_RULES, MatchResult, MatchRuleConfig, match_authorships
from .models import ComputationError, Corpus, Roster, SciwealthError, SpecialtyConfig, ValidationError
from .normalize import (
    ImpactScore,
    MissingWeightError,
    compute_baselines,
    compute_impact,
    degenerate_cells,
)
from .territory import Level, TerritoryIndex, build_index, resolve_institutions

log = logging.getLogger(__name__)

DEFAULT_LEVELS = (Level.NUTS3, Level.NUTS2, Level.NUTS1)
UNRESOLVED_SAMPLE = 20


class StageError(SciwealthError):
    """A pipeline stage failed; ``cause`` holds the underlying error."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {cause}")

    @property
    def is_validation(self) -> bool:
        return isinstance(self.cause, ValidationError)


@dataclass
class InputPaths:
    corpus: Path
    journals: Path
    institutions: Path
    gazetteer: Path
    specialties: Path
    roster: Path | None = None
    costs: Path | None = None
    population: Path | None = None
    weights: Path | None = None
    gold: Path | None = None

    def items(self):
        for name in ("corpus", "journals", "institutions", "roster", "costs", "weights", "gazetteer",
                     "population", "specialties", "gold"):
            value = getattr(self, name)
            if value is not None:
                yield name, Path(value)


@dataclass
class LoadedInputs:
    config: SpecialtyConfig
    corpus: Corpus
    index: TerritoryIndex
    roster: Roster
    unresolved_institutions: list
    out_of_window: int


@dataclass
class PipelineResult:
    inputs: LoadedInputs
    baselines: dict = field(default_factory=dict)
    impact: dict[str, ImpactScore] = field(default_factory=dict)
    shares: dict[str, TerritoryShares] = field(default_factory=dict)
    matches: MatchResult | None = None
    professor_scores: list[ProfessorScore] = field(default_factory=list)
    territory_scores: list[TerritoryScore] = field(default_factory=list)
    degenerate_fss_groups: list[str] = field(default_factory=list)
    unplaced_professors: list[str] = field(default_factory=list)
    manifest: dict = field(default_factory=dict)
    manifest_digest: str = ""
    outputs: dict[str, str] = field(default_factory=dict)


class _stage:
    def __init__(self, name):
        self.name = name

    def __enter__(self):
        log.info("stage %s", self.name)
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and isinstance(exc, (SciwealthError, ValueError, OSError)) \
                and not isinstance(exc, StageError):
            raise StageError(self.name, exc) from exc
        return False


def load_inputs(paths: InputPaths) -> LoadedInputs:
    with _stage("load"):
        for name, path in paths.items():
            # weights are checked by the normalize stage, where the fallback lives
            if name != "weights" and not path.exists():
                raise ValidationError(f"{name} file not found", path=path)
        config = load_specialties(paths.specialties)
        corpus = load_corpus(paths.corpus, paths.journals, paths.institutions, country=config.country)
    with _stage("territory"):
        index = build_index(paths.gazetteer, paths.population, country=config.country)
        institutions, unresolved = resolve_institutions(corpus.institutions, index)
        corpus = corpus.with_institutions(institutions)
    with _stage("load"):
        if paths.roster is not None:
            if paths.costs is None:
                raise ValidationError("a roster needs a costs file")
            roster = load_roster(paths.roster, paths.costs, window=config.window,
                                 institutions=corpus.institutions)
        else:
            roster = Roster((), {})
        windowed = corpus.within(config.window)
    return LoadedInputs(config, windowed, index, roster, unresolved, len(corpus) - len(windowed))


def _config_echo(config: SpecialtyConfig, rules: MatchRuleConfig, default_weight, levels) -> dict:
    return {
        "window": list(config.window),
        "census_date": config.census_date.isoformat(),
        "country": config.country,
        "specialties": [
            {"name": s.name, "sc_codes": sorted(s.sc_codes), "sds_codes": sorted(s.sds_codes)}
            for s in config.specialties
        ],
        "match_rules": rules.as_dict(),
        "default_weight": default_weight,
        "levels": [lvl.label for lvl in levels],
    }


def manifest_digest(manifest: dict) -> str:
    blob = json.dumps(manifest, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def run_pipeline(paths: InputPaths, out_dir=None, *, rules: MatchRuleConfig = DEFAULT_RULES,
                 default_weight: float | None = None, levels: Sequence[Level] = DEFAULT_LEVELS,
                 emit_credit: bool = False) -> PipelineResult:
    """Run every scoring stage and, when ``out_dir`` is given, write the score outputs."""
    levels = tuple(Level(lvl) for lvl in levels)
    loaded = load_inputs(paths)
    config, corpus, index, roster = loaded.config, loaded.corpus, loaded.index, loaded.roster
    result = PipelineResult(loaded)

    with _stage("normalize"):
        result.baselines = compute_baselines(corpus)
        if paths.weights is not None and Path(paths.weights).exists():
            weights = load_weights(paths.weights)
        elif default_weight is not None:
            if paths.weights is not None:
                log.warning("weights file %s not found; using default weight %s", paths.weights, default_weight)
            weights = None
        elif paths.weights is not None:
            raise MissingWeightError(f"weights file {paths.weights} not found and no default weight requested")
        else:
            raise MissingWeightError("no weights file given and no default weight requested")
        result.impact = compute_impact(corpus, result.baselines, weights, default_weight)

    with _stage("credit"):
        result.shares = {
            pub.pub_id: territory_shares(pub, corpus.institutions, index, strict=False)
            for pub in corpus.publications
        }

    with _stage("match"):
        result.matches = match_authorships(corpus, roster, rules)

    with _stage("indicators"):
        contributions = professor_contributions(corpus, result.matches, result.impact)
        result.professor_scores, result.degenerate_fss_groups = score_professors(roster, contributions)
        located, result.unplaced_professors = professor_locations(roster, corpus.institutions)
        result.territory_scores = territory_scores(corpus, config, index, result.impact, result.shares, roster,
                                                   result.professor_scores, located, levels)

    unresolved_share = math.fsum(s.unresolved for s in result.shares.values())
    result.manifest = {
        "tool": "sciwealth",
        "version": __version__,
        "inputs": {name: {"file": path.name, "sha256": file_digest(path)}
                   for name, path in paths.items() if path.exists()},
        "config": _config_echo(config, rules, default_weight, levels),
        "census_date": config.census_date.isoformat(),
        "counts": {
            "publications": len(corpus),
            "publications_outside_window": loaded.out_of_window,
            "authorships": sum(len(p.byline) for p in corpus.publications),
            "professors": len(roster),
            "territories": {lvl.label: len(index.codes_at(lvl)) for lvl in Level},
            "assigned_authorships": len(result.matches.assignments),
            "ambiguous_authorships": len(result.matches.ambiguous),
        },
        "unresolved_addresses": {
            "count": len(loaded.unresolved_institutions),
            "sample": [
                {"institution_id": i.institution_id, "city": i.city, "country": i.country}
                for i in loaded.unresolved_institutions[:UNRESOLVED_SAMPLE]
            ],
            "publication_share_total": round(unresolved_share, 12),
        },
        "degenerate_baselines": [{"year": y, "sc_code": sc} for y, sc in degenerate_cells(result.baselines)],
        "degenerate_fss_groups": result.degenerate_fss_groups,
        "unplaced_professors": result.unplaced_professors,
    }
    result.manifest_digest = manifest_digest(result.manifest)

    if out_dir is not None:
        with _stage("report"):
            write_score_outputs(result, Path(out_dir), emit_credit=emit_credit)
    return result


def write_score_outputs(result: PipelineResult, out_dir: Path, *, emit_credit: bool = False):
    digest = result.manifest_digest
    corpus = result.inputs.corpus
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    written.append(write_csv(
        out_dir / "baselines.csv",
        ("year", "sc_code", "mean_citations_of_cited", "mean_if", "cited_count", "total_count", "degenerate_flag"),
        ((b.year, b.sc_code, b.mean_citations_of_cited, b.mean_if, b.cited_count, b.total_count, b.degenerate)
         for b in result.baselines.values()),
        manifest=digest,
    ))
    written.append(write_csv(
        out_dir / "impact.csv", ("pub_id", "fnc", "fnif", "c"),
        ((s.pub_id, s.fnc, s.fnif, s.c) for s in result.impact.values()), manifest=digest,
    ))
    written.append(write_csv(
        out_dir / "professors_scores.csv", ("professor_id", "sds_code", "raw_fss", "normalized_fss"),
        ((s.professor_id, s.sds_code, s.raw_fss, s.normalized_fss) for s in result.professor_scores),
        manifest=digest,
    ))
    written.append(write_csv(
        out_dir / "territory_scores.csv",
        ("territory_code", "level", "specialty", "kc", "kc_pc", "normalized_kc_pc", "mean_normalized_fss",
         "professor_count", "low_headcount_flag"),
        ((s.territory_code, s.level.label, s.specialty, s.kc, s.kc_pc, s.normalized_kc_pc,
          s.mean_normalized_fss, s.professor_count, s.low_headcount_flag) for s in result.territory_scores),
        manifest=digest,
    ))
    written.append(write_matches(result.matches, out_dir / "matches.csv", manifest=digest))
    if emit_credit:
        def credit_rows():
            for pub in corpus.publications:
                for cs in credit_shares(pub, corpus.institutions, corpus.country):
                    for inst, where, share in cs.splits:
                        yield (cs.pub_id, cs.position, cs.author_weight, inst, where, share)
        written.append(write_csv(
            out_dir / "credit.csv", ("pub_id", "position", "author_weight", "institution_id", "lau_code", "share"),
            credit_rows(), manifest=digest,
        ))
    record_outputs(result, out_dir, written)


def write_matches(matches: MatchResult, path: Path, *, manifest: str | None = None) -> Path:
    rows = [(p, pos, prof, "assigned", "") for p, pos, prof in matches.assignments]
    rows += [(p, pos, "", "unmatched", "") for p, pos in matches.unmatched]
    rows += [(p, pos, "", "ambiguous", ";".join(c)) for p, pos, c in matches.ambiguous]
    rows.sort(key=lambda r: (r[0], r[1]))
    return write_csv(path, ("pub_id", "position", "professor_id", "status", "candidates"), rows, manifest=manifest)


def record_outputs(result: PipelineResult, out_dir: Path, paths):
    """Add output digests to the manifest file in ``out_dir``."""
    for path in paths:
        result.outputs[Path(path).name] = file_digest(path)
    payload = {**result.manifest, "outputs": dict(sorted(result.outputs.items()))}
    write_json(out_dir / "manifest.json", payload, manifest=result.manifest_digest)


def run_summary(paths: InputPaths):
    loaded = load_inputs(paths)
    with _stage("credit"):
        return loaded, corpus_summary(loaded.corpus, loaded.config, loaded.index)
