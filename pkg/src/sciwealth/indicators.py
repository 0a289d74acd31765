"""Productivity (FSS) of professors and knowledge capital (KC) of territories."""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .credit import TerritoryShares, author_weights, classify_collaboration
from .match import MatchResult
from .models import ComputationError, Corpus, CostParameters, ProfessorRecord, Roster, SpecialtyConfig
from .normalize import ImpactScore
from .territory import Level, TerritoryIndex, rollup

LOW_HEADCOUNT = 5
OVERALL = "overall"


@dataclass(frozen=True)
class ProfessorScore:
    professor_id: str
    sds_code: str
    raw_fss: float
    normalized_fss: float


@dataclass(frozen=True)
class TerritoryScore:
    territory_code: str
    level: Level
    specialty: str
    kc: float | None
    kc_pc: float | None
    normalized_kc_pc: float
    mean_normalized_fss: float | None
    professor_count: int

    @property
    def low_headcount_flag(self) -> bool:
        return self.professor_count < LOW_HEADCOUNT


def output_per_year(professor: ProfessorRecord, contributions: Iterable[tuple[float, float]]) -> float:
    t = professor.years_active
    if t < 1:
        raise ComputationError(f"professor {professor.professor_id!r} has no active year")
    return math.fsum(c * f for c, f in contributions) / t


def fss(professor: ProfessorRecord, contributions: Iterable[tuple[float, float]],
        costs: CostParameters | Mapping[str, CostParameters]) -> float:
    """Raw FSS: impact-weighted fractional output per year per unit of research cost.

    ``contributions`` holds ``(c_i, f_i)`` pairs for the professor's
    publications.
    """
    if not isinstance(costs, CostParameters):
        try:
            costs = costs[professor.sds_code]
        except KeyError:
            raise ComputationError(f"no cost parameters for {professor.sds_code!r}") from None
    cost = costs.research_cost
    if cost <= 0:
        raise ComputationError(f"non-positive research cost for {professor.sds_code!r}")
    return output_per_year(professor, contributions) / cost


def normalize_scores(scores: Mapping[str, float]) -> tuple[dict[str, float], bool]:
    """Divide each score by the mean of the strictly positive scores in the group.

    Returns the rescaled scores and whether the group had no positive member
    (in which case every score is 0).
    """
    positive = sorted(v for v in scores.values() if v > 0)
    if not positive:
        return {k: 0.0 for k in scores}, True
    mean = math.fsum(positive) / len(positive)
    return {k: (v / mean if v > 0 else 0.0) for k, v in scores.items()}, False


def professor_contributions(corpus: Corpus, matches: MatchResult,
                            impact: Mapping[str, ImpactScore]) -> dict[str, list[tuple[float, float]]]:
    """``(c_i, f_i)`` pairs per professor, f_i being the full positional weight."""
    out: dict[str, list[tuple[float, float]]] = defaultdict(list)
    for pub_id, position, prof in sorted(matches.assignments):
        pub = corpus[pub_id]
        weights = author_weights(len(pub.byline), classify_collaboration(pub.byline))
        out[prof].append((impact[pub_id].c, weights[position - 1]))
    return out


def score_professors(roster: Roster, contributions: Mapping[str, Sequence[tuple[float, float]]]
                     ) -> tuple[list[ProfessorScore], list[str]]:
    """Raw and field-normalized FSS for every professor; also the degenerate field codes.

    Costs are shared by all professors of a field, so normalizing the
    cost-free yearly output gives the same ratios as normalizing raw FSS
    while staying exact when every cost row is rescaled.
    """
    per_year: dict[str, float] = {}
    raw: dict[str, float] = {}
    groups: dict[str, dict[str, float]] = defaultdict(dict)
    for prof in roster.professors:
        pairs = contributions.get(prof.professor_id, ())
        per_year[prof.professor_id] = output_per_year(prof, pairs)
        raw[prof.professor_id] = fss(prof, pairs, roster.costs)
        groups[prof.sds_code][prof.professor_id] = per_year[prof.professor_id]
    normalized: dict[str, float] = {}
    degenerate = []
    for sds in sorted(groups):
        values, flat = normalize_scores(groups[sds])
        normalized.update(values)
        if flat:
            degenerate.append(sds)
    scores = [
        ProfessorScore(p.professor_id, p.sds_code, raw[p.professor_id], normalized[p.professor_id])
        for p in roster.professors
    ]
    return scores, degenerate


def kc(territory: str, publications: Iterable[str], impact: Mapping[str, ImpactScore],
       shares: Mapping[str, TerritoryShares], index: TerritoryIndex | None = None) -> float:
    """Knowledge capital of one territory over the given publications.

    A territory above LAU level collects the shares of all its LAUs.
    """
    def share_of(ts: TerritoryShares) -> float:
        if index is None or index[territory].level is Level.LAU:
            return ts.lau.get(territory, 0.0)
        return math.fsum(v for lau, v in ts.lau.items() if territory in index.ancestors(lau))

    return math.fsum(impact[p].c * share_of(shares[p]) for p in sorted(publications))


def kc_by_lau(publications: Iterable[str], impact: Mapping[str, ImpactScore],
              shares: Mapping[str, TerritoryShares]) -> dict[str, float]:
    parts: dict[str, list[float]] = defaultdict(list)
    for pub_id in sorted(publications):
        c = impact[pub_id].c
        for lau, share in shares[pub_id].lau.items():
            parts[lau].append(c * share)
    return {lau: math.fsum(parts[lau]) for lau in sorted(parts)}


def kc_per_capita_normalized(kc_values: Mapping[str, float], populations: Mapping[str, int | None],
                             national_kc: float | None = None, national_population: int | None = None
                             ) -> dict[str, tuple[float, float]]:
    """``(kc_pc, normalized_kc_pc)`` per territory; kc_pc is per million residents.

    The national baseline is total KC over total population, so that the
    population-weighted mean of the normalized values is one.
    """
    for code in kc_values:
        pop = populations.get(code)
        if not pop:
            raise ComputationError(f"territory {code!r} has zero or missing population")
    if national_kc is None:
        national_kc = math.fsum(kc_values.values())
    if national_population is None:
        national_population = sum(populations[c] for c in kc_values)
    if not national_population:
        raise ComputationError("national population is zero or missing")
    baseline = national_kc / (national_population / 1e6)
    out = {}
    for code in sorted(kc_values):
        kc_pc = kc_values[code] / (populations[code] / 1e6)
        out[code] = (kc_pc, kc_pc / baseline if baseline > 0 else 0.0)
    return out


def aggregate_region_specialties(scores: Mapping[str, float | None], specialties: Sequence[str]) -> float:
    """Simple mean over every configured specialty, absent KC counting as zero."""
    if not specialties:
        return 0.0
    return math.fsum(scores.get(s) or 0.0 for s in specialties) / len(specialties)


def region_mean_fss(normalized: Sequence[float]) -> tuple[float | None, int, bool]:
    """Mean normalized FSS of a region's professors, their count, and the low-headcount flag."""
    count = len(normalized)
    if count == 0:
        return None, 0, True
    return math.fsum(normalized) / count, count, count < LOW_HEADCOUNT


def covered_mean(values: Iterable[float | None]) -> float | None:
    present = [v for v in values if v is not None]
    return math.fsum(present) / len(present) if present else None


def professor_locations(roster: Roster, institutions) -> tuple[dict[str, str], list[str]]:
    """LAU of each professor's university, plus professors that cannot be placed."""
    located, unplaced = {}, []
    for prof in roster.professors:
        inst = institutions.get(prof.university_id)
        if inst is not None and inst.lau_code:
            located[prof.professor_id] = inst.lau_code
        else:
            unplaced.append(prof.professor_id)
    return located, unplaced


def territory_scores(corpus: Corpus, config: SpecialtyConfig, index: TerritoryIndex,
                     impact: Mapping[str, ImpactScore], shares: Mapping[str, TerritoryShares],
                     roster: Roster, prof_scores: Sequence[ProfessorScore], professor_lau: Mapping[str, str],
                     levels: Sequence[Level] = (Level.NUTS3, Level.NUTS2, Level.NUTS1)) -> list[TerritoryScore]:
    """Per-territory KC, KC per capita and mean professor performance, per specialty and overall."""
    spec_pubs: dict[str, list[str]] = {s.name: [] for s in config.specialties}
    for pub in corpus.publications:
        for name in config.specialties_of_publication(pub):
            spec_pubs[name].append(pub.pub_id)
    lau_kc = {name: kc_by_lau(ids, impact, shares) for name, ids in spec_pubs.items()}
    national_pop = index.national_population()

    normalized_fss = {s.professor_id: s.normalized_fss for s in prof_scores}
    sds_of = {p.professor_id: p.sds_code for p in roster.professors}

    out: list[TerritoryScore] = []
    for level in levels:
        codes = index.codes_at(level)
        pops = {c: index.population(c) for c in codes}
        for c in codes:
            if not pops[c]:
                raise ComputationError(f"{level.name} territory {c!r} has zero or missing population")
        if national_pop is None:
            raise ComputationError("national population is unknown")

        # professors per (territory, specialty)
        staff: dict[tuple[str, str], list[str]] = defaultdict(list)
        for pid in sorted(professor_lau):
            where = index.ancestor(professor_lau[pid], level) if level is not Level.LAU else professor_lau[pid]
            if where is None:
                continue
            for name in config.specialties_of_sds(sds_of[pid]):
                staff[(where, name)].append(pid)

        per_spec_norm: dict[str, dict[str, float]] = defaultdict(dict)
        per_spec_fss: dict[str, dict[str, float | None]] = defaultdict(dict)
        for spec in config.specialties:
            name = spec.name
            rolled = rollup(lau_kc[name], level, index) if lau_kc[name] else {}
            values = {c: rolled.get(c, 0.0) for c in codes}
            national_kc = math.fsum(lau_kc[name].values())
            pc = kc_per_capita_normalized(values, pops, national_kc, national_pop)
            for c in codes:
                members = staff.get((c, name), [])
                mean, count, _ = region_mean_fss([normalized_fss[p] for p in members])
                kc_pc, norm = pc[c]
                out.append(TerritoryScore(c, level, name, values[c], kc_pc, norm, mean, count))
                per_spec_norm[c][name] = norm
                per_spec_fss[c][name] = mean

        names = [s.name for s in config.specialties]
        for c in codes:
            distinct = {p for name in names for p in staff.get((c, name), [])}
            out.append(TerritoryScore(
                c, level, OVERALL, None, None,
                aggregate_region_specialties(per_spec_norm[c], names),
                covered_mean(per_spec_fss[c][n] for n in names),
                len(distinct),
            ))
    return out
