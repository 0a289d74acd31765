"""Field normalization of citations and impact factors and their weighted combination.

Baselines are built from the corpus itself, one cell per (year, subject
category). A publication filed under several categories contributes to
each cell and is scored by the mean of its per-category ratios.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from .models import ComputationError, Corpus, JournalRecord, PublicationRecord, WeightEntry

# Neutral citation weight for fixtures and demos; real weight tables are inputs.
NEUTRAL_WEIGHT = 0.5


class MissingBaselineError(ComputationError):
    pass


class MissingImpactFactorError(ComputationError):
    pass


class MissingWeightError(ComputationError):
    pass


@dataclass(frozen=True)
class NormalizationBaseline:
    year: int
    sc_code: str
    citation_sum: int
    cited_count: int
    total_count: int
    if_sum: float

    @property
    def key(self) -> tuple[int, str]:
        return (self.year, self.sc_code)

    @property
    def degenerate(self) -> bool:
        """No cited publication in the cell, so citations cannot be normalized."""
        return self.cited_count == 0

    @property
    def mean_citations_of_cited(self) -> float:
        return self.citation_sum / self.cited_count if self.cited_count else 0.0

    @property
    def mean_if(self) -> float:
        return self.if_sum / self.total_count if self.total_count else 0.0


@dataclass(frozen=True)
class ImpactScore:
    pub_id: str
    fnc: float
    fnif: float
    c: float


def _categories(pub: PublicationRecord) -> tuple[str, ...]:
    return tuple(dict.fromkeys(pub.subject_categories))


def impact_factor(journals: Mapping[str, JournalRecord], pub: PublicationRecord) -> float:
    try:
        return journals[pub.journal_id].impact_factor[pub.year]
    except KeyError:
        raise MissingImpactFactorError(
            f"no impact factor for journal {pub.journal_id!r} in {pub.year} (publication {pub.pub_id!r})"
        ) from None


def compute_baselines(corpus: Corpus) -> dict[tuple[int, str], NormalizationBaseline]:
    cells: dict[tuple[int, str], list] = {}
    ifs: dict[tuple[int, str], list[float]] = {}
    for pub in corpus.publications:
        value = impact_factor(corpus.journals, pub)
        for sc in _categories(pub):
            key = (pub.year, sc)
            acc = cells.get(key)
            if acc is None:
                acc = cells[key] = [0, 0, 0]
                ifs[key] = []
            acc[2] += 1
            if pub.citation_count > 0:
                acc[0] += pub.citation_count
                acc[1] += 1
            ifs[key].append(value)
    # fsum over sorted values keeps the IF mean independent of row order
    return {
        key: NormalizationBaseline(key[0], key[1], acc[0], acc[1], acc[2], math.fsum(sorted(ifs[key])))
        for key, acc in sorted(cells.items())
    }


def _cell(baselines, year, sc, pub_id):
    try:
        return baselines[(year, sc)]
    except KeyError:
        raise MissingBaselineError(f"no baseline for ({year}, {sc!r}) needed by publication {pub_id!r}") from None


def field_normalized_citations(pub: PublicationRecord, baselines) -> float:
    scs = _categories(pub)
    cells = [_cell(baselines, pub.year, sc, pub.pub_id) for sc in scs]
    if pub.citation_count == 0:
        return 0.0
    total = 0.0
    for cell in cells:
        if not cell.degenerate:
            # integer numerator/denominator: the quotient is correctly rounded,
            # so rescaling every count in the cell leaves it bit-identical
            total += (pub.citation_count * cell.cited_count) / cell.citation_sum
    return total / len(cells)


def field_normalized_if(pub: PublicationRecord, journals: Mapping[str, JournalRecord], baselines) -> float:
    value = impact_factor(journals, pub)
    scs = _categories(pub)
    cells = [_cell(baselines, pub.year, sc, pub.pub_id) for sc in scs]
    if value == 0:
        return 0.0
    total = 0.0
    for cell in cells:
        if cell.if_sum > 0:
            total += value * cell.total_count / cell.if_sum
    return total / len(cells)


def combined_impact(fnc: float, fnif: float, weight: float | WeightEntry) -> float:
    w = weight.citation_weight if isinstance(weight, WeightEntry) else weight
    if not 0 <= w <= 1:
        raise ValueError(f"citation weight must lie in [0, 1], got {w}")
    return w * fnc + (1 - w) * fnif


def resolve_weight(pub: PublicationRecord, weights: Mapping[tuple[int, str], WeightEntry] | None,
                   default_weight: float | None = None) -> float:
    """Citation weight for ``pub``: the mean over its subject categories."""
    values = []
    for sc in _categories(pub):
        entry = weights.get((pub.year, sc)) if weights is not None else None
        if entry is not None:
            values.append(entry.citation_weight)
        elif default_weight is not None:
            values.append(default_weight)
        else:
            raise MissingWeightError(f"no citation weight for ({pub.year}, {sc!r}); pass a default weight to "
                                     "fall back")
    return values[0] if len(values) == 1 else math.fsum(values) / len(values)


def compute_impact(corpus: Corpus, baselines, weights, default_weight: float | None = None) -> dict[str, ImpactScore]:
    """Score every publication; the result is keyed and ordered by ``pub_id``."""
    if default_weight is not None and not 0 <= default_weight <= 1:
        raise ValueError(f"default weight must lie in [0, 1], got {default_weight}")
    scores = {}
    for pub in sorted(corpus.publications, key=lambda p: p.pub_id):
        fnc = field_normalized_citations(pub, baselines)
        fnif = field_normalized_if(pub, corpus.journals, baselines)
        w = resolve_weight(pub, weights, default_weight)
        scores[pub.pub_id] = ImpactScore(pub.pub_id, fnc, fnif, combined_impact(fnc, fnif, w))
    return scores


def degenerate_cells(baselines) -> list[tuple[int, str]]:
    return [key for key, cell in baselines.items() if cell.degenerate]
