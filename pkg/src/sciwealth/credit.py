"""Fractional credit: positional author weights, affiliation splits, territory shares."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .models import AuthorshipEntry, InstitutionRecord, PublicationRecord, ValidationError, fold

FOREIGN = "Foreign"
UNRESOLVED = "Unresolved"


class CollaborationClass(enum.Enum):
    INTRAMURAL = "Intramural"
    EXTRAMURAL = "Extramural"


# (boundary weight, next-to-boundary weight, pooled weight for the remaining authors)
_SCHEMES = {
    CollaborationClass.INTRAMURAL: (0.40, 0.0, 0.20),
    CollaborationClass.EXTRAMURAL: (0.30, 0.15, 0.10),
}


def classify_collaboration(byline: Sequence[AuthorshipEntry],
                           institutions: Mapping[str, InstitutionRecord] | None = None) -> CollaborationClass:
    """Intramural when every affiliation on the byline is one and the same institution."""
    seen = None
    for entry in byline:
        for aff in entry.affiliations:
            if institutions is not None and aff not in institutions:
                raise ValidationError(f"unknown institution {aff!r}")
            if seen is None:
                seen = aff
            elif aff != seen:
                return CollaborationClass.EXTRAMURAL
    return CollaborationClass.INTRAMURAL


@lru_cache(maxsize=4096)
def author_weights(n: int, cls: CollaborationClass) -> tuple[float, ...]:
    """Positional weights for a byline of ``n`` authors, summing to one.

    Extramural: first and last 0.30 each, second and second-to-last 0.15
    each, the remaining 0.10 split evenly. Intramural: first and last 0.40
    each, 0.20 split evenly among the others. For short bylines an author
    holding several roles collects every role's weight, roles nobody holds
    are dropped, and the result is rescaled to sum to one.
    """
    if n <= 0:
        raise ValueError(f"byline length must be positive, got {n}")
    cls = CollaborationClass(cls)
    edge, inner, pool = _SCHEMES[cls]
    weights = [0.0] * n
    weights[0] += edge
    weights[-1] += edge
    if cls is CollaborationClass.EXTRAMURAL:
        if n >= 2:
            weights[1] += inner
            weights[n - 2] += inner
        roles = {0, n - 1, 1, n - 2} if n >= 2 else {0}
        full = n >= 5
    else:
        roles = {0, n - 1}
        full = n >= 3
    others = [i for i in range(n) if i not in roles]
    for i in others:
        weights[i] += pool / len(others)
    if not full:
        total = sum(weights)
        weights = [w / total for w in weights]
    return tuple(weights)


def affiliation_split(author_weight: float, affiliations: Sequence[str]) -> list[tuple[str, float]]:
    """Spread an author's weight evenly over their ``m`` affiliations."""
    m = len(affiliations)
    if m < 1:
        raise ValueError("an author needs at least one affiliation")
    share = author_weight / m
    return [(aff, share) for aff in affiliations]


@dataclass(frozen=True)
class CreditShare:
    pub_id: str
    position: int
    author_weight: float
    # (institution_id, LAU code or FOREIGN/UNRESOLVED, share)
    splits: tuple[tuple[str, str, float], ...]


@dataclass
class TerritoryShares:
    lau: dict[str, float] = field(default_factory=dict)
    foreign: float = 0.0
    unresolved: float = 0.0

    def total(self) -> float:
        return sum(self.lau.values()) + self.foreign + self.unresolved


def _location(inst: InstitutionRecord, home: str) -> str:
    if inst.lau_code:
        return inst.lau_code
    if fold(inst.country) != home:
        return FOREIGN
    return UNRESOLVED


def credit_shares(pub: PublicationRecord, institutions: Mapping[str, InstitutionRecord],
                  country: str = "Italy") -> list[CreditShare]:
    home = fold(country)
    cls = classify_collaboration(pub.byline)
    weights = author_weights(len(pub.byline), cls)
    out = []
    for entry, weight in zip(pub.byline, weights):
        splits = tuple(
            (aff, _location(institutions[aff], home), share)
            for aff, share in affiliation_split(weight, entry.affiliations)
        )
        out.append(CreditShare(pub.pub_id, entry.position, weight, splits))
    return out


def territory_shares(pub: PublicationRecord, institutions: Mapping[str, InstitutionRecord], index=None, *,
                     strict: bool = True, country: str | None = None) -> TerritoryShares:
    """Fraction of ``pub`` credited to each LAU, plus foreign and unresolved residuals.

    With ``strict`` a domestic institution lacking a LAU code is an error;
    otherwise its share is booked as unresolved and never redistributed.
    """
    home = fold(country if country is not None else (index.country if index is not None else "Italy"))
    weights = author_weights(len(pub.byline), classify_collaboration(pub.byline))
    result = TerritoryShares()
    lau = result.lau
    for entry, weight in zip(pub.byline, weights):
        share = weight / len(entry.affiliations)
        for aff in entry.affiliations:
            where = _location(institutions[aff], home)
            if where is FOREIGN:
                result.foreign += share
            elif where is UNRESOLVED:
                if strict:
                    raise ValidationError(
                        f"domestic institution {aff!r} in publication {pub.pub_id!r} has no LAU code"
                    )
                result.unresolved += share
            else:
                lau[where] = lau.get(where, 0.0) + share
    return result


def iter_credit(pubs: Iterable[PublicationRecord], institutions, country: str = "Italy"):
    for pub in pubs:
        yield from credit_shares(pub, institutions, country)
