"""Domain records shared by every stage of the pipeline.

All records are frozen; collections inside them are tuples or read-only
mappings so a loaded corpus can be handed to several workers as-is.
"""
from __future__ import annotations

import datetime as dt
import unicodedata
from dataclasses import dataclass, field
from functools import lru_cache
from types import MappingProxyType
from typing import Mapping


class SciwealthError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(SciwealthError):
    """An input file or record violates its schema or an invariant."""

    def __init__(self, message, *, path=None, line=None, field=None):
        self.path = path
        self.line = line
        self.field = field
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        super().__init__(f"{': '.join(where)}: {message}" if where else message)


class DanglingReferenceError(ValidationError):
    def __init__(self, kind, missing, *, path=None):
        self.kind = kind
        self.missing = sorted(set(missing))
        super().__init__(f"unknown {kind} referenced: {', '.join(self.missing)}", path=path)


class DuplicateRecordError(ValidationError):
    pass


class ForeignPublicationError(ValidationError):
    """A publication without any domestic address reached the loader."""


class ComputationError(SciwealthError):
    """A scoring stage cannot proceed on otherwise valid inputs."""


@lru_cache(maxsize=1 << 16)
def fold(text: str) -> str:
    """Case- and diacritic-insensitive key: ``"Università "`` -> ``"UNIVERSITA"``."""
    decomposed = unicodedata.normalize("NFKD", text)
    stripped = "".join(ch for ch in decomposed if not unicodedata.combining(ch))
    return " ".join(stripped.upper().split())


@dataclass(frozen=True, slots=True)
class AuthorshipEntry:
    raw_name: str
    affiliations: tuple[str, ...]
    position: int


@dataclass(frozen=True, slots=True)
class PublicationRecord:
    pub_id: str
    year: int
    doi: str | None
    journal_id: str
    subject_categories: tuple[str, ...]
    citation_count: int
    byline: tuple[AuthorshipEntry, ...]


@dataclass(frozen=True, slots=True)
class InstitutionRecord:
    institution_id: str
    name: str
    city: str
    country: str
    lau_code: str | None = None


@dataclass(frozen=True, slots=True)
class JournalRecord:
    journal_id: str
    impact_factor: Mapping[int, float]
    subject_categories: tuple[str, ...]


@dataclass(frozen=True, slots=True)
class ProfessorRecord:
    professor_id: str
    full_name: str
    university_id: str
    sds_code: str
    active_years: frozenset[int]
    rank: str = ""

    @property
    def years_active(self) -> int:
        return len(self.active_years)


@dataclass(frozen=True, slots=True)
class CostParameters:
    sds_code: str
    w_r: float
    k: float

    @property
    def research_cost(self) -> float:
        # half of the salary is assumed to pay for non-research duties
        return self.w_r / 2 + self.k


@dataclass(frozen=True, slots=True)
class WeightEntry:
    year: int
    sc_code: str
    citation_weight: float


@dataclass(frozen=True)
class Specialty:
    name: str
    sc_codes: frozenset[str]
    sds_codes: frozenset[str]


@dataclass(frozen=True)
class SpecialtyConfig:
    specialties: tuple[Specialty, ...]
    window: tuple[int, int]
    census_date: dt.date
    country: str = "Italy"

    def __post_init__(self):
        if self.window[0] > self.window[1]:
            raise ValidationError(f"observation window start {self.window[0]} after end {self.window[1]}")
        names = [s.name for s in self.specialties]
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            raise ValidationError(f"duplicate specialty names: {', '.join(dupes)}")

    @property
    def years(self) -> range:
        return range(self.window[0], self.window[1] + 1)

    def specialty(self, name: str) -> Specialty:
        for spec in self.specialties:
            if spec.name == name:
                return spec
        raise KeyError(name)

    def specialties_of_publication(self, pub: PublicationRecord) -> list[str]:
        scs = set(pub.subject_categories)
        return [s.name for s in self.specialties if scs & s.sc_codes]

    def specialties_of_sds(self, sds_code: str) -> list[str]:
        return [s.name for s in self.specialties if sds_code in s.sds_codes]


@dataclass(frozen=True)
class Corpus:
    publications: tuple[PublicationRecord, ...]
    journals: Mapping[str, JournalRecord]
    institutions: Mapping[str, InstitutionRecord]
    country: str = "Italy"
    _by_id: Mapping[str, PublicationRecord] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "journals", MappingProxyType(dict(self.journals)))
        object.__setattr__(self, "institutions", MappingProxyType(dict(self.institutions)))
        object.__setattr__(self, "_by_id", MappingProxyType({p.pub_id: p for p in self.publications}))

    def __len__(self):
        return len(self.publications)

    def __getitem__(self, pub_id: str) -> PublicationRecord:
        return self._by_id[pub_id]

    def __contains__(self, pub_id) -> bool:
        return pub_id in self._by_id

    def is_domestic(self, institution_id: str) -> bool:
        return fold(self.institutions[institution_id].country) == fold(self.country)

    def within(self, window: tuple[int, int]) -> "Corpus":
        start, end = window
        pubs = tuple(p for p in self.publications if start <= p.year <= end)
        return Corpus(pubs, self.journals, self.institutions, self.country)

    def with_institutions(self, institutions: Mapping[str, InstitutionRecord]) -> "Corpus":
        return Corpus(self.publications, self.journals, institutions, self.country)


@dataclass(frozen=True)
class Roster:
    professors: tuple[ProfessorRecord, ...]
    costs: Mapping[str, CostParameters]

    def __post_init__(self):
        object.__setattr__(self, "costs", MappingProxyType(dict(self.costs)))

    def __len__(self):
        return len(self.professors)
