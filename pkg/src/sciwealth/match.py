"""Rule-based linking of byline authorships to roster professors, and its evaluation."""
from __future__ import annotations

import enum
import re
from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable

from .models import ComputationError, Corpus, ProfessorRecord, Roster, ValidationError, fold


class NamePolicy(enum.Enum):
    EXACT_FOLDED = "exact-folded"
    SURNAME_INITIALS = "surname+initials"


class AmbiguityPolicy(enum.Enum):
    REJECT_AMBIGUOUS = "reject-ambiguous"
    ERROR = "error"


@dataclass(frozen=True)
class MatchRuleConfig:
    require_university_match: bool
    name_policy: NamePolicy
    ambiguity_policy: AmbiguityPolicy

    def __post_init__(self):
        object.__setattr__(self, "name_policy", NamePolicy(self.name_policy))
        object.__setattr__(self, "ambiguity_policy", AmbiguityPolicy(self.ambiguity_policy))

    def as_dict(self):
        return {
            "require_university_match": self.require_university_match,
            "name_policy": self.name_policy.value,
            "ambiguity_policy": self.ambiguity_policy.value,
        }


DEFAULT_RULES = MatchRuleConfig(
    require_university_match=True,
    name_policy=NamePolicy.SURNAME_INITIALS,
    ambiguity_policy=AmbiguityPolicy.REJECT_AMBIGUOUS,
)


class AmbiguousMatchError(ComputationError):
    pass


@dataclass
class MatchResult:
    assignments: list[tuple[str, int, str]] = field(default_factory=list)
    unmatched: list[tuple[str, int]] = field(default_factory=list)
    ambiguous: list[tuple[str, int, tuple[str, ...]]] = field(default_factory=list)

    def by_professor(self) -> dict[str, list[tuple[str, int]]]:
        out: dict[str, list[tuple[str, int]]] = defaultdict(list)
        for pub_id, position, prof in self.assignments:
            out[prof].append((pub_id, position))
        return dict(out)


@dataclass(frozen=True)
class MatchQuality:
    precision: float
    recall: float
    f_measure: float
    tp: int
    fp: int
    fn: int


_SPLIT = re.compile(r"[\s.\-]+")


def _tokens(text: str) -> list[str]:
    return [t for t in _SPLIT.split(text) if t]


def _initials(given_tokens: Iterable[str]) -> str:
    out = []
    for tok in given_tokens:
        # "MR" in a byline is two initials, "Mario" is one
        if tok.isupper() and len(tok) <= 3:
            out.extend(tok)
        else:
            out.append(tok[0])
    return fold("".join(out)).replace(" ", "")


@lru_cache(maxsize=1 << 18)
def parse_byline_name(raw: str) -> tuple[tuple[str, ...], tuple[str, ...], str]:
    """Split ``"De Caterina, R"`` into folded surname tokens, given tokens and initials."""
    if "," in raw:
        surname, given = raw.split(",", 1)
        s_tok, g_tok = _tokens(surname), _tokens(given)
    else:
        toks = _tokens(raw)
        s_tok, g_tok = toks[:-1], toks[-1:]
    return (tuple(fold(t) for t in s_tok), tuple(fold(t) for t in g_tok), _initials(g_tok))


@dataclass(frozen=True)
class _RosterName:
    professor: ProfessorRecord
    tokens: tuple[str, ...]
    surname: tuple[str, ...] | None  # known only for "Surname, Given" roster names
    given: tuple[str, ...]


def _roster_name(prof: ProfessorRecord) -> _RosterName:
    if "," in prof.full_name:
        surname, given = prof.full_name.split(",", 1)
        s_tok = tuple(fold(t) for t in _tokens(surname))
        g_tok = tuple(_tokens(given))
        return _RosterName(prof, s_tok + tuple(fold(t) for t in g_tok), s_tok, g_tok)
    toks = _tokens(prof.full_name)
    return _RosterName(prof, tuple(fold(t) for t in toks), None, tuple(toks))


class RosterIndex:
    """Professors keyed by the last token of their surname."""

    def __init__(self, roster: Roster | Iterable[ProfessorRecord]):
        profs = roster.professors if isinstance(roster, Roster) else tuple(roster)
        self._by_key: dict[str, list[_RosterName]] = defaultdict(list)
        for prof in profs:
            name = _roster_name(prof)
            key = (name.surname or name.tokens)[-1] if (name.surname or name.tokens) else ""
            self._by_key[key].append(name)

    def candidates(self, surname: tuple[str, ...], given: tuple[str, ...], initials: str,
                   policy: NamePolicy) -> list[ProfessorRecord]:
        if not surname:
            return []
        out = []
        n = len(surname)
        for entry in self._by_key.get(surname[-1], ()):
            if entry.surname is not None:
                if entry.surname != surname:
                    continue
                prof_given = entry.given
            else:
                if len(entry.tokens) <= n or entry.tokens[-n:] != surname:
                    continue
                prof_given = entry.given[:-n]
            if policy is NamePolicy.EXACT_FOLDED:
                if tuple(fold(t) for t in prof_given) != given:
                    continue
            else:
                prof_initials = "".join(fold(t)[0] for t in prof_given)
                if not initials or not prof_initials.startswith(initials):
                    continue
            out.append(entry.professor)
        return out


def match_authorships(corpus: Corpus, roster: Roster, rules: MatchRuleConfig) -> MatchResult:
    """Assign each byline position to at most one professor.

    A position with several surviving candidates is ambiguous; so is a
    professor who would claim two positions of the same publication.
    """
    index = RosterIndex(roster)
    result = MatchResult()
    for pub in sorted(corpus.publications, key=lambda p: p.pub_id):
        claimed: dict[int, str] = {}
        ambiguous: dict[int, tuple[str, ...]] = {}
        for entry in pub.byline:
            surname, given, initials = parse_byline_name(entry.raw_name)
            cands = index.candidates(surname, given, initials, rules.name_policy)
            if rules.require_university_match:
                affs = set(entry.affiliations)
                cands = [p for p in cands if p.university_id in affs]
            if len(cands) == 1:
                claimed[entry.position] = cands[0].professor_id
            elif len(cands) > 1:
                ids = tuple(sorted(p.professor_id for p in cands))
                if rules.ambiguity_policy is AmbiguityPolicy.ERROR:
                    raise AmbiguousMatchError(
                        f"publication {pub.pub_id!r} position {entry.position} ({entry.raw_name!r}) "
                        f"matches {len(ids)} professors: {', '.join(ids)}"
                    )
                ambiguous[entry.position] = ids
        owners: dict[str, list[int]] = defaultdict(list)
        for position, prof in claimed.items():
            owners[prof].append(position)
        for prof, positions in owners.items():
            if len(positions) > 1:
                if rules.ambiguity_policy is AmbiguityPolicy.ERROR:
                    raise AmbiguousMatchError(
                        f"professor {prof!r} matches positions {positions} of publication {pub.pub_id!r}"
                    )
                for position in positions:
                    del claimed[position]
                    ambiguous[position] = (prof,)
        for entry in pub.byline:
            pos = entry.position
            if pos in claimed:
                result.assignments.append((pub.pub_id, pos, claimed[pos]))
            elif pos in ambiguous:
                result.ambiguous.append((pub.pub_id, pos, ambiguous[pos]))
            else:
                result.unmatched.append((pub.pub_id, pos))
    return result


def evaluate_matching(result: MatchResult | Iterable[tuple[str, int, str]],
                      gold: Iterable[tuple[str, int, str]], pub_ids=None) -> MatchQuality:
    """Precision, recall and F-measure of assigned triples against a gold standard."""
    predicted = set(result.assignments if isinstance(result, MatchResult) else result)
    truth = set(gold)
    if pub_ids is not None:
        unknown = sorted({pub for pub, _, _ in truth if pub not in pub_ids})
        if unknown:
            raise ValidationError(f"gold references unknown publication(s): {', '.join(unknown[:10])}")
    tp = len(predicted & truth)
    fp = len(predicted - truth)
    fn = len(truth - predicted)
    precision = tp / (tp + fp) if tp + fp else 1.0
    recall = tp / (tp + fn) if tp + fn else 1.0
    # 2PR/(P+R) written over counts so that e.g. (8, 2, 2) gives exactly 0.8
    f_measure = 2 * tp / (2 * tp + fp + fn) if tp + fp + fn else 1.0
    return MatchQuality(precision, recall, f_measure, tp, fp, fn)
