"""Loading and validation of every input file, plus the corpus summary table."""
from __future__ import annotations

import datetime as dt
import json
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType

from .io import read_csv
from .models import (
    AuthorshipEntry,
    CostParameters,
    Corpus,
    DanglingReferenceError,
    DuplicateRecordError,
    ForeignPublicationError,
    InstitutionRecord,
    JournalRecord,
    ProfessorRecord,
    PublicationRecord,
    Roster,
    Specialty,
    SpecialtyConfig,
    ValidationError,
    WeightEntry,
    fold,
)


def _int(value, *, path, line, field, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        if isinstance(value, str):
            try:
                value = int(value.strip())
            except ValueError:
                raise ValidationError(f"expected an integer, got {value!r}", path=path, line=line,
                                      field=field) from None
        else:
            raise ValidationError(f"expected an integer, got {value!r}", path=path, line=line, field=field)
    if minimum is not None and value < minimum:
        raise ValidationError(f"must be >= {minimum}, got {value}", path=path, line=line, field=field)
    return value


def _float(text, *, path, line, field):
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise ValidationError(f"expected a number, got {text!r}", path=path, line=line, field=field) from None
    if value != value or value in (float("inf"), float("-inf")):
        raise ValidationError(f"expected a finite number, got {text!r}", path=path, line=line, field=field)
    return value


def _codes(text: str) -> tuple[str, ...]:
    return tuple(c.strip() for c in text.split(";") if c.strip())


def _str_list(value, *, path, line, field):
    if not isinstance(value, list) or not value or not all(isinstance(v, str) and v.strip() for v in value):
        raise ValidationError("expected a non-empty array of strings", path=path, line=line, field=field)
    return tuple(v.strip() for v in value)


def _parse_publication(obj, *, path, line) -> PublicationRecord:
    if not isinstance(obj, dict):
        raise ValidationError("expected a JSON object", path=path, line=line)
    for key in ("pub_id", "year", "journal_id", "subject_categories", "citation_count", "byline"):
        if key not in obj:
            raise ValidationError("missing key", path=path, line=line, field=key)
    pub_id = obj["pub_id"]
    if not isinstance(pub_id, str) or not pub_id:
        raise ValidationError("pub_id must be a non-empty string", path=path, line=line, field="pub_id")
    year = _int(obj["year"], path=path, line=line, field="year")
    citations = _int(obj["citation_count"], path=path, line=line, field="citation_count", minimum=0)
    doi = obj.get("doi") or None
    journal_id = obj["journal_id"]
    if not isinstance(journal_id, str) or not journal_id:
        raise ValidationError("journal_id must be a non-empty string", path=path, line=line, field="journal_id")
    scs = _str_list(obj["subject_categories"], path=path, line=line, field="subject_categories")

    raw_byline = obj["byline"]
    if not isinstance(raw_byline, list) or not raw_byline:
        raise ValidationError("byline must be a non-empty array", path=path, line=line, field="byline")
    entries = []
    for entry in raw_byline:
        if not isinstance(entry, dict):
            raise ValidationError("byline entries must be objects", path=path, line=line, field="byline")
        name = entry.get("name")
        if not isinstance(name, str) or not name.strip():
            raise ValidationError("author name must be a non-empty string", path=path, line=line,
                                  field="byline.name")
        position = _int(entry.get("position"), path=path, line=line, field="byline.position", minimum=1)
        affs = _str_list(entry.get("affiliations"), path=path, line=line, field="byline.affiliations")
        entries.append(AuthorshipEntry(name.strip(), affs, position))
    entries.sort(key=lambda e: e.position)
    if [e.position for e in entries] != list(range(1, len(entries) + 1)):
        raise ValidationError("byline positions must be unique and run 1..n", path=path, line=line,
                              field="byline.position")
    return PublicationRecord(pub_id, year, doi, journal_id, scs, citations, tuple(entries))


def load_journals(path) -> dict[str, JournalRecord]:
    impact: dict[str, dict[int, float]] = {}
    scs: dict[str, list[str]] = {}
    for line, row in read_csv(path, ("journal_id", "year", "impact_factor", "sc_codes")):
        jid = row["journal_id"].strip()
        if not jid:
            raise ValidationError("empty journal_id", path=path, line=line, field="journal_id")
        year = _int(row["year"], path=path, line=line, field="year")
        value = _float(row["impact_factor"], path=path, line=line, field="impact_factor")
        if value < 0:
            raise ValidationError(f"impact factor must be >= 0, got {value}", path=path, line=line,
                                  field="impact_factor")
        codes = _codes(row["sc_codes"])
        if not codes:
            raise ValidationError("at least one subject category required", path=path, line=line,
                                  field="sc_codes")
        per_year = impact.setdefault(jid, {})
        if year in per_year:
            raise DuplicateRecordError(f"duplicate impact factor for journal {jid!r} in {year}", path=path,
                                       line=line)
        per_year[year] = value
        known = scs.setdefault(jid, [])
        known.extend(c for c in codes if c not in known)
    return {
        jid: JournalRecord(jid, MappingProxyType(dict(sorted(impact[jid].items()))), tuple(scs[jid]))
        for jid in sorted(impact)
    }


def load_institutions(path, *, country: str = "Italy") -> dict[str, InstitutionRecord]:
    out: dict[str, InstitutionRecord] = {}
    for line, row in read_csv(path, ("institution_id", "name", "city", "country", "lau_code")):
        iid = row["institution_id"].strip()
        if not iid:
            raise ValidationError("empty institution_id", path=path, line=line, field="institution_id")
        if iid in out:
            raise DuplicateRecordError(f"duplicate institution_id {iid!r}", path=path, line=line)
        lau = row["lau_code"].strip() or None
        inst_country = row["country"].strip()
        if lau is not None and fold(inst_country) != fold(country):
            raise ValidationError(f"foreign institution {iid!r} ({inst_country}) cannot carry a LAU code",
                                  path=path, line=line, field="lau_code")
        out[iid] = InstitutionRecord(iid, row["name"].strip(), row["city"].strip(), inst_country, lau)
    return out


def load_publications(path) -> list[PublicationRecord]:
    path = Path(path)
    pubs: list[PublicationRecord] = []
    seen: set[str] = set()
    with path.open(encoding="utf-8") as fh:
        for line, text in enumerate(fh, start=1):
            if not text.strip():
                continue
            try:
                obj = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"invalid JSON: {exc.msg}", path=path, line=line) from None
            pub = _parse_publication(obj, path=path, line=line)
            if pub.pub_id in seen:
                raise DuplicateRecordError(f"duplicate pub_id {pub.pub_id!r}", path=path, line=line,
                                           field="pub_id")
            seen.add(pub.pub_id)
            pubs.append(pub)
    return pubs


def load_corpus(publications_path, journals_path, institutions_path, *, country: str = "Italy") -> Corpus:
    """Load and cross-validate publications, journals and institutions.

    Publications are kept sorted by ``pub_id`` so the corpus does not depend
    on input row order.
    """
    journals = load_journals(journals_path)
    institutions = load_institutions(institutions_path, country=country)
    pubs = load_publications(publications_path)

    missing_journals = {p.journal_id for p in pubs if p.journal_id not in journals}
    if missing_journals:
        raise DanglingReferenceError("journal", missing_journals, path=publications_path)
    missing_insts = {
        a for p in pubs for e in p.byline for a in e.affiliations if a not in institutions
    }
    if missing_insts:
        raise DanglingReferenceError("institution", missing_insts, path=publications_path)

    home = fold(country)
    domestic = {iid for iid, inst in institutions.items() if fold(inst.country) == home}
    foreign_only = [
        p.pub_id for p in pubs if not any(a in domestic for e in p.byline for a in e.affiliations)
    ]
    if foreign_only:
        shown = ", ".join(sorted(foreign_only)[:10])
        raise ForeignPublicationError(
            f"{len(foreign_only)} publication(s) without a {country} address: {shown}", path=publications_path
        )

    pubs.sort(key=lambda p: p.pub_id)
    return Corpus(tuple(pubs), journals, institutions, country)


def load_costs(path) -> dict[str, CostParameters]:
    costs: dict[str, CostParameters] = {}
    for line, row in read_csv(path, ("sds_code", "w_r", "k")):
        sds = row["sds_code"].strip()
        if sds in costs:
            raise DuplicateRecordError(f"duplicate cost row for {sds!r}", path=path, line=line)
        w_r = _float(row["w_r"], path=path, line=line, field="w_r")
        k = _float(row["k"], path=path, line=line, field="k")
        if w_r <= 0:
            raise ValidationError(f"w_r must be > 0, got {w_r}", path=path, line=line, field="w_r")
        if k < 0:
            raise ValidationError(f"k must be >= 0, got {k}", path=path, line=line, field="k")
        costs[sds] = CostParameters(sds, w_r, k)
    return costs


def load_roster(roster_path, costs_path, *, window: tuple[int, int] | None = None,
                institutions=None) -> Roster:
    """Load the professor roster together with per-field cost parameters.

    Active years are clipped to ``window``; a professor left with no active
    year inside it is rejected, since productivity is a per-year rate.
    """
    costs = load_costs(costs_path)
    professors: list[ProfessorRecord] = []
    seen: set[str] = set()
    required = ("professor_id", "full_name", "university_id", "sds_code", "active_years", "rank")
    for line, row in read_csv(roster_path, required):
        pid = row["professor_id"].strip()
        if not pid:
            raise ValidationError("empty professor_id", path=roster_path, line=line, field="professor_id")
        if pid in seen:
            raise DuplicateRecordError(f"duplicate professor_id {pid!r}", path=roster_path, line=line)
        seen.add(pid)
        years = {_int(y, path=roster_path, line=line, field="active_years") for y in _codes(row["active_years"])}
        if window is not None:
            years = {y for y in years if window[0] <= y <= window[1]}
        if not years:
            span = f" within {window[0]}-{window[1]}" if window else ""
            raise ValidationError(f"professor {pid!r} has no active year{span}", path=roster_path, line=line,
                                  field="active_years")
        professors.append(ProfessorRecord(pid, row["full_name"].strip(), row["university_id"].strip(),
                                          row["sds_code"].strip(), frozenset(years), row["rank"].strip()))

    no_cost = {p.sds_code for p in professors if p.sds_code not in costs}
    if no_cost:
        raise ValidationError(f"no cost parameters for field code(s): {', '.join(sorted(no_cost))}",
                              path=costs_path)
    if institutions is not None:
        missing = {p.university_id for p in professors if p.university_id not in institutions}
        if missing:
            raise DanglingReferenceError("university", missing, path=roster_path)
    professors.sort(key=lambda p: p.professor_id)
    return Roster(tuple(professors), costs)


def load_weights(path) -> dict[tuple[int, str], WeightEntry]:
    weights: dict[tuple[int, str], WeightEntry] = {}
    for line, row in read_csv(path, ("year", "sc_code", "citation_weight")):
        year = _int(row["year"], path=path, line=line, field="year")
        sc = row["sc_code"].strip()
        w = _float(row["citation_weight"], path=path, line=line, field="citation_weight")
        if not 0 <= w <= 1:
            raise ValidationError(f"citation_weight must lie in [0, 1], got {w}", path=path, line=line,
                                  field="citation_weight")
        if (year, sc) in weights:
            raise DuplicateRecordError(f"duplicate weight for ({year}, {sc!r})", path=path, line=line)
        weights[(year, sc)] = WeightEntry(year, sc, w)
    return weights


def load_specialties(path) -> SpecialtyConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON: {exc.msg}", path=path, line=exc.lineno) from None
    try:
        start, end = (int(y) for y in doc["window"])
        census = dt.date.fromisoformat(doc["census_date"])
        specialties = tuple(
            Specialty(s["name"], frozenset(s["sc_codes"]), frozenset(s["sds_codes"])) for s in doc["specialties"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed specialty config: {exc!r}", path=path) from None
    return SpecialtyConfig(specialties, (start, end), census, doc.get("country", "Italy"))


def load_gold(path) -> list[tuple[str, int, str]]:
    gold = []
    for line, row in read_csv(path, ("pub_id", "position", "professor_id")):
        gold.append((row["pub_id"].strip(), _int(row["position"], path=path, line=line, field="position",
                                                 minimum=1), row["professor_id"].strip()))
    return gold


def dump_publications(corpus: Corpus, path) -> Path:
    """Write publications as canonical JSON lines (sorted ids, fixed key order)."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for pub in sorted(corpus.publications, key=lambda p: p.pub_id):
            obj = {
                "pub_id": pub.pub_id,
                "year": pub.year,
                "doi": pub.doi,
                "journal_id": pub.journal_id,
                "subject_categories": list(pub.subject_categories),
                "citation_count": pub.citation_count,
                "byline": [
                    {"name": e.raw_name, "position": e.position, "affiliations": list(e.affiliations)}
                    for e in pub.byline
                ],
            }
            fh.write(json.dumps(obj, ensure_ascii=False, separators=(",", ":")) + "\n")
    return path


@dataclass(frozen=True)
class SummaryRow:
    specialty: str
    publications: int
    citations: int
    authorships: int
    provinces: int
    regions: int

    def as_tuple(self):
        return (self.publications, self.citations, self.authorships, self.provinces, self.regions)


def corpus_summary(corpus: Corpus, config: SpecialtyConfig, index) -> list[SummaryRow]:
    """Per-specialty publication, citation and authorship counts with territorial spread.

    The closing ``Total`` row counts distinct publications, so it is smaller
    than the column sum whenever specialties overlap. A province or region is
    counted when some publication assigns it a positive fractional share.
    """
    from .credit import territory_shares
    from .territory import Level

    per_spec = {s.name: [] for s in config.specialties}
    for pub in corpus.publications:
        for name in config.specialties_of_publication(pub):
            per_spec[name].append(pub)

    presence_cache: dict[str, tuple[set, set]] = {}

    def presence(pub):
        hit = presence_cache.get(pub.pub_id)
        if hit is None:
            shares = territory_shares(pub, corpus.institutions, index, strict=False)
            provinces, regions = set(), set()
            for lau, share in shares.lau.items():
                if share > 0:
                    provinces.add(index.ancestor(lau, Level.NUTS3))
                    regions.add(index.ancestor(lau, Level.NUTS2))
            provinces.discard(None)
            regions.discard(None)
            hit = presence_cache[pub.pub_id] = (provinces, regions)
        return hit

    def row(name, pubs):
        provinces, regions = set(), set()
        for pub in pubs:
            p, r = presence(pub)
            provinces |= p
            regions |= r
        return SummaryRow(name, len(pubs), sum(p.citation_count for p in pubs),
                          sum(len(p.byline) for p in pubs), len(provinces), len(regions))

    rows = [row(s.name, per_spec[s.name]) for s in config.specialties]
    distinct = {p.pub_id: p for pubs in per_spec.values() for p in pubs}
    rows.append(row("Total", [distinct[k] for k in sorted(distinct)]))
    return rows
