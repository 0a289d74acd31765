"""Synthetic "small Italy" datasets for fixtures, property tests and benchmarks.

Run ``python -m sciwealth.synthetic OUT_DIR --publications 100000`` to write
a full input set (plus ``gold.csv``) into ``OUT_DIR``.
"""
from __future__ import annotations

import argparse
import csv
import json
import random
from dataclasses import dataclass
from pathlib import Path

from .pipeline import InputPaths

# (macro code, macro name, [(region code, region name, [(province code, province name,
#   [(lau code, lau name, aliases, population)])])])
ITALY = [
    ("ITC", "Northwest", [
        ("ITC1", "Piemonte", [("ITC11", "Torino", [("001272", "Torino", "Turin", 848885),
                                                   ("001156", "Ivrea", "", 23226)])]),
        ("ITC2", "Valle d'Aosta", [("ITC20", "Aosta", [("007003", "Aosta", "", 33916)])]),
        ("ITC3", "Liguria", [("ITC33", "Genova", [("010025", "Genova", "Genoa", 565752)])]),
        ("ITC4", "Lombardia", [("ITC4C", "Milano", [("015146", "Milano", "Milan", 1406242),
                                                    ("015209", "Sesto San Giovanni", "", 81393)]),
                               ("ITC46", "Bergamo", [("016024", "Bergamo", "", 120923)])]),
    ]),
    ("ITH", "Northeast", [
        ("ITH3", "Veneto", [("ITH36", "Padova", [("028060", "Padova", "Padua", 210077)])]),
        ("ITH4", "Friuli-Venezia Giulia", [("ITH44", "Trieste", [("032006", "Trieste", "", 204338)])]),
        ("ITH5", "Emilia-Romagna", [("ITH55", "Bologna", [("037006", "Bologna", "", 390636)])]),
    ]),
    ("ITI", "Center", [
        ("ITI1", "Toscana", [("ITI14", "Firenze", [("048017", "Firenze", "Florence", 382258)]),
                             ("ITI17", "Pisa", [("050026", "Pisa", "", 90118)]),
                             ("ITI19", "Siena", [("052032", "Siena", "", 53901)])]),
        ("ITI2", "Umbria", [("ITI21", "Perugia", [("054039", "Perugia", "", 165683)])]),
        ("ITI4", "Lazio", [("ITI43", "Roma", [("058091", "Roma", "Rome", 2872800),
                                              ("058047", "Frascati", "", 22548)])]),
    ]),
    ("ITF", "South", [
        ("ITF1", "Abruzzo", [("ITF13", "Pescara", [("068028", "Pescara", "", 119217)]),
                             ("ITF14", "Chieti", [("069022", "Chieti", "", 51484)])]),
        ("ITF2", "Molise", [("ITF22", "Campobasso", [("070006", "Campobasso", "", 49262)])]),
        ("ITF3", "Campania", [("ITF33", "Napoli", [("063049", "Napoli", "Naples", 959188)])]),
        ("ITF4", "Puglia", [("ITF45", "Lecce", [("075035", "Lecce", "", 95441)]),
                            ("ITF47", "Bari", [("072006", "Bari", "", 320862)])]),
    ]),
    ("ITG", "Islands", [
        ("ITG1", "Sicilia", [("ITG12", "Palermo", [("082053", "Palermo", "", 668405)]),
                             ("ITG17", "Catania", [("087015", "Catania", "", 311584)])]),
        ("ITG2", "Sardegna", [("ITG2F", "Cagliari", [("092009", "Cagliari", "", 154460)])]),
    ]),
]

FOREIGN_CITIES = [("Lyon", "France"), ("Boston", "USA"), ("Leiden", "Netherlands"), ("Madrid", "Spain")]

SPECIALTIES = [
    ("Virology", ["SC-VIR", "SC-INF"], ["MED/07"]),
    ("Infectious diseases", ["SC-INF"], ["MED/17"]),
    ("Public health", ["SC-PH"], ["MED/42"]),
    ("Clinical neurology", ["SC-NEU"], ["MED/26"]),
]
EXTRA_SCS = ["SC-BIO"]
SDS_COSTS = {"MED/07": (70.0, 15.0), "MED/17": (72.0, 12.0), "MED/42": (65.0, 9.0),
             "MED/26": (74.0, 14.0), "BIO/10": (68.0, 16.0)}  # thousands of euros

_SYLLABLES = ["ba", "be", "ca", "ci", "da", "do", "fa", "fe", "ga", "gi", "la", "li", "ma", "mo", "na", "ni",
              "pa", "pe", "ra", "ri", "sa", "so", "ta", "te", "va", "vi", "za", "zo"]
_GIVEN = ["Anna", "Bruno", "Carla", "Dario", "Elena", "Fabio", "Giulia", "Luca", "Marco", "Nadia", "Paolo",
          "Rita", "Sara", "Tommaso", "Valeria"]


def _write_rows(path: Path, header, rows):
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_gazetteer(out: Path, *, nation: bool = True):
    rows, pops = [], []
    if nation:
        rows.append(("IT", "NATION", "Italia", "", ""))
    for macro, mname, regions in ITALY:
        rows.append((macro, "NUTS1", mname, "IT" if nation else "", ""))
        for reg, rname, provinces in regions:
            rows.append((reg, "NUTS2", rname, macro, ""))
            for prov, pname, laus in provinces:
                rows.append((prov, "NUTS3", pname, reg, ""))
                for lau, lname, aliases, pop in laus:
                    rows.append((lau, "LAU", lname, prov, aliases))
                    pops.append((lau, pop, 2019))
    _write_rows(out / "gazetteer.csv", ("code", "level", "name", "parent_code", "aliases"), rows)
    _write_rows(out / "population.csv", ("code", "population", "reference_year"), pops)


def all_laus():
    return [(lau, lname, aliases) for _, _, regions in ITALY for _, _, provs in regions
            for _, _, laus in provs for lau, lname, aliases, _ in laus]


def _surnames(rng: random.Random, count: int, prefix: str) -> list[str]:
    seen, out = set(), []
    while len(out) < count:
        name = prefix + "".join(rng.choice(_SYLLABLES) for _ in range(rng.randint(2, 4)))
        name = name.capitalize()
        if name not in seen:
            seen.add(name)
            out.append(name)
    return out


@dataclass
class Dataset:
    paths: InputPaths
    gold: list[tuple[str, int, str]]


def generate(out_dir, *, publications: int = 200, professors: int = 60, seed: int = 0,
             max_authors: int = 12, mean_authors: float | None = None, professor_rate: float = 0.35,
             foreign_rate: float = 0.1, multi_aff_rate: float = 0.1, intramural_rate: float = 0.2,
             window: tuple[int, int] = (2014, 2018), out_of_window: int = 0, unresolved_institution: bool = False,
             nation_node: bool = True, zero_citation_rate: float = 0.25) -> Dataset:
    """Write a consistent, unambiguous input set to ``out_dir``.

    Professors carry unique surnames and other authors draw from a disjoint
    pool, so the default matching rules recover ``gold`` exactly.
    """
    rng = random.Random(seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_gazetteer(out, nation=nation_node)

    laus = all_laus()
    institutions = []  # (id, name, city, country, lau_code)
    universities = []
    for i, (lau, lname, aliases) in enumerate(laus):
        uid = f"U{i:03d}"
        institutions.append((uid, f"Universita di {lname}", lname, "Italy", lau))
        universities.append(uid)
    # research centers given by city only, resolved through the gazetteer (aliases included)
    centers = []
    for i, (lau, lname, aliases) in enumerate(laus[::3]):
        cid = f"R{i:03d}"
        city = aliases.split(";")[0] if aliases else lname
        institutions.append((cid, f"CNR institute {city}", city.upper() if i % 2 else city, "Italy", ""))
        centers.append(cid)
    if unresolved_institution:
        institutions.append(("R999", "Private clinic", "Atlantide", "Italy", ""))
        centers.append("R999")
    foreign = []
    for i, (city, country) in enumerate(FOREIGN_CITIES):
        fid = f"F{i:03d}"
        institutions.append((fid, f"University of {city}", city, country, ""))
        foreign.append(fid)
    _write_rows(out / "institutions.csv", ("institution_id", "name", "city", "country", "lau_code"), institutions)

    # journals: a few per subject category, some spanning two categories
    all_scs = sorted({sc for _, scs, _ in SPECIALTIES for sc in scs} | set(EXTRA_SCS))
    journals = []
    years = list(range(window[0] - 1, window[1] + 2))
    for j in range(max(6, len(all_scs) * 3)):
        scs = [all_scs[j % len(all_scs)]]
        if j % 4 == 3:
            scs.append(all_scs[(j + 1) % len(all_scs)])
        journals.append((f"J{j:03d}", scs))
    journal_rows = []
    for jid, scs in journals:
        for y in years:
            impact = 0.0 if (jid == "J005" and y == window[0]) else round(rng.uniform(0.5, 9.0), 3)
            journal_rows.append((jid, y, f"{impact:.3f}", ";".join(scs)))
    _write_rows(out / "journals.csv", ("journal_id", "year", "impact_factor", "sc_codes"), journal_rows)

    weight_rows = [(y, sc, f"{rng.uniform(0.3, 1.0):.2f}") for y in years for sc in all_scs]
    _write_rows(out / "weights.csv", ("year", "sc_code", "citation_weight"), weight_rows)

    sds_codes = sorted(SDS_COSTS)
    _write_rows(out / "costs.csv", ("sds_code", "w_r", "k"),
                [(s, f"{SDS_COSTS[s][0]:.2f}", f"{SDS_COSTS[s][1]:.2f}") for s in sds_codes])

    prof_surnames = _surnames(rng, professors, "")
    roster = []
    for i, surname in enumerate(prof_surnames):
        given = rng.choice(_GIVEN)
        start = rng.randint(window[0] - 1, window[1])
        end = rng.randint(max(start, window[0]), window[1])
        active = ";".join(str(y) for y in range(start, end + 1))
        full = f"{surname}, {given}" if i % 2 else f"{given} {surname}"
        roster.append((f"P{i:05d}", full, rng.choice(universities), sds_codes[i % len(sds_codes)], active,
                       rng.choice(["PO", "PA", "RU"])))
    _write_rows(out / "roster.csv", ("professor_id", "full_name", "university_id", "sds_code", "active_years",
                                     "rank"), roster)

    spec_doc = {
        "window": list(window),
        "census_date": f"{window[1] + 1}-12-31",
        "country": "Italy",
        "specialties": [{"name": n, "sc_codes": scs, "sds_codes": sds} for n, scs, sds in SPECIALTIES],
    }
    (out / "specialties.json").write_text(json.dumps(spec_doc, indent=2) + "\n", encoding="utf-8")

    other_surnames = _surnames(rng, 400, "x")
    domestic = universities + centers
    gold = []
    n_total = publications + out_of_window
    with (out / "publications.jsonl").open("w", encoding="utf-8") as fh:
        for p in range(n_total):
            pub_id = f"W{p:07d}"
            year = rng.randint(*window) if p < publications else window[0] - 1
            jid, scs = journals[rng.randrange(len(journals))]
            if mean_authors is not None:
                n = min(max_authors, max(1, int(rng.expovariate(1 / mean_authors)) + 1))
            else:
                n = rng.randint(1, max_authors)
            intramural = rng.random() < intramural_rate
            home = rng.choice(universities)
            used_profs = set()
            byline = []
            for pos in range(1, n + 1):
                prof = None
                if rng.random() < professor_rate:
                    cand = roster[rng.randrange(len(roster))]
                    if cand[0] not in used_profs and (not intramural or cand[2] == home):
                        prof = cand
                if prof is not None:
                    used_profs.add(prof[0])
                    surname = prof[1].split(",")[0] if "," in prof[1] else prof[1].split()[-1]
                    given = prof[1].split(",")[1].strip() if "," in prof[1] else prof[1].split()[0]
                    name = f"{surname}, {given[0]}"
                    affs = [prof[2]]
                    if not intramural and rng.random() < multi_aff_rate:
                        affs.append(rng.choice(domestic + foreign))
                    gold.append((pub_id, pos, prof[0]))
                else:
                    name = f"{rng.choice(other_surnames)}, {rng.choice('ABCDEFGHILMNOPRST')}"
                    if intramural:
                        affs = [home]
                    else:
                        pool = foreign if rng.random() < foreign_rate else domestic
                        affs = [rng.choice(pool)]
                        if rng.random() < multi_aff_rate:
                            affs.append(rng.choice(domestic + foreign))
                affs = list(dict.fromkeys(affs))
                byline.append({"name": name, "position": pos, "affiliations": affs})
            if not any(a in domestic for e in byline for a in e["affiliations"]):
                byline[0]["affiliations"].append(home)
            if intramural and any(e["affiliations"] != [home] for e in byline):
                for e in byline:
                    e["affiliations"] = [home]
            cites = 0 if rng.random() < zero_citation_rate else int(rng.paretovariate(1.5) * 3)
            rec = {"pub_id": pub_id, "year": year, "doi": f"10.9999/syn.{p}", "journal_id": jid,
                   "subject_categories": scs, "citation_count": cites, "byline": byline}
            fh.write(json.dumps(rec, separators=(",", ":")) + "\n")
    # gold covers in-window publications only, like the scored corpus
    gold = [g for g in gold if int(g[0][1:]) < publications]
    _write_rows(out / "gold.csv", ("pub_id", "position", "professor_id"), gold)

    paths = InputPaths(
        corpus=out / "publications.jsonl", journals=out / "journals.csv", institutions=out / "institutions.csv",
        gazetteer=out / "gazetteer.csv", specialties=out / "specialties.json", roster=out / "roster.csv",
        costs=out / "costs.csv", population=out / "population.csv", weights=out / "weights.csv",
        gold=out / "gold.csv",
    )
    return Dataset(paths, gold)


def main(argv=None):
    ap = argparse.ArgumentParser(description="write a synthetic input set")
    ap.add_argument("out", type=Path)
    ap.add_argument("--publications", type=int, default=1000)
    ap.add_argument("--professors", type=int, default=500)
    ap.add_argument("--mean-authors", type=float, default=None)
    ap.add_argument("--max-authors", type=int, default=12)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    generate(args.out, publications=args.publications, professors=args.professors, seed=args.seed,
             mean_authors=args.mean_authors, max_authors=args.max_authors)


if __name__ == "__main__":
    main()
