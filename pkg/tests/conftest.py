import csv
import json
from pathlib import Path

import pytest

from sciwealth.pipeline import InputPaths
from sciwealth.synthetic import generate

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def write_csv(path: Path, header, rows):
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def pub(pub_id, byline, *, year=2016, journal="J1", scs=("SC1",), citations=0, doi=None):
    """Publication dict; ``byline`` is a list of (name, [affiliations])."""
    return {
        "pub_id": pub_id, "year": year, "doi": doi, "journal_id": journal, "subject_categories": list(scs),
        "citation_count": citations,
        "byline": [{"name": n, "position": i, "affiliations": list(a)} for i, (n, a) in enumerate(byline, 1)],
    }


def write_publications(path: Path, pubs):
    path.write_text("".join(json.dumps(p) + "\n" for p in pubs), encoding="utf-8")
    return path


# A four-LAU toy country: two provinces in one region, plus a second region.
TOY_GAZETTEER = [
    ("IT", "NATION", "Italia", "", ""),
    ("N1", "NUTS1", "North", "IT", ""),
    ("R1", "NUTS2", "Region One", "N1", ""),
    ("R2", "NUTS2", "Region Two", "N1", ""),
    ("P1", "NUTS3", "Province A", "R1", ""),
    ("P2", "NUTS3", "Province B", "R1", ""),
    ("P3", "NUTS3", "Province C", "R2", ""),
    ("L1", "LAU", "Roma", "P1", "Rome"),
    ("L2", "LAU", "Frascati", "P1", ""),
    ("L3", "LAU", "Milano", "P2", "Milan"),
    ("L4", "LAU", "Forlì", "P3", ""),
]
TOY_POPULATION = [("L1", 2_000_000), ("L2", 1_000_000), ("L3", 1_500_000), ("L4", 500_000)]


@pytest.fixture
def toy_files(tmp_path):
    """Minimal, valid input set; tests overwrite single files as needed."""
    d = tmp_path
    write_csv(d / "gazetteer.csv", ("code", "level", "name", "parent_code", "aliases"), TOY_GAZETTEER)
    write_csv(d / "population.csv", ("code", "population", "reference_year"),
              [(c, p, 2019) for c, p in TOY_POPULATION])
    write_csv(d / "institutions.csv", ("institution_id", "name", "city", "country", "lau_code"), [
        ("U1", "Univ One", "Roma", "Italy", "L1"),
        ("U2", "Univ Two", "Milano", "Italy", "L3"),
        ("U3", "Univ Three", "Forlì", "Italy", "L4"),
        ("F1", "Foreign U", "Lyon", "France", ""),
    ])
    write_csv(d / "journals.csv", ("journal_id", "year", "impact_factor", "sc_codes"), [
        ("J1", 2016, "2.0", "SC1"), ("J2", 2016, "4.0", "SC1"), ("J3", 2016, "3.0", "SC2"),
    ])
    write_publications(d / "publications.jsonl", [
        pub("A1", [("Rossi, M", ["U1"]), ("Bianchi, L", ["U2"])], citations=2),
        pub("A2", [("Verdi, G", ["U1"])], journal="J2", citations=4),
        pub("A3", [("Neri, P", ["U3"]), ("Smith, J", ["F1"])], journal="J3", scs=("SC2",), citations=0),
    ])
    write_csv(d / "costs.csv", ("sds_code", "w_r", "k"), [("MED/07", "100", "20"), ("MED/17", "80", "10")])
    write_csv(d / "roster.csv", ("professor_id", "full_name", "university_id", "sds_code", "active_years", "rank"), [
        ("P1", "Mario Rossi", "U1", "MED/07", "2014;2015;2016", "PO"),
        ("P2", "Bianchi, Laura", "U2", "MED/17", "2016", "PA"),
    ])
    write_csv(d / "weights.csv", ("year", "sc_code", "citation_weight"), [(2016, "SC1", "0.5"), (2016, "SC2", "0.5")])
    (d / "specialties.json").write_text(json.dumps({
        "window": [2014, 2018], "census_date": "2019-12-31", "country": "Italy",
        "specialties": [{"name": "Virology", "sc_codes": ["SC1"], "sds_codes": ["MED/07"]},
                        {"name": "Infectious", "sc_codes": ["SC1", "SC2"], "sds_codes": ["MED/17"]}],
    }), encoding="utf-8")
    return InputPaths(
        corpus=d / "publications.jsonl", journals=d / "journals.csv", institutions=d / "institutions.csv",
        gazetteer=d / "gazetteer.csv", specialties=d / "specialties.json", roster=d / "roster.csv",
        costs=d / "costs.csv", population=d / "population.csv", weights=d / "weights.csv",
    )


@pytest.fixture(scope="session")
def synthetic_italy(tmp_path_factory):
    """The fixed synthetic-Italy dataset behind the golden files."""
    out = tmp_path_factory.mktemp("synthetic_italy")
    return generate(out, publications=300, professors=80, seed=11, out_of_window=5, unresolved_institution=True)


def cli_args(paths: InputPaths, *names):
    args = []
    for name, path in paths.items():
        if not names or name in names:
            args += [f"--{name}", str(path)]
    return args
