import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from sciwealth.models import InstitutionRecord, ValidationError
from sciwealth.synthetic import ITALY, write_gazetteer
from sciwealth.territory import (
    NATION_TOTAL,
    Level,
    Resolution,
    TerritoryIndex,
    TerritoryNode,
    build_index,
    reduce_address,
    resolve_institutions,
    rollup,
)

from conftest import write_csv

HEADER = ("code", "level", "name", "parent_code", "aliases")


def small_tree():
    return [
        TerritoryNode("N1", Level.NUTS1, "Macro", None),
        TerritoryNode("R1", Level.NUTS2, "Region", "N1"),
        TerritoryNode("P1", Level.NUTS3, "Prov 1", "R1"),
        TerritoryNode("P2", Level.NUTS3, "Prov 2", "R1"),
        TerritoryNode("A", Level.LAU, "Alfa", "P1", 100),
        TerritoryNode("B", Level.LAU, "Bravo", "P1", 200),
        TerritoryNode("C", Level.LAU, "Charlie", "P2", 300),
        TerritoryNode("D", Level.LAU, "Delta", "P2", 400),
    ]


def test_ancestor_chains():
    index = TerritoryIndex(small_tree())
    assert index.ancestors("A") == ["P1", "R1", "N1"]
    assert index.ancestor("D", Level.NUTS2) == "R1"
    assert index.children("P2") == ["C", "D"]
    assert index.codes_at(Level.LAU) == ["A", "B", "C", "D"]
    assert index.population("R1") == 1000
    assert index.national_population() == 1000


def test_orphan_names_both_codes(tmp_path):
    path = write_csv(tmp_path / "g.csv", HEADER, [("N1", "NUTS1", "M", "", ""), ("L9", "LAU", "X", "P404", "")])
    with pytest.raises(ValidationError) as err:
        build_index(path)
    assert "L9" in str(err.value) and "P404" in str(err.value)


def test_duplicate_code():
    nodes = small_tree() + [TerritoryNode("A", Level.LAU, "Again", "P1")]
    with pytest.raises(ValidationError, match="duplicate"):
        TerritoryIndex(nodes)


def test_cycle_detected():
    nodes = [TerritoryNode("X", Level.NUTS3, "x", "Y"), TerritoryNode("Y", Level.NUTS3, "y", "X")]
    with pytest.raises(ValidationError, match="cycle"):
        TerritoryIndex(nodes)


def test_level_skip_rejected():
    nodes = [TerritoryNode("N1", Level.NUTS1, "M", None), TerritoryNode("L", Level.LAU, "l", "N1")]
    with pytest.raises(ValidationError):
        TerritoryIndex(nodes)


def test_loaded_population_preferred_over_sum(tmp_path):
    write_csv(tmp_path / "g.csv", HEADER, [("N1", "NUTS1", "M", "", ""), ("R1", "NUTS2", "R", "N1", ""),
                                           ("P1", "NUTS3", "P", "R1", ""), ("A", "LAU", "a", "P1", "")])
    write_csv(tmp_path / "pop.csv", ("code", "population", "reference_year"), [("A", 10, 2019), ("R1", 15, 2019)])
    index = build_index(tmp_path / "g.csv", tmp_path / "pop.csv")
    assert index.population("P1") == 10
    assert index.population("R1") == 15
    assert index.population("N1") == 15


def test_northwest_macro_region(tmp_path):
    write_gazetteer(tmp_path)
    index = build_index(tmp_path / "gazetteer.csv", tmp_path / "population.csv")
    names = sorted(index[c].name for c in index.children("ITC"))
    assert names == ["Liguria", "Lombardia", "Piemonte", "Valle d'Aosta"]
    assert len(index.codes_at(Level.NUTS1)) == 5
    assert index.national_population() == sum(
        pop for _, _, regions in ITALY for _, _, provs in regions for _, _, laus in provs for *_, pop in laus)


@pytest.fixture
def italy(tmp_path):
    write_gazetteer(tmp_path)
    return build_index(tmp_path / "gazetteer.csv", tmp_path / "population.csv")


def test_reduce_address_examples(italy):
    rome = reduce_address("Rome", "Italy", italy)
    assert rome == "058091"
    assert reduce_address("ROMA", "Italy", italy) == rome
    assert reduce_address("  roma ", "ITALY", italy) == rome
    assert reduce_address("Lyon", "France", italy) is Resolution.FOREIGN
    assert reduce_address("Atlantide", "Italy", italy) is Resolution.UNRESOLVED


def test_diacritic_folding(tmp_path):
    write_csv(tmp_path / "g.csv", HEADER, [("N1", "NUTS1", "M", "", ""), ("R1", "NUTS2", "R", "N1", ""),
                                           ("P1", "NUTS3", "P", "R1", ""), ("L1", "LAU", "Forlì", "P1", "")])
    index = build_index(tmp_path / "g.csv")
    assert reduce_address("FORLI", "Italy", index) == "L1"


def test_ambiguous_city_rejected(tmp_path):
    write_csv(tmp_path / "g.csv", HEADER, [("N1", "NUTS1", "M", "", ""), ("R1", "NUTS2", "R", "N1", ""),
                                           ("P1", "NUTS3", "P", "R1", ""), ("L1", "LAU", "Castro", "P1", ""),
                                           ("L2", "LAU", "Castro", "P1", "")])
    with pytest.raises(ValidationError, match="ambiguous"):
        build_index(tmp_path / "g.csv")


def test_resolve_institutions(italy):
    insts = {
        "A": InstitutionRecord("A", "a", "Milan", "Italy"),
        "B": InstitutionRecord("B", "b", "Nowhere", "Italy"),
        "C": InstitutionRecord("C", "c", "Lyon", "France"),
        "D": InstitutionRecord("D", "d", "Pisa", "Italy", "050026"),
    }
    resolved, unresolved = resolve_institutions(insts, italy)
    assert resolved["A"].lau_code == "015146"
    assert resolved["C"].lau_code is None
    assert [i.institution_id for i in unresolved] == ["B"]
    with pytest.raises(ValidationError):
        resolve_institutions({"X": InstitutionRecord("X", "x", "Pisa", "Italy", "999999")}, italy)


def test_rollup_examples():
    index = TerritoryIndex(small_tree())
    assert rollup({"A": 2.0, "B": 3.0}, Level.NUTS3, index) == {"P1": 5.0}
    assert rollup({"C": 1.25}, Level.NUTS3, index) == {"P2": 1.25}
    assert rollup({"A": 2.0, "D": 3.0}, Level.NATION, index) == {NATION_TOTAL: 5.0}
    with pytest.raises(ValidationError):
        rollup({"ZZZ": 1.0}, Level.NUTS3, index)


def test_rollup_to_explicit_nation(italy):
    values = {lau: 1.0 for lau in italy.codes_at(Level.LAU)}
    assert rollup(values, Level.NATION, italy) == {"IT": float(len(values))}


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10_000))
def test_rollup_transitive_and_conserving(tmp_path_factory, seed):
    d = tmp_path_factory.getbasetemp() / "italy_gazetteer"
    if not (d / "gazetteer.csv").exists():
        d.mkdir(exist_ok=True)
        write_gazetteer(d)
    index = build_index(d / "gazetteer.csv", d / "population.csv")
    rng = random.Random(seed)
    laus = index.codes_at(Level.LAU)
    values = {c: rng.uniform(0, 10) ** rng.randint(1, 3) for c in rng.sample(laus, rng.randint(1, len(laus)))}
    direct = rollup(values, Level.NUTS1, index)
    assert direct == rollup(rollup(values, Level.NUTS3, index), Level.NUTS1, index)
    assert direct == rollup(rollup(values, Level.NUTS2, index), Level.NUTS1, index)
    assert abs(math.fsum(direct.values()) - math.fsum(values.values())) <= 1e-12 * max(1, sum(values.values()))
