import random

import pytest

from sciwealth.pipeline import run_pipeline
from sciwealth.synthetic import generate

import oracle

TOL = 1e-12


def random_dataset(out, seed):
    rng = random.Random(seed)
    return generate(
        out, seed=seed, publications=rng.randint(1, 20), professors=rng.randint(3, 12),
        max_authors=rng.choice([2, 4, 7, 12]), professor_rate=rng.uniform(0.2, 0.8),
        foreign_rate=rng.uniform(0, 0.4), multi_aff_rate=rng.uniform(0, 0.5), intramural_rate=rng.uniform(0, 0.5),
        out_of_window=rng.randint(0, 2), unresolved_institution=rng.random() < 0.5, nation_node=rng.random() < 0.5,
        zero_citation_rate=rng.uniform(0, 0.6),
    )


def oracle_mismatches(paths):
    """Compare the pipeline with the brute-force oracle; return human-readable mismatches."""
    result = run_pipeline(paths)
    expected = oracle.compute(paths.corpus.parent)
    bad = []

    def check(label, got, want):
        if want is None or got is None:
            if not (want is None and got is None):
                bad.append(f"{label}: pipeline {got!r}, oracle {want!r}")
        elif abs(got - float(want)) > TOL:
            bad.append(f"{label}: pipeline {got!r}, oracle {float(want)!r}")

    gold = {(r["pub_id"], int(r["position"]), r["professor_id"]) for r in oracle._rows(paths.gold)
            if r["pub_id"] in result.impact}
    if set(result.matches.assignments) != gold:
        bad.append("matcher does not reproduce the gold links")
    if set(result.impact) != set(expected["c"]):
        bad.append("publication sets differ")
    for pub_id, score in result.impact.items():
        check(f"c[{pub_id}]", score.c, expected["c"].get(pub_id))
    for s in result.professor_scores:
        check(f"raw_fss[{s.professor_id}]", s.raw_fss, expected["raw_fss"][s.professor_id])
        check(f"normalized_fss[{s.professor_id}]", s.normalized_fss, expected["normalized_fss"][s.professor_id])
    for s in result.territory_scores:
        want = expected["territory"][(s.level.name, s.territory_code, s.specialty)]
        label = f"{s.level.label}/{s.territory_code}/{s.specialty}"
        for name in ("kc", "kc_pc", "normalized_kc_pc", "mean_normalized_fss", "professor_count"):
            if name in want:
                check(f"{label}.{name}", getattr(s, name), want[name])
    return bad


@pytest.mark.parametrize("seed", range(50))
def test_pipeline_matches_oracle(tmp_path, seed):
    dataset = random_dataset(tmp_path, seed)
    assert oracle_mismatches(dataset.paths) == []


def test_oracle_weights_reproduce_worked_figures():
    w = oracle.positional_weights(7, True)
    lecce = sum(w) - w[5]
    assert lecce == oracle.Fraction(85, 100)
    assert w[5] / 2 == oracle.Fraction(75, 1000)
