import filecmp
import json
import os
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from sciwealth.cli import EXIT_COMPUTATION, EXIT_OK, EXIT_VALIDATION, main
from sciwealth.io import read_csv_output

import oracle
from conftest import cli_args, pub, write_csv, write_publications

GOLDEN = Path(__file__).parent / "golden"
GOLDEN_CASES = {
    "nuts2_overall": ["--level", "nuts2"],
    "nuts3_virology": ["--level", "nuts3", "--specialty", "Virology"],
}
SCORING = ("corpus", "journals", "institutions", "roster", "costs", "weights", "gazetteer", "population",
           "specialties")


def tree(root: Path) -> dict[str, bytes]:
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_validate_ok(toy_files, capsys):
    assert main(["validate", *cli_args(toy_files)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "publications: 3" in out and "inputs valid" in out


def test_validate_reports_bad_row(toy_files, capsys):
    write_publications(toy_files.corpus, [pub("A1", [("Rossi, M", ["U1"])], citations=-1)])
    assert main(["validate", *cli_args(toy_files)]) == EXIT_VALIDATION
    err = capsys.readouterr().err
    assert "line 1" in err and "citation_count" in err


def test_missing_weights_aborts_in_normalize_stage(toy_files, tmp_path, capsys):
    toy_files.weights.unlink()
    code = main(["score", *cli_args(toy_files, *SCORING), "--out", str(tmp_path / "o")])
    assert code == EXIT_COMPUTATION
    assert "normalize stage" in capsys.readouterr().err
    fallback = main(["score", *cli_args(toy_files, *SCORING), "--out", str(tmp_path / "o"), "--default-weight", "0.5"])
    assert fallback == EXIT_OK


def test_no_weights_flag_and_no_default(toy_files, tmp_path, capsys):
    args = [a for a in cli_args(toy_files, *SCORING)]
    i = args.index("--weights")
    del args[i:i + 2]
    assert main(["score", *args, "--out", str(tmp_path / "o")]) == EXIT_COMPUTATION
    assert main(["score", *args, "--out", str(tmp_path / "o"), "--default-weight", "0.5"]) == EXIT_OK


def test_missing_input_file_is_validation_failure(toy_files, tmp_path):
    toy_files.roster.unlink()
    assert main(["score", *cli_args(toy_files, *SCORING), "--out", str(tmp_path / "o")]) == EXIT_VALIDATION


def test_ambiguity_error_policy_is_computation_failure(toy_files, tmp_path):
    write_csv(toy_files.roster, ("professor_id", "full_name", "university_id", "sds_code", "active_years", "rank"), [
        ("P1", "Mario Rossi", "U1", "MED/07", "2016", "PO"), ("P2", "Marco Rossi", "U1", "MED/07", "2016", "PO")])
    base = ["score", *cli_args(toy_files, *SCORING), "--out", str(tmp_path / "o")]
    assert main(base) == EXIT_OK
    assert main(base + ["--ambiguity-policy", "error"]) == EXIT_COMPUTATION


def test_unknown_specialty_in_report(synthetic_italy, tmp_path, capsys):
    code = main(["report", *cli_args(synthetic_italy.paths, *SCORING), "--out", str(tmp_path), "--specialty", "Nope"])
    assert code == EXIT_VALIDATION
    assert "unknown specialty" in capsys.readouterr().err


def test_summary_command(synthetic_italy, tmp_path, capsys):
    assert main(["summary", *cli_args(synthetic_italy.paths, *SCORING), "--out", str(tmp_path)]) == EXIT_OK
    rows = read_csv_output(tmp_path / "summary.csv")
    total = rows[-1]
    assert total["specialty"] == "Total"
    assert int(total["publications"]) < sum(int(r["publications"]) for r in rows[:-1])


def test_match_eval_perfect_on_synthetic(synthetic_italy, tmp_path, capsys):
    args = ["match-eval", *cli_args(synthetic_italy.paths, "corpus", "journals", "institutions", "roster", "costs",
                                    "gold", "specialties"), "--out", str(tmp_path)]
    assert main(args) == EXIT_OK
    quality = json.loads((tmp_path / "match_quality.json").read_text())
    assert quality["f_measure"] == 1.0 and quality["fp"] == 0 and quality["fn"] == 0
    assert quality["tp"] == len(synthetic_italy.gold)


def test_report_json_and_external_values(synthetic_italy, tmp_path):
    values = write_csv(tmp_path / "incidence.csv", ("code", "value"), [("ITC11", "1.25"), ("ITI43", "3.5")])
    out = tmp_path / "out"
    code = main(["report", *cli_args(synthetic_italy.paths, *SCORING), "--out", str(out), "--level", "nuts3",
                 "--format", "json", "--values", str(values)])
    assert code == EXIT_OK
    doc = json.loads((out / "choropleth_nuts3_overall.json").read_text())
    assert doc["metric"] == "incidence"
    assert {r["code"]: r["value"] for r in doc["rows"]} == {"ITC11": 1.25, "ITI43": 3.5}
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["inputs"]["values"]["file"] == "incidence.csv"
    assert (out / "scatter_nuts3_overall.json").exists()


def test_every_output_carries_the_manifest_digest(synthetic_italy, tmp_path):
    assert main(["report", *cli_args(synthetic_italy.paths, *SCORING), "--out", str(tmp_path),
                 "--emit-credit"]) == EXIT_OK
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    digest = manifest["manifest_sha256"]
    assert set(manifest["outputs"]) == {p.name for p in tmp_path.iterdir()} - {"manifest.json"}
    for name in manifest["outputs"]:
        assert (tmp_path / name).read_text().splitlines()[0] == f"# manifest_sha256={digest}"
    assert manifest["unresolved_addresses"]["count"] == 1
    assert manifest["counts"]["publications_outside_window"] == 5


def test_credit_rows_conserve(synthetic_italy, tmp_path):
    assert main(["score", *cli_args(synthetic_italy.paths, *SCORING), "--out", str(tmp_path),
                 "--emit-credit"]) == EXIT_OK
    totals = {}
    for row in read_csv_output(tmp_path / "credit.csv"):
        totals[row["pub_id"]] = totals.get(row["pub_id"], 0.0) + float(row["share"])
    assert all(abs(t - 1.0) < 1e-5 for t in totals.values())


def test_module_entry_point(toy_files):
    proc = subprocess.run([sys.executable, "-m", "sciwealth", "validate", *cli_args(toy_files)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr


@pytest.mark.parametrize("case", sorted(GOLDEN_CASES))
def test_golden_files(synthetic_italy, tmp_path, case):
    out = tmp_path / case
    assert main(["report", *cli_args(synthetic_italy.paths, *SCORING), "--out", str(out),
                 *GOLDEN_CASES[case]]) == EXIT_OK
    expected_dir = GOLDEN / case
    if os.environ.get("SCIWEALTH_UPDATE_GOLDEN"):
        shutil.rmtree(expected_dir, ignore_errors=True)
        shutil.copytree(out, expected_dir)
    produced, expected = tree(out), tree(expected_dir)
    assert sorted(produced) == sorted(expected)
    differing = [name for name in expected if produced[name] != expected[name]]
    assert differing == []


def test_golden_values_agree_with_oracle(synthetic_italy):
    exact = oracle.compute(synthetic_italy.paths.corpus.parent)
    for row in read_csv_output(GOLDEN / "nuts2_overall" / "territory_scores.csv"):
        want = exact["territory"][(row["level"].upper(), row["territory_code"], row["specialty"])]
        for name in ("kc", "kc_pc", "normalized_kc_pc", "mean_normalized_fss"):
            if name not in want:
                continue
            if want[name] is None:
                assert row[name] == ""
            else:
                assert abs(float(row[name]) - float(want[name])) <= 5e-7 + 1e-12, (row, name)
    for row in read_csv_output(GOLDEN / "nuts2_overall" / "professors_scores.csv"):
        assert abs(float(row["normalized_fss"]) - float(exact["normalized_fss"][row["professor_id"]])) <= 5e-7 + 1e-12


def test_repeated_runs_are_byte_identical(synthetic_italy, tmp_path):
    for name in ("a", "b"):
        assert main(["report", *cli_args(synthetic_italy.paths, *SCORING), "--out", str(tmp_path / name)]) == 0
    assert tree(tmp_path / "a") == tree(tmp_path / "b")
    assert not filecmp.dircmp(tmp_path / "a", tmp_path / "b").diff_files
