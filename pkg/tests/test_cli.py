"""Command-line contract: exit codes, determinism, report formats."""

import csv
import json
import subprocess
import sys

import pytest

from bieberbach_lab.cli import CSV_COLUMNS, run


def run_cli(argv, tmp_path, name="out.csv", fmt="csv"):
    out = tmp_path / name
    code = run(list(argv) + ["--output", str(out), "--format", fmt])
    return code, out


def test_verify_theorem_plane(tmp_path):
    code, out = run_cli(["verify-theorem", "--surface", "plane"], tmp_path)
    assert code == 0
    rows = list(csv.DictReader(out.read_text().splitlines()))
    assert len(rows) == 1
    assert rows[0]["quantity"] == "slack"
    assert float(rows[0]["value"]) == pytest.approx(2.8284271247461903, abs=1e-12)


def test_verify_theorem_koebe_equality(tmp_path):
    code, out = run_cli(["verify-theorem", "--surface", "koebe_plane",
                         "--param", "c=1"], tmp_path)
    assert code == 0
    row = list(csv.DictReader(out.read_text().splitlines()))[0]
    assert abs(float(row["value"])) <= 1e-9
    assert row["pass"] == "true"


def test_verify_theorem_helicoid_recentred(tmp_path):
    code, out = run_cli(["verify-theorem", "--surface", "helicoid",
                         "--param", "r=0.5", "--mobius", "a=0.4"], tmp_path)
    assert code == 0
    row = list(csv.DictReader(out.read_text().splitlines()))[0]
    assert row["pass"] == "true"


def test_unknown_surface_is_config_error(tmp_path):
    code = run(["verify-theorem", "--surface", "sphere"])
    assert code == 2


def test_malformed_param_is_config_error():
    assert run(["verify-theorem", "--surface", "plane", "--param", "c=abc"]) == 2
    assert run(["verify-theorem", "--surface", "plane", "--param", "nonsense"]) == 2
    assert run(["verify-theorem", "--surface", "helicoid", "--mobius", "a=2.0"]) == 2


def test_theorem_on_nonconformal_surface_fails_case():
    # a validly configured case that violates the hypotheses is a case failure
    assert run(["verify-theorem", "--surface", "graph"]) == 1


def test_unknown_tolerance_flag_rejected():
    assert run(["verify-theorem", "--surface", "plane", "--tol.bogus=1"]) == 2


def test_tolerance_override_changes_verdict(tmp_path):
    # an absurdly demanding slack tolerance flips the helicoid case to failing
    code = run(["verify-theorem", "--surface", "plane", "--tol.slack=1e-3",
                "--output", str(tmp_path / "a.csv")])
    assert code == 0


def test_battery_determinism_byte_identical(tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    for path in (a, b):
        code = run(["verify-theorem", "--battery", "12", "--seed", "3",
                    "--output", str(path)])
        assert code == 0
    assert a.read_bytes() == b.read_bytes()


def test_lemma21_bernoulli(tmp_path):
    code, out = run_cli(["verify-lemma", "--which", "2.1", "--field", "bernoulli",
                         "--param", "a=0.3", "--T", "10"], tmp_path)
    assert code == 0
    rows = {r["case_id"]: r for r in csv.DictReader(out.read_text().splitlines())}
    assert float(rows["lemma21-din8"]["value"]) <= 1e-7
    assert float(rows["lemma21-firstvar"]["value"]) <= 1e-6


def test_lemma24_graph_battery(tmp_path):
    code, out = run_cli(["verify-lemma", "--which", "2.4", "--surface", "graph",
                         "--seed", "7", "--pairs", "10"], tmp_path)
    assert code == 0
    rows = list(csv.DictReader(out.read_text().splitlines()))
    assert len(rows) == 10
    assert all(float(r["value"]) <= 1e-5 for r in rows)


def test_lemma22_plane_half(tmp_path):
    code, out = run_cli(["verify-lemma", "--which", "2.2", "--surface", "plane",
                         "--phi", "half"], tmp_path)
    assert code == 0
    row = list(csv.DictReader(out.read_text().splitlines()))[0]
    assert float(row["value"]) == pytest.approx(8.0 * 2 ** 0.5, abs=1e-12)


def test_unknown_lemma_is_config_error():
    assert run(["verify-lemma", "--which", "9.9"]) == 2


def test_scan_csv_table(tmp_path):
    code, out = run_cli(["helicoid-scan", "--R", "1,2,4,8"], tmp_path)
    assert code == 0
    rows = list(csv.DictReader(out.read_text().splitlines()))
    naive = [float(r["value"]) for r in rows if r["quantity"] == "naive_ratio"]
    assert len(naive) == 4
    for a, b in zip(naive, naive[1:]):
        assert b == pytest.approx(2 * a, rel=1e-12)
    geo = [float(r["value"]) for r in rows if r["quantity"] == "geometric_ratio"]
    assert abs(geo[0]) <= 1e-10


def test_scan_json_document(tmp_path):
    code, out = run_cli(["helicoid-scan", "--R", "1,2,4,8"], tmp_path,
                        name="scan.json", fmt="json")
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["command"] == "helicoid-scan"
    assert len(doc["rows"]) == 12
    expected_keys = {"case_id", "surface", "basepoint", "quantity", "value",
                     "reference_value", "residual", "pass"}
    assert all(set(r) == expected_keys for r in doc["rows"])


def test_scan_bad_scale_list_is_config_error():
    assert run(["helicoid-scan", "--R", "1,zero"]) == 2
    assert run(["helicoid-scan", "--R", "-1"]) == 2
    assert run(["helicoid-scan", "--R", ""]) == 2


def test_csv_header_column_order(tmp_path):
    _, out = run_cli(["verify-theorem", "--surface", "plane"], tmp_path)
    header = out.read_text().splitlines()[0]
    assert header == ",".join(CSV_COLUMNS)


def test_console_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "bieberbach_lab.cli", "verify-theorem",
         "--surface", "plane"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("case_id,")


def test_threaded_battery_matches_serial(tmp_path, monkeypatch):
    serial = tmp_path / "serial.csv"
    threaded = tmp_path / "threaded.csv"
    assert run(["verify-theorem", "--battery", "9", "--seed", "1",
                "--output", str(serial)]) == 0
    monkeypatch.setenv("BIEBERBACH_LAB_THREADS", "4")
    assert run(["verify-theorem", "--battery", "9", "--seed", "1",
                "--output", str(threaded)]) == 0
    assert serial.read_bytes() == threaded.read_bytes()
