import csv
import io
import json
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from randintegral import __version__, cli, manual
from randintegral.coefficients import BetaMultiset
from randintegral.levy_core import levy_exponent, standard_test_triple, transform_multi
from randintegral.product_law import build_law
from randintegral.triple_io import parse_triple
from randintegral.verify import CheckResult

from cli_cases import DATA, GOLDEN, GOLDEN_CASES

REPO = Path(__file__).parent.parent

# set RANDINTEGRAL_UPDATE_GOLDEN=1 to rewrite the files after an intended change
UPDATE = os.environ.get("RANDINTEGRAL_UPDATE_GOLDEN") == "1"


@pytest.fixture(autouse=True)
def pinned_clock(monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "0")


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


@pytest.mark.parametrize("name", sorted(GOLDEN_CASES))
def test_golden(capsys, name):
    code, out, err = run(capsys, *GOLDEN_CASES[name])
    assert code == 0, err
    path = GOLDEN / name
    if UPDATE:
        path.write_text(out, encoding="utf-8")
    assert out == path.read_text(encoding="utf-8")


class TestDeterminism:
    def test_same_seed_same_bytes(self, capsys):
        argv = ["law", "1,2x2", "--sample", "50", "--seed", "7", "--format", "csv"]
        assert run(capsys, *argv) == run(capsys, *argv)

    def test_only_timestamp_varies(self, capsys, monkeypatch):
        first = run_json(capsys, "coeffs", "1", "2")
        monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
        second = run_json(capsys, "coeffs", "1", "2")
        assert first["metadata"].pop("timestamp") != second["metadata"].pop("timestamp")
        assert first == second

    def test_timestamp_is_last(self, capsys):
        doc = run_json(capsys, "law", "1", "--eval", "0.5")
        assert list(doc["metadata"])[-1] == "timestamp"
        code, out, _ = run(capsys, "law", "1", "--eval", "0.5", "--format", "csv")
        assert out.splitlines()[0].split()[-1] == "timestamp=1970-01-01T00:00:00Z"

    def test_generated_seed_is_reported(self, capsys, monkeypatch):
        monkeypatch.delenv("SOURCE_DATE_EPOCH")
        code, out, err = run(capsys, "law", "1", "--sample", "3")
        seed = json.loads(out)["metadata"]["seed"]
        assert code == 0 and err.strip() == f"seed: {seed}"
        again = run_json(capsys, "law", "1", "--sample", "3", "--seed", seed)
        assert again["samples"] == json.loads(out)["samples"]

    def test_csv_floats_round_trip(self, capsys):
        code, out, _ = run(capsys, "law", "0.5,3", "--grid", "0.05", "1", "7", "--format", "csv")
        rows = list(csv.DictReader(io.StringIO(out.split("\n", 1)[1])))
        t = np.array([float(r["t"]) for r in rows])
        assert np.array_equal(t, np.linspace(0.05, 1, 7))
        cdf = build_law(BetaMultiset.parse("0.5,3", mode="float")).cdf(t)
        assert np.array_equal([float(r["cdf"]) for r in rows], cdf)


class TestExamples:
    def test_coeffs(self, capsys):
        assert run_json(capsys, "coeffs", "1", "2")["C"] == [2.0, -1.0]
        doc = run_json(capsys, "coeffs", "1")
        assert doc["C"] == [1.0] and doc["sum_C"] == 1.0

    def test_coeffs_exact_rationals(self, capsys):
        doc = run_json(capsys, "--mode", "exact", "coeffs", "1/2", "1/3")
        assert doc["C"] == [-2, 3] and doc["c"] == [-6, 6] and doc["sum_C"] == 1

    def test_law_values(self, capsys):
        assert run_json(capsys, "law", "1,2", "--eval", "0.5")["table"][0]["cdf"] == pytest.approx(0.75, abs=1e-15)
        row = run_json(capsys, "law", "1x2", "--eval", "0.367879441")["table"][0]
        assert row["cdf"] == pytest.approx(0.735759, abs=1e-6)
        assert run_json(capsys, "law", "1", "--eval", "1")["table"][0]["cdf"] == 1

    def test_law_pdf_edges(self, capsys):
        table = run_json(capsys, "law", "0.5", "--eval", "0", "--eval", "1.5", "--eval", "-1")["table"]
        assert [row["pdf"] for row in table] == [None, 0, 0]
        assert [row["cdf"] for row in table] == [0, 1, 0]

    def test_gaussian_covariance_halved(self, capsys):
        doc = run_json(capsys, "transform", DATA / "gaussian.json", "--betas", "2")
        assert doc["triple"]["covariance"] == [0.5]

    def test_shift_only_scaled(self, capsys):
        doc = run_json(capsys, "transform", DATA / "shift_only.json", "--betas", "1,2")
        assert doc["triple"]["shift"] == pytest.approx([1 / 3, -2 / 3], abs=1e-15)
        assert doc["masses"] == [{"radius": 1.0, "mass": 0}]

    def test_transform_check(self, capsys):
        check = run_json(capsys, "transform", DATA / "standard.json", "--betas", "1,2,7/2", "--check")["check"]
        assert check["passed"] and check["residual"] <= 1e-10

    def test_transform_output_reparses(self, capsys):
        doc = run_json(capsys, "transform", DATA / "standard.json", "--betas", "1/2x2,3", "--mode", "exact")
        again = parse_triple(json.dumps(doc["triple"]))
        direct = transform_multi(standard_test_triple(), BetaMultiset.parse("1/2x2,3"))
        y = np.linspace(-3, 3, 7)
        assert np.array_equal(levy_exponent(again, y), levy_exponent(direct, y))

    def test_simulate_zero_triple(self, capsys):
        doc = run_json(capsys, "simulate", DATA / "zero.json", "--betas", "1", "--paths", "1000", "--grid", "64",
                       "--seed", "3")
        assert doc["passed"] and all(p["estimate"] == [1, 0] for p in doc["points"])

    def test_simulate_standard(self, capsys, tmp_path):
        out = tmp_path / "samples.csv"
        doc = run_json(capsys, "simulate", DATA / "standard.json", "--betas", "1,2", "--paths", "20000",
                       "--grid", "128", "--seed", "5", "--samples-out", out)
        assert doc["passed"] and len(doc["points"]) == 21
        assert len(out.read_text().splitlines()) == 20000 + 2

    def test_output_file(self, capsys, tmp_path):
        target = tmp_path / "c.csv"
        code, out, _ = run(capsys, "coeffs", "1", "2", "--format", "csv", "--output", target)
        assert code == 0 and out == ""
        assert target.read_text().splitlines()[1:] == ["beta,C,c", "1,2,1", "2,-1,-1"]

    def test_global_flags_either_side(self, capsys):
        before = run(capsys, "--format", "csv", "--mode", "exact", "coeffs", "1", "3")
        after = run(capsys, "coeffs", "1", "3", "--format", "csv", "--mode", "exact")
        assert before == after and before[1].startswith("# command=coeffs")


class TestExitCodes:
    @pytest.mark.parametrize("argv, needle", [
        (["coeffs", "1", "1"], "duplicate"),
        (["coeffs", "1", "-2"], "-2"),
        (["law", "1,,2"], "1,,2"),
        (["law", "2x1.5"], "multiplicit"),
        (["law", "1", "--grid", "0", "1", "1"], "at least 2"),
        (["law", "1", "--grid", "1", "0", "5"], "increasing"),
        (["transform", DATA / "corrupt.json", "--betas", "1"], "atoms[0][1]"),
        (["transform", DATA / "absent.json", "--betas", "1"], "cannot read"),
        (["transform", DATA / "standard.json", "--betas", "1x2", "--check"], "distinct"),
        (["simulate", DATA / "corrupt.json", "--betas", "1"], "atoms[0][1]"),
        (["simulate", DATA / "standard.json", "--betas", "1", "--paths", "10"], "at least"),
    ])
    def test_input_errors(self, capsys, argv, needle):
        code, out, err = run(capsys, *argv)
        assert code == 2 and out == ""
        assert needle in err

    def test_bad_json_position(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"dim": 1,\n "shift": [0.2\n}')
        code, _, err = run(capsys, "transform", bad, "--betas", "1")
        assert code == 2 and "line 3, column 1" in err

    @pytest.mark.parametrize("argv", [["frobnicate"], ["coeffs"], ["law", "1", "--format", "xml"],
                                      ["verify", "--seed", "-1"], ["law", "1", "--grid", "0", "1", "2.5"]])
    def test_usage_errors(self, capsys, argv):
        with pytest.raises(SystemExit) as info:
            cli.main(argv)
        assert info.value.code == 2

    def test_simulation_mismatch(self, capsys):
        code, out, _ = run(capsys, "simulate", DATA / "standard.json", "--betas", "1,2", "--paths", "1000",
                           "--grid", "64", "--seed", "1", "--z", "0.01")
        doc = json.loads(out)
        assert code == 1 and not doc["passed"] and doc["max_deviation"] > 0.01

    def test_failed_check(self, capsys, monkeypatch):
        failing = CheckResult("broken_identity", False, 0.5, 1e-10, "forced")
        monkeypatch.setattr(cli, "run_suite", lambda *a, **k: [failing])
        code, out, err = run(capsys, "verify", "--seed", "1")
        assert code == 1 and json.loads(out)["passed"] is False
        assert "broken_identity" in err

    def test_informational_failure_does_not_fail(self, capsys, monkeypatch):
        note = CheckResult("note", False, 0.5, 1e-10, "reported only", informational=True)
        monkeypatch.setattr(cli, "run_suite", lambda *a, **k: [note])
        assert run(capsys, "verify", "--seed", "1")[0] == 0


def test_module_entry_point():
    env = dict(os.environ, SOURCE_DATE_EPOCH="0")
    done = subprocess.run([sys.executable, "-m", "randintegral", "coeffs", "1", "2"], capture_output=True,
                          text=True, env=env, check=False)
    assert done.returncode == 0
    assert json.loads(done.stdout)["metadata"]["version"] == __version__
    done = subprocess.run([sys.executable, "-m", "randintegral", "coeffs", "2", "2"], capture_output=True,
                          text=True, env=env, check=False)
    assert done.returncode == 2 and "duplicate" in done.stderr


def test_manual_in_sync():
    # regenerate with: python -m randintegral.manual > docs/cli.md
    assert (REPO / "docs" / "cli.md").read_text(encoding="utf-8") == manual.render()
