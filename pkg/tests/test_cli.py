import json
import math
import subprocess
import sys

import pytest

from randcurv.cli import ExperimentConfig, build_parser, config_from_args, main, validate
from randcurv.curvature import PhiParams, phi_closed
from randcurv.projective import HomPoly3, write_poly


def run_cli(args, tmp_path, name="out.json"):
    out = tmp_path / name
    code = main(args + ["--out", str(out)])
    return code, (out.read_text() if out.exists() else None)


def test_phi(tmp_path):
    code, text = run_cli(["phi", "--r", "1", "--R", "4", "--n", "1000000", "--seed", "7"], tmp_path)
    rec = json.loads(text)
    assert code == 0
    assert abs(rec["mean"] - phi_closed(PhiParams(1, 4))) < 3 * rec["stderr"]
    for key in ("command", "params", "mean", "stderr", "n", "n_discarded", "elapsed_ms", "seed",
                "artifact_version"):
        assert key in rec
    assert rec["seed"] == 7 and rec["n"] == 10**6


def test_gauss_bonnet_line(tmp_path):
    code, text = run_cli(["gauss-bonnet", "--d", "1", "--lines", "100", "--seed", "1"], tmp_path)
    assert code == 0 and abs(json.loads(text)["mean"] - 4 * math.pi) < 1e-9


def test_gauss_bonnet_from_file(tmp_path):
    P = HomPoly3.from_dict(3, {(3, 0, 0): 1, (0, 3, 0): 1, (0, 0, 3): 1})
    write_poly(P, tmp_path / "fermat.json")
    code, text = run_cli(["gauss-bonnet", "--poly", str(tmp_path / "fermat.json"), "--lines", "5000"], tmp_path)
    rec = json.loads(text)
    assert code == 0 and rec["extra"]["target"] == 0 and abs(rec["mean"]) < 3 * rec["stderr"]


def test_expected_kappa_reproducible(tmp_path):
    args = ["expected-kappa", "--d", "6", "--r", "1", "--R", "4", "--curves", "200", "--lines", "500", "--seed", "3"]
    a = json.loads(run_cli(args, tmp_path, "a.json")[1])
    b = json.loads(run_cli(args + ["--threads", "4"], tmp_path, "b.json")[1])
    assert (a["mean"], a["stderr"], a["n"]) == (b["mean"], b["stderr"], b["n"])


def test_histogram_csv(tmp_path):
    code, text = run_cli(["curvature-hist", "--d", "3", "--curves", "2", "--lines", "100", "--format", "csv"],
                         tmp_path, "h.csv")
    lines = text.splitlines()
    assert code == 0 and lines[0] == "bin_lo,bin_hi,mass,count"


def test_bergman_csv_and_json(tmp_path):
    code, text = run_cli(["bergman", "--format", "csv", "--pairs", "200"], tmp_path, "k.csv")
    assert code == 0 and text.splitlines()[0] == "d,sup_err,k" and len(text.splitlines()) == 5
    rec = json.loads(run_cli(["bergman", "--pairs", "200"], tmp_path)[1])
    assert -1.3 <= rec["extra"]["slope"] <= -0.7


def test_lemma_f0(tmp_path):
    rec = json.loads(run_cli(["lemma-f0"], tmp_path)[1])
    assert rec["mean"] == pytest.approx(math.pi * math.sqrt(3), rel=5e-3)
    assert rec["extra"]["in_band_fraction"] == 1.0


def test_inflections(tmp_path):
    rec = json.loads(run_cli(["inflections", "--d", "3", "--trials", "3", "--seed", "4"], tmp_path)[1])
    assert rec["extra"]["counts"] == [9, 9, 9]


def test_bf_event_and_tail(tmp_path):
    rec = json.loads(run_cli(["bf-event", "--n", "5", "--seed", "2"], tmp_path)[1])
    assert 0 <= rec["mean"] <= 1 and len(rec["extra"]["wilson95"]) == 2
    rec = json.loads(run_cli(["tail-bound", "--d", "6", "--r", "1", "--R", "4", "--eta", "0.9",
                              "--curves", "5", "--lines", "50"], tmp_path)[1])
    assert rec["extra"]["markov_bound"] == pytest.approx(phi_closed(PhiParams(1, 4)) / 0.9)


def _cfg(argv):
    return config_from_args(build_parser().parse_args(argv))


class TestValidation:
    def test_r_ge_R(self):
        assert "r must be < R" in validate(_cfg(["phi", "--r", "4", "--R", "1"]))

    def test_degree_zero(self):
        problems = validate(_cfg(["expected-kappa", "--d", "0", "--r", "1"]))
        assert problems and any("--d" in p for p in problems)

    def test_negative_threads(self):
        problems = validate(_cfg(["phi", "--r", "1", "--threads", "-2"]))
        assert any("--threads" in p for p in problems)

    def test_valid(self):
        assert validate(_cfg(["phi", "--r", "1"])) == []

    def test_unknown_command(self):
        assert validate(ExperimentConfig("nope", {})) != []

    def test_poly_xor_degree(self):
        assert validate(_cfg(["gauss-bonnet"])) != []

    def test_eta_range(self):
        assert validate(_cfg(["tail-bound", "--d", "8", "--r", "1", "--R", "4", "--eta", "0.3"])) != []


class TestExitCodes:
    def test_validation_error(self, capsys):
        assert main(["phi", "--r", "4", "--R", "1"]) == 2
        assert "r must be < R" in capsys.readouterr().err

    def test_parse_error(self):
        assert main(["phi", "--r", "abc"]) == 2

    def test_malformed_poly(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"degree": 2, "coeffs": [{"i": 1, "j": 1, "k": 1, "re": 1, "im": 0}]}')
        assert main(["gauss-bonnet", "--poly", str(bad)]) == 2

    def test_numerical_abort(self, tmp_path):
        # a double line: every sampled point is singular
        write_poly(HomPoly3.from_dict(2, {(2, 0, 0): 1}), tmp_path / "dbl.json")
        assert main(["gauss-bonnet", "--poly", str(tmp_path / "dbl.json"), "--lines", "50"]) == 3

    def test_console_script(self):
        res = subprocess.run([sys.executable, "-m", "randcurv.cli", "phi", "--r", "1", "--R", "4", "--n", "1000"],
                             capture_output=True, text=True)
        assert res.returncode == 0 and json.loads(res.stdout)["n"] == 1000
