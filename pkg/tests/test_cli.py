"""Tests for the poisson-bv command line."""

import json

import pytest

from poisson_bv import cli
from poisson_bv.engines.geometry import H3_FLAG_ENV
from poisson_bv.utils.storage import ConfigStorage


class TestCommands:
    """Tests for the subcommands and their output formats."""

    @pytest.fixture(autouse=True)
    def clean_environment(self, monkeypatch):
        monkeypatch.delenv(H3_FLAG_ENV, raising=False)

    def test_exponents(self, capsys):
        """Test the exponent list for the hyperbolic plane."""
        assert cli.main(["exponents", "--model", "h2", "--lambda", "0.3"]) == 0
        exps = json.loads(capsys.readouterr().out)
        assert exps == [[pytest.approx(0.2)], [pytest.approx(0.8)]]

    def test_exponents_csv(self, capsys):
        """Test the CSV table with one row per Weyl element."""
        assert cli.main(["--output", "csv", "exponents", "--model", "h2", "--lambda", "0.3"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "label,re_exponent_1,im_exponent_1"
        assert [line.split(",")[0] for line in lines[1:]] == ["e", "-1"]

    def test_generic_passes(self, capsys):
        """Test a generic parameter on the product model."""
        assert cli.main(["generic", "--model", "h2xh2", "--lambda", "0.7,1.1"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["p_value"] == pytest.approx([3.08, 0.0])

    def test_generic_rejects(self, capsys):
        """Test that a genericity violation prints the report and exits 2."""
        assert cli.main(["generic", "--model", "h2", "--lambda", "-0.5"]) == 2
        captured = capsys.readouterr()
        assert json.loads(captured.out)["cond_ii"] is False
        error = json.loads(captured.err.strip().splitlines()[-1])
        assert error["error"] == "GenericityError"
        assert error["violations"]

    def test_spherical(self, capsys):
        """Test that phi_lambda is 1 at the origin."""
        assert cli.main(["spherical", "--model", "h2", "--lambda", "0.7", "--t", "1"]) == 0
        assert json.loads(capsys.readouterr().out)["value"] == pytest.approx([1.0, 0.0])

    def test_poisson_eval(self, capsys):
        """Test P_lambda of a constant at the origin."""
        argv = ["poisson-eval", "--model", "h2", "--lambda", "0.7", "--f", "const:2",
                "--b", "0", "--t", "1"]
        assert cli.main(argv) == 0
        assert json.loads(capsys.readouterr().out)["value"] == pytest.approx([2.0, 0.0])

    def test_cfun(self, capsys):
        """Test that the three c-function routes agree."""
        assert cli.main(["cfun", "--model", "h2", "--lambda", "0.7"]) == 0
        values = json.loads(capsys.readouterr().out)
        assert set(values) == {"integral", "bv", "closed_form"}
        assert values["integral"][0] == pytest.approx(values["closed_form"][0], rel=1e-8)
        assert values["bv"][0] == pytest.approx(values["closed_form"][0], abs=1e-4)

    def test_verify_inversion(self, capsys):
        """Test the inversion acceptance run."""
        argv = ["verify-inversion", "--model", "h2", "--lambda", "0.7", "--f", "fourier:1",
                "--tol", "1e-4"]
        assert cli.main(argv) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["residual_sup"] <= 1e-4
        assert report["tol"] == 1e-4

    def test_verify_inversion_threshold(self, capsys):
        """Test that a residual above tol exits 3 after printing the report."""
        argv = ["verify-inversion", "--model", "h2", "--lambda", "0.7", "--f", "cos(1)",
                "--tol", "1e-30", "--grid", "2"]
        assert cli.main(argv) == 3
        captured = capsys.readouterr()
        assert "residual_sup" in json.loads(captured.out)
        assert json.loads(captured.err.strip().splitlines()[-1])["error"] == "ConsistencyError"

    def test_bv(self, capsys):
        """Test sampled boundary values of a constant."""
        argv = ["bv", "--model", "h2", "--lambda", "0.7", "--f", "const:1", "--grid", "2",
                "--threads", "2"]
        assert cli.main(argv) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["grid"] == 2
        assert len(payload["samples"]) == 2

    def test_fuchs_solve(self, capsys):
        """Test the formal solution of (theta + 1 + t) u = 1."""
        argv = ["fuchs-solve", "--operator", "0,1=1;0,0=1;1,0=1", "--f", "1", "--N", "3"]
        assert cli.main(argv) == 0
        series = json.loads(capsys.readouterr().out)
        coeffs = [pair[0] for pair in series["coeffs"]]
        assert coeffs == pytest.approx([1.0, -1 / 2, 1 / 6, -1 / 24])

    def test_fuchs_solve_csv(self, capsys):
        """Test one CSV row per coefficient."""
        argv = ["--output", "csv", "fuchs-solve", "--operator", "0,1=1;0,0=1", "--f", "1,1"]
        assert cli.main(argv) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "k,re_u,im_u"
        assert len(lines) == 3

    def test_fuchs_delta(self, capsys):
        """Test the delta-layer solution of (theta + 2) v = 3 delta."""
        assert cli.main(["fuchs-delta", "--operator", "0,1=1;0,0=2", "--f", "3"]) == 0
        layer = json.loads(capsys.readouterr().out)
        assert layer["coeffs"] == [pytest.approx([3.0, 0.0])]

    def test_fuchs_resonance(self, capsys):
        """Test that a resonant operator exits 2 with k in the payload."""
        assert cli.main(["fuchs-solve", "--operator", "0,1=1;0,0=-2", "--f", "1", "--N", "4"]) == 2
        error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert error["error"] == "ResonanceError"
        assert error["k"] == 2


class TestUsage:
    """Tests for usage errors and configuration files."""

    @pytest.fixture(autouse=True)
    def clean_environment(self, monkeypatch):
        monkeypatch.delenv(H3_FLAG_ENV, raising=False)

    def test_missing_model(self, capsys):
        """Test that a run without --model exits 1."""
        assert cli.main(["exponents", "--lambda", "0.3"]) == 1
        assert json.loads(capsys.readouterr().err)["error"] == "UsageError"

    def test_unknown_subcommand(self, capsys):
        """Test that an unknown subcommand exits 1."""
        assert cli.main(["transform"]) == 1

    def test_help(self, capsys):
        """Test that --help exits 0."""
        assert cli.main(["--help"]) == 0
        assert "poisson-bv" in capsys.readouterr().out

    def test_bad_lambda(self, capsys):
        """Test that an unparsable lambda exits 1."""
        assert cli.main(["exponents", "--model", "h2", "--lambda", "abc"]) == 1

    def test_wrong_rank(self, capsys):
        """Test that lambda must match the model rank."""
        assert cli.main(["exponents", "--model", "h2xh2", "--lambda", "0.3"]) == 1

    def test_h3_disabled(self, capsys):
        """Test that h3 needs --enable-h3."""
        assert cli.main(["exponents", "--model", "h3", "--lambda", "0.6"]) == 2
        assert json.loads(capsys.readouterr().err)["error"] == "UnsupportedModelError"

    def test_h3_enabled(self, capsys):
        """Test h3 exponents rho -/+ lambda with the flag."""
        assert cli.main(["--enable-h3", "exponents", "--model", "h3", "--lambda", "0.6"]) == 0
        assert json.loads(capsys.readouterr().out) == [[pytest.approx(0.4)], [pytest.approx(1.6)]]

    def test_h3_bv_with_flag(self, capsys):
        """Test that --enable-h3 reaches bv without the environment variable."""
        assert cli.main(["--enable-h3", "bv", "--model", "h3", "--lambda", "0.7"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["fourier"] == [pytest.approx([1 / 0.7, 0.0], abs=1e-4)]
        assert len(payload["samples"]) == 4
        for sample in payload["samples"]:
            assert sample == pytest.approx([1 / 0.7, 0.0], abs=1e-4)

    def test_h3_equivariance_with_flag(self, capsys):
        """Test that --enable-h3 reaches the equivariance spot check."""
        argv = ["--enable-h3", "verify-inversion", "--model", "h3", "--lambda", "0.7",
                "--equivariance-checks", "1"]
        assert cli.main(argv) == 0
        report = json.loads(capsys.readouterr().out)
        assert len(report["equivariance"]) == 1
        assert report["equivariance"][0]["max_error"] <= 1e-3

    def test_negative_lambda_with_equals(self, capsys):
        """Test that a negative multi-component lambda parses when attached with '='."""
        assert cli.main(["exponents", "--model", "h2xh2", "--lambda=-0.5,0.3"]) == 0
        exps = json.loads(capsys.readouterr().out)
        assert exps[0] == [pytest.approx(1.0), pytest.approx(0.2)]

    def test_outside_chamber(self, capsys):
        """Test that cfun refuses Re(lambda) <= 0 with exit 2."""
        assert cli.main(["cfun", "--model", "h2", "--lambda", "-0.7"]) == 2
        assert json.loads(capsys.readouterr().err)["error"] == "ChamberError"

    def test_save_and_load_config(self, capsys, tmp_path):
        """Test that a saved config replaces the flags on the next run."""
        path = tmp_path / "run.json"
        argv = ["--save-config", str(path), "exponents", "--model", "h2", "--lambda", "0.3",
                "--t0", "0.1"]
        assert cli.main(argv) == 0
        first = capsys.readouterr().out
        config = ConfigStorage().load_run_config(path)
        assert config.extraction.t0 == 0.1
        assert cli.main(["--config", str(path), "exponents"]) == 0
        assert capsys.readouterr().out == first

    def test_flags_override_config(self, capsys, tmp_path):
        """Test that explicit flags win over the config file."""
        path = tmp_path / "run.json"
        assert cli.main(["--save-config", str(path), "exponents", "--model", "h2",
                         "--lambda", "0.3"]) == 0
        capsys.readouterr()
        assert cli.main(["--config", str(path), "exponents", "--lambda", "0.1"]) == 0
        assert json.loads(capsys.readouterr().out)[0] == [pytest.approx(0.4)]

    def test_corrupted_config(self, capsys, tmp_path):
        """Test that a broken config file exits 1."""
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        assert cli.main(["--config", str(path), "exponents"]) == 1
        assert json.loads(capsys.readouterr().err)["error"] == "CorruptedConfigError"
