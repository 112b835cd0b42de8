"""
Integration tests for the command-line entry point.
"""

import csv
import io
import json
from pathlib import Path

import pytest

from src.main import EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_OK, load_experiment, main


def read_rows(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))


@pytest.mark.integration
class TestRunCommand:
    """Test `zzbound run` end to end."""

    def test_gaussian_plain_bound(self, experiment_file, capsys):
        """Plain ZZ of a unit Gaussian through a unit-noise channel is eta / (1 + eta)."""
        path = experiment_file(
            "prior: {type: gaussian}\nchannel: {eta: 1.0}\nbound: {family: zz_plain}\n"
        )
        assert main(["run", "--config", path]) == EXIT_OK

        [row] = read_rows(capsys.readouterr().out)
        assert row["family"] == "zz_plain"
        assert float(row["value"]) == pytest.approx(0.5, abs=1e-3)
        assert row["tail_flag"] == "false"

    def test_bernoulli_high_noise(self, experiment_file, capsys):
        path = experiment_file(
            "prior: {type: bernoulli, p: 0.3}\nbound: {family: highnoise_valley}\n"
        )
        assert main(["run", "--config", path]) == EXIT_OK
        [row] = read_rows(capsys.readouterr().out)
        assert float(row["value"]) == pytest.approx(0.075, abs=1e-9)

    def test_uniform_single_point_json_config(self, experiment_file, capsys):
        record = {"prior": {"type": "uniform"}, "bound": {"family": "highnoise_sp", "M": 3}}
        path = experiment_file(json.dumps(record), suffix=".json")
        assert main(["run", "--config", path]) == EXIT_OK
        [row] = read_rows(capsys.readouterr().out)
        assert row["M"] == "3"
        assert float(row["value"]) == pytest.approx(2 / 27, abs=1e-6)

    def test_sweep_to_file(self, experiment_file, tmp_path, capsys):
        out = tmp_path / "sweep.csv"
        path = experiment_file(
            "prior: {type: bernoulli, p: 0.5}\n"
            "bound: {family: highnoise_sp}\n"
            "sweep: {parameter: prior.p, values: [0.1, 0.5]}\n"
        )
        assert main(["run", "--config", path, "--out", str(out)]) == EXIT_OK
        assert capsys.readouterr().out == ""
        rows = read_rows(out.read_text())
        assert [float(r["sweep_value"]) for r in rows] == [0.1, 0.5]
        assert float(rows[0]["value"]) == pytest.approx(0.05, abs=1e-9)
        assert float(rows[1]["value"]) == pytest.approx(0.25, abs=1e-9)

    @pytest.mark.parametrize(
        "content",
        [
            "prior: {type: uniform}\nchannel: {eta: 1.0}\nbound: {family: highnoise_valley}\n",
            "prior: {type: gaussian}\nbound: {family: zz_valley}\n",
            "prior: {type: uniform, a: 2.0, b: 1.0}\nbound: {family: highnoise_sp}\n",
            "just a string\n",
            "prior: [unclosed\n",
            "prior: {type: gaussian_mixture, weights: [0.5, 0.5], means: [-1.0, 1.0],"
            " variances: [1.0, 1.0]}\nbound: {family: meb}\n"
            "sweep: {parameter: prior.means.2, values: [1.0]}\n",
            "prior: {type: bernoulli, p: 0.3}\nbound: {family: highnoise_valley}\n"
            "sweep: {parameter: prior.p, values: [0.2, 1.5]}\n",
        ],
    )
    def test_invalid_config(self, experiment_file, capsys, content):
        path = experiment_file(content)
        assert main(["run", "--config", path]) == EXIT_CONFIG
        record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert record["error"] == "config"

    def test_missing_config(self, tmp_path, capsys):
        assert main(["run", "--config", str(tmp_path / "absent.yaml")]) == EXIT_CONFIG

    def test_strict_tail_flag(self, experiment_file, capsys):
        """A grid cut at t_max = 0.5 leaves g(t_max) = 1/2 on the unit uniform."""
        content = "prior: {type: uniform}\nbound: {family: highnoise_valley}\ngrid: {t_max: 0.5}\n"
        path = experiment_file(content)

        assert main(["run", "--config", path]) == EXIT_OK
        [row] = read_rows(capsys.readouterr().out)
        assert row["tail_flag"] == "true"

        assert main(["run", "--config", path, "--strict"]) == EXIT_CONVERGENCE
        record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert record["error"] == "convergence"


@pytest.mark.integration
class TestOtherCommands:
    """Test `zzbound selftest` and `zzbound repro`."""

    def test_selftest(self, capsys):
        assert main(["selftest"]) == EXIT_OK
        assert "7/7 checks passed" in capsys.readouterr().out

    def test_repro_bernoulli(self, tmp_path, capsys):
        code = main(["repro", "bernoulli", "--out-dir", str(tmp_path), "--n-points", "64"])
        assert code == EXIT_OK
        assert (tmp_path / "bernoulli.csv").exists()
        assert capsys.readouterr().out.strip() == str(tmp_path / "bernoulli.csv")

    def test_unknown_target(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["repro", "table9"])
        assert excinfo.value.code == 2


@pytest.mark.integration
class TestShippedExperiments:
    """The example experiment files must stay valid."""

    @pytest.mark.parametrize(
        "path", sorted((Path(__file__).parents[2] / "configs" / "experiments").iterdir())
    )
    def test_validates(self, path):
        config = load_experiment(path)
        assert config.prior_model() is not None
