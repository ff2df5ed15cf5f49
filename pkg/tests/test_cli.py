import json

import pytest
from click.testing import CliRunner

from pybusemann import __version__
from pybusemann.cli import cli
from pybusemann.report import EXIT_ERROR, EXIT_PASS, EXIT_VIOLATION, VIOLATION

EXPERIMENT = """\
[experiment]
suite = curvature
seed = 7

[space]
kind = lp
p = 4
n = 2
S = {S}

[curvature]
trials = 300
"""


@pytest.fixture
def runner():
    return CliRunner()


def _experiment(tmp_path, S):
    path = tmp_path / "experiment.ini"
    path.write_text(EXPERIMENT.format(S=S))
    return str(path)


def _run(runner, tmp_path, S, name="report.json"):
    out = str(tmp_path / name)
    args = ["run", "--config", _experiment(tmp_path, S), "--out", out]
    result = runner.invoke(cli, args)
    with open(out) as handle:
        return result, json.load(handle)


def test_version(runner):
    result = runner.invoke(cli, ["--version"])
    assert result.exit_code == 0
    assert __version__ in result.output


def test_curvature_suite_passes(runner, tmp_path):
    result, report = _run(runner, tmp_path, 3)
    assert result.exit_code == EXIT_PASS
    assert report["summary"]["overall"] == "pass"
    checks = [item["check"] for item in report["verdicts"]]
    assert checks == sorted(checks)
    assert "curvature.s_concavity" in checks
    assert "curvature.distance_convexity" not in checks


def test_violation_replays(runner, tmp_path):
    result, report = _run(runner, tmp_path, 2.5)
    assert result.exit_code == EXIT_VIOLATION
    violated = [item for item in report["verdicts"] if item["verdict"] == VIOLATION]
    assert [item["check"] for item in violated] == ["curvature.s_concavity"]
    assert violated[0]["witness"]["version"] == __version__

    replayed = runner.invoke(cli, ["replay", "--witness", str(tmp_path / "report.json")])
    assert replayed.exit_code == EXIT_PASS
    line = json.loads(replayed.output.strip().splitlines()[-1])
    assert line["check"] == "s_concavity"
    assert not line["held"]
    assert line["residual"] == pytest.approx(violated[0]["residual"], abs=1e-12)


def test_runs_are_deterministic(runner, tmp_path):
    _, first = _run(runner, tmp_path, 3, "first.json")
    _, second = _run(runner, tmp_path, 3, "second.json")
    first.pop("timing")
    second.pop("timing")
    first["config"].pop("out")
    second["config"].pop("out")
    assert first == second


def test_seed_override(runner, tmp_path):
    out = str(tmp_path / "report.json")
    config = _experiment(tmp_path, 3)
    result = runner.invoke(cli, ["run", "--config", config, "--out", out, "--seed", "11"])
    assert result.exit_code == EXIT_PASS
    with open(out) as handle:
        assert json.load(handle)["config"]["seed"] == 11


def test_configuration_errors_exit_two(runner, tmp_path):
    path = tmp_path / "empty.ini"
    path.write_text("[experiment]\nsuite = curvature\n")
    result = runner.invoke(cli, ["run", "--config", str(path)])
    assert result.exit_code == EXIT_ERROR
    assert "space" in result.output

def test_bad_option_values_exit_two(runner, tmp_path):
    path = tmp_path / "many.ini"
    path.write_text(EXPERIMENT.format(S=3).replace("trials = 300", "trials = many"))
    result = runner.invoke(cli, ["run", "--config", str(path)])
    assert result.exit_code == EXIT_ERROR
    assert "curvature.trials" in result.output



def test_replay_of_a_missing_file(runner, tmp_path):
    result = runner.invoke(cli, ["replay", "--witness", str(tmp_path / "none.json")])
    assert result.exit_code == EXIT_ERROR
