import copy
import csv
import io
import json
import math

import numpy as np
import pytest
from django.core.management import CommandError, call_command
from testapp.systems import EXAMPLE_DOCUMENT, LINEAR_DECAY_DOCUMENT

from hilfer_impulse import cli
from hilfer_impulse.output import TRAJECTORY_HEADER

ZERO_DOCUMENT = {
    "mode": "non_instantaneous",
    "order": {"mu": 0.5, "nu": 0.5},
    "schedule": {"t_points": [0, 1], "p_points": [0.5, 1.5], "horizon": 2},
    "g": "-x + sin(t)*x",
    "impulse_maps": ["0.5*x", "x - y"],
    "x0": 0,
    "mesh": {"points_per_interval": 16},
}


def write_config(tmp_path, document, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(document))
    return str(path)


def read_rows(path):
    with open(path, encoding="utf-8", newline="") as handle:
        return list(csv.DictReader(handle))


def read_series(path):
    """
    Reads the columns of a trajectory CSV back as float arrays, with NaN
    for the non-numeric ones.
    """
    columns = {}
    for row in read_rows(path):
        for name, value in row.items():
            try:
                columns.setdefault(name, []).append(float(value))
            except ValueError:
                columns.setdefault(name, []).append(math.nan)
    return {name: np.array(values) for name, values in columns.items()}


def run(name, *args, **options):
    """
    Runs a command, returning its stdout and return code
    """
    stdout = io.StringIO()
    try:
        call_command(name, *args, stdout=stdout, **options)
    except CommandError as error:
        return stdout.getvalue(), error.returncode
    return stdout.getvalue(), 0


def test_simulate(tmp_path):
    out = tmp_path / "trajectory.csv"
    _, code = run("simulate", config=write_config(tmp_path, EXAMPLE_DOCUMENT), out=str(out))
    assert code == 0
    assert out.read_text().splitlines()[0] == ",".join(TRAJECTORY_HEADER)
    series = read_series(out)
    index = int(np.argmin(np.abs(series["t"] - 0.5)))
    assert series["t"][index] == 0.5
    assert series["x"][index] == pytest.approx(1.3050539, abs=1e-3)


def test_simulate_output_from_config(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    document = dict(EXAMPLE_DOCUMENT, output={"csv": "nested/out.csv"})
    _, code = run("simulate", config=write_config(tmp_path, document))
    assert code == 0
    assert (tmp_path / "nested" / "out.csv").exists()


def test_simulate_is_deterministic(tmp_path):
    config = write_config(tmp_path, EXAMPLE_DOCUMENT)
    run("simulate", config=config, out=str(tmp_path / "first.csv"))
    run("simulate", config=config, out=str(tmp_path / "second.csv"))
    assert (tmp_path / "first.csv").read_bytes() == (tmp_path / "second.csv").read_bytes()


def test_simulate_zero_solution(tmp_path):
    out = tmp_path / "zero.csv"
    _, code = run("simulate", config=write_config(tmp_path, ZERO_DOCUMENT), out=str(out))
    assert code == 0
    assert np.all(read_series(out)["x"] == 0)


def test_simulate_numeric_error(tmp_path):
    document = {
        "mode": "instantaneous",
        "order": {"mu": 0.5, "nu": 1.0},
        "schedule": {"t_points": [0], "horizon": 5.0},
        "g": "x^2",
        "x0": 10.0,
        "mesh": {"points_per_interval": 16},
    }
    out = tmp_path / "blow_up.csv"
    _, code = run("simulate", config=write_config(tmp_path, document), out=str(out))
    assert code == 3
    assert not out.exists()


def test_simulate_config_errors(tmp_path):
    document = copy.deepcopy(EXAMPLE_DOCUMENT)
    document["schedule"]["t_points"] = [0, 0.4, 2]
    _, code = run("simulate", config=write_config(tmp_path, document), out=str(tmp_path / "x.csv"))
    assert code == 2
    _, code = run("simulate", config=str(tmp_path / "missing.json"))
    assert code == 2
    assert not (tmp_path / "x.csv").exists()


def test_reproduce_example_caputo(tmp_path):
    stdout, code = run("reproduce_example", nu="1", out=str(tmp_path), points=64)
    assert code == 0
    assert "closed_form.csv" in stdout
    solved = [
        float(row["x"])
        for row in read_rows(tmp_path / "trajectory_nu_1.csv")
        if not (row["segment_kind"] == "active" and float(row["t"]) in (0, 1, 2))
    ]
    exact = [float(row["x"]) for row in read_rows(tmp_path / "closed_form.csv")]
    assert len(solved) == len(exact)
    assert np.max(np.abs(np.array(solved) - np.array(exact))) <= 1e-3


def test_reproduce_example_all(tmp_path):
    _, code = run("reproduce_example", out=str(tmp_path), points=32, concurrency=2)
    assert code == 0
    assert sorted(path.name for path in tmp_path.iterdir()) == [
        "closed_form.csv",
        "trajectory_nu_0.25.csv",
        "trajectory_nu_0.5.csv",
        "trajectory_nu_0.75.csv",
        "trajectory_nu_1.csv",
    ]
    for nu in ("0.25", "0.5", "0.75"):
        weighted = read_series(tmp_path / f"trajectory_nu_{nu}.csv")["weighted_x"]
        assert np.all(np.abs(weighted[:3] - 1) < 5e-2)


def test_reproduce_example_without_caputo(tmp_path):
    _, code = run("reproduce_example", nu="0.5", out=str(tmp_path), points=16)
    assert code == 0
    assert (tmp_path / "closed_form.csv").exists()
    assert not (tmp_path / "trajectory_nu_1.csv").exists()


@pytest.mark.parametrize("nu", ["", "a,b", "0.5,1.5"])
def test_reproduce_example_bad_nu(tmp_path, nu):
    _, code = run("reproduce_example", nu=nu, out=str(tmp_path))
    assert code == 2


def test_check_contraction(tmp_path):
    document = dict(
        EXAMPLE_DOCUMENT,
        schedule={"t_points": [0], "p_points": [0.5], "horizon": 0.5},
        impulse_maps=[],
        contraction={"L": 0, "I": []},
    )
    stdout, code = run("check", config=write_config(tmp_path, document))
    assert code == 0
    assert "K=0.000000" in stdout
    assert "All checks passed" in stdout
    document["contraction"] = {"L": 1, "I": [], "p": 0.8}
    stdout, code = run("check", config=write_config(tmp_path, document))
    assert "K=1.035729" in stdout
    assert "Contraction: no" in stdout
    assert code == 1


def test_check_estimates(tmp_path):
    document = dict(EXAMPLE_DOCUMENT, contraction={"L": "estimate", "I": "estimate", "samples": 200})
    stdout, _ = run("check", config=write_config(tmp_path, document))
    assert "Estimated L=0.000000" in stdout
    assert "Estimated I=[" in stdout


def test_check_lyapunov(tmp_path):
    stdout, code = run("check", config=write_config(tmp_path, LINEAR_DECAY_DOCUMENT))
    assert code == 0
    assert "D V <= -alpha3|x|^ab" in stdout
    assert "Envelope dominance" in stdout
    # Demanding faster decay than the system has
    document = copy.deepcopy(LINEAR_DECAY_DOCUMENT)
    document["lyapunov"]["alpha3"] = 3
    stdout, code = run("check", config=write_config(tmp_path, document))
    assert code == 1
    assert "FAILED" in stdout


def test_check_weighted_envelopes(tmp_path):
    """
    Envelopes that are unbounded at t0 still give a verdict
    """
    document = copy.deepcopy(LINEAR_DECAY_DOCUMENT)
    document["order"]["nu"] = 0.5
    document["lyapunov"] = {"V": "abs(x)^0.5", "alpha1": 1, "alpha2": 1, "alpha3": 1, "a": 0.5}
    document["generalized"] = {"m": "abs(x)", "m0": 1, "c": 2, "gamma": 1}
    stdout, code = run("check", config=write_config(tmp_path, document))
    assert code in (0, 1)
    assert "Envelope dominance" in stdout
    assert "Generalized envelope: margin" in stdout


def test_check_needs_something_to_check(tmp_path):
    _, code = run("check", config=write_config(tmp_path, EXAMPLE_DOCUMENT))
    assert code == 2


def test_selftest_command():
    stdout, code = run("selftest", suite=["laplace"])
    assert code == 0
    assert "[laplace]" in stdout
    assert "All suites passed" in stdout


def test_cli_dispatch(capsys):
    assert cli.main(["hilfer-impulse"]) == 2
    assert cli.main(["hilfer-impulse", "solve"]) == 2
    assert "Unknown command" in capsys.readouterr().err
    assert cli.main(["hilfer-impulse", "--help"]) == 0
    assert cli.main(["hilfer-impulse", "selftest", "--suite", "laplace"]) == 0
    with pytest.raises(SystemExit) as exit_info:
        cli.main(["hilfer-impulse", "reproduce-example", "--nu", ""])
    assert exit_info.value.code == 2
