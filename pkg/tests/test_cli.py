import csv
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from superint.cli import main
from superint.config import COMMANDS, DEFAULTS, ConfigError, RunConfig

PERLICK_HALF = '{"family": "PerlickI", "beta": "1/2"}'


def read(path):
    return json.loads(path.read_text())


def test_algebra_run(tmp_path):
    out = tmp_path / "a"
    assert main(["verify-algebra", "--seed", "42", "--out", str(out)]) == 0
    rep = read(out / "report.json")
    assert rep["passed"] and rep["result"]["max_violation"] < 1e-10
    man = read(out / "manifest.json")
    assert man["config"]["seed"] == 42 and "wall_time_s" in man and "numpy" in man["versions"]
    assert not (out / "failure.json").exists()


def test_simulate_run(tmp_path):
    out = tmp_path / "s"
    assert main(["simulate", "--system", PERLICK_HALF, "--out", str(out), "--set", "t_final=30"]) == 0
    with open(out / "trajectory.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][:5] == ["t", "x1", "x2", "p1", "p2"]
    drift = read(out / "drift.json")
    assert drift["energy_drift"] < 1e-10
    assert all(v < 1e-6 for v in drift["drift"].values())


def test_spectrum_run(tmp_path):
    out = tmp_path / "q"
    assert main(["spectrum", "--system", '{"family": "PerlickI"}', "--out", str(out)]) == 0
    lines = (out / "spectrum.csv").read_text().splitlines()
    assert lines[1].split(",")[2] == "-2"
    assert float(lines[1].split(",")[3]) == pytest.approx(-2.0, rel=1e-6)


def test_reports_are_byte_identical(tmp_path):
    args = ["simulate", "--system", PERLICK_HALF, "--set", "t_final=10"]
    assert main(args + ["--out", str(tmp_path / "one")]) == 0
    assert main(args + ["--out", str(tmp_path / "two")]) == 0
    for name in ("report.json", "trajectory.csv", "drift.json"):
        assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "two" / name).read_bytes()


def test_check_failure_report(tmp_path):
    out = tmp_path / "f"
    code = main(["spectrum", "--system", '{"family": "PerlickI"}', "--tol", "1e-14", "--out", str(out)])
    assert code == 1
    fail = read(out / "failure.json")
    assert fail["violated"] == "spectrum:l=0"
    assert fail["worst_point"]["l"] == 0
    assert "failure.json" in read(out / "manifest.json")["files"]


def test_config_file(tmp_path):
    cfg = RunConfig("ccm-check", out=str(tmp_path / "c"), seed=3)
    path = tmp_path / "cfg.json"
    path.write_text(cfg.dumps())
    assert main(["--config", str(path)]) == 0
    assert read(tmp_path / "c" / "manifest.json")["config"] == cfg.to_json()


def test_config_and_flags_combine(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"command": "curvature", "system": {"family": "PerlickI", "dim": 3, "beta": "2"}}))
    out = tmp_path / "k"
    assert main(["curvature", "--config", str(path), "--out", str(out), "--set", "radii=[1.0, 2.0]"]) == 0
    assert len(read(out / "report.json")["result"]["rows"]) == 2
    assert (out / "curvature.csv").exists()


@pytest.mark.parametrize("argv", [
    [],
    ["nonsense"],
    ["simulate"],
    ["spectrum", "--system", '{"family": "PerlickI", "beta": "2/4"}'],
    ["spectrum", "--system", "{not json"],
    ["spectrum", "--system", '{"family": "PerlickII"}'],
    ["verify-algebra", "--set", "colour=1"],
    ["verify-algebra", "--set", "novalue"],
    ["verify-algebra", "--tol", "-1"],
    ["verify-algebra", "--seed", "-1"],
    ["verify-algebra", "--config", "/nonexistent/cfg.json"],
    ["verify-algebra", "--set", "kind=\"spinor\""],
    ["spectrum", "--system", '{"family": "KeplerCurved", "delta": 0.1}'],
])
def test_usage_errors(argv, tmp_path):
    assert main(argv + ["--out", str(tmp_path / "u")]) == 2


def test_conflicting_command(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"command": "verify-algebra"}))
    assert main(["spectrum", "--config", str(path)]) == 2


def test_help_exits_cleanly(capsys):
    assert main(["--help"]) == 0
    assert "verify-algebra" in capsys.readouterr().out


def test_defaults_filled_in():
    cfg = RunConfig("spectrum", system={"family": "PerlickI"})
    assert cfg.options["count"] == 5 and cfg.tol == DEFAULTS["spectrum"][1]


def test_seed_folding():
    assert RunConfig("verify-algebra", seed=2**64 - 1).rng_seed == 2**32 - 1


def test_bad_json_config():
    with pytest.raises(ConfigError):
        RunConfig.loads("[1, 2")
    with pytest.raises(ConfigError):
        RunConfig.from_json({"command": "verify-algebra", "extra": 1})


SYSTEMS = {
    "verify-invariants": {"family": "KeplerCurved", "dim": 3, "k": 0.1},
    "simulate": {"family": "PerlickII", "gamma": "3/2", "lam": 0.3, "delta": 0.05},
    "closure": {"family": "PerlickI", "beta": "2"},
    "curvature": {"family": "PerlickI", "dim": 3},
    "spectrum": {"family": "KeplerCurved"},
    "ttw-check": {"family": "TTWCurved", "b1": 0.2},
}


@settings(max_examples=40, deadline=None)
@given(command=st.sampled_from(COMMANDS), seed=st.integers(0, 2**64 - 1),
       tol=st.floats(1e-14, 1.0), out=st.text(min_size=1, max_size=12))
def test_config_round_trip(command, seed, tol, out):
    cfg = RunConfig(command, SYSTEMS.get(command), seed, tol, {}, out)
    assert RunConfig.from_json(json.loads(json.dumps(cfg.to_json()))) == cfg
    assert RunConfig.loads(cfg.dumps()).dumps() == cfg.dumps()


@pytest.mark.parametrize("command", ["verify-invariants", "closure", "ttw-check", "curvature"])
def test_remaining_commands_pass(command, tmp_path):
    out = tmp_path / command
    assert main([command, "--system", json.dumps(SYSTEMS[command]), "--out", str(out)]) == 0
    rep = read(out / "report.json")
    assert rep["passed"] and rep["checks"]


def test_closure_negative_expectation_fails_for_closed_orbit(tmp_path):
    out = tmp_path / "n"
    code = main(["closure", "--system", json.dumps(SYSTEMS["closure"]), "--set", "expect_closed=false",
                 "--out", str(out)])
    assert code == 1
    assert read(out / "failure.json")["violated"] == "closure:not_closed"
