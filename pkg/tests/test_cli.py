import json
import math
import subprocess
import sys

import pytest

from constructive_demand.cli import dumps, execute, main

SQUARE = json.dumps({"shape": "box", "bounds": [[0, 1], [0, 1]]})


def run(capsys, argv):
    status = main(argv)
    return status, json.loads(capsys.readouterr().out)


def without_timings(env):
    return {k: v for k, v in env.items() if k != "timings"}


def test_demand_happy_path(capsys):
    status, env = run(capsys, ["demand", "--utility", "cobb-douglas(0.5,0.5)", "--ambient", SQUARE, "--p", "1,1", "--w", "1"])
    assert status == 0
    assert math.dist(env["result"]["xi"], (0.5, 0.5)) <= 3e-6
    assert env["command"] == "demand" and env["params"]["p"] == [1.0, 1.0]
    assert set(env) == {"command", "params", "seed", "result", "timings"}


def test_empty_budget_exits_one(capsys):
    status, env = run(capsys, ["demand", "--utility", "cobb-douglas(0.5,0.5)", "--ambient", SQUARE, "--p", "1,1", "--w", "-1"])
    assert status == 1
    assert env["error"]["type"] == "EmptyBudget"
    assert "result" not in env


@pytest.mark.parametrize(
    "argv",
    [
        ["demand", "--utility", "cobb-douglas(0.5,0.5)", "--ambient", "{not json", "--p", "1,1", "--w", "1"],
        ["demand", "--utility", "cobb-douglas(0.5,0.5)", "--ambient", SQUARE, "--p", "1,x", "--w", "1"],
        ["demand", "--utility", "nonsense", "--ambient", SQUARE, "--p", "1,1", "--w", "1"],
        ["demand", "--utility", "cobb-douglas(0.5,0.5)", "--ambient", SQUARE, "--p", "1,1,1", "--w", "1"],
        ["maximize", "--body", json.dumps({"shape": "cube"}), "--utility", "linear(1)"],
        ["fan", "--bar", "no-such-bar"],
        ["demand", "--utility", "cobb-douglas(0.5,0.5)"],
        [],
    ],
)
def test_malformed_input_exits_two(capsys, argv):
    status, env = run(capsys, argv)
    assert status == 2
    assert env["error"]["type"] == "ValidationError"


def test_seed_is_required_for_stochastic_commands(capsys):
    status, env = run(capsys, ["verify-gamma", "--trials", "1"])
    assert status == 2 and "seed" in env["error"]["message"]


def test_verify_gamma_is_deterministic(capsys, tmp_path):
    argv = ["--seed", "42", "--out", str(tmp_path), "verify-gamma", "--eps", "0.1", "--trials", "4"]
    s1, a = run(capsys, argv)
    s2, b = run(capsys, argv)
    assert s1 == s2 == 0
    assert without_timings(a) == without_timings(b)
    rep = a["result"]["report"]
    assert rep["trials"] == 4 and rep["failures"] == 0
    assert a["result"]["strongConcavity"] == {"alpha": 2.0, "lipschitz": pytest.approx(2.6)}
    rows = (tmp_path / "verify-gamma.csv").read_text().splitlines()
    assert rows[0] == "trial,rho_h,rho_h_upper,dxi" and len(rows) == 5
    assert json.loads((tmp_path / "verify-gamma.json").read_text())["seed"] == 42


def test_flip_sampler_needs_delta(capsys):
    status, env = run(capsys, ["--seed", "1", "verify-gamma", "--trials", "2", "--sampler", "flip"])
    assert status == 2


def test_flip_sampler_fails_pairs(capsys):
    status, env = run(capsys, ["--seed", "1", "verify-gamma", "--trials", "3", "--sampler", "flip", "--delta", "1e-3"])
    assert status == 0
    assert env["result"]["report"]["failures"] == 3


def test_scenario_file(capsys, tmp_path):
    scenario = {
        "command": "fan",
        "params": {"bar": "depth3", "cantorDepth": 10},
        "outputPath": str(tmp_path / "out"),
    }
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(scenario))
    status, env = run(capsys, ["--scenario", str(path)])
    assert status == 0
    assert env["result"] == {"bound": {"kind": "UniformAt", "depth": 3}, "cantorDepth": 10, "cantorCovers": True}
    assert (tmp_path / "out" / "fan.json").exists()


def test_scenario_rejects_unknown_params(capsys, tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps({"command": "fan", "params": {"bar": "depth3", "colour": "red"}}))
    status, _ = run(capsys, ["--scenario", str(path)])
    assert status == 2


def test_counterexample_writes_csv(capsys, tmp_path):
    status, env = run(capsys, ["--out", str(tmp_path), "counterexample", "--sweep", "1e-1:1e-3"])
    assert status == 0
    assert [r["jump"] for r in env["result"]["sweep"]] == [1.0, 1.0, 1.0]
    lines = (tmp_path / "counterexample.csv").read_text().splitlines()
    assert lines[0].startswith("delta_x,") and len(lines) == 4


def test_equilibrium_command(capsys):
    status, env = run(capsys, ["equilibrium", "--grid-depth", "3", "--tol", "1e-5"])
    assert status == 0
    res = env["result"]
    assert res["cone"]["ok"] and res["candidate"]["p"] == [0.5, 0.5]
    assert res["report"]["mode"] == "E2"


def test_maximize_with_dominance(capsys):
    body = json.dumps({"shape": "box", "bounds": [[0, 1], [0, 1]], "p": [1, 1], "w": 1})
    status, env = run(
        capsys, ["--seed", "0", "maximize", "--body", body, "--utility", "cobb-douglas(0.5,0.5)", "--dominance-samples", "200"]
    )
    assert status == 0
    assert env["result"]["dominance"]["failures"] == 0


def test_predicate_command(capsys):
    status, env = run(capsys, ["--seed", "3", "predicate", "--name", "lipschitz-sq", "--audit-trials", "100"])
    assert status == 0
    assert abs(env["result"]["delta"] - 0.05) <= 0.002
    assert env["result"]["conditionII"]["violations"] == 0


def test_hausdorff_command(capsys):
    a = json.dumps({"shape": "ball", "center": [0, 0], "radius": 1})
    b = json.dumps({"shape": "ball", "center": [0.5, 0], "radius": 1})
    status, env = run(capsys, ["hausdorff", "--a", a, "--b", b, "--eps", "1e-3"])
    assert status == 0
    assert env["result"]["estimate"] == pytest.approx(0.5, abs=1e-3)


def test_nonfinite_values_become_null():
    assert json.loads(dumps({"x": math.inf, "y": [math.nan, 1.0]})) == {"x": None, "y": [None, 1.0]}


def test_execute_reports_internal_errors(monkeypatch):
    from constructive_demand import cli

    def boom(params, run):
        raise RuntimeError("kaboom")

    monkeypatch.setitem(cli.COMMANDS, "hausdorff", boom)
    a = {"shape": "interval", "bounds": [0, 1]}
    status, env, _ = execute("hausdorff", {"a": a, "b": a})
    assert status == 1 and env["error"]["internal"] is True


def test_execute_rejects_bad_workers():
    status, env, _ = execute("fan", {"bar": "depth3"}, workers=0)
    assert status == 2


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "constructive_demand.cli", "fan", "--bar", "contains-one", "--limit", "8"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["bound"] == {"kind": "NotBarWithin", "depth": 8, "witness": "00000000"}
