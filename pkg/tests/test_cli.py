import json
import subprocess
import sys
from pathlib import Path

import pytest

from qvpkit import cli
from qvpkit.errors import InvalidInput
from qvpkit.reports import read_report, report_differences

GOLDEN = Path(__file__).parent / "golden"
CASES = json.loads((GOLDEN / "cases.json").read_text())


def run_cli(*argv, env=None):
    return subprocess.run([sys.executable, "-m", "qvpkit", *argv], capture_output=True, text=True, env=env)


@pytest.mark.parametrize("case", CASES, ids=[c["name"] for c in CASES])
def test_golden_reports(case, tmp_path):
    out = tmp_path / "report.jsonl"
    assert cli.main([*case["argv"], "--out", str(out)]) == 0
    diffs = report_differences(read_report(GOLDEN / f"{case['name']}.jsonl"), read_report(out))
    assert not diffs, "\n".join(diffs[:10])


def test_identical_runs_give_identical_bytes(tmp_path):
    argv = ["verify", "--instance", "builtin:example1", "--a", "2/3", "--b", "1/3", "--seed", "4"]
    first, second = run_cli(*argv), run_cli(*argv)
    assert first.returncode == 0
    assert first.stdout == second.stdout
    assert cli.main([*argv, "--out", str(tmp_path / "r.jsonl")]) == 0
    assert (tmp_path / "r.jsonl").read_text() == first.stdout


def test_bounds_must_be_ordered():
    assert cli.main(["verify", "--instance", "builtin:example1", "--a", "1/3", "--b", "2/3"]) == 2


def test_unknown_builtin_and_missing_file(tmp_path, capsys):
    assert cli.main(["spectrum", "--instance", "builtin:nope"]) == 2
    assert cli.main(["spectrum", "--instance", str(tmp_path / "none.json")]) == 2


def test_malformed_instance_names_the_field(tmp_path, capsys):
    doc = {"version": 1, "problem": "qsat", "n": 2, "flavor": "projector",
           "terms": [{"support": [0], "matrix": [[[1, 0], [0, 0]], [[0, 0], "x"]]}]}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    assert cli.main(["spectrum", "--instance", str(path)]) == 2
    assert "terms[0].matrix" in capsys.readouterr().err


def test_cap_from_flag_and_environment():
    assert cli.main(["spectrum", "--instance", "builtin:qsat_sat", "--cap", "5"]) == 3
    env = {**__import__("os").environ, cli.CAP_ENV: "5"}
    assert run_cli("spectrum", "--instance", "builtin:qsat_sat", env=env).returncode == 3


def test_infeasible_retarget_exit_code():
    argv = ["reduce", "--instance", "builtin:example1", "--a", "0.6", "--b", "0.4", "--a2", "0.8", "--b2", "0.2"]
    assert cli.main(argv) == 3


def test_invalid_deamplification_parameters():
    assert cli.main(["reduce", "--instance", "builtin:example1", "--z", "0.2", "--zp", "0.8"]) == 2


def test_run_config_validation():
    with pytest.raises(InvalidInput):
        cli.RunConfig(command="spectrum", instance="builtin:example1", seed=-1)


def test_gnm_report_contents(tmp_path):
    out = tmp_path / "g.jsonl"
    assert cli.main(["gnm", "--instance", "builtin:gnm_z8_nonmember", "--out", str(out)]) == 0
    rep = read_report(out)
    state = rep.find("subgroup_state")[0]
    assert state["circuit_acceptance"] == pytest.approx(0.5, abs=1e-9)
