import json

import numpy as np
import pytest

from main import EXIT_INPUT, EXIT_OK, run_cli
from workbench.documents import read_document
from workbench.reports import CSV_COLUMNS


def run(capsys, *argv):
    code = run_cli(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_forward_solve(capsys):
    code, out, _ = run(capsys, "forward", "--example", "1", "--alpha", "1,0")
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["model"] == "forward"
    assert np.allclose(payload["x"], [1.067, 1.641], atol=1e-3)


def test_exact_inverse_as_json_and_csv(capsys):
    code, out, _ = run(capsys, "invert", "--model", "iop_r", "--example", "1", "--xhat", "b")
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["report"]["verdict"] == "Perfect"
    assert payload["result"]["scheme"]["kref"] == 1

    code, out, _ = run(capsys, "invert", "--example", "1", "--xhat", "1.7,1.3", "--format", "csv")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 3


def test_kes_flags_reach_the_solver(capsys):
    code, out, _ = run(capsys, "invert", "--model", "kes", "--example", "1", "--xhat", "b", "--kes-fix", "2")
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["config"]["normalization"] == "fix_weight(2)"
    assert np.allclose(payload["report"]["alpha"], [0.0, 1.0], atol=1e-4)


def test_sweep_as_csv(capsys):
    code, out, _ = run(capsys, "sweep", "--example", "1", "--grid-size", "5", "--format", "csv")
    assert code == EXIT_OK
    assert len(out.splitlines()) == 6


@pytest.mark.parametrize("argv", [
    ("invert", "--example", "1"),
    ("invert", "--xhat", "1,1"),
    ("invert", "--model", "bogus", "--example", "1"),
    ("forward", "--example", "1", "--alpha", "x,y"),
    ("forward", "--example", "1", "--alpha", "1,0", "--format", "csv"),
])
def test_input_errors_exit_with_two(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == EXIT_INPUT


def test_verify_on_the_worked_example(capsys):
    code, out, _ = run(capsys, "verify", "--example", "1", "--xhat", "b")
    assert code == EXIT_OK
    rows = json.loads(out)[0]
    assert all(row["passed"] for row in rows)


def test_generated_instance_is_a_valid_document(capsys, tmp_path):
    out_path, dvh_path = tmp_path / "plan.json", tmp_path / "dvh.csv"
    code, _, _ = run(capsys, "gen-instance", "--seed", "0", "--n", "6", "--m", "5", "--k", "2",
                     "--bins", "10", "--out", str(out_path), "--dvh", str(dvh_path))
    assert code == EXIT_OK
    document = read_document(str(out_path))
    assert document.model == "iop_r"
    assert document.xhat.shape == (6,)
    assert document.problem.n_objectives == 2
    lines = dvh_path.read_text().splitlines()
    assert lines[0] == "structure,dose,volume_fraction"
    assert len(lines) == 1 + 3 * 10
