import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from models.errors import DocumentError
from models.functions import HingeSquared, Linear, Quadratic
from models.problem import ForwardProblem
from workbench.documents import (
    ProblemDocument,
    emit_document,
    parse_document,
    read_document,
    write_document,
)

coordinate = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)


def mixed_problem():
    return ForwardProblem(
        objectives=(Quadratic(np.diag([2.0, 1.0]), [0.5, -1.0], 3.0), HingeSquared(np.eye(2), [1.0, 2.0])),
        inequalities=(Linear([1.0, 1.0], -4.0),),
        eq_a=[[1.0, -1.0]],
        eq_b=[0.25],
        objective_names=("dose", "spill"),
    )


@settings(max_examples=50, deadline=None)
@given(st.lists(coordinate, min_size=2, max_size=2), st.integers(0, 2 ** 31))
def test_emitted_text_is_a_fixed_point(xhat, seed):
    document = ProblemDocument(mixed_problem(), model="iop_a", xhat=xhat, seed=seed,
                               scheme={"kind": "absolute"}, parameters={"kappa": 2.5})
    text = emit_document(document)
    again = parse_document(text)
    assert emit_document(again) == text
    assert again.xhat.tolist() == list(xhat)
    assert again.problem.objective_names == ("dose", "spill")


def test_parsed_problem_evaluates_like_the_original():
    original = mixed_problem()
    parsed = parse_document(emit_document(ProblemDocument(original))).problem
    x = np.array([0.3, -1.2])
    assert np.allclose(parsed.objective_values(x), original.objective_values(x))
    assert np.allclose(parsed.eq_a, original.eq_a)


def test_file_round_trip(tmp_path, example1):
    path = tmp_path / "example.json"
    write_document(ProblemDocument(example1, model="kes", xhat=[1.7, 1.3], kes={"fix": 2}), str(path))
    document = read_document(str(path))
    assert document.model == "kes"
    assert document.kes == {"fix": 2}


@pytest.mark.parametrize("text, message", [
    ("{not json", "not valid JSON"),
    ("[1, 2]", "JSON object"),
    (json.dumps({"schema_version": "2"}), "unsupported schema version"),
    (json.dumps({"schema_version": "1"}), "malformed"),
])
def test_malformed_documents(text, message):
    with pytest.raises(DocumentError, match=message):
        parse_document(text)


def test_invalid_problem_inside_a_document(example1):
    data = json.loads(emit_document(ProblemDocument(example1)))
    data["problem"]["objectives"][0]["Q"] = [[1.0, 0.0], [0.0, -1.0]]
    with pytest.raises(DocumentError, match="invalid problem"):
        parse_document(json.dumps(data))


def test_request_validation(example1):
    with pytest.raises(DocumentError):
        ProblemDocument(example1, model="nope")
    with pytest.raises(DocumentError):
        ProblemDocument(example1, seed=-1)
    with pytest.raises(DocumentError):
        read_document("/nonexistent/problem.json")


def test_nan_cannot_be_emitted(example1):
    with pytest.raises(ValueError):
        emit_document(ProblemDocument(example1, xhat=[float("nan"), 1.0]))
