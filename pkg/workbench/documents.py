"""
Problem Documents
JSON form of a forward problem plus the inverse request to run on it
"""

import json
from dataclasses import dataclass, field, replace
from typing import Dict, Optional

import numpy as np

from models.errors import DocumentError, InputError
from models.functions import HingeSquared, Linear, Quadratic
from models.problem import ForwardProblem

SCHEMA_VERSION = "1"
MODELS = ("iop", "iop_r", "iop_a", "liop", "slp", "kes", "classical", "forward", "sweep")


def function_to_dict(f) -> Dict:
    if isinstance(f, Linear):
        return {"type": "linear", "c": f.c.tolist(), "d": f.d}
    if isinstance(f, Quadratic):
        return {"type": "quadratic", "Q": f.Q.tolist(), "q": f.q.tolist(), "d": f.d}
    if isinstance(f, HingeSquared):
        return {"type": "hinge_squared", "M": f.M.tolist(), "t": f.t.tolist()}
    raise DocumentError(f"cannot serialize {type(f).__name__}")


def function_from_dict(data: Dict):
    kind = data.get("type")
    if kind == "linear":
        return Linear(data["c"], data.get("d", 0.0))
    if kind == "quadratic":
        return Quadratic(data["Q"], data.get("q"), data.get("d", 0.0))
    if kind == "hinge_squared":
        return HingeSquared(data["M"], data["t"])
    raise DocumentError(f"unknown function type {kind!r}")


def problem_to_dict(problem: ForwardProblem) -> Dict:
    return {
        "n_vars": problem.n_vars,
        "objectives": [function_to_dict(f) for f in problem.objectives],
        "objective_names": list(problem.objective_names),
        "inequalities": [function_to_dict(g) for g in problem.inequalities],
        "eq_a": problem.eq_a.tolist(),
        "eq_b": problem.eq_b.tolist(),
    }


def problem_from_dict(data: Dict) -> ForwardProblem:
    n = int(data["n_vars"])
    eq_a = np.array(data.get("eq_a") or np.zeros((0, n)), dtype=float).reshape(-1, n)
    return ForwardProblem(
        objectives=tuple(function_from_dict(f) for f in data["objectives"]),
        inequalities=tuple(function_from_dict(g) for g in data.get("inequalities", [])),
        eq_a=eq_a,
        eq_b=np.array(data.get("eq_b") or [], dtype=float),
        objective_names=data.get("objective_names"),
    )


@dataclass(frozen=True, eq=False)
class ProblemDocument:
    """A forward problem with the request to run on it.

    scheme holds kind / mu / kref (kref one-based); kes holds fix (one-based),
    penalty, normalization and delta_scale; parameters carries model extras
    such as kappa, grid_size and slp_step_tol.
    """

    problem: ForwardProblem
    model: str = "iop_r"
    xhat: Optional[np.ndarray] = None
    alpha: Optional[np.ndarray] = None
    scheme: Dict = field(default_factory=dict)
    kes: Dict = field(default_factory=dict)
    parameters: Dict = field(default_factory=dict)
    options: Dict = field(default_factory=dict)
    seed: int = 0
    schema_version: str = SCHEMA_VERSION

    def __post_init__(self):
        if self.model not in MODELS:
            raise DocumentError(f"unknown model {self.model!r}; expected one of {', '.join(MODELS)}")
        if self.seed < 0:
            raise DocumentError("seed must be a nonnegative integer")
        for name in ("xhat", "alpha"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, self.problem.point(value) if name == "xhat"
                                   else np.array(value, dtype=float).reshape(-1))

    def with_request(self, **changes) -> "ProblemDocument":
        return replace(self, **changes)

    def to_dict(self) -> Dict:
        return {
            "schema_version": self.schema_version,
            "model": self.model,
            "problem": problem_to_dict(self.problem),
            "xhat": None if self.xhat is None else self.xhat.tolist(),
            "alpha": None if self.alpha is None else self.alpha.tolist(),
            "scheme": self.scheme,
            "kes": self.kes,
            "parameters": self.parameters,
            "options": self.options,
            "seed": self.seed,
        }


def emit_document(document: ProblemDocument) -> str:
    """Canonical JSON text; floats use shortest round-trip repr"""
    return json.dumps(document.to_dict(), sort_keys=True, indent=2, allow_nan=False)


def parse_document(text: str) -> ProblemDocument:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentError(f"document is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise DocumentError("document must be a JSON object")
    version = str(data.get("schema_version", ""))
    if version != SCHEMA_VERSION:
        raise DocumentError(f"unsupported schema version {version!r}, expected {SCHEMA_VERSION!r}")
    try:
        problem = problem_from_dict(data["problem"])
        return ProblemDocument(
            problem=problem,
            model=data.get("model", "iop_r"),
            xhat=data.get("xhat"),
            alpha=data.get("alpha"),
            scheme=dict(data.get("scheme") or {}),
            kes=dict(data.get("kes") or {}),
            parameters=dict(data.get("parameters") or {}),
            options=dict(data.get("options") or {}),
            seed=int(data.get("seed", 0)),
        )
    except DocumentError:
        raise
    except InputError as e:
        raise DocumentError(f"document describes an invalid problem: {e}") from e
    except (KeyError, TypeError, ValueError) as e:
        raise DocumentError(f"malformed document: {e!r}") from e


def read_document(path: str) -> ProblemDocument:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return parse_document(handle.read())
    except OSError as e:
        raise DocumentError(f"cannot read {path}: {e}") from e


def write_document(document: ProblemDocument, path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(emit_document(document))
        handle.write("\n")
