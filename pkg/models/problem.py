"""
Forward multi-objective problem
K convex objectives, convex inequalities g(x) <= 0 and equalities Ax = b
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from models.errors import (
    DimensionMismatch,
    InputError,
    RankDeficientEqualities,
    ZeroWeightVector,
)
from models.functions import (
    ConvexFunction,
    HingeSquared,
    Linear,
    Quadratic,
    as_point,
    frozen_array,
    pad,
)

RANK_TOL = 1e-10


def check_full_row_rank(A: np.ndarray) -> None:
    """Reject equality systems with dependent rows (pivoted QR)"""
    m = A.shape[0]
    if m == 0:
        return
    if m > A.shape[1]:
        raise RankDeficientEqualities(f"{m} equality rows cannot be independent in {A.shape[1]} variables")
    R = linalg.qr(A.T, mode="r", pivoting=True)[0]
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag > RANK_TOL * max(linalg.norm(A), 1e-300)))
    if rank < m:
        raise RankDeficientEqualities(f"equality matrix has rank {rank} < {m} rows")


@dataclass(frozen=True, eq=False)
class ForwardProblem:
    """minimize sum_k alpha_k f_k(x) s.t. g_l(x) <= 0, Ax = b"""

    objectives: Tuple[ConvexFunction, ...]
    inequalities: Tuple[ConvexFunction, ...] = ()
    eq_a: Optional[np.ndarray] = None
    eq_b: Optional[np.ndarray] = None
    objective_names: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        objectives = tuple(self.objectives)
        inequalities = tuple(self.inequalities)
        if not objectives:
            raise InputError("a forward problem needs at least one objective")
        n = objectives[0].n
        for f in objectives + inequalities:
            if f.n != n:
                raise DimensionMismatch(f"function of dimension {f.n} in a problem of dimension {n}")
        eq_a = np.zeros((0, n)) if self.eq_a is None else np.array(self.eq_a, dtype=float)
        eq_b = np.zeros(0) if self.eq_b is None else self.eq_b
        if eq_a.ndim != 2 or eq_a.shape[1] != n:
            raise DimensionMismatch(f"eq_a must have {n} columns, got shape {eq_a.shape}")
        eq_b = frozen_array(eq_b, 1, "eq_b") if np.size(eq_b) else np.zeros(0)
        if eq_b.shape[0] != eq_a.shape[0]:
            raise DimensionMismatch(f"eq_b has length {eq_b.shape[0]}, eq_a has {eq_a.shape[0]} rows")
        check_full_row_rank(eq_a)
        eq_a.setflags(write=False)
        names = self.objective_names
        if names is None:
            names = tuple(f"f{k + 1}" for k in range(len(objectives)))
        if len(names) != len(objectives):
            raise DimensionMismatch(f"{len(names)} names for {len(objectives)} objectives")
        object.__setattr__(self, "objectives", objectives)
        object.__setattr__(self, "inequalities", inequalities)
        object.__setattr__(self, "eq_a", eq_a)
        object.__setattr__(self, "eq_b", eq_b)
        object.__setattr__(self, "objective_names", tuple(str(s) for s in names))

    @property
    def n_vars(self) -> int:
        return self.objectives[0].n

    @property
    def n_objectives(self) -> int:
        return len(self.objectives)

    @property
    def n_inequalities(self) -> int:
        return len(self.inequalities)

    @property
    def n_equalities(self) -> int:
        return self.eq_a.shape[0]

    @property
    def is_linear(self) -> bool:
        return all(isinstance(f, Linear) for f in self.objectives + self.inequalities)

    @property
    def has_hinge(self) -> bool:
        return any(isinstance(f, HingeSquared) for f in self.objectives + self.inequalities)

    def point(self, x) -> np.ndarray:
        return as_point(x, self.n_vars)

    def objective_values(self, x) -> np.ndarray:
        x = self.point(x)
        return np.array([f.value(x) for f in self.objectives])

    def objective_gradients(self, x) -> np.ndarray:
        """K x n"""
        x = self.point(x)
        return np.array([f.gradient(x) for f in self.objectives]).reshape(self.n_objectives, self.n_vars)

    def inequality_values(self, x) -> np.ndarray:
        x = self.point(x)
        return np.array([g.value(x) for g in self.inequalities])

    def inequality_gradients(self, x) -> np.ndarray:
        """L x n"""
        x = self.point(x)
        return np.array([g.gradient(x) for g in self.inequalities]).reshape(self.n_inequalities, self.n_vars)

    def equality_residual(self, x) -> np.ndarray:
        return self.eq_a @ self.point(x) - self.eq_b


@dataclass(frozen=True, eq=False)
class WeightVector:
    """Nonnegative objective weights; `normalized` sums to one"""

    raw: np.ndarray

    def __post_init__(self):
        raw = np.array(self.raw, dtype=float).reshape(-1)
        if np.any(~np.isfinite(raw)):
            raise InputError("weights must be finite")
        if np.any(raw < -1e-9):
            raise InputError(f"weights must be nonnegative, got {raw.tolist()}")
        raw = np.maximum(raw, 0.0)
        raw.setflags(write=False)
        object.__setattr__(self, "raw", raw)

    @property
    def size(self) -> int:
        return self.raw.shape[0]

    @property
    def is_valid(self) -> bool:
        return bool(self.raw.sum() > 0)

    @property
    def normalized(self) -> np.ndarray:
        total = self.raw.sum()
        if total <= 0:
            raise ZeroWeightVector("weight vector is identically zero")
        return self.raw / total

    @classmethod
    def of(cls, values) -> "WeightVector":
        return values if isinstance(values, cls) else cls(values)


@dataclass(frozen=True)
class LiftMap:
    """How a lifted solution maps back onto the original variables.

    inequality_rows[l] is the slice of lifted inequalities that replaced
    original inequality l; epigraph rows of lifted objectives follow them.
    """

    n_original: int
    n_lifted: int
    objective_blocks: Tuple[Tuple[int, int, int], ...] = ()
    inequality_rows: Tuple[Tuple[int, int], ...] = ()

    @property
    def is_identity(self) -> bool:
        return self.n_lifted == self.n_original and not self.objective_blocks

    def project(self, z) -> np.ndarray:
        return np.asarray(z, dtype=float)[: self.n_original].copy()

    def lift(self, problem: ForwardProblem, x) -> np.ndarray:
        """Extend x with z = (Mx - t)_+ for every lifted objective"""
        x = problem.point(x)
        z = np.zeros(self.n_lifted)
        z[: self.n_original] = x
        for k, start, stop in self.objective_blocks:
            z[start:stop] = problem.objectives[k].excess(x)
        return z

    def collapse_multipliers(self, lam) -> np.ndarray:
        """Sum lifted inequality multipliers back onto the original inequalities"""
        lam = np.asarray(lam, dtype=float)
        return np.array([lam[a:b].sum() for a, b in self.inequality_rows])


def epigraph_reformulate(
    problem: ForwardProblem, objectives: Optional[Sequence[int]] = None
) -> Tuple[ForwardProblem, LiftMap]:
    """Replace hinge-squared pieces by quadratics in auxiliary variables.

    A hinge objective ||(Mx - t)_+||^2 becomes ||z||^2 with Mx - t - z <= 0 and
    -z <= 0. A hinge constraint ||(Mx - t)_+||^2 <= 0 holds exactly when
    Mx <= t, so it becomes those linear rows. Only the listed objectives are
    lifted (all by default); unlisted hinge objectives are left as they are.
    """
    lift_ids = range(problem.n_objectives) if objectives is None else sorted(set(objectives))
    n = problem.n_vars
    blocks = []
    cursor = n
    for k in lift_ids:
        f = problem.objectives[k]
        if isinstance(f, HingeSquared):
            blocks.append((k, cursor, cursor + f.rows))
            cursor += f.rows
    n_total = cursor
    if not blocks and not any(isinstance(g, HingeSquared) for g in problem.inequalities):
        rows = tuple((l, l + 1) for l in range(problem.n_inequalities))
        return problem, LiftMap(n, n, (), rows)

    block_of = {k: (start, stop) for k, start, stop in blocks}
    new_objectives = []
    for k, f in enumerate(problem.objectives):
        if k in block_of:
            start, stop = block_of[k]
            Q = np.zeros((n_total, n_total))
            idx = np.arange(start, stop)
            Q[idx, idx] = 2.0
            new_objectives.append(Quadratic(Q))
        elif isinstance(f, HingeSquared):
            new_objectives.append(HingeSquared(np.hstack([f.M, np.zeros((f.rows, n_total - n))]), f.t))
        else:
            new_objectives.append(pad(f, n_total))

    new_inequalities = []
    rows = []
    for g in problem.inequalities:
        first = len(new_inequalities)
        if isinstance(g, HingeSquared):
            for i in range(g.rows):
                new_inequalities.append(Linear(np.concatenate([g.M[i], np.zeros(n_total - n)]), -g.t[i]))
        else:
            new_inequalities.append(pad(g, n_total))
        rows.append((first, len(new_inequalities)))

    for k, start, stop in blocks:
        f = problem.objectives[k]
        for i in range(f.rows):
            c = np.zeros(n_total)
            c[:n] = f.M[i]
            c[start + i] = -1.0
            new_inequalities.append(Linear(c, -f.t[i]))
        for i in range(f.rows):
            c = np.zeros(n_total)
            c[start + i] = -1.0
            new_inequalities.append(Linear(c, 0.0))

    eq_a = np.hstack([problem.eq_a, np.zeros((problem.n_equalities, n_total - n))])
    lifted = ForwardProblem(
        objectives=tuple(new_objectives),
        inequalities=tuple(new_inequalities),
        eq_a=eq_a,
        eq_b=problem.eq_b,
        objective_names=problem.objective_names,
    )
    return lifted, LiftMap(n, n_total, tuple(blocks), tuple(rows))
