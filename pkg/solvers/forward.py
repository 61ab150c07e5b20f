"""
Forward Solver
Weighted-sum solves, Pareto sweeps, membership tests and the classical KKT inverse
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

import numpy as np

from models.errors import DimensionMismatch, SolverError, ZeroWeightVector
from models.functions import combine
from models.problem import ForwardProblem, WeightVector, epigraph_reformulate
from solvers.base_solver import BaseSolver
from solvers.convex_kernel import ConvexKernel, KernelStatus, SmoothProgram
from solvers.linprog import LinearProgram, LpSolver

MEMBERSHIP_TOL = 1e-8
ACTIVE_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class ParetoSample:
    alpha: WeightVector
    x: np.ndarray
    f: np.ndarray
    kernel_report: dict = field(default_factory=dict)
    sigma: Optional[np.ndarray] = None
    pi: Optional[np.ndarray] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


class Membership(str, Enum):
    FEASIBLE = "InteriorOrFeasible"
    INFEASIBLE = "Infeasible"


@dataclass(frozen=True, eq=False)
class MembershipReport:
    verdict: Membership
    slacks: np.ndarray
    equality_residual: np.ndarray
    max_violation: float

    @property
    def feasible(self) -> bool:
        return self.verdict is Membership.FEASIBLE


class ClassicalVerdict(str, Enum):
    FOUND = "Found"
    ONLY_ZERO = "OnlyZeroSolution"


@dataclass(frozen=True, eq=False)
class ClassicalResult:
    verdict: ClassicalVerdict
    weights: Optional[WeightVector] = None
    sigma: Optional[np.ndarray] = None
    pi: Optional[np.ndarray] = None

    @property
    def found(self) -> bool:
        return self.verdict is ClassicalVerdict.FOUND


class ForwardSolver(BaseSolver):
    """Solves FOP(alpha) and answers optimality questions about given points"""

    def __init__(self, kernel: Optional[ConvexKernel] = None, lp_solver: Optional[LpSolver] = None):
        super().__init__("Forward")
        self.kernel = kernel or ConvexKernel()
        self.lp_solver = lp_solver or LpSolver()
        self.options = self.kernel.options

    def solve_fop(self, problem: ForwardProblem, alpha) -> ParetoSample:
        """minimize sum_k alpha_k f_k(x) over the feasible set"""
        weights = WeightVector.of(alpha)
        if weights.size != problem.n_objectives:
            raise DimensionMismatch(f"expected {problem.n_objectives} weights, got {weights.size}")
        if not weights.is_valid:
            raise ZeroWeightVector("alpha must have at least one positive component")
        active = [k for k in range(problem.n_objectives) if weights.raw[k] > 0]
        lifted, lift_map = epigraph_reformulate(problem, objectives=active)
        objective = combine(
            [weights.raw[k] for k in active], [lifted.objectives[k] for k in active], lift_map.n_lifted
        )
        program = SmoothProgram(objective, lifted.inequalities, lifted.eq_a, lifted.eq_b)
        solution = self.kernel.solve(program)
        if solution.status is not KernelStatus.OPTIMAL:
            raise SolverError(
                f"FOP({np.round(weights.normalized, 6).tolist()}) ended {solution.status.value}",
                status=solution.status.value,
            )
        x = lift_map.project(solution.x)
        return ParetoSample(
            alpha=weights,
            x=x,
            f=problem.objective_values(x),
            kernel_report=solution.summary(),
            sigma=lift_map.collapse_multipliers(solution.multipliers),
            pi=solution.dual.pi,
        )

    def sweep_pareto(self, problem: ForwardProblem, grid_size: int, seed: int = 0, jobs: int = 1) -> List[ParetoSample]:
        """Solve FOP over a weight grid (K = 2), constant weights (K = 1) or Dirichlet draws (K >= 3)"""
        if grid_size < 2:
            raise ValueError("grid_size must be at least 2")
        k = problem.n_objectives
        if k == 1:
            alphas = [np.ones(1)] * grid_size
        elif k == 2:
            alphas = [np.array([a, 1.0 - a]) for a in np.linspace(0.0, 1.0, grid_size)]
        else:
            rng = np.random.default_rng(seed)
            alphas = list(rng.dirichlet(np.ones(k), size=grid_size))

        def run(alpha):
            try:
                return self.solve_fop(problem, alpha)
            except SolverError as e:
                n = problem.n_vars
                return ParetoSample(WeightVector(alpha), np.full(n, np.nan), np.full(k, np.nan),
                                    {"status": e.status}, error=str(e))

        self.log(f"sweeping {grid_size} weight vectors over {k} objectives")
        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                samples = list(pool.map(run, alphas))
        else:
            samples = [run(a) for a in alphas]
        failed = sum(not s.ok for s in samples)
        if failed:
            self.warn(f"⚠️ {failed} of {grid_size} sweep samples failed")
        return samples

    def membership(self, problem: ForwardProblem, x) -> MembershipReport:
        x = problem.point(x)
        slacks = problem.inequality_values(x) if problem.n_inequalities else np.zeros(0)
        eq_res = problem.equality_residual(x)
        violation = max(
            float(np.max(slacks, initial=-np.inf)) if slacks.size else 0.0,
            float(np.max(np.abs(eq_res), initial=0.0)),
            0.0,
        )
        verdict = Membership.FEASIBLE if violation <= MEMBERSHIP_TOL else Membership.INFEASIBLE
        return MembershipReport(verdict, slacks, eq_res, violation)

    def classical_inverse(self, problem: ForwardProblem, xhat) -> ClassicalResult:
        """Weights making xhat a KKT point of FOP(alpha), normalized to sum to one.

        Inequalities with |g_l(xhat)| above the activity tolerance get sigma_l = 0.
        """
        xhat = problem.point(xhat)
        K, L, m = problem.n_objectives, problem.n_inequalities, problem.n_equalities
        J = problem.objective_gradients(xhat).T
        Gd = problem.inequality_gradients(xhat).T if L else np.zeros((problem.n_vars, 0))
        g = problem.inequality_values(xhat) if L else np.zeros(0)

        eq_a = np.vstack([
            np.hstack([J, Gd, -problem.eq_a.T]),
            np.concatenate([np.ones(K), np.zeros(L + m)])[None, :],
        ])
        eq_b = np.concatenate([np.zeros(problem.n_vars), [1.0]])
        lower = np.concatenate([np.zeros(K + L), np.full(m, -np.inf)])
        upper = np.concatenate([np.full(K, np.inf), np.where(np.abs(g) > ACTIVE_TOL, 0.0, np.inf), np.full(m, np.inf)])
        lp = LinearProgram(np.zeros(K + L + m), eq_a=eq_a, eq_b=eq_b, lower=lower, upper=upper)
        solution = self.lp_solver.solve(lp)
        if not solution.optimal:
            self.log("only alpha = 0 satisfies the KKT system")
            return ClassicalResult(ClassicalVerdict.ONLY_ZERO)
        w = solution.x
        return ClassicalResult(ClassicalVerdict.FOUND, WeightVector(w[:K]), w[K:K + L], w[K + L:])

    def resolve_consistency(self, problem: ForwardProblem, alpha, x_star) -> float:
        """Relative gap between alpha'f(x_star) and the re-solved FOP(alpha) value"""
        weights = WeightVector.of(alpha)
        claimed = float(weights.raw @ problem.objective_values(x_star))
        resolved = float(weights.raw @ self.solve_fop(problem, weights).f)
        return abs(resolved - claimed) / (1.0 + abs(claimed))
