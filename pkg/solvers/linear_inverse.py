"""
Linear Inverse Solver
Linearized inverse model with a trust box, and successive linear programming on top of it
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import List, NamedTuple, Optional

import numpy as np
from scipy import optimize

from config import InverseOptions, SlpOptions
from models.certificate import KktResiduals
from models.errors import DimensionMismatch, InternalInconsistency, InvalidScheme, SolverError
from models.problem import ForwardProblem
from models.scaling import ScalingScheme, SchemeKind, relative_scheme
from solvers.base_solver import BaseSolver
from solvers.inverse import InverseResult, build_result, constraint_coefficients, deviations
from solvers.linprog import LinearProgram, LpSolution, LpSolver, LpStatus

FEASIBILITY_TOL = 1e-8
BINDING_TOL = 1e-9
RADIUS_FLOOR = 1e-3


@dataclass(frozen=True, eq=False)
class LiopInstance:
    """Inverse model with every function linearized at xtilde"""

    problem: ForwardProblem
    xhat: np.ndarray
    xtilde: np.ndarray
    scheme: ScalingScheme
    trust_kappa: Optional[float] = None

    def __post_init__(self):
        xhat = self.problem.point(self.xhat)
        xtilde = self.problem.point(self.xtilde)
        if self.scheme.size != self.problem.n_objectives:
            raise DimensionMismatch(f"scheme has {self.scheme.size} factors for "
                                    f"{self.problem.n_objectives} objectives")
        if self.trust_kappa is not None and not self.trust_kappa > 0:
            raise ValueError("trust_kappa must be positive")
        scheme = self.scheme
        if scheme.kind is SchemeKind.RELATIVE:
            scheme = relative_scheme(self.problem, xhat, scheme.reference)
        object.__setattr__(self, "xhat", xhat)
        object.__setattr__(self, "xtilde", xtilde)
        object.__setattr__(self, "scheme", scheme)

    @classmethod
    def at_xhat(cls, problem: ForwardProblem, xhat, scheme: ScalingScheme, trust_kappa=None) -> "LiopInstance":
        return cls(problem, xhat, xhat, scheme, trust_kappa)


class SlpTermination(str, Enum):
    STEP_NORM = "StepNorm"
    MAX_ITERATIONS = "MaxIterations"
    LP_FAILURE = "LpFailure"
    TRUST_RADIUS_COLLAPSE = "TrustRadiusCollapse"


class SlpIterate(NamedTuple):
    x: np.ndarray
    epsilon: float
    radius: float
    accepted: bool
    merit: float
    ratio: float


@dataclass(eq=False)
class SlpTrace:
    iterates: List[SlpIterate] = field(default_factory=list)
    termination: SlpTermination = SlpTermination.MAX_ITERATIONS
    final_result: Optional[InverseResult] = None
    options: dict = field(default_factory=dict)

    @property
    def iterations(self) -> int:
        return len(self.iterates)

    @property
    def accepted_merits(self) -> List[float]:
        return [it.merit for it in self.iterates if it.accepted]

    def to_dict(self) -> dict:
        return {
            "termination": self.termination.value,
            "iterations": self.iterations,
            "iterates": [
                {"x": it.x.tolist(), "epsilon": it.epsilon, "radius": it.radius,
                 "accepted": it.accepted, "merit": it.merit, "ratio": it.ratio}
                for it in self.iterates
            ],
            "options": self.options,
            "final_result": self.final_result.to_dict() if self.final_result is not None else None,
        }


class _LinearizedRows(NamedTuple):
    G: np.ndarray
    h: np.ndarray
    n_objective_rows: int


def _linearize(problem: ForwardProblem, scheme: ScalingScheme, f_hat: np.ndarray, x_lin: np.ndarray,
               inequality_rows=None) -> _LinearizedRows:
    """Rows over (x, eps): grad f_k'x - a_k eps <= grad f_k'x_lin - f_k(x_lin) + b_k, then linearized g"""
    a, b = constraint_coefficients(scheme, f_hat)
    Jf = problem.objective_gradients(x_lin)
    fk = problem.objective_values(x_lin)
    G = [np.hstack([Jf, -a[:, None]])]
    h = [Jf @ x_lin - fk + b]
    if problem.n_inequalities:
        rows = np.arange(problem.n_inequalities) if inequality_rows is None else inequality_rows
        Jg = problem.inequality_gradients(x_lin)[rows]
        gl = problem.inequality_values(x_lin)[rows]
        G.append(np.hstack([Jg, np.zeros((len(rows), 1))]))
        h.append(Jg @ x_lin - gl)
    return _LinearizedRows(np.vstack(G), np.concatenate(h), problem.n_objectives)


def _lp_residuals(lp: LinearProgram, solution: LpSolution) -> KktResiduals:
    x = solution.x
    slack = lp.ineq_g @ x - lp.ineq_h
    free = (x > lp.lower + BINDING_TOL) & (x < lp.upper - BINDING_TOL)
    scale = 1.0 + float(np.max(np.abs(lp.cost), initial=0.0))
    stationarity = float(np.max(np.abs(solution.reduced_costs[free]), initial=0.0)) / scale
    complementarity = float(np.max(np.abs(solution.dual_ineq * slack), initial=0.0))
    feasibility = max(float(np.max(slack, initial=0.0)),
                      float(np.max(np.abs(lp.eq_a @ x - lp.eq_b), initial=0.0)))
    return KktResiduals(stationarity, complementarity, max(feasibility, 0.0))


def iop_kkt_residual(problem: ForwardProblem, scheme: ScalingScheme, f_hat: np.ndarray, x,
                     activity_tol: float) -> KktResiduals:
    """Residual of the exact inverse KKT system at x with eps = max scaled deviation.

    Multipliers come from a nonnegative least-squares fit over the active rows.
    """
    x = problem.point(x)
    dev = deviations(scheme, f_hat, problem.objective_values(x))
    epsilon = float(np.nanmax(dev))
    a, _ = constraint_coefficients(scheme, f_hat)
    active_f = np.flatnonzero(np.abs(dev - epsilon) <= activity_tol * max(1.0, abs(epsilon)))
    g = problem.inequality_values(x) if problem.n_inequalities else np.zeros(0)
    active_g = np.flatnonzero(g >= -activity_tol)

    Jf = problem.objective_gradients(x)[active_f].T
    Jg = problem.inequality_gradients(x)[active_g].T if active_g.size else np.zeros((problem.n_vars, 0))
    A = problem.eq_a
    top = np.hstack([Jf, Jg, -A.T, A.T])
    bottom = np.concatenate([a[active_f], np.zeros(active_g.size + 2 * A.shape[0])])
    M = np.vstack([top, bottom[None, :]])
    rhs = np.concatenate([np.zeros(problem.n_vars), [1.0]])
    u, residual = optimize.nnls(M, rhs)
    scale = 1.0 + float(np.max(np.abs(M @ u), initial=0.0))
    feasibility = max(float(np.max(g, initial=0.0)),
                      float(np.max(np.abs(problem.equality_residual(x)), initial=0.0)))
    return KktResiduals(float(residual) / scale, 0.0, max(feasibility, 0.0))


class LinearInverseSolver(BaseSolver):
    """LIOP solves and trust-region SLP"""

    def __init__(self, lp_solver: Optional[LpSolver] = None, options: Optional[InverseOptions] = None):
        super().__init__("Linear Inverse")
        self.lp_solver = lp_solver or LpSolver()
        self.options = options or InverseOptions.from_env()

    # ------------------------------------------------------------------ LIOP

    def solve_liop(self, instance: LiopInstance) -> InverseResult:
        """minimize eps over the model linearized at xtilde; unbounded models get a default box"""
        problem, scheme = instance.problem, instance.scheme
        f_hat = problem.objective_values(instance.xhat)
        kappa = instance.trust_kappa
        notes = []
        lp, solution = self._solve_liop_lp(instance, kappa)
        if solution.status is LpStatus.UNBOUNDED and kappa is None:
            kappa = max(1.0, float(np.max(np.abs(instance.xhat))))
            self.warn(f"⚠️ linearized model unbounded; adding trust box kappa = {kappa:.4g} around xhat")
            notes.append(f"trust box inserted with kappa = {kappa:.6g}")
            lp, solution = self._solve_liop_lp(instance, kappa)
        if solution.status is LpStatus.INFEASIBLE:
            feasible = self._is_feasible(problem, instance.xtilde)
            if feasible:
                raise InternalInconsistency("linearized model infeasible at a feasible linearization point")
            raise SolverError("linearized model infeasible at an infeasible linearization point",
                              status="Infeasible")
        if not solution.optimal:
            raise SolverError(f"linearized model ended {solution.status.value}", status=solution.status.value)

        n, K = problem.n_vars, problem.n_objectives
        x_star = solution.x[:n]
        binding = kappa is not None and bool(
            np.any(np.abs(x_star - instance.xhat) >= kappa - BINDING_TOL * max(1.0, kappa)))
        result = build_result(
            "liop", problem, scheme, f_hat, solution.x[n], solution.dual_ineq[:K], x_star,
            solution.dual_ineq[K:], solution.dual_eq, _lp_residuals(lp, solution), self.options,
            multiplier_rule="simplex basis duals", trust_kappa=kappa, trust_binding=binding,
            iterations=solution.pivots, notes=tuple(notes),
        )
        self.log(f"✅ liop: eps* = {result.epsilon_star:.6g}, alpha = "
                 f"{np.round(result.alpha_normalized, 4).tolist()}")
        return result

    def _solve_liop_lp(self, instance: LiopInstance, kappa: Optional[float]):
        problem = instance.problem
        n = problem.n_vars
        rows = _linearize(problem, instance.scheme, problem.objective_values(instance.xhat), instance.xtilde)
        lower = np.full(n + 1, -np.inf)
        upper = np.full(n + 1, np.inf)
        if kappa is not None:
            lower[:n] = instance.xhat - kappa
            upper[:n] = instance.xhat + kappa
        lp = LinearProgram(
            cost=np.concatenate([np.zeros(n), [1.0]]),
            ineq_g=rows.G, ineq_h=rows.h,
            eq_a=np.hstack([problem.eq_a, np.zeros((problem.n_equalities, 1))]),
            eq_b=problem.eq_b,
            lower=lower, upper=upper,
        )
        return lp, self.lp_solver.solve(lp)

    @staticmethod
    def _is_feasible(problem: ForwardProblem, x) -> bool:
        g = problem.inequality_values(x) if problem.n_inequalities else np.zeros(0)
        eq = problem.equality_residual(x)
        return bool(np.all(g <= FEASIBILITY_TOL) and np.all(np.abs(eq) <= FEASIBILITY_TOL))

    # ------------------------------------------------------------------- SLP

    def merit(self, problem: ForwardProblem, scheme: ScalingScheme, f_hat: np.ndarray, x, rho: float) -> float:
        """max scaled deviation plus rho times the l1 constraint violation

        Under the relative scheme the deviation term is the ratio f_k(x)/f_k(xhat), so rho
        weighs violation against ratios of order one rather than against raw objective units.
        """
        dev = deviations(scheme, f_hat, problem.objective_values(x))
        violation = float(np.sum(np.abs(problem.equality_residual(x))))
        if problem.n_inequalities:
            violation += float(np.sum(np.maximum(problem.inequality_values(x), 0.0)))
        return float(np.max(dev)) + rho * violation

    def run_slp(self, problem: ForwardProblem, xhat, scheme: ScalingScheme,
                options: Optional[SlpOptions] = None) -> SlpTrace:
        """Iterate the linearized model from xhat with a trust box around the current iterate.

        A rejected step gets one second-order correction before the radius shrinks. StepNorm is
        reported only for a short accepted step strictly inside the trust box, or when the model
        predicts no further decrease; a radius that shrinks away without either ends TrustRadiusCollapse.
        """
        opts = options or SlpOptions.from_env()
        xhat = problem.point(xhat)
        if scheme.size != problem.n_objectives:
            raise DimensionMismatch(f"scheme has {scheme.size} factors for {problem.n_objectives} objectives")
        if scheme.has_zero:
            raise InvalidScheme("successive linear programming needs mu_k > 0 for every objective")
        if scheme.kind is SchemeKind.RELATIVE:
            scheme = relative_scheme(problem, xhat, scheme.reference)
        f_hat = problem.objective_values(xhat)

        trace = SlpTrace(options=opts.to_dict())
        x = xhat.copy()
        radius = opts.delta0_factor * max(1.0, float(np.max(np.abs(xhat))))
        radius_floor = RADIUS_FLOOR * opts.step_tol
        phi = self.merit(problem, scheme, f_hat, x, opts.rho)
        last = None
        n = problem.n_vars

        for iteration in range(opts.max_iterations):
            step_lp = self._slp_step(problem, scheme, f_hat, x, radius, opts.rho)
            if step_lp is None:
                self.warn(f"⚠️ SLP step LP failed at iteration {iteration}")
                trace.termination = SlpTermination.LP_FAILURE
                break
            lp, solution = step_lp
            predicted = phi - solution.objective
            candidate = solution.x
            x_new = candidate[:n]
            phi_new = self.merit(problem, scheme, f_hat, x_new, opts.rho)
            actual = phi - phi_new
            corrected = False
            if not (actual > 0 and actual >= opts.min_decrease) and predicted > opts.min_decrease:
                shift = self._curvature(problem, x, x_new)
                soc = self._slp_step(problem, scheme, f_hat, x, radius, opts.rho, shift=shift)
                if soc is not None:
                    x_soc = soc[1].x[:n]
                    phi_soc = self.merit(problem, scheme, f_hat, x_soc, opts.rho)
                    if phi - phi_soc > actual:
                        candidate, x_new, phi_new, actual, corrected = soc[1].x, x_soc, phi_soc, phi - phi_soc, True

            step = float(np.linalg.norm(x_new - x))
            ratio = actual / predicted if predicted > opts.min_decrease else 0.0
            accepted = ratio > 0 and actual >= opts.min_decrease
            box_active = bool(np.any(np.abs(x_new - x) >= radius * (1.0 - 1e-9)))
            trace.iterates.append(SlpIterate(x_new.copy(), float(candidate[n]), radius, accepted,
                                             phi_new if accepted else phi, float(ratio)))
            self.debug(f"iter {iteration}: step {step:.3e}, radius {radius:.3e}, ratio {ratio:.3f}, "
                       f"{'accepted' if accepted else 'rejected'}{' after correction' if corrected else ''}")
            last = (lp, solution, x.copy(), radius)
            if accepted:
                x, phi = x_new, phi_new
            if step < opts.step_tol and ((accepted and not box_active) or predicted <= opts.min_decrease):
                trace.termination = SlpTermination.STEP_NORM
                break
            if ratio < opts.eta1:
                radius *= opts.shrink
            elif ratio > opts.eta2 and box_active:
                radius *= opts.expand
            if radius < radius_floor:
                trace.termination = SlpTermination.TRUST_RADIUS_COLLAPSE
                self.warn(f"⚠️ SLP trust radius fell below {radius_floor:.1e} without a stationary step")
                break
        else:
            trace.termination = SlpTermination.MAX_ITERATIONS
            self.warn(f"⚠️ SLP hit {opts.max_iterations} iterations")

        if last is None:
            return trace
        lp, solution, x_lin, radius = last
        if not np.array_equal(x_lin, x):
            step_lp = self._slp_step(problem, scheme, f_hat, x, radius, opts.rho)
            if step_lp is None:
                trace.termination = SlpTermination.LP_FAILURE
                return trace
            lp, solution = step_lp
        trace.final_result = self._slp_result(problem, scheme, f_hat, x, radius, lp, solution, opts, trace)
        self.log(f"✅ slp: {trace.termination.value} after {trace.iterations} iterations, "
                 f"eps = {trace.final_result.epsilon_star:.6g}")
        return trace

    @staticmethod
    def _curvature(problem: ForwardProblem, x, x_new) -> np.ndarray:
        """Gap between each objective and inequality at x_new and its linearization at x"""
        d = x_new - x
        gap = problem.objective_values(x_new) - problem.objective_values(x) - problem.objective_gradients(x) @ d
        if problem.n_inequalities:
            gap_g = (problem.inequality_values(x_new) - problem.inequality_values(x)
                     - problem.inequality_gradients(x) @ d)
            gap = np.concatenate([gap, gap_g])
        return gap

    def _slp_step(self, problem: ForwardProblem, scheme: ScalingScheme, f_hat, x, radius: float, rho: float,
                  shift: Optional[np.ndarray] = None):
        """LP over (x, eps, elastic) with elastic slack only for currently violated rows"""
        n, K = problem.n_vars, problem.n_objectives
        g = problem.inequality_values(x) if problem.n_inequalities else np.zeros(0)
        eq_res = problem.equality_residual(x)
        violated = np.flatnonzero(g > 0)
        elastic_eq = np.flatnonzero(np.abs(eq_res) > 0)
        rows = _linearize(problem, scheme, f_hat, x)
        h = rows.h if shift is None else rows.h - shift
        n_e, n_q = violated.size, elastic_eq.size
        width = n + 1 + n_e + 2 * n_q

        G = np.zeros((rows.G.shape[0], width))
        G[:, : n + 1] = rows.G
        for j, row in enumerate(violated):
            G[K + row, n + 1 + j] = -1.0
        m = problem.n_equalities
        A = np.zeros((m, width))
        A[:, :n] = problem.eq_a
        for j, row in enumerate(elastic_eq):
            A[row, n + 1 + n_e + j] = 1.0
            A[row, n + 1 + n_e + n_q + j] = -1.0

        lower = np.concatenate([x - radius, [-np.inf], np.zeros(n_e + 2 * n_q)])
        upper = np.concatenate([x + radius, [np.inf], np.full(n_e + 2 * n_q, np.inf)])
        cost = np.concatenate([np.zeros(n), [1.0], np.full(n_e + 2 * n_q, rho)])
        lp = LinearProgram(cost, G, h, A, problem.eq_b, lower, upper)
        try:
            solution = self.lp_solver.solve(lp)
        except SolverError as e:
            self.warn(f"⚠️ {e}")
            return None
        if not solution.optimal:
            return None
        return lp, solution

    def _slp_result(self, problem, scheme, f_hat, x, radius, lp, solution, opts, trace) -> InverseResult:
        n, K, L = problem.n_vars, problem.n_objectives, problem.n_inequalities
        residuals = iop_kkt_residual(problem, scheme, f_hat, x, activity_tol=opts.step_tol)
        binding = bool(np.any(np.abs(solution.x[:n] - x) >= radius * (1.0 - 1e-9)))
        return build_result(
            "slp", problem, scheme, f_hat, solution.x[n], solution.dual_ineq[:K], x,
            solution.dual_ineq[K:K + L], solution.dual_eq[: problem.n_equalities], residuals, self.options,
            multiplier_rule="simplex basis duals of the final linearization", trust_kappa=radius,
            trust_binding=binding, iterations=trace.iterations,
            notes=(f"termination {trace.termination.value}",),
        )
