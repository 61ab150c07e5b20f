"""
Inverse Solver
Trade-off preserving inverse models (general, relative, absolute) and duality gaps
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from config import InverseOptions
from models.certificate import DualCertificate, KktResiduals
from models.errors import DimensionMismatch, InfeasibleInput, NonPositiveObjective, SolverError
from models.functions import Linear, Quadratic, pad
from models.problem import ForwardProblem, WeightVector, epigraph_reformulate
from models.scaling import ScalingScheme, SchemeKind, relative_scheme
from solvers.base_solver import BaseSolver
from solvers.convex_kernel import ConvexKernel, KernelStatus, SmoothProgram
from solvers.forward import ForwardSolver


class Verdict(str, Enum):
    PERFECT = "Perfect"
    PARTIAL = "PartialWithZeroWeights"
    NOT_PRESERVED = "NotPreserved"


@dataclass(frozen=True, eq=False)
class InverseResult:
    """Outcome of an inverse model.

    epsilon_star is a ratio for the relative scheme (1 at Pareto inputs) and a
    mu-scaled difference otherwise. alpha.raw satisfies sum(mu * alpha) = 1.
    ratios holds the per-objective deviation in the same units as epsilon_star.
    """

    model: str
    scheme: ScalingScheme
    epsilon_star: float
    alpha: WeightVector
    x_star: np.ndarray
    dual: DualCertificate
    f_xhat: np.ndarray
    f_xstar: np.ndarray
    ratios: np.ndarray
    ratio_variance: float
    tight: np.ndarray
    verdict: Verdict
    degenerate: np.ndarray
    objective_names: Tuple[str, ...] = ()
    multiplier_rule: str = "min-norm least squares on the active set"
    trust_kappa: Optional[float] = None
    trust_binding: bool = False
    iterations: int = 0
    notes: Tuple[str, ...] = field(default_factory=tuple)

    @property
    def alpha_normalized(self) -> np.ndarray:
        return self.alpha.normalized

    @property
    def objective_ratios(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.f_xstar / self.f_xhat

    @property
    def has_degeneracy(self) -> bool:
        return bool(np.any(self.degenerate))

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "scheme": self.scheme.to_dict(),
            "epsilon_star": self.epsilon_star,
            "alpha_raw": self.alpha.raw.tolist(),
            "alpha": self.alpha_normalized.tolist(),
            "x_star": self.x_star.tolist(),
            "f_xhat": self.f_xhat.tolist(),
            "f_xstar": self.f_xstar.tolist(),
            "ratios": self.ratios.tolist(),
            "ratio_variance": self.ratio_variance,
            "tight": self.tight.tolist(),
            "verdict": self.verdict.value,
            "degenerate": self.degenerate.tolist(),
            "multiplier_rule": self.multiplier_rule,
            "trust_kappa": self.trust_kappa,
            "trust_binding": self.trust_binding,
            "iterations": self.iterations,
            "dual": self.dual.to_dict(),
            "notes": list(self.notes),
        }


def constraint_coefficients(scheme: ScalingScheme, f_hat: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Objective rows read f_k(x) - a_k * eps - b_k <= 0"""
    if scheme.kind is SchemeKind.RELATIVE:
        return np.array(f_hat, dtype=float), np.zeros_like(f_hat)
    return np.array(scheme.mu, dtype=float), np.array(f_hat, dtype=float)


def raw_weights(scheme: ScalingScheme, f_hat: np.ndarray, multipliers: np.ndarray) -> np.ndarray:
    """Rescale epigraph multipliers so that sum(mu * alpha) = 1"""
    if scheme.kind is SchemeKind.RELATIVE:
        return multipliers * f_hat[scheme.reference]
    return multipliers


def deviations(scheme: ScalingScheme, f_hat: np.ndarray, f_star: np.ndarray) -> np.ndarray:
    if scheme.kind is SchemeKind.RELATIVE:
        return f_star / f_hat
    mu = scheme.mu
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(mu > 0, (f_star - f_hat) / np.where(mu > 0, mu, 1.0), np.nan)


def build_result(
    model: str,
    problem: ForwardProblem,
    scheme: ScalingScheme,
    f_hat: np.ndarray,
    epsilon: float,
    multipliers: np.ndarray,
    x_star: np.ndarray,
    sigma: np.ndarray,
    pi: np.ndarray,
    residuals: KktResiduals,
    options: InverseOptions,
    **extra,
) -> InverseResult:
    """Read trade-off verdicts off an (eps, multipliers, x*) triple"""
    f_star = problem.objective_values(x_star)
    a, b = constraint_coefficients(scheme, f_hat)
    rhs = a * epsilon + b
    slack = rhs - f_star
    tight = slack <= options.tight_tol * np.maximum(1.0, np.abs(rhs))
    alpha = WeightVector(np.maximum(raw_weights(scheme, f_hat, multipliers), 0.0))
    weights = alpha.normalized if alpha.is_valid else np.zeros(alpha.size)
    dev = deviations(scheme, f_hat, f_star)
    zero_weight = weights <= options.weight_tol
    near = np.abs(dev - epsilon) <= options.degeneracy_tol * max(1.0, abs(epsilon))
    degenerate = zero_weight & near
    if np.all(tight):
        verdict = Verdict.PERFECT
    elif np.all(zero_weight[~tight]):
        verdict = Verdict.PARTIAL
    else:
        verdict = Verdict.NOT_PRESERVED
    finite = dev[np.isfinite(dev)]
    variance = float(np.var(finite)) if finite.size else 0.0
    dual = DualCertificate(alpha.raw, np.asarray(sigma, dtype=float), np.asarray(pi, dtype=float), residuals)
    return InverseResult(
        model=model,
        scheme=scheme,
        epsilon_star=float(epsilon),
        alpha=alpha,
        x_star=np.asarray(x_star, dtype=float),
        dual=dual,
        f_xhat=np.asarray(f_hat, dtype=float),
        f_xstar=f_star,
        ratios=dev,
        ratio_variance=variance,
        tight=tight,
        verdict=verdict,
        degenerate=degenerate,
        objective_names=problem.objective_names,
        **extra,
    )


def _shift(f, delta: float):
    if isinstance(f, Quadratic):
        return Quadratic(f.Q, f.q, f.d + delta)
    return Linear(f.c, f.d + delta)


class InverseSolver(BaseSolver):
    """Exact inverse models solved with the convex kernel"""

    def __init__(
        self,
        kernel: Optional[ConvexKernel] = None,
        forward: Optional[ForwardSolver] = None,
        options: Optional[InverseOptions] = None,
    ):
        super().__init__("Inverse")
        self.kernel = kernel or ConvexKernel()
        self.forward = forward or ForwardSolver(self.kernel)
        self.options = options or InverseOptions.from_env()

    def solve_iop(self, problem: ForwardProblem, xhat, scheme: ScalingScheme) -> InverseResult:
        """minimize eps s.t. mu_k eps >= f_k(x) - f_k(xhat) (eps f_k(xhat) >= f_k(x) when relative)"""
        xhat = problem.point(xhat)
        if scheme.size != problem.n_objectives:
            raise DimensionMismatch(f"scheme has {scheme.size} factors for {problem.n_objectives} objectives")
        if scheme.kind is SchemeKind.RELATIVE:
            scheme = relative_scheme(problem, xhat, scheme.reference)
        f_hat = problem.objective_values(xhat)
        a, b = constraint_coefficients(scheme, f_hat)
        K = problem.n_objectives

        lifted, lift_map = epigraph_reformulate(problem)
        N = lift_map.n_lifted
        rows = [_shift(pad(lifted.objectives[k], N + 1, extra_linear=[-a[k]]), -b[k]) for k in range(K)]
        rows += [pad(g, N + 1) for g in lifted.inequalities]
        program = SmoothProgram(
            objective=Linear(np.concatenate([np.zeros(N), [1.0]])),
            inequalities=tuple(rows),
            eq_a=np.hstack([lifted.eq_a, np.zeros((lifted.n_equalities, 1))]),
            eq_b=lifted.eq_b,
        )
        if scheme.has_zero:
            self.warn("⚠️ some mu_k = 0: those objectives become hard bounds f_k(x) <= f_k(xhat)")
        solution = self.kernel.solve(program)
        if solution.status is not KernelStatus.OPTIMAL:
            raise SolverError(f"inverse model ended {solution.status.value}", status=solution.status.value)

        lam = solution.multipliers
        x_star = lift_map.project(solution.x[:N])
        model = {SchemeKind.RELATIVE: "iop_r", SchemeKind.ABSOLUTE: "iop_a"}.get(scheme.kind, "iop")
        result = build_result(
            model, problem, scheme, f_hat, solution.x[-1], lam[:K], x_star,
            lift_map.collapse_multipliers(lam[K:]), solution.dual.pi, solution.dual.residuals,
            self.options, iterations=solution.iterations,
            notes=("xhat regularity is not checked",),
        )
        self.log(f"✅ {model}: eps* = {result.epsilon_star:.6g}, alpha = "
                 f"{np.round(result.alpha_normalized, 4).tolist()}, verdict {result.verdict.value}")
        if result.has_degeneracy:
            self.warn(f"⚠️ degenerate objectives (tight with zero weight): "
                      f"{[problem.objective_names[k] for k in np.flatnonzero(result.degenerate)]}")
        return result

    def solve_iop_relative(self, problem: ForwardProblem, xhat, reference: int = 0) -> InverseResult:
        return self.solve_iop(problem, xhat, relative_scheme(problem, xhat, reference))

    def solve_iop_absolute(self, problem: ForwardProblem, xhat) -> InverseResult:
        return self.solve_iop(problem, xhat, ScalingScheme.absolute(problem.n_objectives))

    # ------------------------------------------------------------------- gaps

    def _feasible_xhat(self, problem: ForwardProblem, xhat) -> np.ndarray:
        report = self.forward.membership(problem, xhat)
        if not report.feasible:
            raise InfeasibleInput(f"duality gaps need a feasible xhat (violation {report.max_violation:.3e})")
        return problem.point(xhat)

    def relative_gap(self, problem: ForwardProblem, xhat, alpha) -> float:
        """alpha'f(x(alpha)) / alpha'f(xhat), at most one for feasible xhat"""
        xhat = self._feasible_xhat(problem, xhat)
        weights = WeightVector.of(alpha)
        denominator = float(weights.normalized @ problem.objective_values(xhat))
        if denominator <= 0:
            raise NonPositiveObjective("alpha'f(xhat) must be positive for the relative gap")
        sample = self.forward.solve_fop(problem, weights)
        return float(weights.normalized @ sample.f) / denominator

    def relative_gap_ratio(self, problem: ForwardProblem, xhat, alpha) -> float:
        """alpha'f(xhat) / alpha'f(x(alpha)); its minimum over alpha is 1/eps*"""
        return 1.0 / self.relative_gap(problem, xhat, alpha)

    def absolute_gap(self, problem: ForwardProblem, xhat, alpha) -> float:
        """alpha'f(xhat) - alpha'f(x(alpha)) with alpha on the unit simplex"""
        xhat = self._feasible_xhat(problem, xhat)
        weights = WeightVector.of(alpha)
        sample = self.forward.solve_fop(problem, weights)
        return float(weights.normalized @ (problem.objective_values(xhat) - sample.f))

    def gap_extremum(self, problem: ForwardProblem, xhat, kind: str = "relative", grid_size: int = 1001,
                     jobs: int = 1) -> Tuple[np.ndarray, float]:
        """Best gap over a weight grid: max of the relative gap or min of the absolute gap"""
        xhat = self._feasible_xhat(problem, xhat)
        f_hat = problem.objective_values(xhat)
        samples = [s for s in self.forward.sweep_pareto(problem, grid_size, jobs=jobs) if s.ok]
        alphas = np.array([s.alpha.normalized for s in samples])
        f_values = np.array([s.f for s in samples])
        if kind == "relative":
            values = np.sum(alphas * f_values, axis=1) / (alphas @ f_hat)
            best = int(np.argmax(values))
        elif kind == "absolute":
            values = alphas @ f_hat - np.sum(alphas * f_values, axis=1)
            best = int(np.argmin(values))
        else:
            raise ValueError(f"unknown gap kind {kind!r}")
        return alphas[best], float(values[best])
