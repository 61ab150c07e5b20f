"""
KKT Residual Inverse
Weights that make xhat as close to a KKT point as a residual penalty allows
"""

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional

import numpy as np

from models.certificate import DualCertificate, KktResiduals
from models.errors import DimensionMismatch, InvalidScheme, SolverError
from models.functions import Linear, Quadratic
from models.problem import ForwardProblem, WeightVector
from models.scaling import ScalingScheme, SchemeKind, relative_scheme
from solvers.base_solver import BaseSolver
from solvers.convex_kernel import ConvexKernel, KernelStatus, SmoothProgram
from solvers.linear_inverse import LinearInverseSolver, LiopInstance
from solvers.linprog import LinearProgram, LpSolver


class Penalty(str, Enum):
    SUM_OF_SQUARES = "sos"
    L1 = "l1"
    GAP_LINEAR = "gaplinear"


class NormalizationKind(str, Enum):
    FIX_WEIGHT = "fix_weight"
    MU_WEIGHTED = "mu_weighted"
    L1_UNIT = "l1_unit"


@dataclass(frozen=True)
class Normalization:
    kind: NormalizationKind
    index: int = 0
    scheme: Optional[ScalingScheme] = None

    @classmethod
    def fix_weight(cls, index: int) -> "Normalization":
        """alpha_index = 1 (zero-based index)"""
        return cls(NormalizationKind.FIX_WEIGHT, index)

    @classmethod
    def mu_weighted(cls, scheme: ScalingScheme) -> "Normalization":
        return cls(NormalizationKind.MU_WEIGHTED, scheme.reference, scheme)

    @classmethod
    def l1_unit(cls) -> "Normalization":
        return cls(NormalizationKind.L1_UNIT)

    def row(self, problem: ForwardProblem, xhat: np.ndarray) -> np.ndarray:
        """Coefficients c with c'alpha = 1"""
        K = problem.n_objectives
        if self.kind is NormalizationKind.FIX_WEIGHT:
            if not 0 <= self.index < K:
                raise InvalidScheme(f"fixed weight index {self.index + 1} outside 1..{K}")
            return np.eye(K)[self.index]
        if self.kind is NormalizationKind.L1_UNIT:
            return np.ones(K)
        scheme = self.scheme
        if scheme.size != K:
            raise DimensionMismatch(f"scheme has {scheme.size} factors for {K} objectives")
        if scheme.kind is SchemeKind.RELATIVE:
            scheme = relative_scheme(problem, xhat, scheme.reference)
        return np.array(scheme.mu, dtype=float)

    def describe(self) -> str:
        if self.kind is NormalizationKind.FIX_WEIGHT:
            return f"fix_weight({self.index + 1})"
        if self.kind is NormalizationKind.MU_WEIGHTED:
            return f"mu_weighted({self.scheme.kind.value})"
        return "l1_unit"


@dataclass(frozen=True)
class KesConfig:
    """Residual penalty and weight normalization.

    stationarity_scale multiplies the stationarity residual before it is
    penalized; gap_as_l1 swaps the linear gap for |g|'sigma + |r|'|pi|.
    """

    penalty: Penalty = Penalty.SUM_OF_SQUARES
    normalization: Normalization = Normalization(NormalizationKind.FIX_WEIGHT, 0)
    include_eq_residuals: bool = True
    gap_as_l1: bool = False
    stationarity_scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "penalty", Penalty(self.penalty))
        if not self.stationarity_scale > 0:
            raise ValueError("stationarity_scale must be positive")

    def to_dict(self) -> dict:
        return {
            "penalty": self.penalty.value,
            "normalization": self.normalization.describe(),
            "include_eq_residuals": self.include_eq_residuals,
            "gap_as_l1": self.gap_as_l1,
            "stationarity_scale": self.stationarity_scale,
        }


@dataclass(frozen=True, eq=False)
class KesResiduals:
    delta: np.ndarray
    gamma: np.ndarray
    rho: np.ndarray
    penalty_value: float

    def is_zero(self, tol: float = 1e-10) -> bool:
        return all(float(np.max(np.abs(v), initial=0.0)) <= tol for v in (self.delta, self.gamma, self.rho))

    def to_dict(self) -> dict:
        return {
            "delta": self.delta.tolist(),
            "gamma": self.gamma.tolist(),
            "rho": self.rho.tolist(),
            "penalty_value": self.penalty_value,
        }


class KesResult(NamedTuple):
    weights: WeightVector
    residuals: KesResiduals
    dual: DualCertificate


class BridgeComparison(NamedTuple):
    kes_weights: WeightVector
    liop_weights: WeightVector
    distance: float


class _KesData(NamedTuple):
    """Residual maps at xhat: delta = s*B u, gamma = g*sigma, rho = r*pi with u = (alpha, sigma, pi)"""

    B: np.ndarray
    g: np.ndarray
    r: np.ndarray
    norm_row: np.ndarray
    K: int
    L: int
    m: int


class KesSolver(BaseSolver):
    """KES inverse model and its links to the linearized inverse model"""

    def __init__(
        self,
        kernel: Optional[ConvexKernel] = None,
        lp_solver: Optional[LpSolver] = None,
        linear_inverse: Optional[LinearInverseSolver] = None,
    ):
        super().__init__("KES")
        self.kernel = kernel or ConvexKernel()
        self.lp_solver = lp_solver or LpSolver()
        self.linear_inverse = linear_inverse or LinearInverseSolver(self.lp_solver)

    def _data(self, problem: ForwardProblem, xhat: np.ndarray, config: KesConfig) -> _KesData:
        K, L, m = problem.n_objectives, problem.n_inequalities, problem.n_equalities
        J = problem.objective_gradients(xhat).T
        Gd = problem.inequality_gradients(xhat).T if L else np.zeros((problem.n_vars, 0))
        B = config.stationarity_scale * np.hstack([J, Gd, -problem.eq_a.T])
        g = problem.inequality_values(xhat) if L else np.zeros(0)
        r = problem.equality_residual(xhat) if config.include_eq_residuals else np.zeros(m)
        return _KesData(B, g, r, config.normalization.row(problem, xhat), K, L, m)

    def solve_kes(self, problem: ForwardProblem, xhat, config: Optional[KesConfig] = None) -> KesResult:
        """Minimize the residual penalty over (alpha, sigma, pi) with the configured normalization"""
        config = config or KesConfig()
        xhat = problem.point(xhat)
        data = self._data(problem, xhat, config)
        if config.penalty is Penalty.SUM_OF_SQUARES:
            u = self._solve_sos(data)
        else:
            u = self._solve_lp(data, config)
        K, L = data.K, data.L
        alpha, sigma, pi = np.maximum(u[:K], 0.0), np.maximum(u[K:K + L], 0.0), u[K + L:]
        residuals = self._residuals(data, config, alpha, sigma, pi)
        weights = WeightVector(alpha)
        dual = DualCertificate(
            alpha, sigma, pi,
            KktResiduals(float(np.max(np.abs(residuals.delta), initial=0.0)),
                         float(np.max(np.abs(residuals.gamma), initial=0.0)),
                         float(np.max(np.abs(residuals.rho), initial=0.0))),
        )
        self.log(f"✅ kes[{config.penalty.value}, {config.normalization.describe()}]: alpha = "
                 f"{np.round(weights.normalized, 4).tolist()}, penalty {residuals.penalty_value:.3e}")
        return KesResult(weights, residuals, dual)

    def _solve_sos(self, data: _KesData) -> np.ndarray:
        K, L, m = data.K, data.L, data.m
        width = K + L + m
        Q = 2.0 * (data.B.T @ data.B + np.diag(np.concatenate([np.zeros(K), data.g ** 2, data.r ** 2])))
        nonneg = tuple(Linear(-np.eye(width)[i]) for i in range(K + L))
        norm = np.concatenate([data.norm_row, np.zeros(L + m)])[None, :]
        program = SmoothProgram(Quadratic(Q), nonneg, norm, np.ones(1))
        solution = self.kernel.solve(program)
        if solution.status is not KernelStatus.OPTIMAL:
            raise SolverError(f"KES least-squares model ended {solution.status.value}",
                              status=solution.status.value)
        return solution.x

    def _solve_lp(self, data: _KesData, config: KesConfig) -> np.ndarray:
        """Variables (alpha, sigma, pi+, pi-, delta+, delta-); delta columns only for the l1 penalty"""
        K, L, m, n = data.K, data.L, data.m, data.B.shape[0]
        l1 = config.penalty is Penalty.L1
        n_delta = n if l1 else 0
        width = K + L + 2 * m + 2 * n_delta
        B_alpha_sigma = data.B[:, : K + L]
        B_pi = data.B[:, K + L:]

        stationarity = np.hstack([B_alpha_sigma, B_pi, -B_pi])
        if l1:
            stationarity = np.hstack([stationarity, -np.eye(n), np.eye(n)])
        normalization = np.concatenate([data.norm_row, np.zeros(width - K)])
        eq_a = np.vstack([stationarity, normalization[None, :]])
        eq_b = np.concatenate([np.zeros(n), [1.0]])

        if l1 or config.gap_as_l1:
            sigma_cost = np.abs(data.g)
            pi_cost = np.concatenate([np.abs(data.r), np.abs(data.r)])
        else:
            sigma_cost = -data.g
            pi_cost = np.concatenate([data.r, -data.r])
        cost = np.concatenate([np.zeros(K), sigma_cost, pi_cost, np.ones(2 * n_delta)])
        lp = LinearProgram(cost, eq_a=eq_a, eq_b=eq_b, lower=np.zeros(width))
        solution = self.lp_solver.solve(lp)
        if not solution.optimal:
            raise SolverError(f"KES linear model ended {solution.status.value}", status=solution.status.value)
        z = solution.x
        pi = z[K + L:K + L + m] - z[K + L + m:K + L + 2 * m]
        return np.concatenate([z[: K + L], pi])

    @staticmethod
    def _residuals(data: _KesData, config: KesConfig, alpha, sigma, pi) -> KesResiduals:
        u = np.concatenate([alpha, sigma, pi])
        delta = data.B @ u
        gamma = data.g * sigma
        rho = data.r * pi
        if config.penalty is Penalty.SUM_OF_SQUARES:
            value = float(delta @ delta + gamma @ gamma + rho @ rho)
        elif config.penalty is Penalty.L1 or config.gap_as_l1:
            value = float(np.sum(np.abs(delta)) + np.sum(np.abs(gamma)) + np.sum(np.abs(rho)))
        else:
            value = float(-np.sum(gamma) + np.sum(rho))
        return KesResiduals(delta, gamma, rho, value)

    # --------------------------------------------------------------- bridges

    def kes_liop_bridge(self, problem: ForwardProblem, xhat, scheme: ScalingScheme) -> BridgeComparison:
        """KES with the linear gap and mu-weighted normalization against the linearized model's duals"""
        xhat = problem.point(xhat)
        config = KesConfig(Penalty.GAP_LINEAR, Normalization.mu_weighted(scheme))
        kes = self.solve_kes(problem, xhat, config)
        liop = self.linear_inverse.solve_liop(LiopInstance.at_xhat(problem, xhat, scheme))
        return self._compare(kes.weights, liop.alpha)

    def kes_as_degenerate_iop(self, problem: ForwardProblem, xhat, k_fix: int) -> BridgeComparison:
        """KES with alpha_k_fix = 1 against the linearized model with mu = e_k_fix (zero-based k_fix)"""
        xhat = problem.point(xhat)
        config = KesConfig(Penalty.GAP_LINEAR, Normalization.fix_weight(k_fix))
        kes = self.solve_kes(problem, xhat, config)
        scheme = ScalingScheme.unit(problem.n_objectives, k_fix)
        liop = self.linear_inverse.solve_liop(LiopInstance.at_xhat(problem, xhat, scheme))
        return self._compare(kes.weights, liop.alpha)

    def _compare(self, kes_weights: WeightVector, liop_weights: WeightVector) -> BridgeComparison:
        distance = float(np.max(np.abs(kes_weights.normalized - liop_weights.normalized)))
        if distance > 1e-6:
            self.warn(f"⚠️ KES and linearized-model weights differ by {distance:.2e}")
        else:
            self.debug(f"weights agree to {distance:.2e}")
        return BridgeComparison(kes_weights, liop_weights, distance)
