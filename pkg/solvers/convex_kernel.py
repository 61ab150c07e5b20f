"""
Convex Kernel
Primal-dual interior point method for smooth convex programs with certified multipliers
"""

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from config import KernelOptions
from models.certificate import DualCertificate, KktResiduals
from models.errors import DimensionMismatch, InputError, ProgramInfeasible
from models.functions import HingeSquared, Linear, Quadratic, SmoothFunction, frozen_array, pad
from solvers.base_solver import BaseSolver


class KernelStatus(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    MAX_ITERATIONS = "MaxIterations"


@dataclass(frozen=True, eq=False)
class SmoothProgram:
    """minimize f0(x) s.t. g_l(x) <= 0, Ax = b with Linear/Quadratic pieces only"""

    objective: SmoothFunction
    inequalities: Tuple[SmoothFunction, ...] = ()
    eq_a: Optional[np.ndarray] = None
    eq_b: Optional[np.ndarray] = None

    def __post_init__(self):
        inequalities = tuple(self.inequalities)
        n = self.objective.n
        for f in (self.objective,) + inequalities:
            if isinstance(f, HingeSquared) or not isinstance(f, (Linear, Quadratic)):
                raise InputError("smooth programs take Linear or Quadratic pieces; lift hinge terms first")
            if f.n != n:
                raise DimensionMismatch(f"function of dimension {f.n} in a program of dimension {n}")
        eq_a = np.zeros((0, n)) if self.eq_a is None else np.array(self.eq_a, dtype=float).reshape(-1, n)
        eq_b = np.zeros(0) if self.eq_b is None or np.size(self.eq_b) == 0 else frozen_array(self.eq_b, 1, "eq_b")
        if eq_b.shape[0] != eq_a.shape[0]:
            raise DimensionMismatch("eq_a and eq_b disagree on the number of rows")
        eq_a.setflags(write=False)
        object.__setattr__(self, "inequalities", inequalities)
        object.__setattr__(self, "eq_a", eq_a)
        object.__setattr__(self, "eq_b", eq_b)

    @property
    def n_vars(self) -> int:
        return self.objective.n

    @property
    def n_inequalities(self) -> int:
        return len(self.inequalities)

    def inequality_values(self, x) -> np.ndarray:
        return np.array([g.value(x) for g in self.inequalities])

    def inequality_jacobian(self, x) -> np.ndarray:
        return np.array([g.gradient(x) for g in self.inequalities]).reshape(self.n_inequalities, self.n_vars)


@dataclass(frozen=True, eq=False)
class KernelSolution:
    x: np.ndarray
    dual: DualCertificate
    status: KernelStatus
    iterations: int
    barrier_gap: float
    objective: float
    absolute_residuals: Optional[KktResiduals] = None

    @property
    def multipliers(self) -> np.ndarray:
        """Inequality multipliers in program order"""
        return self.dual.sigma

    def summary(self) -> dict:
        report = {
            "status": self.status.value,
            "iterations": self.iterations,
            "barrier_gap": self.barrier_gap,
            "objective": self.objective,
            "kkt_residuals": self.dual.residuals.to_dict(),
        }
        if self.absolute_residuals is not None:
            report["kkt_residuals_absolute"] = self.absolute_residuals.to_dict()
        return report


class _Rows:
    """Inequalities in program order; linear rows stacked as Gx - h, quadratic rows kept individually"""

    def __init__(self, program: SmoothProgram):
        n = program.n_vars
        self.n, self.m = n, program.n_inequalities
        self.linear_idx = np.array([i for i, g in enumerate(program.inequalities) if isinstance(g, Linear)], dtype=int)
        self.quad_idx = np.array([i for i, g in enumerate(program.inequalities) if isinstance(g, Quadratic)], dtype=int)
        self.G = np.array([program.inequalities[i].c for i in self.linear_idx]).reshape(-1, n)
        self.h = -np.array([program.inequalities[i].d for i in self.linear_idx], dtype=float)
        self.quads = [program.inequalities[i] for i in self.quad_idx]

    def values(self, x) -> np.ndarray:
        g = np.empty(self.m)
        g[self.linear_idx] = self.G @ x - self.h
        for i, q in zip(self.quad_idx, self.quads):
            g[i] = q.value(x)
        return g

    def jacobian(self, x) -> np.ndarray:
        J = np.empty((self.m, self.n))
        J[self.linear_idx] = self.G
        for i, q in zip(self.quad_idx, self.quads):
            J[i] = q.gradient(x)
        return J

    def curvature(self, lam) -> np.ndarray:
        """sum_l lam_l * Hessian(g_l)"""
        H = np.zeros((self.n, self.n))
        for i, q in zip(self.quad_idx, self.quads):
            H += lam[i] * q.Q
        return H


@dataclass
class _Iterate:
    x: np.ndarray
    lam: np.ndarray
    pi: np.ndarray
    status: KernelStatus
    iterations: int
    gap: float


class ConvexKernel(BaseSolver):
    """Primal-dual interior point method with a boxed phase-one start and polished multipliers"""

    def __init__(self, options: Optional[KernelOptions] = None):
        super().__init__("Convex Kernel")
        self.options = options or KernelOptions.from_env()

    # ------------------------------------------------------------------ public

    def phase_one(self, program: SmoothProgram) -> np.ndarray:
        """Find x with g(x) <= -margin and Ax = b, or raise ProgramInfeasible.

        Solves minimize s s.t. g_l(x) - s <= 0, s >= -1, Ax = b inside the box
        |x - x0| <= R, stopping at the first iterate that is deep enough inside.
        """
        opts = self.options
        n = program.n_vars
        A, b = program.eq_a, program.eq_b
        x0 = linalg.lstsq(A, b)[0] if A.shape[0] else np.zeros(n)
        if program.n_inequalities == 0:
            return x0
        g0 = program.inequality_values(x0)
        if g0.max() <= -opts.phase_one_depth:
            return x0

        radius = opts.phase_one_radius * (1.0 + float(np.max(np.abs(x0), initial=0.0)))
        eye = np.eye(n)
        shifted = [pad(g, n + 1, extra_linear=[-1.0]) for g in program.inequalities]
        floor = Linear(np.concatenate([np.zeros(n), [-1.0]]), -1.0)
        box = [Linear(np.concatenate([sign * eye[i], [0.0]]), -sign * x0[i] - radius)
               for i in range(n) for sign in (1.0, -1.0)]
        aux = SmoothProgram(
            objective=Linear(np.concatenate([np.zeros(n), [1.0]])),
            inequalities=tuple(shifted) + (floor,) + tuple(box),
            eq_a=np.hstack([A, np.zeros((A.shape[0], 1))]),
            eq_b=b,
        )
        start = np.concatenate([x0, [max(float(g0.max()), -0.5) + 1.0]])

        def deep_enough(z):
            return program.inequality_values(z[:n]).max() <= -opts.phase_one_depth

        self.debug(f"phase one from max g = {g0.max():.3e}")
        final = self._primal_dual(aux, start, stop_early=deep_enough)
        x = final.x[:n]
        worst = float(program.inequality_values(x).max())
        if g0.max() < worst:
            x, worst = x0, float(g0.max())
        if worst <= -opts.phase_one_margin:
            return x
        if final.status is not KernelStatus.OPTIMAL:
            raise ProgramInfeasible(f"phase one ended {final.status.value} at max g = {worst:.3e}")
        if worst > opts.phase_one_infeasible:
            raise ProgramInfeasible(f"no strictly feasible point (phase-one minimum {worst:.3e})")
        self.warn(f"⚠️ thin interior: best strictly feasible point has max g = {worst:.3e}")
        return x

    def solve(self, program: SmoothProgram, x0: Optional[Sequence[float]] = None) -> KernelSolution:
        """Minimize the program; x0, when given, must be strictly feasible"""
        n = program.n_vars
        try:
            start = self.phase_one(program) if x0 is None else np.asarray(x0, dtype=float)
        except ProgramInfeasible as e:
            self.log(f"infeasible: {e}")
            unknown = KktResiduals(np.inf, np.inf, np.inf)
            empty = DualCertificate(np.zeros(0), np.zeros(program.n_inequalities),
                                    np.zeros(program.eq_a.shape[0]), unknown)
            return KernelSolution(np.full(n, np.nan), empty, KernelStatus.INFEASIBLE, 0, np.inf, np.nan, unknown)
        if program.n_inequalities and np.max(program.inequality_values(start)) >= 0:
            raise InputError("x0 must satisfy every inequality strictly")

        final = self._primal_dual(program, start)
        dual, absolute = self._certificate(program, final.x, final.lam, final.pi)
        status = final.status
        if status is KernelStatus.MAX_ITERATIONS and dual.residuals.within(self.options.tol):
            status = KernelStatus.OPTIMAL
        elif status is KernelStatus.OPTIMAL and not dual.residuals.within(self.options.tol):
            status = KernelStatus.MAX_ITERATIONS
        if status is not KernelStatus.OPTIMAL and program.n_inequalities == 0 \
                and isinstance(program.objective, Linear):
            # a linear objective with no inequalities is bounded only when it is constant on Ax = b
            status = KernelStatus.UNBOUNDED
        solution = KernelSolution(final.x, dual, status, final.iterations, final.gap,
                                  float(program.objective.value(final.x)), absolute)
        if status is KernelStatus.OPTIMAL:
            self.debug(f"✅ optimal after {final.iterations} Newton steps, residual {dual.residuals.worst():.2e}")
        else:
            self.warn(f"⚠️ {status.value} after {final.iterations} Newton steps "
                      f"(residual {dual.residuals.worst():.2e})")
        return solution

    # ---------------------------------------------------------------- internals

    def _primal_dual(
        self,
        program: SmoothProgram,
        x: np.ndarray,
        stop_early: Optional[Callable[[np.ndarray], bool]] = None,
    ) -> _Iterate:
        """Newton steps on the perturbed KKT system, with t = mu * m / (surrogate gap) each step"""
        opts = self.options
        rows = _Rows(program)
        A, b = program.eq_a, program.eq_b
        f0 = program.objective
        H0 = f0.hessian()
        m = rows.m
        x = np.array(x, dtype=float)
        lam = 1.0 / (opts.t0 * -rows.values(x))
        pi = self._equality_multipliers(A, f0.gradient(x) + rows.jacobian(x).T @ lam)
        gap = float(-rows.values(x) @ lam)

        for iteration in range(opts.max_newton + 1):
            g, J, grad0 = rows.values(x), rows.jacobian(x), f0.gradient(x)
            gap = float(-g @ lam)
            if self._residuals(program, x, g, J, grad0, lam, pi).within(opts.tol):
                return _Iterate(x, lam, pi, KernelStatus.OPTIMAL, iteration, gap)
            if stop_early is not None and stop_early(x):
                return _Iterate(x, lam, pi, KernelStatus.OPTIMAL, iteration, gap)
            if f0.value(x) < opts.unbounded_threshold:
                return _Iterate(x, lam, pi, KernelStatus.UNBOUNDED, iteration, gap)
            if iteration == opts.max_newton:
                break

            s = -g
            t = opts.mu * m / gap if m else 1.0
            hess = H0 + rows.curvature(lam) + J.T @ (J * (lam / s)[:, None])
            rhs = -grad0 + A.T @ pi - J.T @ (1.0 / (t * s))
            dx, dnu = self._newton_step(hess, rhs, A, A @ x - b)
            if not (np.all(np.isfinite(dx)) and np.all(np.isfinite(dnu))):
                self.debug(f"non-finite Newton step at gap {gap:.2e}")
                break
            dlam = (lam / s) * (J @ dx) - lam + 1.0 / (t * s)
            step = self._step_length(program, rows, x, lam, pi, dx, dlam, dnu, t)
            if step is None:
                self.debug(f"line search stalled at gap {gap:.2e}")
                return _Iterate(x, lam, pi, KernelStatus.MAX_ITERATIONS, iteration, gap)
            x = x + step * dx
            lam = lam + step * dlam
            pi = pi - step * dnu
        return _Iterate(x, lam, pi, KernelStatus.MAX_ITERATIONS, opts.max_newton, gap)

    @staticmethod
    def _newton_step(hess: np.ndarray, rhs: np.ndarray, A: np.ndarray, r_pri: np.ndarray):
        n = hess.shape[0]
        p = A.shape[0]
        if p:
            kkt = np.block([[hess, A.T], [A, np.zeros((p, p))]])
            full = np.concatenate([rhs, -r_pri])
        else:
            kkt, full = hess, rhs
        try:
            sol = linalg.solve(kkt, full, assume_a="sym", check_finite=False)
            if not np.all(np.isfinite(sol)):
                raise linalg.LinAlgError("non-finite Newton step")
        except (linalg.LinAlgError, ValueError):
            sol = linalg.lstsq(kkt, full, check_finite=False)[0]
        return sol[:n], sol[n:]

    def _step_length(self, program, rows: _Rows, x, lam, pi, dx, dlam, dnu, t: float) -> Optional[float]:
        """Fraction to the boundary on lam, backtrack into g < 0, then Armijo on the residual norm"""
        opts = self.options
        step = 1.0
        shrinking = dlam < 0
        if np.any(shrinking):
            step = min(1.0, opts.boundary_fraction * float(np.min(-lam[shrinking] / dlam[shrinking])))
        for _ in range(opts.max_backtracks):
            if np.all(rows.values(x + step * dx) < 0):
                break
            step *= opts.armijo_beta
        else:
            return None
        base = self._residual_norm(program, rows, x, lam, pi, t)
        for _ in range(opts.max_backtracks):
            trial = self._residual_norm(program, rows, x + step * dx, lam + step * dlam, pi - step * dnu, t)
            if trial <= (1.0 - opts.armijo_alpha * step) * base:
                return step
            step *= opts.armijo_beta
        return None

    @staticmethod
    def _residual_norm(program, rows: _Rows, x, lam, pi, t: float) -> float:
        A, b = program.eq_a, program.eq_b
        g = rows.values(x)
        r_dual = program.objective.gradient(x) + rows.jacobian(x).T @ lam - A.T @ pi
        r_cent = -lam * g - 1.0 / t
        return float(np.linalg.norm(np.concatenate([r_dual, r_cent, A @ x - b])))

    def _certificate(self, program: SmoothProgram, x: np.ndarray, lam: np.ndarray,
                     pi: np.ndarray) -> Tuple[DualCertificate, KktResiduals]:
        """Interior multipliers, sharpened by a least-squares solve on the active set when that is closer to KKT"""
        A = program.eq_a
        grad0 = program.objective.gradient(x)
        g = program.inequality_values(x) if program.n_inequalities else np.zeros(0)
        J = program.inequality_jacobian(x) if program.n_inequalities else np.zeros((0, x.shape[0]))
        slack = np.maximum(-g, 1e-300)

        candidates = [(lam, pi)]
        active = lam > slack
        if A.shape[0] or np.any(active):
            M = np.hstack([J[active].T, -A.T])
            u = linalg.lstsq(M, -grad0, check_finite=False)[0]
            lam_active = u[: int(active.sum())]
            if np.all(lam_active >= -1e-12):
                sharpened = np.zeros_like(lam)
                sharpened[active] = np.maximum(lam_active, 0.0)
                candidates.append((sharpened, u[int(active.sum()):]))

        best = None
        for lam_c, pi_c in candidates:
            residuals = self._residuals(program, x, g, J, grad0, lam_c, pi_c)
            if best is None or residuals.worst() <= best[2].worst():
                best = (lam_c, pi_c, residuals)
        lam, pi, residuals = best
        absolute = self._residuals(program, x, g, J, grad0, lam, pi, scaled=False)
        return DualCertificate(np.zeros(0), lam, pi, residuals), absolute

    @staticmethod
    def _equality_multipliers(A: np.ndarray, partial: np.ndarray) -> np.ndarray:
        if A.shape[0] == 0:
            return np.zeros(0)
        return linalg.lstsq(A.T, partial, check_finite=False)[0]

    @staticmethod
    def _residuals(program, x, g, J, grad0, lam, pi, scaled: bool = True) -> KktResiduals:
        A, b = program.eq_a, program.eq_b
        combined = grad0 + J.T @ lam - A.T @ pi
        stationarity = float(np.max(np.abs(combined), initial=0.0))
        complementarity = float(np.max(np.abs(lam * g), initial=0.0))
        infeasible = float(np.max(np.maximum(g, 0.0), initial=0.0))
        eq_res = float(np.max(np.abs(A @ x - b), initial=0.0))
        if scaled:
            stationarity /= 1.0 + max(
                float(np.max(np.abs(grad0), initial=0.0)),
                float(np.max(np.abs(J.T @ lam), initial=0.0)),
            )
            eq_res /= 1.0 + float(np.max(np.abs(b), initial=0.0))
        if np.any(lam < 0):
            stationarity = max(stationarity, float(-lam.min()))
        return KktResiduals(stationarity, complementarity, max(infeasible, eq_res))
