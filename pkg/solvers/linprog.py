"""
Linear Programming
Two-phase primal simplex with Bland's rule; duals read off the final basis
"""

from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from scipy import linalg

from config import LpOptions
from models.errors import DimensionMismatch, InputError, SolverError
from solvers.base_solver import BaseSolver


class LpStatus(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


def _matrix(values, cols: int, name: str) -> np.ndarray:
    if values is None:
        return np.zeros((0, cols))
    arr = np.array(values, dtype=float)
    if arr.size == 0:
        return np.zeros((0, cols))
    arr = arr.reshape(-1, cols) if arr.ndim == 1 else arr
    if arr.ndim != 2 or arr.shape[1] != cols:
        raise DimensionMismatch(f"{name} must have {cols} columns, got shape {arr.shape}")
    return arr


def _vector(values, length: int, fill: float, name: str) -> np.ndarray:
    if values is None:
        return np.full(length, fill)
    arr = np.array(values, dtype=float).reshape(-1)
    if arr.shape[0] != length:
        raise DimensionMismatch(f"{name} must have length {length}, got {arr.shape[0]}")
    return arr


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """minimize c'x s.t. Gx <= h, Ax = b, lower <= x <= upper (bounds default to free)"""

    cost: np.ndarray
    ineq_g: Optional[np.ndarray] = None
    ineq_h: Optional[np.ndarray] = None
    eq_a: Optional[np.ndarray] = None
    eq_b: Optional[np.ndarray] = None
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None

    def __post_init__(self):
        c = np.array(self.cost, dtype=float).reshape(-1)
        n = c.shape[0]
        G = _matrix(self.ineq_g, n, "ineq_g")
        h = _vector(self.ineq_h if G.shape[0] else None, G.shape[0], 0.0, "ineq_h")
        A = _matrix(self.eq_a, n, "eq_a")
        b = _vector(self.eq_b if A.shape[0] else None, A.shape[0], 0.0, "eq_b")
        lo = _vector(self.lower, n, -np.inf, "lower")
        hi = _vector(self.upper, n, np.inf, "upper")
        if np.any(lo > hi):
            raise InputError("every lower bound must not exceed its upper bound")
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)):
            raise InputError("bounds must not be NaN")
        for name, arr in (("cost", c), ("ineq_g", G), ("ineq_h", h), ("eq_a", A), ("eq_b", b)):
            if not np.all(np.isfinite(arr)):
                raise InputError(f"{name} must be finite")
            arr.setflags(write=False)
        lo.setflags(write=False)
        hi.setflags(write=False)
        for name, arr in (("cost", c), ("ineq_g", G), ("ineq_h", h), ("eq_a", A),
                          ("eq_b", b), ("lower", lo), ("upper", hi)):
            object.__setattr__(self, name, arr)

    @property
    def n_vars(self) -> int:
        return self.cost.shape[0]


@dataclass(frozen=True, eq=False)
class LpSolution:
    """dual_ineq >= 0 and dual_eq satisfy c + G'dual_ineq - A'dual_eq = reduced_costs"""

    x: np.ndarray
    dual_ineq: np.ndarray
    dual_eq: np.ndarray
    status: LpStatus
    objective: float
    reduced_costs: np.ndarray
    pivots: int = 0
    duality_gap: float = 0.0

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


def dual_objective(lp: LinearProgram, dual_ineq, dual_eq, reduced, tol: float = 1e-9) -> float:
    """-h'lam + b'pi plus bound terms; bound multipliers below tol count as zero"""
    value = -lp.ineq_h @ dual_ineq + lp.eq_b @ dual_eq
    at_lower = np.where(reduced > tol, reduced, 0.0)
    at_upper = np.where(reduced < -tol, -reduced, 0.0)
    with np.errstate(invalid="ignore"):
        value += np.sum(np.where(at_lower > 0, at_lower * lp.lower, 0.0))
        value -= np.sum(np.where(at_upper > 0, at_upper * lp.upper, 0.0))
    return float(value)


class _StandardForm:
    """min c'z s.t. Mz = r, z >= 0 with x = shift + T z[:N]"""

    def __init__(self, lp: LinearProgram):
        n = lp.n_vars
        shift = np.zeros(n)
        cols: List[Tuple[int, float]] = []
        bound_rows: List[Tuple[int, float]] = []
        for j in range(n):
            lo, hi = lp.lower[j], lp.upper[j]
            if np.isfinite(lo):
                shift[j] = lo
                cols.append((j, 1.0))
                if np.isfinite(hi):
                    bound_rows.append((len(cols) - 1, hi - lo))
            elif np.isfinite(hi):
                shift[j] = hi
                cols.append((j, -1.0))
            else:
                cols.append((j, 1.0))
                cols.append((j, -1.0))
        N = len(cols)
        T = np.zeros((n, N))
        for c_idx, (j, sign) in enumerate(cols):
            T[j, c_idx] = sign

        p, q, m = lp.ineq_g.shape[0], len(bound_rows), lp.eq_a.shape[0]
        S = p + q
        B = np.zeros((q, N))
        ub = np.zeros(q)
        for r, (c_idx, width) in enumerate(bound_rows):
            B[r, c_idx] = 1.0
            ub[r] = width
        Gi = np.vstack([lp.ineq_g @ T, B]) if S else np.zeros((0, N))
        hi_rhs = np.concatenate([lp.ineq_h - lp.ineq_g @ shift, ub])
        Ae = lp.eq_a @ T
        be = lp.eq_b - lp.eq_a @ shift

        M = np.zeros((S + m, N + S))
        M[:S, :N] = Gi
        M[:S, N:] = np.eye(S)
        M[S:, :N] = Ae
        rhs = np.concatenate([hi_rhs, be])
        sign = np.where(rhs < 0, -1.0, 1.0)

        self.M = M * sign[:, None]
        self.rhs = rhs * sign
        self.sign = sign
        self.cost = np.concatenate([T.T @ lp.cost, np.zeros(S)])
        self.T = T
        self.shift = shift
        self.n_struct = N
        self.n_slack = S
        self.p = p
        self.m = m

    def recover_x(self, z: np.ndarray) -> np.ndarray:
        return self.shift + self.T @ z[: self.n_struct]


class LpSolver(BaseSolver):
    """Deterministic two-phase simplex"""

    def __init__(self, options: Optional[LpOptions] = None):
        super().__init__("Linear Programming")
        self.options = options or LpOptions.from_env()

    def solve(self, lp: LinearProgram) -> LpSolution:
        sf = _StandardForm(lp)
        M, rhs = sf.M, sf.rhs
        rows, cols = M.shape
        n_total = cols

        basis = []
        artificial_cols = []
        for i in range(rows):
            if i < sf.n_slack and sf.sign[i] > 0:
                basis.append(sf.n_struct + i)
            else:
                artificial_cols.append(i)
                basis.append(n_total + len(artificial_cols) - 1)
        n_art = len(artificial_cols)
        if n_art:
            art = np.zeros((rows, n_art))
            for a, i in enumerate(artificial_cols):
                art[i, a] = 1.0
            M_full = np.hstack([M, art])
        else:
            M_full = M
        basis = np.array(basis, dtype=int)
        pivots = 0

        if n_art:
            phase_cost = np.concatenate([np.zeros(n_total), np.ones(n_art)])
            status, basis, pivots = self._simplex(M_full, rhs, phase_cost, basis, pivots)
            x_b = self._basic_values(M_full, rhs, basis)
            infeasibility = float(np.sum(x_b[basis >= n_total]))
            if infeasibility > self.options.infeasible_tol * max(1.0, float(np.max(np.abs(rhs), initial=0.0))):
                self.debug(f"phase one ended at {infeasibility:.3e}: infeasible")
                return self._empty(lp, LpStatus.INFEASIBLE, pivots)
            M_full, rhs, basis, kept = self._drive_out_artificials(M_full, rhs, basis, n_total)
            M_full = M_full[:, :n_total]
        else:
            kept = np.arange(rows)

        status, basis, pivots = self._simplex(M_full, rhs, sf.cost, basis, pivots)
        z = np.zeros(n_total)
        x_b = self._basic_values(M_full, rhs, basis)
        z[basis] = np.maximum(x_b, 0.0)
        x = sf.recover_x(z)
        if status is LpStatus.UNBOUNDED:
            self.debug("unbounded ray found")
            return self._empty(lp, LpStatus.UNBOUNDED, pivots, x)

        y = np.zeros(rows)
        if basis.size:
            y_kept = linalg.solve(M_full[:, basis].T, sf.cost[basis], check_finite=False)
            y[kept] = y_kept
        y = y * sf.sign
        lam = -y[: sf.p]
        if lam.size and lam.min() < -1e-7:
            self.warn(f"⚠️ negative inequality multiplier {lam.min():.2e} at optimum")
        lam = np.maximum(lam, 0.0)
        pi = y[sf.n_slack:]
        reduced = lp.cost + lp.ineq_g.T @ lam - lp.eq_a.T @ pi
        objective = float(lp.cost @ x)
        gap = abs(objective - dual_objective(lp, lam, pi, reduced))
        if gap > 1e-8 * (1.0 + abs(objective)):
            self.warn(f"⚠️ duality gap {gap:.2e} at optimum")
        self.debug(f"✅ optimal {objective:.10g} after {pivots} pivots")
        return LpSolution(x, lam, pi, LpStatus.OPTIMAL, objective, reduced, pivots, gap)

    # ---------------------------------------------------------------- internals

    def _empty(self, lp, status, pivots, x=None) -> LpSolution:
        n = lp.n_vars
        return LpSolution(
            np.full(n, np.nan) if x is None else x,
            np.zeros(lp.ineq_g.shape[0]),
            np.zeros(lp.eq_a.shape[0]),
            status,
            np.nan if status is LpStatus.INFEASIBLE else -np.inf,
            np.zeros(n),
            pivots,
            np.nan,
        )

    @staticmethod
    def _basic_values(M, rhs, basis) -> np.ndarray:
        if basis.size == 0:
            return np.zeros(0)
        return linalg.solve(M[:, basis], rhs, check_finite=False)

    def _simplex(self, M, rhs, cost, basis, pivots):
        """Bland's rule: lowest-index entering column, lowest-index leaving variable on ties"""
        tol = self.options.pivot_tol
        cols = M.shape[1]
        basis = basis.copy()
        if M.shape[0] == 0:
            return (LpStatus.UNBOUNDED if np.any(cost < -tol) else LpStatus.OPTIMAL), basis, pivots
        while True:
            if pivots >= self.options.max_pivots:
                raise SolverError(f"simplex exceeded {self.options.max_pivots} pivots", status="MaxIterations")
            lu = linalg.lu_factor(M[:, basis], check_finite=False)
            x_b = linalg.lu_solve(lu, rhs, check_finite=False)
            y = linalg.lu_solve(lu, cost[basis], trans=1, check_finite=False)
            reduced = cost - M.T @ y
            nonbasic = np.ones(cols, dtype=bool)
            nonbasic[basis] = False
            entering = np.flatnonzero(nonbasic & (reduced < -tol))
            if entering.size == 0:
                return LpStatus.OPTIMAL, basis, pivots
            j = int(entering[0])
            direction = linalg.lu_solve(lu, M[:, j], check_finite=False)
            positive = direction > tol
            if not np.any(positive):
                return LpStatus.UNBOUNDED, basis, pivots
            ratios = np.full(direction.shape, np.inf)
            ratios[positive] = np.maximum(x_b[positive], 0.0) / direction[positive]
            best = ratios.min()
            ties = np.flatnonzero(ratios <= best + 1e-12 * (1.0 + best))
            leave = int(ties[np.argmin(basis[ties])])
            basis[leave] = j
            pivots += 1

    def _drive_out_artificials(self, M, rhs, basis, n_real):
        """Pivot basic artificials out at zero level; drop rows that are redundant"""
        basis = basis.copy()
        keep = np.ones(M.shape[0], dtype=bool)
        for i in range(M.shape[0]):
            if basis[i] < n_real:
                continue
            lu = linalg.lu_factor(M[:, basis], check_finite=False)
            unit = np.zeros(M.shape[0])
            unit[i] = 1.0
            row = linalg.lu_solve(lu, unit, trans=1, check_finite=False) @ M[:, :n_real]
            candidates = [j for j in np.flatnonzero(np.abs(row) > 1e-9) if j not in set(basis.tolist())]
            if candidates:
                basis[i] = int(candidates[0])
            else:
                keep[i] = False
        kept = np.flatnonzero(keep)
        if not keep.all():
            self.debug(f"dropping {int((~keep).sum())} redundant equality rows")
        return M[keep], rhs[keep], basis[keep], kept
