"""Shared fixtures: the worked two-objective problem, its named points, solvers and a boundary oracle"""

import numpy as np
import pytest
from scipy import optimize

from solvers.convex_kernel import ConvexKernel
from solvers.forward import ForwardSolver
from solvers.inverse import InverseSolver
from solvers.kes import KesSolver
from solvers.linear_inverse import LinearInverseSolver
from solvers.linprog import LpSolver
from workbench.instances import EXAMPLE1_POINTS, builtin_example1, random_quadratic_case

SEEDS = list(range(20))


@pytest.fixture(scope="session")
def example1():
    return builtin_example1()


@pytest.fixture(scope="session")
def points():
    return {label: p.copy() for label, p in EXAMPLE1_POINTS.items()}


@pytest.fixture(scope="session")
def kernel():
    return ConvexKernel()


@pytest.fixture(scope="session")
def lp_solver():
    return LpSolver()


@pytest.fixture(scope="session")
def forward(kernel, lp_solver):
    return ForwardSolver(kernel, lp_solver)


@pytest.fixture(scope="session")
def inverse(kernel, forward):
    return InverseSolver(kernel, forward)


@pytest.fixture(scope="session")
def linear_inverse(lp_solver):
    return LinearInverseSolver(lp_solver)


@pytest.fixture(scope="session")
def kes(kernel, lp_solver, linear_inverse):
    return KesSolver(kernel, lp_solver, linear_inverse)


@pytest.fixture(scope="session")
def quadratic_cases():
    return [random_quadratic_case(seed) for seed in SEEDS]


def _disk_values(problem, center, radius, theta):
    """Objective values along the boundary circle, one row per angle"""
    X = center[None, :] + radius * np.column_stack([np.cos(theta), np.sin(theta)])
    return np.column_stack([0.5 * np.sum((X @ f.Q) * X, axis=1) + X @ f.q + f.d for f in problem.objectives])


@pytest.fixture(scope="session")
def disk_oracle():
    """min over the boundary of a disk of max_k score_k(f(x)).

    Both objectives of the disk instances are minimized outside the disk, so
    the minimax sits on the boundary. A polar grid with step 1e-3 is refined
    with a bounded scalar search around the best angle.
    """

    def oracle(problem, xhat, kind="relative", center=(2.0, 2.0), radius=1.0):
        center = np.asarray(center, dtype=float)
        f_hat = problem.objective_values(xhat)
        if kind == "relative":
            def score(theta):
                return np.max(_disk_values(problem, center, radius, np.atleast_1d(theta)) / f_hat, axis=1)
        else:
            def score(theta):
                return np.max(_disk_values(problem, center, radius, np.atleast_1d(theta)) - f_hat, axis=1)

        grid = np.arange(0.0, 2.0 * np.pi, 1e-3)
        best = grid[int(np.argmin(score(grid)))]
        refined = optimize.minimize_scalar(lambda t: float(score(t)[0]), bounds=(best - 2e-3, best + 2e-3),
                                           method="bounded", options={"xatol": 1e-12})
        return float(min(refined.fun, score(best)[0]))

    return oracle
