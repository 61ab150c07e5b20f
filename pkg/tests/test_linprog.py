import numpy as np
import pytest
from scipy import optimize

from models.errors import InputError
from solvers.linprog import LinearProgram, LpSolver, LpStatus, dual_objective


def random_bounded_lp(seed):
    """Up to 4 variables and 8 rows, feasible at the origin, boxed so it cannot run off"""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 5))
    p = int(rng.integers(1, 9))
    G = rng.normal(size=(p, n))
    h = rng.uniform(0.5, 2.0, size=p)
    c = rng.normal(size=n)
    return LinearProgram(c, G, h, lower=np.full(n, -5.0), upper=np.full(n, 5.0))


@pytest.mark.parametrize("seed", range(100))
def test_matches_reference_solver(lp_solver, seed):
    lp = random_bounded_lp(seed)
    ours = lp_solver.solve(lp)
    ref = optimize.linprog(lp.cost, A_ub=lp.ineq_g, b_ub=lp.ineq_h,
                           bounds=list(zip(lp.lower, lp.upper)), method="highs")
    assert ours.status is LpStatus.OPTIMAL
    assert ours.objective == pytest.approx(ref.fun, abs=1e-7)
    assert np.all(lp.ineq_g @ ours.x <= lp.ineq_h + 1e-9)
    assert np.all(ours.dual_ineq >= 0)
    assert ours.duality_gap <= 1e-8 * (1.0 + abs(ours.objective))


def test_equality_constrained_duals(lp_solver):
    # min x1 + 2 x2 s.t. x1 + x2 = 1, x >= 0
    lp = LinearProgram([1.0, 2.0], eq_a=[[1.0, 1.0]], eq_b=[1.0], lower=[0.0, 0.0])
    solution = lp_solver.solve(lp)
    assert solution.optimal
    assert np.allclose(solution.x, [1.0, 0.0])
    assert solution.dual_eq[0] == pytest.approx(1.0)
    assert np.allclose(solution.reduced_costs, [0.0, 1.0])
    assert dual_objective(lp, solution.dual_ineq, solution.dual_eq, solution.reduced_costs) == pytest.approx(1.0)


def test_degenerate_cycling_example_terminates(lp_solver):
    c = [-0.75, 20.0, -0.5, 6.0]
    G = [[0.25, -8.0, -1.0, 9.0], [0.5, -12.0, -0.5, 3.0], [0.0, 0.0, 1.0, 0.0]]
    h = [0.0, 0.0, 1.0]
    solution = lp_solver.solve(LinearProgram(c, G, h, lower=np.zeros(4)))
    ref = optimize.linprog(c, A_ub=G, b_ub=h, bounds=[(0, None)] * 4, method="highs")
    assert solution.optimal
    assert solution.objective == pytest.approx(-1.25, abs=1e-9)
    assert solution.objective == pytest.approx(ref.fun, abs=1e-9)


def test_reports_infeasible(lp_solver):
    solution = lp_solver.solve(LinearProgram([1.0], [[1.0], [-1.0]], [-1.0, -1.0]))
    assert solution.status is LpStatus.INFEASIBLE
    assert np.isnan(solution.objective)


def test_reports_unbounded(lp_solver):
    solution = lp_solver.solve(LinearProgram([-1.0, 0.0], [[0.0, 1.0]], [1.0], lower=[0.0, 0.0]))
    assert solution.status is LpStatus.UNBOUNDED


def test_redundant_equalities_are_dropped(lp_solver):
    lp = LinearProgram([1.0, 1.0], eq_a=[[1.0, 1.0], [2.0, 2.0]], eq_b=[2.0, 4.0], lower=[0.0, 0.0])
    solution = lp_solver.solve(lp)
    assert solution.optimal
    assert solution.objective == pytest.approx(2.0)


def test_rejects_crossed_bounds():
    with pytest.raises(InputError):
        LinearProgram([1.0], lower=[1.0], upper=[0.0])


def test_degenerate_solve_is_repeatable(lp_solver):
    c = [-0.75, 20.0, -0.5, 6.0]
    G = [[0.25, -8.0, -1.0, 9.0], [0.5, -12.0, -0.5, 3.0], [0.0, 0.0, 1.0, 0.0]]
    h = [0.0, 0.0, 1.0]
    first = lp_solver.solve(LinearProgram(c, G, h, lower=np.zeros(4)))
    again = LpSolver().solve(LinearProgram(c, G, h, lower=np.zeros(4)))
    assert first.pivots == again.pivots
    assert np.array_equal(first.x, again.x)
    assert np.array_equal(first.dual_ineq, again.dual_ineq)
    assert np.array_equal(first.reduced_costs, again.reduced_costs)
