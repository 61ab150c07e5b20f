import numpy as np
import pytest
from scipy import optimize

from config import KernelOptions
from models.errors import InputError, ProgramInfeasible
from models.functions import HingeSquared, Linear, Quadratic, combine
from models.problem import epigraph_reformulate
from solvers.convex_kernel import ConvexKernel, KernelStatus, SmoothProgram
from workbench.instances import gen_planning


def test_bound_constrained_quadratic_with_multiplier(kernel):
    # min (x - 3)^2 s.t. x <= 1: x* = 1, multiplier 4
    program = SmoothProgram(Quadratic([[2.0]], [-6.0], 9.0), (Linear([1.0], -1.0),))
    solution = kernel.solve(program)
    assert solution.status is KernelStatus.OPTIMAL
    assert solution.x[0] == pytest.approx(1.0, abs=1e-6)
    assert solution.multipliers[0] == pytest.approx(4.0, abs=1e-5)
    assert solution.dual.residuals.within(kernel.options.tol)


def test_equality_multipliers(kernel):
    # min x1^2 + x2^2 s.t. x1 + x2 = 2
    program = SmoothProgram(Quadratic(2.0 * np.eye(2)), eq_a=[[1.0, 1.0]], eq_b=[2.0])
    solution = kernel.solve(program)
    assert solution.status is KernelStatus.OPTIMAL
    assert np.allclose(solution.x, [1.0, 1.0], atol=1e-8)
    assert solution.dual.pi[0] == pytest.approx(2.0, abs=1e-6)


def test_disk_constrained_forward_point(kernel, example1):
    # 2.5 (x1^2 + x2^2) over the unit disk centered at (2, 2)
    objective = Quadratic(5.0 * np.eye(2))
    solution = kernel.solve(SmoothProgram(objective, example1.inequalities))
    target = (4.0 - np.sqrt(2.0)) / 2.0
    assert solution.status is KernelStatus.OPTIMAL
    assert np.allclose(solution.x, [target, target], atol=1e-6)
    assert solution.dual.residuals.worst() <= kernel.options.tol
    gradient = float(np.max(np.abs(objective.gradient(solution.x))))
    absolute = solution.summary()["kkt_residuals_absolute"]
    assert absolute["stationarity"] <= 2.0 * kernel.options.tol * (1.0 + gradient)
    assert absolute["complementarity"] <= kernel.options.tol


def test_tight_tolerance_certifies_unscaled_residuals(example1):
    tight = ConvexKernel(KernelOptions(tol=1e-10))
    solution = tight.solve(SmoothProgram(Quadratic(5.0 * np.eye(2)), example1.inequalities))
    assert solution.status is KernelStatus.OPTIMAL
    assert solution.absolute_residuals.worst() <= 1e-8


def test_phase_one_finds_strictly_feasible_point(kernel, example1):
    program = SmoothProgram(Linear([0.0, 0.0]), example1.inequalities)
    x = kernel.phase_one(program)
    assert program.inequality_values(x).max() < 0


def test_infeasible_program(kernel):
    program = SmoothProgram(Linear([1.0]), (Linear([1.0], 1.0), Linear([-1.0], 1.0)))
    with pytest.raises(ProgramInfeasible):
        kernel.phase_one(program)
    assert kernel.solve(program).status is KernelStatus.INFEASIBLE


def test_unbounded_linear_objective_without_rows(kernel):
    solution = kernel.solve(SmoothProgram(Linear([1.0, 0.0])))
    assert solution.status is KernelStatus.UNBOUNDED


def test_smooth_programs_reject_hinge_terms():
    with pytest.raises(InputError):
        SmoothProgram(HingeSquared(np.eye(1), np.zeros(1)))


def test_options_validate_and_override():
    with pytest.raises(ValueError):
        KernelOptions(mu=1.0)
    options = KernelOptions().with_overrides(tol=1e-6, unknown=3, max_newton=None)
    assert options.tol == 1e-6
    assert options.max_newton == KernelOptions().max_newton
    assert ConvexKernel(options).get_status()["options"]["tol"] == 1e-6


def test_free_variable_stays_bounded_through_phase_one(kernel):
    # min eps s.t. x^2 - eps <= 0, (x - 2)^2 - 1 <= 0; nothing bounds eps from above
    program = SmoothProgram(
        Linear([0.0, 1.0]),
        (Quadratic(np.diag([2.0, 0.0]), [0.0, -1.0]), Quadratic(np.diag([2.0, 0.0]), [-4.0, 0.0], 3.0)),
    )
    start = kernel.phase_one(program)
    assert np.all(np.isfinite(start))
    assert np.max(np.abs(start)) <= kernel.options.phase_one_radius + 1.0
    assert program.inequality_values(start).max() < 0

    solution = kernel.solve(program)
    assert solution.status is KernelStatus.OPTIMAL
    assert np.allclose(solution.x, [1.0, 1.0], atol=1e-6)
    assert np.allclose(solution.multipliers, [1.0, 1.0], atol=1e-5)


def test_strict_start_must_be_interior(kernel, example1):
    program = SmoothProgram(Linear([1.0, 1.0]), example1.inequalities)
    with pytest.raises(InputError):
        kernel.solve(program, x0=[0.0, 0.0])


def test_planning_program_from_an_interior_start(kernel):
    problem, _ = gen_planning(0)
    lifted, lift_map = epigraph_reformulate(problem)
    K = problem.n_objectives
    objective = combine(np.full(K, 1.0 / K), lifted.objectives, lift_map.n_lifted)
    program = SmoothProgram(objective, lifted.inequalities, lifted.eq_a, lifted.eq_b)
    # uniform intensities are strictly feasible; lift the overdose variables one unit above their floor
    start = lift_map.lift(problem, np.ones(problem.n_vars))
    start[problem.n_vars:] += 1.0

    warm = kernel.solve(program, x0=start)
    cold = kernel.solve(program)
    assert warm.status is KernelStatus.OPTIMAL
    assert cold.status is KernelStatus.OPTIMAL
    assert warm.objective == pytest.approx(cold.objective, rel=1e-6, abs=1e-9)
    assert program.inequality_values(warm.x).max() < 0


@pytest.mark.parametrize("seed", range(50))
def test_disk_programs_match_a_boundary_search(kernel, seed):
    rng = np.random.default_rng(seed)
    a = rng.uniform(0.5, 4.0, size=2)
    c = rng.uniform(1.5, 3.0, size=2)
    objective = Quadratic(np.diag(2.0 * a))
    disk = Quadratic(2.0 * np.eye(2), -2.0 * c, float(c @ c) - 1.0)
    solution = kernel.solve(SmoothProgram(objective, (disk,)))
    assert solution.status is KernelStatus.OPTIMAL

    def on_circle(theta):
        theta = np.atleast_1d(theta)
        p = c[None, :] + np.column_stack([np.cos(theta), np.sin(theta)])
        return (p ** 2) @ a

    grid = np.arange(0.0, 2.0 * np.pi, 1e-3)
    best = grid[int(np.argmin(on_circle(grid)))]
    refined = optimize.minimize_scalar(lambda t: float(on_circle(t)[0]), bounds=(best - 2e-3, best + 2e-3),
                                       method="bounded", options={"xatol": 1e-12})
    assert solution.objective == pytest.approx(min(refined.fun, float(on_circle(best)[0])), abs=1e-6)

    # the Lagrangian at the reported multiplier bounds the optimum from below
    lam = solution.multipliers[0]
    x_dual = np.linalg.solve(np.diag(2.0 * a) + 2.0 * lam * np.eye(2), 2.0 * lam * c)
    dual_value = objective.value(x_dual) + lam * disk.value(x_dual)
    assert -1e-9 <= solution.objective - dual_value <= 1e-6
