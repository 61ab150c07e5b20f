import numpy as np
import pytest

from models.errors import DimensionMismatch, InputError, RankDeficientEqualities, ZeroWeightVector
from models.functions import HingeSquared, Linear, Quadratic
from models.problem import ForwardProblem, WeightVector, epigraph_reformulate
from workbench.instances import gen_planning


def hinge_problem():
    """One hinge objective over x1 + x2 >= 3; optimum (1.5, 1.5) with value 0.5"""
    return ForwardProblem(
        objectives=(HingeSquared(np.eye(2), np.ones(2)),),
        inequalities=(Linear([-1.0, -1.0], 3.0),),
    )


def test_default_names_and_counts(example1):
    assert example1.objective_names == ("f1", "f2")
    assert (example1.n_vars, example1.n_objectives, example1.n_inequalities, example1.n_equalities) == (2, 2, 1, 0)
    assert not example1.is_linear


def test_objective_values_at_named_points(example1, points):
    assert np.allclose(example1.objective_values(points["b"]), [13.25, 9.65])
    assert np.allclose(example1.objective_values(points["d"]), [13.160, 8.004], atol=5e-3)
    assert np.allclose(example1.objective_values(points["e"]), [14.000, 8.004], atol=5e-3)
    assert example1.inequality_values(points["a"])[0] == pytest.approx(0.0, abs=1e-12)
    assert example1.inequality_values(points["c"])[0] == pytest.approx(1.0)


def test_rejects_dependent_equalities():
    with pytest.raises(RankDeficientEqualities):
        ForwardProblem(objectives=(Linear([1.0, 1.0]),), eq_a=[[1.0, 1.0], [2.0, 2.0]], eq_b=[1.0, 2.0])


def test_rejects_mixed_dimensions():
    with pytest.raises(DimensionMismatch):
        ForwardProblem(objectives=(Linear([1.0, 1.0]), Linear([1.0, 1.0, 1.0])))
    with pytest.raises(DimensionMismatch):
        ForwardProblem(objectives=(Linear([1.0, 1.0]),), objective_names=("a", "b"))


def test_weight_vector_rules():
    assert np.allclose(WeightVector([2.0, 6.0]).normalized, [0.25, 0.75])
    with pytest.raises(InputError):
        WeightVector([1.0, -0.5])
    with pytest.raises(ZeroWeightVector):
        WeightVector([0.0, 0.0]).normalized


def test_epigraph_is_identity_without_hinge_terms(example1):
    lifted, lift_map = epigraph_reformulate(example1)
    assert lifted is example1
    assert lift_map.is_identity


def test_epigraph_lift_preserves_objective_values():
    problem = hinge_problem()
    lifted, lift_map = epigraph_reformulate(problem)
    assert lift_map.n_lifted == 4
    x = np.array([2.0, 1.5])
    z = lift_map.lift(problem, x)
    assert lifted.objectives[0].value(z) == pytest.approx(problem.objectives[0].value(x))
    assert np.all(lifted.inequality_values(z) <= 1e-12)
    assert np.allclose(lift_map.project(z), x)


def test_hinge_constraint_becomes_linear_rows():
    problem = ForwardProblem(
        objectives=(Quadratic(np.eye(2)),),
        inequalities=(HingeSquared(np.eye(2), np.array([1.0, 2.0])),),
    )
    lifted, lift_map = epigraph_reformulate(problem)
    assert lift_map.n_lifted == 2
    assert all(isinstance(g, Linear) for g in lifted.inequalities)
    assert lift_map.inequality_rows == ((0, 2),)
    assert np.allclose(lift_map.collapse_multipliers([0.5, 0.25]), [0.75])


def test_forward_value_survives_the_lift(forward):
    sample = forward.solve_fop(hinge_problem(), [1.0])
    assert np.allclose(sample.x, [1.5, 1.5], atol=1e-5)
    assert sample.f[0] == pytest.approx(0.5, abs=1e-6)
    assert sample.sigma.shape == (1,)


@pytest.mark.parametrize("seed", range(20))
def test_planning_lift_preserves_objective_values(seed):
    problem, _ = gen_planning(seed, n=8, m_per_structure=6, k=3)
    lifted, lift_map = epigraph_reformulate(problem)
    x = np.random.default_rng(seed).uniform(0.0, 2.0, size=problem.n_vars)
    z = lift_map.lift(problem, x)
    assert np.allclose(lifted.objective_values(z), problem.objective_values(x), rtol=1e-12, atol=1e-12)
    epigraph_rows = lifted.inequality_values(z)[lift_map.inequality_rows[-1][1]:]
    assert epigraph_rows.size == 2 * 3 * 6
    assert np.all(epigraph_rows <= 1e-12)
