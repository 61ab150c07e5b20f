import numpy as np
import pytest

from models.errors import DimensionMismatch, ZeroWeightVector
from solvers.forward import ClassicalVerdict, Membership

X_STAR_F1 = np.array([1.067, 1.641])
F_STAR_F1 = np.array([7.244, 11.910])


def test_weight_one_on_first_objective(forward, example1):
    sample = forward.solve_fop(example1, [1.0, 0.0])
    assert np.allclose(sample.x, X_STAR_F1, atol=1e-3)
    assert np.allclose(sample.f, F_STAR_F1, atol=5e-3)
    assert sample.kernel_report["status"] == "Optimal"


def test_weight_one_on_second_objective_mirrors(forward, example1):
    sample = forward.solve_fop(example1, [0.0, 1.0])
    assert np.allclose(sample.x, X_STAR_F1[::-1], atol=1e-3)
    assert np.allclose(sample.f, F_STAR_F1[::-1], atol=5e-3)


def test_equal_weights_reach_the_symmetric_point(forward, example1, points):
    sample = forward.solve_fop(example1, [3.0, 3.0])
    assert np.allclose(sample.x, points["a"], atol=1e-6)
    assert np.allclose(sample.alpha.normalized, [0.5, 0.5])
    assert sample.sigma[0] > 0


def test_weight_validation(forward, example1):
    with pytest.raises(ZeroWeightVector):
        forward.solve_fop(example1, [0.0, 0.0])
    with pytest.raises(DimensionMismatch):
        forward.solve_fop(example1, [1.0, 0.0, 0.0])


def test_sweep_traces_a_monotone_tradeoff(forward, example1):
    samples = forward.sweep_pareto(example1, 21)
    assert all(s.ok for s in samples)
    alpha1 = np.array([s.alpha.normalized[0] for s in samples])
    f = np.array([s.f for s in samples])
    order = np.argsort(alpha1)
    assert np.all(np.diff(f[order, 0]) <= 1e-6)
    assert np.all(np.diff(f[order, 1]) >= -1e-6)


def test_parallel_sweep_matches_serial(forward, example1):
    serial = forward.sweep_pareto(example1, 5)
    parallel = forward.sweep_pareto(example1, 5, jobs=3)
    assert np.allclose([s.f for s in serial], [s.f for s in parallel])


def test_sweep_needs_two_points(forward, example1):
    with pytest.raises(ValueError):
        forward.sweep_pareto(example1, 1)


def test_membership(forward, example1, points):
    boundary = forward.membership(example1, points["a"])
    assert boundary.verdict is Membership.FEASIBLE
    assert boundary.slacks[0] == pytest.approx(0.0, abs=1e-12)
    assert forward.membership(example1, points["b"]).feasible
    outside = forward.membership(example1, points["c"])
    assert outside.verdict is Membership.INFEASIBLE
    assert outside.max_violation == pytest.approx(1.0)


def test_classical_inverse_on_the_frontier(forward, example1, points):
    result = forward.classical_inverse(example1, points["a"])
    assert result.verdict is ClassicalVerdict.FOUND
    assert np.allclose(result.weights.normalized, [0.5, 0.5], atol=1e-6)


@pytest.mark.parametrize("label", ["b", "c"])
def test_classical_inverse_fails_off_the_frontier(forward, example1, points, label):
    result = forward.classical_inverse(example1, points[label])
    assert result.verdict is ClassicalVerdict.ONLY_ZERO
    assert not result.found


def test_resolve_consistency_of_a_forward_solution(forward, example1):
    sample = forward.solve_fop(example1, [0.3, 0.7])
    assert forward.resolve_consistency(example1, sample.alpha, sample.x) <= 1e-8
