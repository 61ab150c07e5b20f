import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from models.errors import DimensionMismatch, NotPositiveSemidefinite
from models.functions import HingeSquared, Linear, Quadratic, combine, pad

finite = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False, allow_infinity=False)


def central_difference(f, x, h=1e-6):
    grad = np.zeros_like(x)
    for i in range(x.shape[0]):
        e = np.zeros_like(x)
        e[i] = h
        grad[i] = (f.value(x + e) - f.value(x - e)) / (2.0 * h)
    return grad


@settings(max_examples=60, deadline=None)
@given(arrays(float, (3, 3), elements=finite), arrays(float, 3, elements=finite), arrays(float, 3, elements=finite))
def test_quadratic_gradient_matches_finite_differences(A, q, x):
    f = Quadratic(A @ A.T, q, 1.5)
    assert np.allclose(f.gradient(x), central_difference(f, x), atol=1e-5)


@settings(max_examples=60, deadline=None)
@given(arrays(float, (4, 3), elements=finite), arrays(float, 4, elements=finite), arrays(float, 3, elements=finite))
def test_hinge_gradient_matches_finite_differences(M, t, x):
    f = HingeSquared(M, t)
    scale = 1.0 + float(np.max(np.abs(f.gradient(x))))
    assert np.allclose(f.gradient(x), central_difference(f, x), atol=1e-4 * scale)


@settings(max_examples=60, deadline=None)
@given(arrays(float, (4, 3), elements=finite), arrays(float, 4, elements=finite),
       arrays(float, 3, elements=finite), arrays(float, 3, elements=finite))
def test_hinge_is_midpoint_convex(M, t, x, y):
    f = HingeSquared(M, t)
    assert f.value(0.5 * (x + y)) <= 0.5 * (f.value(x) + f.value(y)) + 1e-9


def test_hinge_value_counts_only_overdose():
    f = HingeSquared(np.eye(2), np.array([1.0, 1.0]))
    assert f.value([2.0, 0.5]) == pytest.approx(1.0)
    assert np.allclose(f.gradient([2.0, 0.5]), [2.0, 0.0])


def test_quadratic_rejects_indefinite_matrix():
    with pytest.raises(NotPositiveSemidefinite):
        Quadratic(np.diag([1.0, -1.0]))


def test_quadratic_symmetrizes_its_matrix():
    f = Quadratic(np.array([[2.0, 1.0], [0.0, 2.0]]))
    assert np.allclose(f.Q, f.Q.T)


def test_functions_are_read_only():
    f = Linear([1.0, 2.0])
    with pytest.raises(ValueError):
        f.c[0] = 5.0


def test_dimension_mismatch_on_point():
    with pytest.raises(DimensionMismatch):
        Linear([1.0, 2.0]).value([1.0, 2.0, 3.0])


def test_pad_embeds_and_adds_trailing_terms():
    f = pad(Quadratic(np.eye(2), [1.0, 0.0], 2.0), 3, extra_linear=[-4.0])
    assert f.value([1.0, 1.0, 0.5]) == pytest.approx(1.0 + 1.0 + 2.0 - 2.0)
    with pytest.raises(TypeError):
        pad(HingeSquared(np.eye(2), np.zeros(2)), 3)


def test_combine_stays_linear_for_linear_pieces():
    combined = combine([2.0, 0.5], [Linear([1.0, 0.0], 1.0), Linear([0.0, 2.0])], 2)
    assert isinstance(combined, Linear)
    assert combined.value([1.0, 1.0]) == pytest.approx(2.0 * 2.0 + 0.5 * 2.0)


@settings(max_examples=60, deadline=None)
@given(arrays(float, 3, elements=finite), arrays(float, 3, elements=finite))
def test_linear_gradient_matches_finite_differences(c, x):
    f = Linear(c, -0.5)
    assert np.allclose(f.gradient(x), central_difference(f, x), atol=1e-6)


@settings(max_examples=60, deadline=None)
@given(arrays(float, (3, 3), elements=finite), arrays(float, 3, elements=finite),
       arrays(float, 3, elements=finite), arrays(float, 3, elements=finite))
def test_quadratic_is_midpoint_convex(A, q, x, y):
    f = Quadratic(A @ A.T, q)
    scale = 1.0 + abs(f.value(x)) + abs(f.value(y))
    assert f.value(0.5 * (x + y)) <= 0.5 * (f.value(x) + f.value(y)) + 1e-9 * scale
