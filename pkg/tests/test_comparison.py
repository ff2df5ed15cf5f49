import math

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from pybusemann import CurvatureParams, LpSpace
from pybusemann.comparison import (
    SEMICONVEX,
    ComparisonTriangle,
    angle_fixed_scale,
    angle_from_point,
    comparison_angle,
    distance_derivative,
    error_functions,
)
from pybusemann.exceptions import DegenerateVertexError, DomainError, InputError

side = st.floats(min_value=1e-3, max_value=100, allow_nan=False)


def test_comparison_angle_values():
    assert comparison_angle(1, 1, 2) == math.pi
    assert comparison_angle(1, 1, math.sqrt(2)) == pytest.approx(math.pi / 2)
    assert comparison_angle(1, 1, 2 ** (1 / 3)) == pytest.approx(1.3630, abs=1e-4)
    with pytest.raises(DegenerateVertexError):
        comparison_angle(0, 1, 1)


def test_comparison_triangle_angles_sum_to_pi():
    triangle = ComparisonTriangle(3.0, 4.0, 5.0)
    assert triangle.angle_at_x == pytest.approx(math.pi / 2)
    assert sum(triangle.angles) == pytest.approx(math.pi)


def test_error_functions():
    budget = error_functions(CurvatureParams(S=1.0), 0.1, 1.0)
    assert budget.delta_S == 0.0
    assert budget.delta_C == pytest.approx(math.acos(1 - 0.05))
    assert not budget.clamped
    assert error_functions(CurvatureParams(S=4.0), 10.0, 1.0).clamped
    with pytest.raises(DomainError):
        error_functions(CurvatureParams(), 0.1, 0.0)


def test_angle_from_point_in_the_plane(plane):
    xi = plane.geodesic([0, 0], [0, 1])
    assert angle_from_point(plane, [1, 0], xi).value == pytest.approx(math.pi / 2)
    xi = plane.geodesic([0, 0], [1, 1])
    assert angle_from_point(plane, [1, 0], xi).value == pytest.approx(math.pi / 4)


def test_angle_from_point_contracts(plane):
    xi = plane.geodesic([0, 0], [0, 1])
    with pytest.raises(DegenerateVertexError):
        angle_from_point(plane, [0, 0], xi)
    with pytest.raises(InputError):
        angle_from_point(plane, [1, 0], xi, mode="sideways")
    params = CurvatureParams(D=0.5)
    with pytest.raises(DomainError):
        angle_from_point(plane, [1, 0], xi, mode=SEMICONVEX, params=params)


@pytest.mark.parametrize("p", [2, 3, 4])
def test_fixed_scale_angle_of_the_axes(p):
    space = LpSpace(p=p, n=2)
    gamma = space.geodesic([0, 0], [1, 0])
    eta = space.geodesic([0, 0], [0, 1])
    expected = math.acos(1 - 2 ** (2 / p - 1))
    assert angle_fixed_scale(space, gamma, eta, 1.0, 1.0).value == pytest.approx(
        expected, abs=1e-6
    )


def test_fixed_scale_angle_is_scale_invariant(l4):
    gamma = l4.geodesic([0, 0], [1, 0])
    eta = l4.geodesic([0, 0], [0.6, 0.8])
    first = angle_fixed_scale(l4, gamma, eta, 1.0, 0.5).value
    second = angle_fixed_scale(l4, gamma, eta, 0.5, 0.25).value
    assert abs(first - second) < 1e-9


def test_fixed_scale_needs_a_common_base(l4):
    gamma = l4.geodesic([0, 0], [1, 0])
    eta = l4.geodesic([0, 1], [1, 1])
    with pytest.raises(InputError):
        angle_fixed_scale(l4, gamma, eta, 1.0, 1.0)


def test_distance_derivative(plane):
    xi = plane.geodesic([0, 0], [0, 1])
    result = distance_derivative(plane, [1, 0], xi)
    assert abs(result.value) < 1e-9
    assert abs(result.finite_difference) < 1e-4


@settings(max_examples=100, deadline=None)
@given(side, side, st.floats(min_value=0, max_value=1))
def test_comparison_angle_is_an_angle(a, b, fraction):
    c = abs(a - b) + fraction * (a + b - abs(a - b))
    angle = comparison_angle(a, b, c)
    assert 0 <= angle <= math.pi


@settings(max_examples=100, deadline=None)
@given(
    st.floats(min_value=1, max_value=10),
    st.floats(min_value=0, max_value=10),
    st.floats(min_value=0, max_value=5),
    st.floats(min_value=1e-3, max_value=5),
)
def test_error_budgets_lie_in_zero_pi(S, C, t, d):
    assume(t <= 4 * d)
    budget = error_functions(CurvatureParams(S=S, C=C), t, d)
    for value in budget[:4]:
        assert 0 <= value <= math.pi
    assert budget.delta_S <= budget.bar_delta_S <= budget.bar_delta_SC
