import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pybusemann import (
    CurvatureParams,
    EuclideanCone,
    LpSpace,
    ProductSpace,
    SphericalCap,
    parse_space,
)
from pybusemann.exceptions import DegenerateSegmentError, InputError, RangeError

coordinate = st.floats(min_value=-5, max_value=5, allow_nan=False, allow_infinity=False)
point = st.lists(coordinate, min_size=2, max_size=2)


def test_parse_space_from_text_and_mapping():
    assert parse_space("kind=lp p=3 n=2") == LpSpace(p=3, n=2)
    assert parse_space({"kind": "cone", "theta": 4.0}) == EuclideanCone(theta=4.0)
    assert parse_space({"kind": "euclidean", "n": 3}).p == 2.0


def test_parse_space_unknown_kind():
    with pytest.raises(InputError):
        parse_space({"kind": "torus"})
    with pytest.raises(InputError):
        parse_space("kind")


def test_parse_space_overrides():
    space = parse_space({"kind": "lp", "p": 4}, S=2.5)
    assert space.params.S == 2.5
    assert space.params.C == 0.0


def test_description_rebuilds_the_model(cone, cap):
    product = ProductSpace(LpSpace(p=3, n=1), SphericalCap(cap=0.5))
    for space in (LpSpace(p=4, n=3), cone, cap, product):
        assert parse_space(space.description) == space


def test_curvature_params_contract():
    with pytest.raises(InputError):
        CurvatureParams(S=0.5)
    with pytest.raises(InputError):
        CurvatureParams(C=-1)
    assert math.isinf(CurvatureParams(D=None).D)
    assert CurvatureParams(S=3, D=2.0).to_dict() == {"S": 3.0, "C": 0.0, "D": 2.0, "n": 2}


def test_lp_distance_and_declared_constants():
    space = LpSpace(p=3, n=2)
    assert space.distance([1, 0], [0, 1]) == pytest.approx(2 ** (1 / 3))
    assert space.params.S == 2.0
    with pytest.raises(InputError):
        LpSpace(p=1.5)
    with pytest.raises(InputError):
        space.distance([1, 0, 0], [0, 1])


def test_lp_geodesic_is_the_segment(l4):
    gamma = l4.geodesic([0, 0], [2, 0])
    assert gamma.length == 2.0
    assert np.allclose(gamma.midpoint, [1, 0])
    assert np.allclose(gamma.at_distance(0.5), [0.5, 0])
    with pytest.raises(DegenerateSegmentError):
        l4.geodesic([1, 1], [1, 1])


def test_exp_moves_the_requested_distance(l4):
    y = l4.exp(np.zeros(2), [1.0, 1.0], 0.5)
    assert l4.distance([0, 0], y) == pytest.approx(0.5)
    with pytest.raises(InputError):
        l4.exp(np.zeros(2), [0.0, 0.0], 0.5)


def test_cone_distance_unfolds(half_plane_cone, cone):
    distance = half_plane_cone.distance([1, 0], [1, math.pi / 2])
    assert distance == pytest.approx(math.sqrt(2))
    # the short way round a cone of angle 4 is the gap 0.5
    assert cone.distance([1, 0], [1, 3.5]) == pytest.approx(2 * math.sin(0.25))
    assert cone.distance([0, 0], [2, 1]) == pytest.approx(2.0)


def test_cone_chart_is_canonical(cone):
    assert np.allclose(cone.validate([1, 4.5]), [1, 0.5])
    assert np.allclose(cone.validate([0, 3]), [0, 0])
    with pytest.raises(InputError):
        cone.validate([-1, 0])


def test_cone_extension_past_the_apex(cone):
    gamma = cone.geodesic([1, 0], [1, 1.9])
    with pytest.raises(RangeError):
        gamma(5.0)


def test_cone_reach(cone):
    assert math.isinf(cone.reach(np.zeros(2)))
    assert cone.reach(np.array([2.0, 1.0])) == pytest.approx(2.0)
    assert float(cone.local_convexity_radius(np.array([2.0, 1.0]))) == pytest.approx(1.0)


def test_sphere_geodesic_and_reach(cap):
    mid = cap.geodesic([0, 0, 1], [1, 0, 0]).midpoint
    assert float(np.arccos(mid[2])) == pytest.approx(math.pi / 4)
    assert cap.reach(np.array([0.0, 0.0, 1.0])) == pytest.approx(1.0)
    with pytest.raises(InputError):
        cap.validate([0, 0, 2])
    with pytest.raises(InputError):
        SphericalCap(cap=2.0)


def test_sphere_ball_must_fit(cap):
    with pytest.raises(RangeError):
        cap.sample_ball([0, 0, 1], 1.5, 10, seed=0)


def test_product_distance_and_params(cap):
    plane = ProductSpace(LpSpace(p=2, n=1), LpSpace(p=2, n=1))
    assert plane.distance([0, 0], [3, 4]) == 5.0
    mixed = ProductSpace(LpSpace(p=4, n=1), cap)
    assert mixed.params.S == 3.0
    assert mixed.params.n == 3
    assert mixed.params.D == pytest.approx(1.0)


def test_sample_ball_stays_inside(cone):
    center = np.array([1.0, 0.5])
    points = cone.sample_ball(center, 0.3, 200, seed=4)
    assert points.shape == (200, 2)
    assert np.all(cone.get_distance(center, points) <= 0.3)
    again = cone.sample_ball(center, 0.3, 200, seed=4)
    assert np.array_equal(points, again)


@settings(max_examples=50, deadline=None)
@given(point, point, point, st.sampled_from([2.0, 3.0, 4.5]))
def test_lp_metric_axioms(x, y, z, p):
    space = LpSpace(p=p, n=2)
    xy, yz, xz = space.distance(x, y), space.distance(y, z), space.distance(x, z)
    assert xy == pytest.approx(space.distance(y, x))
    assert xz <= xy + yz + 1e-9
    assert space.distance(x, x) == 0


@settings(max_examples=50, deadline=None)
@given(
    st.floats(min_value=0, max_value=3),
    st.floats(min_value=0, max_value=10),
    st.floats(min_value=0, max_value=3),
    st.floats(min_value=0, max_value=10),
)
def test_cone_distance_symmetric_and_bounded(r1, a1, r2, a2):
    cone = EuclideanCone(theta=4.0)
    d = cone.distance([r1, a1], [r2, a2])
    assert d == pytest.approx(cone.distance([r2, a2], [r1, a1]), abs=1e-12)
    assert abs(r1 - r2) - 1e-9 <= d <= r1 + r2 + 1e-9
