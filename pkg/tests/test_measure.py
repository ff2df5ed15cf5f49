import math

import numpy as np
import pytest

from pybusemann.curvature import evaluate_witness
from pybusemann.exceptions import DomainError, InputError
from pybusemann.measure import (
    BallVolumeCurve,
    CylinderRegion,
    PackingCurve,
    bishop_gromov_check,
    covering_constant,
    cylinder_membership,
    doubling_constant,
    geometric_chain,
    hausdorff_measure_2d,
    mc_ball_volume,
    packing_bound,
    packing_curve,
    packing_number,
    read_curve_csv,
    rough_dimension,
    sample_cylinder,
    singular_packing,
    strained_fraction,
    threshold_constants,
    unit_ball_area,
    verify_chain,
    write_curve_csv,
)
from pybusemann.strainers import Strainer


def test_cone_area_law(cone):
    curve = mc_ball_volume(cone, [0, 0], [0.25, 0.5], samples=5000, seed=1)
    for r, volume, stderr in zip(curve.radii, curve.volumes, curve.stderrs):
        assert abs(volume - 2.0 * r * r) <= 3 * stderr + 1e-12


def test_plane_disc_area(plane):
    curve = mc_ball_volume(plane, [0, 0], [1.0], samples=20000, seed=2)
    assert abs(curve.volumes[0] - math.pi) <= 3 * curve.stderrs[0]


def test_volume_contract(plane):
    with pytest.raises(InputError):
        mc_ball_volume(plane, [0, 0], [1.0], samples=10)
    with pytest.raises(InputError):
        mc_ball_volume(plane, [0, 0], [0.5, 0.25])
    with pytest.raises(InputError):
        mc_ball_volume(plane, [0, 0], [])


@pytest.mark.parametrize("name", ["plane", "cone", "cap"])
def test_bishop_gromov_holds_on_models(name, request):
    space = request.getfixturevalue(name)
    radii = [0.2, 0.4, 0.6, 0.8] if name != "cap" else [0.2, 0.4, 0.6]
    curve = mc_ball_volume(space, space.base_point, radii, samples=5000, seed=3)
    assert bishop_gromov_check(curve, 2).held


def test_bishop_gromov_flags_growth():
    curve = BallVolumeCurve((1.0, 2.0), (1.0, 8.0), (0.0, 0.0), 1000, 0)
    report = bishop_gromov_check(curve, 2)
    assert not report.held
    assert evaluate_witness(report.worst_witness) == pytest.approx(report.worst_residual)
    with pytest.raises(InputError):
        bishop_gromov_check(curve, 0)


def test_packing_number():
    points = np.array([[0.0], [0.5], [1.0]])
    assert packing_number(points, 0.6) == 2
    assert packing_number(points, 0.1) == 3


def test_rough_dimension_of_a_grid(plane):
    axis = np.linspace(0, 1, 100)
    points = np.stack(np.meshgrid(axis, axis), axis=-1).reshape(-1, 2)
    curve = packing_curve(points, [0.1, 0.05, 0.025], plane)
    assert abs(rough_dimension(curve) - 2) < 0.25


def test_rough_dimension_needs_three_radii():
    with pytest.raises(InputError):
        rough_dimension(PackingCurve((0.1, 0.05), (10, 40)))


def test_unit_ball_area():
    assert unit_ball_area(2) == pytest.approx(math.pi)
    assert unit_ball_area(math.inf) == 4.0
    assert unit_ball_area(1) == pytest.approx(2.0)


def test_hausdorff_measure_of_the_l4_ball():

    def indicator(points):
        return np.sum(np.abs(points) ** 4, axis=-1) <= 1.0

    estimate = hausdorff_measure_2d(indicator, p=4.0)
    assert abs(estimate.value - math.pi) / math.pi < 0.05
    assert abs(estimate.area_ratio - math.pi) / math.pi < 0.02
    assert len(estimate.levels) == 3
    assert estimate.leftover < 0.2
    with pytest.raises(InputError):
        hausdorff_measure_2d(indicator, p=4.0, levels=(64, 128))


def test_hausdorff_measure_is_a_covering_sum():

    def disc(points):
        return np.sum(points**2, axis=-1) <= 1.0

    estimate = hausdorff_measure_2d(disc, p=2.0)
    assert abs(estimate.value - math.pi) / math.pi < 0.05
    # every cover overshoots a little, and square cells alone overshoot by pi / 2
    assert estimate.value >= 0.97 * estimate.area_ratio
    assert estimate.value < 0.8 * math.pi * math.pi / 2.0

    def nothing(points):
        return np.zeros(points.shape[:-1], dtype=bool)

    assert hausdorff_measure_2d(nothing, levels=(16, 32, 64)).value == 0.0


def test_packing_bound():
    assert packing_bound(4, 0.5) == 16
    assert packing_bound(3, 4.0) == 1
    with pytest.raises(InputError):
        packing_bound(3, 0)


def test_threshold_constants():
    delta = 0.1
    constants = threshold_constants(delta)
    assert constants.L_0 == pytest.approx(401.33, abs=0.01)
    assert 2 / (1 - math.cos(delta)) + 1 < constants.L_0
    assert 1 / math.sin(delta) < constants.L_0
    assert constants.L_1 == constants.L_0 + 2
    gap = math.cos(delta) - math.cos(2 * delta)
    expected = min(4, 1 + 2 * gap / (constants.L_1 - 1))
    assert constants.S_0 == pytest.approx(expected, abs=1e-6)
    assert constants.M is None
    assert constants.K is None


def test_threshold_constants_with_doubling_data():
    constants = threshold_constants(0.1, doubling=2, covering=3)
    assert constants.N_0 == 128
    assert constants.M == 130
    assert constants.K == 3**129
    with pytest.raises(DomainError):
        threshold_constants(1.0)
    with pytest.raises(InputError):
        threshold_constants(0.1, L_bar=2.0)


def test_verify_chain():
    points = np.array([[0.0], [1.0], [3.0], [10.0]])
    assert verify_chain(points, [0, 1, 2, 3], 2)
    assert not verify_chain(points, [0, 1, 2, 3], 4)


def test_geometric_chain_is_verified():
    points = np.array([[0.0], [1e-4], [1e-3], [1e-2], [1e-1], [1.0]])
    result = geometric_chain(points, 5, 3)
    assert len(result.indices) <= 3
    if result.found:
        assert verify_chain(points, result.indices, 5)
    with pytest.raises(InputError):
        geometric_chain(points, 0.5, 3)


def test_covering_constant():
    assert covering_constant(np.array([[0.0, 0.0]]), 2) == 1
    points = np.array([[0.0], [1.0], [2.0], [3.0]])
    assert covering_constant(points, 1) >= 1


def test_cylinder_region(plane):
    strainer = Strainer(plane, [([1, 0], [-0.004, 0])], 0.1, [0, 0])
    region = CylinderRegion([0, 0], 0.5, 0.05, (1,), strainer)
    assert cylinder_membership(region, [0, 0])
    assert not cylinder_membership(region, [0.3, 0])
    with pytest.raises(InputError):
        CylinderRegion([0, 0], 0.5, 0.1, (1,), strainer)
    with pytest.raises(InputError):
        CylinderRegion([0, 0], 0.5, 0.05, (1, 1), strainer)

def test_sample_cylinder_lands_in_the_slab(plane):
    strainer = Strainer(plane, [([1000, 0], [-1, 0])], 0.01, [0, 0])
    region = CylinderRegion([0, 0], 0.5, 0.005, (1,), strainer)
    members = sample_cylinder(plane, region, 40, seed=1)
    assert len(members) > 20
    assert np.all(cylinder_membership(region, members))
    # the slab is a strip of width 0.0005 next to the vertical axis
    assert np.all(np.abs(members[:, 0]) < 0.001)
    assert np.ptp(members[:, 1]) > 0.3


def test_singular_packing_of_the_plane(plane):
    strainer = Strainer(plane, [([1000, 0], [-1, 0])], 0.01, [0, 0])
    region = CylinderRegion([0, 0], 0.5, 0.005, (1,), strainer)
    result = singular_packing(
        plane, plane.params, region, 0.01, bound=10, samples=30, seed=2
    )
    assert result.members > 0
    assert result.strained == result.members
    assert result.count == 0
    assert result.within_bound
    assert len(result.singular) == 0


def test_singular_packing_near_the_apex(cone):
    # the slab through the apex of a cone of angle 4; points closer to the
    # apex than about 0.2 admit no long 2-strainer
    strainer = Strainer(cone, [([1000.5, 0], [1.0, 1.8])], 0.01, [0.5005, 0])
    region = CylinderRegion([0.5005, 0], 1.0, 0.01, (-500,), strainer)
    result = singular_packing(
        cone, cone.params, region, 0.01, bound=1, samples=60, seed=3
    )
    assert result.members >= 10
    assert 0 < result.strained < result.members
    assert result.count == 1
    assert result.within_bound
    radii = result.singular[:, 0]
    assert radii.min() < 0.2
    assert np.median(radii) < 0.3



def test_strained_fraction_of_the_plane(plane):
    result = strained_fraction(plane, plane.params, 1, 0.1, 10, 0.2, seed=0)
    assert result.strained + result.not_found == 10
    assert result.fraction == 1.0


def test_doubling_constant(plane):
    assert 3 <= doubling_constant(plane, [0, 0], 1.0, samples=500) <= 20


def test_curve_csv(tmp_path):
    path = str(tmp_path / "curve.csv")
    write_curve_csv(path, [0.1, 0.2], [1.5, 2.5], [0.01, None])
    assert read_curve_csv(path) == ([0.1, 0.2], [1.5, 2.5], [0.01, None])
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    with pytest.raises(InputError):
        read_curve_csv(str(bad))
