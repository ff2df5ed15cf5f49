import math

import numpy as np
import pytest

from pybusemann import LpSpace
from pybusemann.curvature import evaluate_witness
from pybusemann.exceptions import InputError
from pybusemann.strainers import (
    ORTHOGONALITY_CONDITION,
    Strainer,
    almost_orthogonality,
    estimate_bilipschitz,
    find_strainer,
    improve_strainer,
    is_k_strainer,
    is_one_strainer,
    is_r_long,
    preimage,
    strainer_constants,
    strainer_map,
    strainer_number,
    strainer_scale,
    verify_openness,
)

PAIRS = [([1, 0], [-0.004, 0]), ([0, 0.004], [0, -0.00002])]


@pytest.fixture
def strainer(plane):
    return Strainer(plane, PAIRS, 0.1, [0, 0])


def test_strainer_constants():
    assert strainer_constants(1, 0.05).delta_k == 1 / 8
    for k in (1, 2, 3):
        constants = strainer_constants(k, 0.05)
        assert constants.delta_k == pytest.approx(2.0 ** (-2 * k - 1) / k)
        assert constants.epsilon_k == pytest.approx(0.9 / 4 ** (k - 1))
        bar = constants.epsilon_k / math.sqrt(k)
        assert constants.bar_epsilon_k == pytest.approx(bar)
    with pytest.raises(InputError):
        strainer_constants(0, 0.1)
    with pytest.raises(InputError):
        strainer_constants(1, 0.5)


def test_one_strainer(plane):
    assert is_one_strainer(plane, plane.params, [1, 0], [0, 0], [-0.004, 0], 0.1).ok
    # q on the same side as p
    assert not is_one_strainer(plane, plane.params, [1, 0], [0, 0], [0.004, 0], 0.1).ok
    # q too far for the distance budget
    assert not is_one_strainer(plane, plane.params, [1, 0], [0, 0], [-0.5, 0], 0.1).ok
    with pytest.raises(InputError):
        is_one_strainer(plane, plane.params, [0, 0], [0, 0], [-1, 0], 0.1)


def test_k_strainer(plane, strainer):
    check = is_k_strainer(plane, plane.params, strainer)
    assert check.ok
    assert check.margin > 0
    assert len(check.margins) == 2


def test_k_strainer_names_the_failing_condition(plane):
    parallel = [([1, 0], [-0.004, 0]), ([0.004, 0], [-0.00002, 0])]
    check = is_k_strainer(plane, plane.params, Strainer(plane, parallel, 0.1, [0, 0]))
    assert not check.ok
    assert check.level == 2
    assert check.condition == ORTHOGONALITY_CONDITION
    assert check.index == 1


def test_strainer_map(plane, strainer):
    evaluate = strainer_map(strainer)
    assert np.allclose(evaluate([0, 0]), [1.0, 0.004])
    batch = strainer(np.array([[0.5, 0], [0, 0]]))
    assert np.allclose(batch, [[0.5, math.hypot(0.5, 0.004)], [1.0, 0.004]])


def test_strainer_contract(plane):
    with pytest.raises(InputError):
        Strainer(plane, PAIRS, 0.5, [0, 0])
    with pytest.raises(InputError):
        Strainer(plane, [], 0.1, [0, 0])


def test_strainer_serializes(strainer):
    again = Strainer.from_dict(strainer.to_dict())
    assert again.k == 2
    assert np.array_equal(again(np.array([0.3, 0.2])), strainer(np.array([0.3, 0.2])))


def test_strainer_witness_replays(plane, strainer):
    witness = {
        "check": "strainer",
        "space": plane.description,
        "params": plane.params.to_dict(),
        "strainer": strainer.to_dict(),
    }
    expected = is_k_strainer(plane, plane.params, strainer).margin
    assert evaluate_witness(witness) == expected


def test_r_long(strainer):
    one = Strainer(strainer.space, PAIRS[:1], 0.1, [0, 0])
    assert is_r_long(one.space, one, 0.0003)
    assert not is_r_long(one.space, one, 0.001)


def test_almost_orthogonality(plane, strainer):
    assert almost_orthogonality(plane, strainer) < 1e-6


def test_find_strainer_in_the_plane(plane):
    result = find_strainer(plane, plane.params, [0, 0], 2, 0.05, 0.5, seed=3)
    assert result.found
    assert result.strainer.k == 2
    assert is_k_strainer(plane, plane.params, result.strainer).ok


def test_no_three_strainer_in_the_plane(plane):
    result = find_strainer(plane, plane.params, [0, 0], 3, 0.05, 0.5, seed=3)
    assert not result.found


def test_find_strainer_contract(plane):
    with pytest.raises(InputError):
        find_strainer(plane, plane.params, [0, 0], 0, 0.05, 0.5)
    with pytest.raises(InputError):
        find_strainer(plane, plane.params, [0, 0], 1, 0.05, 0.0)


def test_preimage_reaches_target(plane, strainer):
    target = strainer(strainer.base) + np.array([-0.0005, 0.0002])
    result = preimage(plane, strainer, target, tol=1e-9)
    assert result.converged
    assert result.error < 1e-9
    with pytest.raises(InputError):
        preimage(plane, strainer, [1.0])


def test_openness_of_a_one_strainer(plane):
    one = Strainer(plane, PAIRS[:1], 0.1, [0, 0])
    report = verify_openness(plane, one, 0.001, targets=20, seed=1)
    assert report.failures == 0
    assert report.achieved_epsilon >= strainer_constants(1, 0.1).epsilon_k


def test_bilipschitz_bounds(plane, strainer):
    bounds = estimate_bilipschitz(plane, strainer, 0.001, trials=200, seed=2)
    assert 0 < bounds.lower <= bounds.upper <= 2 + 1e-9


def test_improve_a_one_strainer(plane):
    found = find_strainer(plane, plane.params, [0, 0], 1, 0.1, 0.5, seed=0)
    assert found.found
    result = improve_strainer(plane, plane.params, found.strainer, 0.05, seed=0)
    assert result.verified
    assert result.failed_stage is None
    assert result.strainer.delta == 0.05
    assert 0 < result.displacement <= 2 * result.working_radius
    with pytest.raises(InputError):
        improve_strainer(plane, plane.params, found.strainer, 0.2)


def test_improvement_needs_delta_below_delta_k(plane, strainer):
    # a 2-strainer needs delta < delta_2 = 1 / 64
    with pytest.raises(InputError):
        improve_strainer(plane, plane.params, strainer, 0.05)


def test_strainer_number_of_the_line():
    line = LpSpace(p=2, n=1)
    assert strainer_number(line, line.params, [0.0], 0.05, [0.5, 0.25], candidates=2) == 1


def test_strainer_number_needs_scales(plane):
    with pytest.raises(InputError):
        strainer_number(plane, plane.params, [0, 0], 0.05, [])


def test_strainer_number_tries_the_level_above_n():
    line = LpSpace(p=2, n=1)
    assert strainer_number(line, line.params, [0.0], 0.01, [0.5, 0.25], candidates=2) == 1


def test_strainer_number_of_the_plane(plane):
    delta = 0.5 * strainer_constants(2, 0.0).delta_k
    k = strainer_number(plane, plane.params, [0, 0], delta, [0.5, 0.25], candidates=2)
    assert k == 2


def test_strainer_number_of_l3_space():
    space = LpSpace(p=3, n=3)
    k = strainer_number(
        space, space.params, [0.1, 0.2, 0.3], 0.002, [0.5, 0.25], seed=1, candidates=4
    )
    assert k == 3


def test_strainer_number_needs_delta_below_delta_n(plane):
    with pytest.raises(InputError):
        strainer_number(plane, plane.params, [0, 0], 0.05, [0.5])


def test_distance_gap_without_cancellation():
    space = LpSpace(p=3, n=3)
    origin = np.zeros(3)
    sideways = space.get_distance_gap([-1, 0, 0], origin, [0, 1e-6, 0])
    assert sideways == pytest.approx(1e-18 / 3, rel=1e-9)
    along = space.get_distance_gap([-4, 0, 0], origin, [1e-12, 0, 0])
    assert along == pytest.approx(1e-12, rel=1e-12)
    p, x = np.array([3.0, 1.0, -2.0]), np.array([0.1, 0.2, 0.3])
    y = x + np.array([0.01, -0.02, 0.005])
    direct = space.get_distance(p, y) - space.get_distance(p, x)
    assert space.get_distance_gap(p, x, y) == pytest.approx(direct, abs=1e-14)
    assert space.get_distance_gap(x, x, y) == pytest.approx(space.get_distance(x, y))


def test_find_strainer_with_capped_offsets(plane):
    scale = strainer_scale(plane.params, 2, 0.1, 0.02)
    result = find_strainer(plane, plane.params, [0, 0], 2, 0.1, scale, seed=4, near=0.02)
    assert result.found
    offsets = plane.get_distance(result.strainer.q_points, result.strainer.base)
    assert np.all(offsets <= 0.02 * (1 + 1e-9))
    assert offsets[-1] == pytest.approx(0.02)
    assert is_r_long(plane, result.strainer, 0.001)
    with pytest.raises(InputError):
        find_strainer(plane, plane.params, [0, 0], 1, 0.1, 1.0, near=0.0)
