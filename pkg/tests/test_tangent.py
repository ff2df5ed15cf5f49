import math

import numpy as np
import pytest

from pybusemann.exceptions import InputError
from pybusemann.tangent import (
    DirectionWithLength,
    FinitePointedSample,
    blowup_sample,
    certify_norm,
    direction_angle_metric,
    eps_isometry_check,
    fit_norm,
    gh_distance_bounds,
    metric_relation_residual,
    packing_directions,
    tangent_metric,
)

TWO = FinitePointedSample([[0, 1], [1, 0]])


def test_sample_validation():
    with pytest.raises(InputError):
        FinitePointedSample([[0, 1]])
    with pytest.raises(InputError):
        FinitePointedSample([[0, 1], [1, 0]], base=2)
    with pytest.raises(InputError):
        FinitePointedSample([[0, 1], [2, 0]])
    with pytest.raises(InputError):
        FinitePointedSample([[1, 1], [1, 0]])
    with pytest.raises(InputError):
        FinitePointedSample([[0, 1, 5], [1, 0, 1], [5, 1, 0]])


def test_sample_csv(tmp_path):
    sample = FinitePointedSample([[0, 1, 2], [1, 0, 1.5], [2, 1.5, 0]], base=1)
    path = str(tmp_path / "sample.csv")
    sample.to_csv(path)
    again = FinitePointedSample.from_csv(path)
    assert again.base == 1
    assert np.array_equal(again.distances, sample.distances)
    bad = tmp_path / "bad.csv"
    bad.write_text("0,1\n0,1\n")
    with pytest.raises(InputError):
        FinitePointedSample.from_csv(str(bad))


def test_gh_bounds_of_a_sample_with_itself():
    bounds = gh_distance_bounds(TWO, TWO)
    assert bounds.exact
    assert bounds.lower == bounds.upper == 0.0
    assert list(bounds.mapping) == [0, 1]


def test_gh_bounds_of_two_point_samples():
    bounds = gh_distance_bounds(TWO, TWO.scaled(2))
    assert bounds.lower == pytest.approx(0.5)
    assert bounds.upper == pytest.approx(0.5)


def test_gh_bounds_of_samples_of_different_size():
    three = FinitePointedSample([[0, 1, 1], [1, 0, 2], [1, 2, 0]])
    bounds = gh_distance_bounds(TWO, three)
    assert 0 <= bounds.lower <= bounds.upper
    assert bounds.mapping[TWO.base] == three.base


def test_eps_isometry():
    assert eps_isometry_check([0, 1], TWO, TWO, 0.1)
    assert not eps_isometry_check([1, 0], TWO, TWO, 0.1)
    assert not eps_isometry_check([0, 1], TWO, TWO.scaled(2), 0.1)
    with pytest.raises(InputError):
        eps_isometry_check([0, 1], TWO, TWO, 0)


def test_plane_blowups_agree(plane):
    coarse = blowup_sample(plane, [0, 0], 0.5, 6, seed=7)
    fine = blowup_sample(plane, [0, 0], 0.25, 6, seed=7)
    assert gh_distance_bounds(coarse, fine).upper < 1e-9


def test_large_blowups_use_assignment(plane):
    coarse = blowup_sample(plane, [0, 0], 0.5, 20, seed=1)
    fine = blowup_sample(plane, [0, 0], 0.25, 20, seed=2)
    bounds = gh_distance_bounds(coarse, fine)
    assert not bounds.exact
    assert 0 <= bounds.lower <= bounds.upper


def test_blowup_contract(plane):
    with pytest.raises(InputError):
        blowup_sample(plane, [0, 0], 1.5, 4)
    with pytest.raises(InputError):
        blowup_sample(plane, [0, 0], 0.5, 0)


def test_tangent_metric_in_the_plane(plane):
    u = DirectionWithLength.from_vector(plane, [0, 0], [1, 0], 1.0)
    v = DirectionWithLength.from_vector(plane, [0, 0], [0, 1], 1.0)
    assert tangent_metric(plane, u, v) == pytest.approx(math.sqrt(2))
    assert metric_relation_residual(plane, np.zeros(2), [1, 0], [1, 1], 1.0, 0.5) > 0


def test_direction_angle_metric(l4):
    u = DirectionWithLength.from_vector(l4, [0, 0], [1, 0], 1.0)
    v = DirectionWithLength.from_vector(l4, [0, 0], [0, 1], 1.0)
    assert direction_angle_metric(l4, u, v) == pytest.approx(math.acos(1 - 2 ** (-0.5)))
    with pytest.raises(InputError):
        longer = DirectionWithLength.from_vector(l4, [0, 0], [0, 1], 2.0)
        direction_angle_metric(l4, u, longer)
    with pytest.raises(InputError):
        DirectionWithLength(u.geodesic, 0)


def test_direction_packing_does_not_depend_on_length(l4):
    counts = [
        packing_directions(l4, [0, 0], length, 0.5, budget=32, doubling=7).count
        for length in (1.0, 0.25)
    ]
    assert counts[0] == counts[1]


def test_direction_packing_at_the_cone_apex(cone):
    packing = packing_directions(cone, [0, 0], 1.0, 0.5, budget=32, doubling=7)
    assert abs(packing.count - 8) <= 1
    assert packing.within_bound
    with pytest.raises(InputError):
        packing_directions(cone, [0, 0], 1.0, 0)


def test_fit_norm_of_l4(l4):
    norm = fit_norm(l4, [0, 0])
    vectors = np.array([[1.0, 0.0], [0.6, 0.8], [-0.3, 0.7], [1.0, -1.0]])
    fitted = norm(vectors)
    exact = l4.norm(vectors)
    assert np.all(np.abs(fitted - exact) / exact < 0.02)
    assert norm.drift < 1e-9
    assert norm(np.zeros(2)) == 0.0


def test_certify_fitted_norm(l4):
    norm = fit_norm(l4, [0, 0])
    assert certify_norm(norm, 3.2, trials=1000).certified
    assert not certify_norm(norm, 1.0, trials=1000).certified
