import numpy as np
import pytest

from pybusemann.utils import (
    NON_DECREASING,
    NON_INCREASING,
    clamp_cosine,
    derive_seed,
    greedy_net,
    make_rng,
    monotone_defect,
    monotone_limit,
    richardson_limit,
    unit_vectors,
)


def test_clamp_cosine():
    assert clamp_cosine(1.0 + 1e-12) == (1.0, False)
    assert clamp_cosine(1.1) == (1.0, True)
    clamped, fired = clamp_cosine([-2.0, 0.5])
    assert list(clamped) == [-1.0, 0.5]
    assert fired


def test_derive_seed():
    assert derive_seed(7, 3) == derive_seed(7, 3)
    assert derive_seed(7, 3) != derive_seed(7, 4)
    assert derive_seed(7, 3) != derive_seed(8, 3)
    with pytest.raises(ValueError):
        derive_seed(-1, 0)


def test_unit_vectors():
    vectors = unit_vectors(3, 50, make_rng(1))
    assert vectors.shape == (50, 3)
    assert np.allclose(np.linalg.norm(vectors, axis=1), 1.0)


def test_richardson_limit():
    assert richardson_limit(2.0, [5.0]) == 5.0
    # linear error is removed by one level
    assert richardson_limit(2.0, [3.0, 2.5]) == pytest.approx(2.0)
    # quadratic error needs two
    values = [1.0 + h + h**2 for h in (1.0, 0.5, 0.25)]
    assert richardson_limit(2.0, values) == pytest.approx(1.0)


def test_monotone_limit():
    limit = monotone_limit(lambda t: 1.0 + t, 1.0, direction=NON_INCREASING)
    assert limit.value == pytest.approx(1.0, abs=1e-9)
    assert limit.monotone_ok
    assert limit.grid[0] == 1.0
    assert len(limit.grid) == len(limit.values)

    limit = monotone_limit(lambda t: 1.0 + t, 1.0, direction=NON_DECREASING)
    assert not limit.monotone_ok


def test_monotone_limit_respects_the_floor():
    limit = monotone_limit(lambda t: t, 1.0, floor=0.1)
    assert min(limit.grid) >= 0.1
    assert len(limit.grid) == 4


def test_greedy_net():
    points = np.array([0.0, 0.5, 1.0, 1.5, 2.0])
    chosen = greedy_net(lambda i: np.abs(points - points[i]), len(points), 1.0)
    assert chosen == [0, 2, 4]


def test_monotone_defect():
    assert monotone_defect([3.0, 2.0, 2.5, 1.0], NON_INCREASING) == 0.5
    assert monotone_defect([1.0, 0.25, 2.0], NON_DECREASING) == 0.75
    assert monotone_defect([3.0, 2.0, 1.0], NON_INCREASING) == 0.0
    assert monotone_defect([1.0, 5.0], None) == 0.0
