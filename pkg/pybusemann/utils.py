"""
Numerical helpers shared by the geometry modules.

Limits in this package are always taken along geometric grids
t_j = t_0 * 2^(-j): the quantities involved are monotone in t, so the
last grid value brackets the limit and a short Richardson table on the
tail removes the leading error terms.
"""
import logging
from collections import namedtuple

import numpy as np

LOGGER = logging.getLogger(__name__)

#: Cosine arguments further than this outside [-1, 1] raise a diagnostics flag
CLAMP_TOLERANCE = 1e-9

NON_INCREASING = "non-increasing"
NON_DECREASING = "non-decreasing"

MonotoneLimit = namedtuple("MonotoneLimit", "value grid values residual monotone_ok")


def clamp_cosine(value, tolerance=CLAMP_TOLERANCE):
    """
    Clamp a cosine argument into [-1, 1].

    :param value: scalar or array of cosine arguments
    :param tolerance: how far outside [-1, 1] an argument may be before
                      the returned flag is set
    :return: ``(clamped, fired)``
    """
    value = np.asarray(value, dtype=float)
    clamped = np.clip(value, -1.0, 1.0)
    fired = bool(np.any(np.abs(value - clamped) > tolerance))
    if clamped.ndim == 0:
        clamped = float(clamped)
    return clamped, fired


def safe_arccos(value):
    return np.arccos(np.clip(value, -1.0, 1.0))


def derive_seed(master, counter):
    """
    Derive the seed of a child task from the master seed.

    The derivation is counter based, so the seed of task ``counter`` does
    not depend on how many other tasks run or in which order.
    """
    if master < 0:
        raise ValueError("Seeds must be non-negative. Got {}".format(master))
    state = np.random.SeedSequence([int(master), int(counter)]).generate_state(1)
    return int(state[0])


def make_rng(seed):
    return np.random.default_rng(seed)


def unit_vectors(dim, count, rng):
    """
    Draw ``count`` directions uniformly from the Euclidean unit sphere
    of ``R^dim``.
    """
    vectors = rng.standard_normal((count, dim))
    norms = np.linalg.norm(vectors, axis=1)
    # a zero draw has probability zero, but keep the division defined
    norms[norms == 0] = 1.0
    return vectors / norms[:, None]


def richardson_limit(step_ratio, values):
    """
    Richardson extrapolation of a sequence computed at steps h, h/r, h/r^2, ...

    :param step_ratio: ratio r between successive steps
    :param values: values ordered from the coarsest step to the finest
    """
    n_steps = len(values)

    if n_steps == 1:
        return values[0]

    last_level = list(values)
    this_level = None

    for m in range(1, n_steps):
        this_level = []
        mult = step_ratio**m
        factor = 1.0 / (mult - 1.0)
        for i in range(n_steps - m):
            low = last_level[i]
            high = last_level[i + 1]
            this_level.append(factor * (mult * high - low))
        last_level = this_level
    return this_level[0]


def monotone_limit(
    func,
    start,
    direction=None,
    floor=0.0,
    tolerance=1e-9,
    stop=1e-10,
    max_halvings=48,
    extrapolate=3,
    measure=None,
):
    """
    Follow ``func`` along the decreasing grid ``start * 2**-j`` and
    return its limit.

    :param func: scalar function of the grid parameter
    :param start: first (largest) grid value
    :param direction: expected monotonicity of the values as the grid
                      decreases, :data:`NON_INCREASING`,
                      :data:`NON_DECREASING` or ``None``
    :param floor: grid values below this are never evaluated (roundoff floor)
    :param tolerance: allowed move against ``direction`` before
                      ``monotone_ok`` is cleared
    :param stop: stop once successive measured values differ by less
    :param max_halvings: hard cap on the grid length
    :param extrapolate: number of tail values fed to the Richardson table
    :param measure: maps a value to the quantity compared against ``stop``;
                    defaults to the value itself
    """
    if measure is None:
        measure = _identity

    grid = [start]
    values = [func(start)]
    monotone_ok = True
    for j in range(1, max_halvings + 1):
        t = start * 0.5**j
        if t < floor:
            break
        value = func(t)
        step = value - values[-1]
        if direction == NON_INCREASING and step > tolerance:
            monotone_ok = False
        elif direction == NON_DECREASING and step < -tolerance:
            monotone_ok = False
        grid.append(t)
        values.append(value)
        if abs(measure(value) - measure(values[-2])) < stop:
            break

    tail = values[-extrapolate:]
    limit = richardson_limit(2.0, tail)
    if not np.isfinite(limit):
        limit = values[-1]
    residual = abs(limit - values[-1])
    LOGGER.debug(
        "limit after %d grid values: %r (residual %.3g)", len(grid), limit, residual
    )
    return MonotoneLimit(limit, tuple(grid), tuple(values), residual, monotone_ok)


def monotone_defect(values, direction):
    """
    Largest step of ``values`` against ``direction``; 0 for monotone values.

    >>> monotone_defect([3.0, 2.0, 2.5], NON_INCREASING)
    0.5
    """
    steps = np.diff(np.asarray(values, dtype=float))
    if direction == NON_DECREASING:
        steps = -steps
    elif direction != NON_INCREASING:
        return 0.0
    return float(max(steps.max(initial=0.0), 0.0))


def _identity(value):
    return value


def greedy_net(distances_from, count, radius):
    """
    Greedy maximal ``radius``-separated subset, scanned in index order.

    A point joins the net when its distance to every point already in
    the net is at least ``radius``; ties are broken by the lowest index.

    :param distances_from: ``distances_from(i)`` returns the array of
                           distances from point ``i`` to all ``count`` points
    :return: list of chosen indices
    """
    covered = np.zeros(count, dtype=bool)
    chosen = []
    for i in range(count):
        if covered[i]:
            continue
        chosen.append(i)
        covered |= np.asarray(distances_from(i)) < radius
    return chosen
