"""
Measure estimates: Monte-Carlo ball volumes, Bishop-Gromov ratios,
packing numbers and rough dimension, covering sums in the plane and the
constants and constructions behind the singular strata estimates.
"""
import csv
import logging
import math
from collections import namedtuple

import numpy as np
from scipy import integrate

from .curvature import ResidualReport
from .exceptions import DomainError, InputError
from .strainers import find_strainer, is_r_long, preimage, strainer_scale
from .utils import derive_seed, greedy_net, make_rng

LOGGER = logging.getLogger(__name__)

#: Combined standard errors allowed between successive Monte-Carlo ratios
SIGMA_SLACK = 3.0

MIN_SAMPLES = 1000

#: Largest covering ball as a fraction of the box side, its shrink factor per
#: round, and the smallest radius in grid cells
COVER_START = 0.25
COVER_SHRINK = 0.8
COVER_MIN_CELLS = 1.5

BallVolumeCurve = namedtuple("BallVolumeCurve", "radii volumes stderrs samples seed")

PackingCurve = namedtuple("PackingCurve", "radii counts")

HausdorffEstimate = namedtuple(
    "HausdorffEstimate", "value levels area_ratio leftover"
)

ChainResult = namedtuple("ChainResult", "found indices")

StrainedFraction = namedtuple("StrainedFraction", "strained not_found fraction")

SingularPacking = namedtuple(
    "SingularPacking", "count bound members strained within_bound singular"
)


class ThresholdConstants(
    namedtuple("ThresholdConstants", "L_0 S_0 L_1 S_1 M N_0 K_bar")
):
    """
    Constants of the singular strata estimates for a given delta.

    ``M``, ``N_0`` and ``K_bar`` are ``None`` unless the doubling data
    they depend on was supplied.
    """

    __slots__ = ()

    @property
    def K(self):
        """
        Packing bound of non-strained points in a cylindrical region.
        """
        return self.K_bar


def mc_ball_volume(space, x, radii, samples=10**4, seed=0):
    """
    Monte-Carlo estimates of the measure of B(x, r) for each radius.

    Each radius draws ``samples`` points uniformly from an enclosing region
    of known measure; the volume is the hit fraction times that measure,
    with a binomial standard error.

    >>> from pybusemann import LpSpace
    >>> curve = mc_ball_volume(LpSpace(p=2, n=2), [0, 0], [1.0], samples=20000)
    >>> abs(curve.volumes[0] - math.pi) < 3 * curve.stderrs[0] + 1e-12
    True
    """
    radii = [float(r) for r in radii]
    if not radii or any(r <= 0 for r in radii):
        raise InputError("Radii must be positive. Got {}".format(radii))
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise InputError("Radii must be strictly increasing. Got {}".format(radii))
    if samples < MIN_SAMPLES:
        raise InputError(
            "Volume estimates need at least {} samples. Got {}".format(
                MIN_SAMPLES, samples
            )
        )
    x = space.validate(x)
    volumes, stderrs = [], []
    for index, r in enumerate(radii):
        space.check_ball(x, r)
        draw, measure = space.enclosure(x, r)
        points = draw(make_rng(derive_seed(seed, index)), samples)
        fraction = float(np.mean(space.get_distance(x, points) <= r))
        volumes.append(fraction * measure)
        stderrs.append(measure * math.sqrt(fraction * (1.0 - fraction) / samples))
    LOGGER.debug("ball volumes of %s around %s: %s", space, x, volumes)
    return BallVolumeCurve(tuple(radii), tuple(volumes), tuple(stderrs), samples, seed)


def _bishop_gromov_residuals(radii, volumes, stderrs, n):
    radii = np.asarray(radii, dtype=float)
    ratio = np.asarray(volumes, dtype=float) / radii**n
    sigma = np.asarray(stderrs, dtype=float) / radii**n
    slack = SIGMA_SLACK * np.hypot(sigma[:-1], sigma[1:])
    scale = np.where(ratio[:-1] > 0, ratio[:-1], 1.0)
    return (ratio[:-1] + slack - ratio[1:]) / scale


def bishop_gromov_check(curve, n):
    """
    Check that r -> v(r) / r^n is non-increasing along ``curve``.

    Successive ratios may grow by at most three combined standard errors.
    The residual of a pair is that allowance minus the growth, relative
    to the smaller-radius ratio.
    """
    if int(n) != n or n < 1:
        raise InputError("Dimension must be a positive integer. Got {}".format(n))
    if len(curve.radii) < 2:
        raise InputError("A Bishop-Gromov check needs at least two radii")
    residuals = _bishop_gromov_residuals(curve.radii, curve.volumes, curve.stderrs, n)
    i = int(np.argmin(residuals))
    witness = {
        "check": "bishop_gromov",
        "n": int(n),
        "radii": [curve.radii[i], curve.radii[i + 1]],
        "volumes": [curve.volumes[i], curve.volumes[i + 1]],
        "stderrs": [curve.stderrs[i], curve.stderrs[i + 1]],
        "residual": float(residuals[i]),
    }
    return ResidualReport(float(residuals[i]), witness, curve.samples, curve.seed)


def replay_bishop_gromov(witness):
    return _bishop_gromov_residuals(
        witness["radii"], witness["volumes"], witness["stderrs"], witness["n"]
    )[0]


def _distances_from(points, space):
    """
    ``(count, distances_from)`` for a point sample, a distance matrix holder
    or an array of charts (Euclidean unless ``space`` is given).
    """
    matrix = getattr(points, "distances", None)
    if matrix is not None:
        return len(matrix), lambda i: matrix[i]
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    if space is None:
        return len(points), lambda i: np.linalg.norm(points - points[i], axis=-1)
    return len(points), lambda i: space.get_distance(points[i], points)


def packing_number(points, r, space=None):
    """
    Size of the greedy maximal ``r``-separated subset of ``points``.

    Points are scanned in index order, so the result is deterministic.

    >>> packing_number([[0.0], [0.5], [1.0], [1.2]], 0.6)
    2
    """
    if not r > 0:
        raise InputError("Separation must be positive. Got {}".format(r))
    count, distances_from = _distances_from(points, space)
    if count == 0:
        raise InputError("Cannot pack an empty sample")
    return len(greedy_net(distances_from, count, r))


def packing_curve(points, radii, space=None):
    radii = sorted(float(r) for r in radii)
    counts = [packing_number(points, r, space) for r in radii]
    return PackingCurve(tuple(radii), tuple(counts))


def rough_dimension(curve):
    """
    Least-squares slope of log beta(r) against log(1/r).
    """
    if len(curve.radii) < 3:
        raise InputError("Rough dimension needs at least three radii")
    log_inverse = np.log(1.0 / np.asarray(curve.radii, dtype=float))
    log_counts = np.log(np.asarray(curve.counts, dtype=float))
    slope, _ = np.polyfit(log_inverse, log_counts, 1)
    return float(slope)


def unit_ball_area(p):
    """
    Lebesgue area of the unit l^p ball of the plane.

    >>> round(unit_ball_area(2), 6) == round(math.pi, 6)
    True
    """
    if math.isinf(p):
        return 4.0
    quarter, _ = integrate.quad(lambda t: (1.0 - t**p) ** (1.0 / p), 0.0, 1.0)
    return 4.0 * quarter


def _lp_norm(vectors, p):
    if math.isinf(p):
        return np.max(np.abs(vectors), axis=-1)
    return np.sum(np.abs(vectors) ** p, axis=-1) ** (1.0 / p)


def _ball_cover(indicator, p, cells, box, rng):
    """
    Greedy cover of the occupied cells of one grid level by disjoint l^p
    balls of shrinking radius, the remaining cells covered by themselves.

    Returns ``(covering_sum, balls, leftover, occupied)``.
    """
    low, high = box
    side = (high - low) / cells
    centres = low + side * (np.arange(cells) + 0.5)
    grid = np.stack(np.meshgrid(centres, centres, indexing="ij"), axis=-1)
    free = np.asarray(indicator(grid), dtype=bool)
    occupied = int(np.count_nonzero(free))
    total, balls = 0.0, 0
    radius = COVER_START * (high - low)
    while radius >= COVER_MIN_CELLS * side and free.any():
        spacing = radius / 2.0
        lattice = np.arange(low + radius, high - radius, spacing)
        if not len(lattice):
            radius *= COVER_SHRINK
            continue
        candidates = np.stack(np.meshgrid(lattice, lattice, indexing="ij"), axis=-1)
        candidates = candidates.reshape(-1, 2)
        candidates = candidates + rng.uniform(-0.5, 0.5, candidates.shape) * side
        cell = np.clip(((candidates - low) / side).astype(int), 0, cells - 1)
        candidates = candidates[free[cell[:, 0], cell[:, 1]]]
        reach = int(math.ceil(radius / side)) + 1
        for centre in candidates[rng.permutation(len(candidates))]:
            i, j = ((centre - low) / side).astype(int)
            i0, i1 = max(i - reach, 0), min(i + reach + 1, cells)
            j0, j1 = max(j - reach, 0), min(j + reach + 1, cells)
            window = free[i0:i1, j0:j1]
            inside = _lp_norm(grid[i0:i1, j0:j1] - centre, p) <= radius
            if inside.any() and window[inside].all():
                window[inside] = False
                total += math.pi * radius * radius
                balls += 1
        radius *= COVER_SHRINK
    leftover = int(np.count_nonzero(free))
    # diam_p of a square cell is side * ||(1, 1)||_p
    diameter = side * (1.0 if math.isinf(p) else 2.0 ** (1.0 / p))
    total += math.pi * leftover * (diameter / 2.0) ** 2
    return total, balls, leftover, occupied


def hausdorff_measure_2d(
    indicator, p=2.0, levels=(128, 256, 512), box=(-1.5, 1.5), seed=0
):
    """
    Covering estimate of the two-dimensional Hausdorff measure of a plane
    region under the l^p metric.

    At each level the square ``box`` x ``box`` is cut into a grid of cells;
    a cell is occupied when ``indicator`` is true at its centre. The
    occupied cells are covered greedily by disjoint l^p balls, largest
    radius first, and whatever no ball fits into is covered by its own
    cell. The value is the covering sum omega_2 * sum (diam_p(U) / 2)^2
    over that cover; a ball of radius r contributes pi * r^2 and a cell
    pi * (side * 2^(1/p) / 2)^2.

    ``area_ratio`` is the independent cross-check
    pi * area(region) / area(B_p) at the finest level.

    :param indicator: vectorized ``indicator(points) -> bool mask`` on
                      arrays of shape (..., 2)
    :param levels: cells per side, coarse to fine; at least three levels
    :return: :class:`HausdorffEstimate` with the finest value, the
             ``(cells, value)`` pairs of every level, the area ratio and
             the fraction of occupied cells left to the cell cover
    """
    levels = list(levels)
    if len(levels) < 3:
        raise InputError("Covering estimates need at least three grid levels")
    low, high = box
    if not high > low:
        raise InputError("Empty box {}".format(box))
    rng = make_rng(seed)
    estimates, area_ratio, leftover_fraction = [], 0.0, 0.0
    for cells in levels:
        total, balls, leftover, occupied = _ball_cover(
            indicator, p, cells, box, rng
        )
        side = (high - low) / cells
        area_ratio = math.pi * occupied * side * side / unit_ball_area(p)
        leftover_fraction = leftover / occupied if occupied else 0.0
        LOGGER.debug(
            "level %d: %d balls, %d of %d cells left, covering sum %.6f",
            cells, balls, leftover, occupied, total,
        )
        estimates.append((cells, total))
    return HausdorffEstimate(
        estimates[-1][1], tuple(estimates), area_ratio, leftover_fraction
    )


def packing_bound(doubling, eps):
    """
    Packing bound N(eps) <= N^ceil(log2(2/eps)) for an N-doubling space.

    >>> packing_bound(4, 0.5)
    16
    """
    if not eps > 0:
        raise InputError("Packing scale must be positive. Got {}".format(eps))
    return int(doubling) ** max(0, math.ceil(math.log2(2.0 / eps)))


def threshold_constants(delta, L_bar=None, doubling=None, covering=None, n0=None):
    """
    The constants behind the singular strata bound at ``delta``.

        L_0 = max(2 / (1 - cos d) + 1, 1 / sin d), nudged up so both
              defining inequalities hold strictly
        S_0 = min(4, 1 + 2 (cos d - cos 2d) / (L_bar - 1))
        L_1 = L_0 + 2, S_1 = S_0(d, L_1)
        M   = N_0 + 2 with N_0 = N(d / 4) from the doubling constant
        K   = K_bar = covering^(M - 1)

    :param L_bar: defaults to L_1
    :param n0: N_0 given directly instead of through ``doubling``

    >>> round(threshold_constants(0.1).L_0, 2)
    401.33
    """
    if not 0 < delta < 1:
        raise DomainError("delta must lie in (0, 1). Got {}".format(delta))
    L_0 = max(2.0 / (1.0 - math.cos(delta)) + 1.0, 1.0 / math.sin(delta))
    L_0 = float(np.nextafter(L_0, math.inf))
    L_1 = L_0 + 2.0
    if L_bar is None:
        L_bar = L_1
    if L_bar < L_0:
        raise InputError("L_bar must be at least L_0 = {}. Got {}".format(L_0, L_bar))

    def smoothness_threshold(L):
        return min(4.0, 1.0 + 2.0 * (math.cos(delta) - math.cos(2 * delta)) / (L - 1.0))

    if n0 is None and doubling is not None:
        n0 = packing_bound(doubling, delta / 4.0)
    M = None if n0 is None else int(n0) + 2
    K_bar = None if M is None or covering is None else int(covering) ** (M - 1)
    return ThresholdConstants(
        L_0, smoothness_threshold(L_bar), L_1, smoothness_threshold(L_1), M, n0, K_bar
    )


def _matrix(points, space=None):
    matrix = getattr(points, "distances", None)
    if matrix is not None:
        return np.asarray(matrix, dtype=float)
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    if space is None:
        return np.linalg.norm(points[:, None, :] - points[None, :, :], axis=-1)
    return space.get_distance(points[:, None, :], points[None, :, :])


def _cover(matrix, subset, L):
    """
    Greedy cover of ``subset`` by groups of diameter at most D / (2L).
    """
    diameter = float(np.max(matrix[np.ix_(subset, subset)]))
    radius = diameter / (4.0 * L)

    def local(i):
        return matrix[subset[i], subset]

    centres = greedy_net(local, len(subset), radius)
    nearest = np.argmin(matrix[np.ix_(subset, [subset[c] for c in centres])], axis=1)
    return [
        [subset[i] for i in np.flatnonzero(nearest == g)] for g in range(len(centres))
    ]


def covering_constant(points, L, space=None):
    """
    Measured constant C: the most groups of diameter at most D / (2L)
    needed to cover the sample or its largest group.
    """
    matrix = _matrix(points, space)
    subset = list(range(len(matrix)))
    if len(subset) < 2:
        return 1
    groups = _cover(matrix, subset, L)
    largest = max(groups, key=len)
    if len(largest) < 2 or np.max(matrix[np.ix_(largest, largest)]) == 0:
        return len(groups)
    return max(len(groups), len(_cover(matrix, largest, L)))


def verify_chain(points, indices, L, space=None):
    """
    Whether |x_0 x_(i+1)| >= L |x_0 x_i| for every consecutive pair after x_0.
    """
    return _grows(_matrix(points, space), indices, L)


def _grows(matrix, indices, L):
    from_anchor = [matrix[indices[0], i] for i in indices]
    return all(b >= L * a for a, b in zip(from_anchor[1:], from_anchor[2:]))


def geometric_chain(points, L, M, space=None):
    """
    Find M points x_0, ..., x_(M-1) with |x_0 x_(i+1)| >= L |x_0 x_i|.

    The sample is covered by groups of diameter at most D / (2L); a chain
    of length M - 1 is found inside the largest group and closed with a
    point at distance at least D / 2 from its anchor. Samples of at least
    C^(M-1) points always contain a chain.

    :return: :class:`ChainResult`; when the sample runs out the longest
             chain reached is returned with ``found`` false
    """
    if L < 1 or int(M) != M or M < 1:
        raise InputError(
            "geometric_chain needs L >= 1 and M >= 1. Got {}, {}".format(L, M)
        )
    matrix = _matrix(points, space)
    if len(matrix) == 0:
        raise InputError("Cannot build a chain in an empty sample")

    def chain(subset, m):
        if m == 1 or len(subset) < 2:
            return [subset[0]]
        if np.max(matrix[np.ix_(subset, subset)]) == 0:
            return [subset[0]]
        largest = max(_cover(matrix, subset, L), key=len)
        inner = chain(largest, m - 1)
        if len(inner) < m - 1:
            return inner
        anchor = inner[0]
        far = subset[int(np.argmax(matrix[anchor, subset]))]
        return inner + [far]

    indices = chain(list(range(len(matrix))), int(M))
    found = len(indices) == M and _grows(matrix, indices, L)
    LOGGER.debug("chain of length %d out of %d", len(indices), M)
    return ChainResult(bool(found), [int(i) for i in indices])


class CylinderRegion(
    namedtuple("CylinderRegion", "base radius step index strainer")
):
    """
    The region of B(base, radius) where, for every strainer coordinate,

        0.1 (m_i - 1) r <= |p_i base| - |p_i z| <= 0.1 m_i r

    with r = ``step`` and m = ``index``.
    """

    __slots__ = ()

    def __new__(cls, base, radius, step, index, strainer):
        index = tuple(int(m) for m in index)
        if len(index) != strainer.k:
            raise InputError(
                "Cylinder index needs {} entries. Got {}".format(strainer.k, index)
            )
        if not 0 < step <= strainer.delta * radius:
            raise InputError(
                "Cylinder step must lie in (0, delta * radius]. Got {}".format(step)
            )
        base = strainer.space.validate(base)
        return super().__new__(cls, base, float(radius), float(step), index, strainer)


def cylinder_membership(region, z):
    """
    Whether ``z`` (a point or a batch) lies in ``region``.
    """
    space = region.strainer.space
    z = space.validate(z)
    drop = region.strainer(region.base) - region.strainer(z)
    m = np.asarray(region.index, dtype=float)
    inside = (drop >= 0.1 * (m - 1) * region.step) & (drop <= 0.1 * m * region.step)
    near = space.get_distance(region.base, z) < region.radius
    member = np.all(inside, axis=-1) & near
    if np.ndim(member) == 0:
        return bool(member)
    return member


def strained_fraction(space, params, k, delta, count, scale, seed=0):
    """
    Fraction of sampled points of the working region where a
    (k, delta)-strainer is found.

    The search scale at a point is capped by half its reach. A failed
    search is recorded as not found at budget, never as proof that the
    point is singular.
    """
    rng = make_rng(seed)
    points = space.sample_domain(count, rng)
    strained = 0
    for i, z in enumerate(points):
        local = min(scale, 0.5 * space.reach(z))
        if not local > 0:
            continue
        found = find_strainer(
            space, params, z, k, delta, local, seed=derive_seed(seed, i)
        ).found
        if found:
            strained += 1
    return StrainedFraction(strained, count - strained, strained / count)


def sample_cylinder(space, region, samples, seed=0):
    """
    Points of ``region`` drawn by projecting samples of B(base, radius)
    onto strainer levels inside the cylinder.

    Each sample gets a target f(base) - 0.1 (m - u) r with u uniform in
    [0.05, 0.95] per coordinate and is carried there by :func:`preimage`.
    Samples whose descent fails or that leave the ball are dropped.
    """
    strainer = region.strainer
    rng = make_rng(derive_seed(seed, 1))
    starts = space.sample_ball(region.base, region.radius, samples, seed)
    f_base = strainer(region.base)
    m = np.asarray(region.index, dtype=float)
    members = []
    for start in starts:
        u = rng.uniform(0.05, 0.95, size=strainer.k)
        target = f_base - 0.1 * (m - u) * region.step
        result = preimage(space, strainer, target, start=start, tol=1e-6 * region.step)
        if result.converged and cylinder_membership(region, result.point):
            members.append(result.point)
    return np.array(members).reshape(-1, space.chart_dim)


def singular_packing(space, params, region, delta, bound, samples=200, seed=0):
    """
    Pack the points of ``region`` where no R-long (k+1, 10 delta)-strainer
    is found, at separation R / delta with R the cylinder step, and
    compare with ``bound``.

    Cylinder points come from :func:`sample_cylinder`. At each point the
    strainer search lays out its nearest points at 2 R / (10 delta) from
    it, twice the R-long threshold.

    :param bound: the constant K of :func:`threshold_constants`
    :return: :class:`SingularPacking`; ``singular`` holds the points
             without a long strainer
    """
    strainer = region.strainer
    members = sample_cylinder(space, region, samples, derive_seed(seed, 0))
    wide = 10 * delta
    near = 2.0 * region.step / wide
    scale = strainer_scale(params, strainer.k + 1, wide, near)
    singular = []
    for i, z in enumerate(members):
        result = find_strainer(
            space,
            params,
            z,
            strainer.k + 1,
            wide,
            scale,
            seed=derive_seed(seed, i + 1),
            near=near,
        )
        if result.found and is_r_long(space, result.strainer, region.step):
            continue
        singular.append(z)
    singular = np.array(singular).reshape(-1, space.chart_dim)
    count = packing_number(singular, region.step / delta, space) if len(singular) else 0
    LOGGER.debug(
        "%d of %d cylinder points without a long strainer pack to %d",
        len(singular),
        len(members),
        count,
    )
    return SingularPacking(
        count,
        bound,
        len(members),
        len(members) - len(singular),
        count <= bound,
        singular,
    )


def doubling_constant(space, x, r, samples=2000, seed=0):
    """
    Number of r/2-balls a greedy cover of a dense sample of B(x, r) uses.
    """
    points = space.sample_ball(x, r, samples, seed)
    return packing_number(points, r / 2.0, space)


def write_curve_csv(path, radii, values, stderrs=None):
    """
    Write a curve as ``radius,value,stderr`` rows; stderr is left empty
    for deterministic curves.
    """
    if stderrs is None:
        stderrs = [None] * len(radii)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["radius", "value", "stderr"])
        for row in zip(radii, values, stderrs):
            writer.writerow(["" if v is None else repr(float(v)) for v in row])


def read_curve_csv(path):
    """
    Read a curve written by :func:`write_curve_csv`.

    :return: ``(radii, values, stderrs)`` with ``None`` for empty stderrs
    """
    radii, values, stderrs = [], [], []
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != ["radius", "value", "stderr"]:
            raise InputError("Not a curve file: header {}".format(header))
        for line, row in enumerate(reader, start=2):
            try:
                radii.append(float(row[0]))
                values.append(float(row[1]))
                stderrs.append(float(row[2]) if row[2] else None)
            except (IndexError, ValueError):
                raise InputError("Malformed curve row {}: {}".format(line, row))
    return radii, values, stderrs
