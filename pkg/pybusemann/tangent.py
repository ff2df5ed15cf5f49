"""
Blow-ups and tangent cones.

Finite pointed samples stand in for pointed metric spaces: blow-ups are
rescaled samples of small balls, and Gromov-Hausdorff closeness is
bounded through base-preserving correspondences. The tangent-cone metric
and the angle metric on directions with a common length come from the
fixed-scale limits of :mod:`pybusemann.comparison`, and the tangent norm
at a regular point is fitted from blow-up distances in a chart.
"""
import csv
import itertools
import logging
import math
from collections import namedtuple

import numpy as np
from scipy import interpolate, optimize, spatial

from .comparison import angle_fixed_scale, fixed_scale_limit
from .curvature import CONVEX, SMOOTH, check_norm_uniform
from .exceptions import InputError
from .measure import doubling_constant, packing_bound
from .utils import greedy_net, make_rng, unit_vectors

LOGGER = logging.getLogger(__name__)

#: Slack of the triangle inequality and symmetry checks on distance matrices
MATRIX_TOLERANCE = 1e-9

#: Samples up to this size get an exhaustive correspondence search
EXACT_LIMIT = 8

MAX_SWAP_ROUNDS = 50

#: Tolerance of the tangent-cone metric against the law of cosines
RELATION_TOLERANCE = 1e-8

GHBounds = namedtuple("GHBounds", "lower upper exact mapping")

DirectionPacking = namedtuple("DirectionPacking", "count bound within_bound doubling")

NormFit = namedtuple("NormFit", "norm smooth convex certified")


class FinitePointedSample(object):
    """
    A finite pointed metric space given by its distance matrix.

    >>> sample = FinitePointedSample([[0, 1], [1, 0]], base=0)
    >>> sample.diameter
    1.0
    >>> sample.scaled(2).distances
    array([[0., 2.],
           [2., 0.]])
    """

    def __init__(self, distances, base=0, points=None):
        distances = np.asarray(distances, dtype=float)
        if distances.ndim != 2 or distances.shape[0] != distances.shape[1]:
            raise InputError(
                "Distance matrix must be square. Got shape {}".format(distances.shape)
            )
        if len(distances) == 0:
            raise InputError("A pointed sample needs at least one point")
        if not 0 <= base < len(distances):
            raise InputError(
                "Base index {} outside a sample of {}".format(base, len(distances))
            )
        if np.any(np.abs(np.diag(distances)) > MATRIX_TOLERANCE):
            raise InputError("Distance matrix must have a zero diagonal")
        if np.any(np.abs(distances - distances.T) > MATRIX_TOLERANCE):
            raise InputError("Distance matrix must be symmetric")
        for j in range(len(distances)):
            through = distances[:, j][:, None] + distances[j, :][None, :]
            if np.any(distances > through + MATRIX_TOLERANCE):
                raise InputError(
                    "Distance matrix violates the triangle inequality at {}".format(j)
                )
        self.distances = distances
        self.base = int(base)
        self.points = points

    def __len__(self):
        return len(self.distances)

    def __repr__(self):
        return "<FinitePointedSample size={} base={}>".format(len(self), self.base)

    @classmethod
    def from_points(cls, space, points, base=0):
        points = space.validate(points)
        distances = space.get_distance(points[:, None, :], points[None, :, :])
        return cls(distances, base, points)

    @property
    def diameter(self):
        return float(np.max(self.distances))

    @property
    def from_base(self):
        return self.distances[self.base]

    def scaled(self, factor):
        if not factor > 0:
            raise InputError("Scale factor must be positive. Got {}".format(factor))
        return FinitePointedSample(self.distances * factor, self.base, self.points)

    def to_csv(self, path):
        """
        Write the matrix with point ids as the header and a final
        ``base,<id>`` row.
        """
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(range(len(self)))
            for row in self.distances:
                writer.writerow(repr(float(v)) for v in row)
            writer.writerow(["base", self.base])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as handle:
            rows = list(csv.reader(handle))
        if len(rows) < 3 or rows[-1][0] != "base":
            raise InputError("{} is not a pointed sample file".format(path))
        header, body, meta = rows[0], rows[1:-1], rows[-1]
        if len(body) != len(header):
            raise InputError(
                "{} has {} ids but {} rows".format(path, len(header), len(body))
            )
        try:
            distances = [[float(v) for v in row] for row in body]
            base = header.index(meta[1])
        except ValueError as error:
            raise InputError("Malformed pointed sample {}: {}".format(path, error))
        return cls(distances, base)


def blowup_sample(space, x, lam, count, radius=1.0, seed=0):
    """
    Sample the blow-up (X, d / lam, x) on its ball of radius ``radius``.

    The first point is ``x`` itself, followed by ``count - 1`` points drawn
    from B(x, lam * radius); distances are divided by ``lam``.
    """
    if not 0 < lam <= 1:
        raise InputError("Blow-up factor must lie in (0, 1]. Got {}".format(lam))
    if count < 1:
        raise InputError("Sample count must be at least 1. Got {}".format(count))
    x = space.validate(x)
    points = x[None, :]
    if count > 1:
        ball = space.sample_ball(x, lam * radius, count - 1, seed)
        points = np.concatenate([points, ball])
    return FinitePointedSample.from_points(space, points, 0).scaled(1.0 / lam)


def _padded(sample, size):
    """
    Distance matrix with the base moved to index 0 and padded to ``size``
    by copies of the base.
    """
    order = [sample.base] + [i for i in range(len(sample)) if i != sample.base]
    order += [sample.base] * (size - len(sample))
    return sample.distances[np.ix_(order, order)], order


def _distortion(a, b, perm):
    return float(np.max(np.abs(a - b[np.ix_(perm, perm)])))


def _exhaustive(a, b):
    rest = np.array(list(itertools.permutations(range(1, len(a)))), dtype=int)
    if rest.size == 0:
        return 0.0, np.zeros(1, dtype=int)
    perms = np.concatenate([np.zeros((len(rest), 1), dtype=int), rest], axis=1)
    gaps = np.abs(a[None, :, :] - b[perms[:, :, None], perms[:, None, :]])
    worst = gaps.reshape(len(perms), -1).max(axis=1)
    best = int(np.argmin(worst))
    return float(worst[best]), perms[best]


def _assigned(a, b):
    """
    Match points by distance to the base, then improve by swaps at the
    worst pair until the distortion stops decreasing.
    """
    cost = np.abs(a[0][1:, None] - b[0][None, 1:])
    _, columns = optimize.linear_sum_assignment(cost)
    perm = np.concatenate([[0], columns + 1])
    current = _distortion(a, b, perm)
    for _ in range(MAX_SWAP_ROUNDS):
        gaps = np.abs(a - b[np.ix_(perm, perm)])
        i, j = np.unravel_index(np.argmax(gaps), gaps.shape)
        best, best_perm = current, None
        for moved in {int(i), int(j)} - {0}:
            for other in range(1, len(perm)):
                if other == moved:
                    continue
                trial = perm.copy()
                trial[[moved, other]] = trial[[other, moved]]
                value = _distortion(a, b, trial)
                if value < best:
                    best, best_perm = value, trial
        if best_perm is None:
            break
        current, perm = best, best_perm
    return current, perm


def gh_distance_bounds(a, b, exact_limit=EXACT_LIMIT):
    """
    Lower and upper bounds on the pointed Gromov-Hausdorff distance of two
    finite samples.

    The lower bound is the larger of half the diameter gap and half the
    Hausdorff distance between the sets of distances to the base. The
    upper bound is half the distortion of a base-preserving bijection
    (the smaller sample padded with copies of its base), found by
    exhaustive search when both samples have at most ``exact_limit``
    points and by assignment plus swaps otherwise.

    :return: :class:`GHBounds`; ``mapping[i]`` is the point of ``b`` matched
             with point ``i`` of ``a``
    """
    size = max(len(a), len(b))
    pa, order_a = _padded(a, size)
    pb, order_b = _padded(b, size)
    exact = len(a) <= exact_limit and len(b) <= exact_limit
    if exact:
        distortion, perm = _exhaustive(pa, pb)
    else:
        distortion, perm = _assigned(pa, pb)

    ra, rb = a.from_base, b.from_base
    spread = np.abs(ra[:, None] - rb[None, :])
    hausdorff = max(spread.min(axis=1).max(), spread.min(axis=0).max())
    lower = max(abs(a.diameter - b.diameter), hausdorff) / 2.0

    mapping = np.empty(len(a), dtype=int)
    for position, original in enumerate(order_a[: len(a)]):
        mapping[original] = order_b[perm[position]]
    return GHBounds(float(lower), distortion / 2.0, exact, mapping)


def eps_isometry_check(mapping, a, b, eps):
    """
    Evaluate the three conditions of an eps-isometry from ``a`` to ``b``.

    1. the base goes to the base
    2. distances inside B(base, 1/eps) move by less than eps
    3. for every r < 1/eps, B(base_b, r - eps) lies in the eps-neighbourhood
       of the image of B(base_a, r)

    >>> sample = FinitePointedSample([[0, 1], [1, 0]])
    >>> eps_isometry_check([0, 1], sample, sample, 0.1)
    True
    """
    if not eps > 0:
        raise InputError("eps must be positive. Got {}".format(eps))
    mapping = np.asarray(mapping, dtype=int)
    if mapping[a.base] != b.base:
        return False
    near = np.flatnonzero(a.from_base < 1.0 / eps)
    image = mapping[near]
    moved = np.abs(a.distances[np.ix_(near, near)] - b.distances[np.ix_(image, image)])
    if np.any(moved >= eps):
        return False
    # the inclusion is tightest just after B(base_b, r - eps) gains point j
    for j in np.flatnonzero(b.from_base + eps < 1.0 / eps):
        reach = b.from_base[j] + eps
        sources = np.flatnonzero(a.from_base <= reach)
        if not np.any(b.distances[j, mapping[sources]] < eps):
            return False
    return True


class DirectionWithLength(namedtuple("DirectionWithLength", "geodesic length")):
    """
    A geodesic germ from a base point together with a scale.
    """

    __slots__ = ()

    def __new__(cls, geodesic, length):
        if not length > 0:
            raise InputError("Direction length must be positive. Got {}".format(length))
        return super().__new__(cls, geodesic, float(length))

    @classmethod
    def from_vector(cls, space, x, u, length):
        """
        The germ leaving ``x`` along the tangent vector ``u``; the geodesic
        is built as long as ``length`` where the model allows it.
        """
        reach = space.reach(x)
        span = length if math.isinf(reach) else min(length, 0.5 * reach)
        return cls(space.geodesic(x, space.exp(x, u, span)), length)

    @property
    def base(self):
        return self.geodesic.x


def tangent_metric(space, u, v):
    """
    d_x((gamma, t), (eta, s)) = lim |gamma(theta t) eta(theta s)| / theta.

    >>> from pybusemann import LpSpace
    >>> space = LpSpace(p=4, n=2)
    >>> u = DirectionWithLength.from_vector(space, [0, 0], [1, 0], 1.0)
    >>> v = DirectionWithLength.from_vector(space, [0, 0], [0, 1], 2.0)
    >>> round(tangent_metric(space, u, v), 12) == round(17 ** 0.25, 12)
    True
    """
    value, angle, gap = _relation_gap(space, u, v)
    if gap > RELATION_TOLERANCE:
        LOGGER.warning(
            "tangent distance %.12g disagrees with its angle %.12g at %s",
            value,
            angle,
            u.base,
        )
    return value


def _relation_gap(space, u, v):
    t, s = u.length, v.length
    limit = fixed_scale_limit(space, u.geodesic, v.geodesic, t, s)
    angle = angle_fixed_scale(space, u.geodesic, v.geodesic, t, s).value
    cosines = t * t + s * s - 2.0 * t * s * math.cos(angle)
    return float(limit.value), angle, abs(limit.value**2 - cosines) / max(t, s) ** 2


def metric_relation_residual(space, x, u, v, t, s):
    """
    Tolerance minus the relative gap in d_x^2 = t^2 + s^2 - 2 t s cos(angle)
    for the germs along ``u`` and ``v`` at scales ``t`` and ``s``.
    """
    first = DirectionWithLength.from_vector(space, x, u, t)
    second = DirectionWithLength.from_vector(space, x, v, s)
    return RELATION_TOLERANCE - _relation_gap(space, first, second)[2]


def replay_metric_relation(space, witness):
    x = space.validate(witness["x"])
    return metric_relation_residual(
        space, x, witness["u"], witness["v"], witness["t"], witness["s"]
    )


def direction_angle_metric(space, u, v):
    """
    The angle of fixed scale between two directions of common length.
    """
    if not math.isclose(u.length, v.length, rel_tol=1e-12):
        raise InputError(
            "Directions need a common length. Got {} and {}".format(u.length, v.length)
        )
    return angle_fixed_scale(space, u.geodesic, v.geodesic, u.length, u.length).value


def _direction_vectors(dim, count, rng):
    """
    Chart directions: evenly spaced around the circle in the plane, in
    angular order, and uniform on the sphere in higher dimension.
    """
    if dim == 2:
        phi = 2 * math.pi * np.arange(count) / count
        return np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    return unit_vectors(dim, count, rng)


def packing_directions(space, x, l, eps, budget=128, seed=0, doubling=None):
    """
    Greedy eps-separated set of sampled directions with common length ``l``
    at ``x``, compared with the doubling bound N(eps / 4).

    :param doubling: doubling constant of the model; measured around ``x``
                     when not given
    """
    if not eps > 0:
        raise InputError("eps must be positive. Got {}".format(eps))
    x = space.validate(x)
    rng = make_rng(seed)
    vectors = _direction_vectors(space.tangent_dim, budget, rng)
    directions = [DirectionWithLength.from_vector(space, x, u, l) for u in vectors]

    angles = np.zeros((budget, budget))
    for i, j in itertools.combinations(range(budget), 2):
        angle = direction_angle_metric(space, directions[i], directions[j])
        angles[i, j] = angles[j, i] = angle
    count = len(greedy_net(lambda i: angles[i], budget, eps))

    if doubling is None:
        reach = space.reach(x)
        radius = space.domain_radius if math.isinf(reach) else 0.5 * reach
        doubling = doubling_constant(space, x, radius, seed=seed)
    bound = packing_bound(doubling, eps / 4.0)
    LOGGER.debug("%d directions %g-separated at %s, bound %d", count, eps, x, bound)
    return DirectionPacking(count, bound, count <= bound, doubling)


class FittedNorm(object):
    """
    A norm on R^n given by the radii of its unit ball in sampled
    directions.

    Radii are interpolated by a periodic cubic spline in the plane and by
    radial basis functions on the sphere in higher dimension.
    """

    def __init__(self, directions, radii, drift=0.0):
        directions = np.asarray(directions, dtype=float)
        radii = np.asarray(radii, dtype=float)
        if np.any(radii <= 0):
            raise InputError("Unit ball radii must be positive")
        self.dim = directions.shape[-1]
        self.directions = directions
        self.radii = radii
        self.drift = float(drift)
        if self.dim == 2:
            self.rule = "cubic-spline"
            phi = np.mod(np.arctan2(directions[:, 1], directions[:, 0]), 2 * math.pi)
            order = np.argsort(phi)
            phi, values = phi[order], radii[order]
            self._spline = interpolate.CubicSpline(
                np.append(phi, phi[0] + 2 * math.pi),
                np.append(values, values[0]),
                bc_type="periodic",
            )
        else:
            self.rule = "rbf"
            self._rbf = interpolate.RBFInterpolator(
                directions, radii, kernel="thin_plate_spline"
            )

    def __repr__(self):
        return "<FittedNorm dim={} directions={} rule={}>".format(
            self.dim, len(self.directions), self.rule
        )

    def radius(self, u):
        u = np.asarray(u, dtype=float)
        if self.dim == 2:
            return self._spline(np.mod(np.arctan2(u[..., 1], u[..., 0]), 2 * math.pi))
        flat = u.reshape(-1, self.dim)
        return self._rbf(flat).reshape(u.shape[:-1])

    def __call__(self, v):
        v = np.asarray(v, dtype=float)
        size = np.linalg.norm(v, axis=-1)
        safe = np.where(size > 0, size, 1.0)
        return np.where(size > 0, size / self.radius(v / safe[..., None]), 0.0)

    @property
    def symmetry_error(self):
        """
        Largest relative gap between radius(u) and radius(-u).
        """
        gap = np.abs(self.radius(self.directions) - self.radius(-self.directions))
        return float(np.max(gap / self.radii))

    @property
    def convexity_gap(self):
        """
        How far the deepest sampled boundary point sits inside the convex
        hull of the unit ball samples, relative to the median radius.
        Zero for a convex ball.
        """
        boundary = self.radii[:, None] * self.directions
        hull = spatial.ConvexHull(boundary)
        normals, offsets = hull.equations[:, :-1], hull.equations[:, -1]
        depth = np.max(boundary @ normals.T + offsets, axis=1)
        return float(max(0.0, -np.min(depth)) / np.median(self.radii))


def _fit_directions(dim, count, rng):
    if dim == 2:
        return _direction_vectors(2, count, rng)
    half = unit_vectors(dim, count // 2, rng)
    return np.concatenate([half, -half])


def fit_norm(
    space, x, scales=(1e-2, 5e-3, 2.5e-3), directions=None, seed=0, tolerance=0.02
):
    """
    Fit the tangent norm at ``x`` from blow-up distances in the chart.

    Along each chart direction u the blow-up distance
    |x, step(x, lam u)| / lam is taken at every scale; the unit-ball
    radius is the inverse of its median. Radii that drift across scales by
    more than ``tolerance`` mean the tangent cone is not conical at ``x``
    and are logged.

    :param directions: 128 in the plane, 512 in higher dimension by default
    """
    x = space.validate(x)
    dim = space.tangent_dim
    if directions is None:
        directions = 128 if dim == 2 else 512
    vectors = _fit_directions(dim, directions, make_rng(seed))
    ratios = []
    for lam in scales:
        steps = space.chart_step(x, lam * vectors)
        ratios.append(space.get_distance(x, steps) / lam)
    ratios = np.array(ratios)
    median = np.median(ratios, axis=0)
    drift = float(np.max((ratios.max(axis=0) - ratios.min(axis=0)) / median))
    if drift > tolerance:
        LOGGER.warning("tangent radii at %s drift by %.3g across scales", x, drift)
    return FittedNorm(vectors, 1.0 / median, drift)


def certify_norm(norm, S, power=None, constant=1.0, trials=2000, seed=0):
    """
    Check a fitted norm for 2-uniform smoothness with constant ``S`` and,
    when ``power`` is given, ``power``-uniform convexity with ``constant``.

    Residuals down to minus the fit's own error (drift, asymmetry and
    convexity gap) still certify.
    """
    smooth = check_norm_uniform(None, SMOOTH, 2, S, trials, seed, n=norm.dim, norm=norm)
    convex = None
    if power is not None:
        convex = check_norm_uniform(
            None, CONVEX, power, constant, trials, seed, n=norm.dim, norm=norm
        )
    slack = norm.drift + norm.symmetry_error + norm.convexity_gap + 1e-6
    certified = smooth.worst_residual >= -slack and (
        convex is None or convex.worst_residual >= -slack
    )
    return NormFit(norm, smooth, convex, bool(certified))
