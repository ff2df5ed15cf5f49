import logging
import math
from collections import namedtuple
from enum import Enum

import numpy as np

from .exceptions import DegenerateSegmentError, InputError
from .utils import make_rng, unit_vectors

LOGGER = logging.getLogger(__name__)


class Kind(Enum):
    """
    The model geodesic spaces the package knows how to build.

    The value is the ``kind`` key of a space description.
    """

    LP = "lp"
    CONE = "cone"
    SPHERE = "sphere"
    PRODUCT = "product"


class CurvatureParams(namedtuple("CurvatureParams", "S C D n")):
    """
    Declared curvature parameters of a model.

    S - smoothness (concavity) constant, at least 1
    C - local semi-convexity constant, non-negative
    D - radius in which semi-convexity applies (``math.inf`` when unbounded)
    n - expected Hausdorff dimension
    """

    __slots__ = ()

    def __new__(cls, S=1.0, C=0.0, D=math.inf, n=2):
        if not S >= 1:
            raise InputError("S must be at least 1. Got {}".format(S))
        if not C >= 0:
            raise InputError("C must be non-negative. Got {}".format(C))
        if D is None:
            D = math.inf
        if not D > 0:
            raise InputError("D must be positive. Got {}".format(D))
        if int(n) < 1:
            raise InputError("n must be a positive integer. Got {}".format(n))
        return super().__new__(cls, float(S), float(C), float(D), int(n))

    def to_dict(self):
        return {
            "S": self.S,
            "C": self.C,
            "D": None if math.isinf(self.D) else self.D,
            "n": self.n,
        }


class GeodesicSegment(object):
    """
    A constant-speed geodesic from ``x`` (t = 0) to ``y`` (t = 1).

    Calling the segment evaluates it; ``at_distance`` uses the unit-speed
    parametrization. Evaluation beyond [0, 1] extends the geodesic where
    the model allows it.

    >>> from pybusemann import LpSpace
    >>> space = LpSpace(p=2, n=2)
    >>> gamma = space.geodesic([0, 0], [1, 0])
    >>> gamma(0.5)
    array([0.5, 0. ])
    >>> gamma.length
    1.0
    """

    def __init__(self, space, x, y, length, unique=True):
        self.space = space
        self.x = x
        self.y = y
        self.length = length
        self.unique = unique

    def __call__(self, t):
        return self.space.interpolate(self.x, self.y, t)

    def at_distance(self, s):
        return self(np.asarray(s, dtype=float) / self.length)

    def reversed(self):
        return GeodesicSegment(self.space, self.y, self.x, self.length, self.unique)

    @property
    def midpoint(self):
        return self(0.5)

    def __repr__(self):
        return "<GeodesicSegment {} -> {} length={:.6g}>".format(
            list(self.x), list(self.y), self.length
        )


class SpaceModel(object):
    """
    A model geodesic space with exact distances and geodesics.

    Points are numpy arrays whose last axis holds the chart coordinates;
    every geometric primitive broadcasts over the leading axes, so a batch
    of configurations is evaluated in one call.
    """

    kind = None
    chart_dim = None
    tangent_dim = None

    def __init__(self, params):
        self.params = params

    def __eq__(self, other):
        return isinstance(other, SpaceModel) and self.description == other.description

    def __hash__(self):
        return hash(repr(self))

    def __repr__(self):
        return "<{}>".format(self.label)

    @property
    def label(self):
        raise NotImplementedError()

    @property
    def description(self):
        """
        A plain mapping that :func:`pybusemann.parse_space` turns back into
        an equal model.
        """
        description = {"kind": self.kind.value}
        description.update(self.get_description_parts())
        params = self.params.to_dict()
        description.update(S=params["S"], C=params["C"], D=params["D"])
        return description

    def get_description_parts(self):
        raise NotImplementedError()

    # Charts

    def validate(self, x):
        """
        Return ``x`` as a float array in canonical chart form.

        Raises :class:`InputError` if the coordinate count does not match
        the chart dimension or the coordinates are not a point of the model.
        """
        x = np.asarray(x, dtype=float)
        if x.ndim == 0 or x.shape[-1] != self.chart_dim:
            raise InputError(
                "{} expects {} chart coordinates. Got shape {}".format(
                    self.label, self.chart_dim, x.shape
                )
            )
        if not np.all(np.isfinite(x)):
            raise InputError("Chart coordinates must be finite. Got {}".format(x))
        return self.check_chart(x)

    def check_chart(self, x):
        return x

    @property
    def base_point(self):
        raise NotImplementedError()

    @property
    def domain_radius(self):
        return 1.0

    # Metric and geodesics

    def distance(self, x, y):
        """
        Exact model distance between ``x`` and ``y``.
        """
        d = self.get_distance(self.validate(x), self.validate(y))
        if np.ndim(d) == 0:
            return float(d)
        return d

    def get_distance(self, x, y):
        """
        Distance on already validated (and broadcastable) charts.
        """
        raise NotImplementedError()

    def get_distance_gap(self, p, x, y):
        """
        |p y| - |p x| on validated charts. Models whose distance has a
        closed form override this with a cancellation-free version.
        """
        return self.get_distance(p, y) - self.get_distance(p, x)

    def geodesic(self, x, y):
        """
        The constant-speed minimizing geodesic from ``x`` to ``y``.
        """
        x = self.validate(x)
        y = self.validate(y)
        if x.ndim != 1 or y.ndim != 1:
            raise InputError("geodesic expects single points, not batches")
        length = float(self.get_distance(x, y))
        if length == 0:
            raise DegenerateSegmentError(
                "Cannot build a geodesic from {} to itself".format(x)
            )
        self.check_segment(x, y)
        return GeodesicSegment(self, x, y, length, unique=self.is_unique(x, y))

    def check_segment(self, x, y):
        pass

    def is_unique(self, x, y):
        return True

    def interpolate(self, x, y, t):
        """
        Evaluate the constant-speed geodesics from ``x`` to ``y`` at ``t``.

        ``t`` broadcasts against the leading axes of ``x`` and ``y``.
        """
        raise NotImplementedError()

    # Tangent directions

    def tangent_norm(self, v):
        return np.linalg.norm(np.asarray(v, dtype=float), axis=-1)

    def chart_step(self, x, v, strict=True):
        """
        Move from ``x`` by the tangent chart vector ``v``.

        With ``strict`` off, steps that leave the model come back as NaN
        rows instead of raising.
        """
        raise NotImplementedError()

    def exp(self, x, u, r, strict=True):
        """
        The point at distance ``r`` along the geodesic leaving ``x`` in
        direction ``u``.
        """
        u = np.asarray(u, dtype=float)
        if u.shape[-1] != self.tangent_dim:
            raise InputError(
                "{} expects {}-dimensional directions. Got shape {}".format(
                    self.label, self.tangent_dim, u.shape
                )
            )
        norm = self.tangent_norm(u)
        if np.any(norm == 0):
            raise InputError("Direction must be non-zero")
        r = np.asarray(r, dtype=float)
        return self.chart_step(x, (r / norm)[..., None] * u, strict=strict)

    def reach(self, x):
        """
        Geodesic length from ``x`` that is valid in every direction.
        """
        return math.inf

    def local_convexity_radius(self, p):
        """
        Radius around ``p`` in which the declared semi-convexity constant applies.

        Broadcasts over a batch of points.
        """
        p = np.asarray(p, dtype=float)
        return np.full(p.shape[:-1], self.params.D)

    def contains(self, x):
        """
        Mask of the points of a batch that lie in the model's valid region.
        """
        x = np.asarray(x, dtype=float)
        return np.ones(x.shape[:-1], dtype=bool)

    def random_directions(self, count, rng):
        return unit_vectors(self.tangent_dim, count, rng)

    # Sampling

    def enclosure(self, center, r):
        """
        A region containing B(center, r) that can be sampled uniformly.

        :return: ``(draw, measure)`` where ``draw(rng, count)`` returns
                 uniform points of the region and ``measure`` is its
                 n-dimensional measure
        """
        raise NotImplementedError()

    def check_ball(self, center, r):
        pass

    def sample_ball(self, center, r, count, seed):
        """
        Sample ``count`` points uniformly (for the model's Hausdorff
        measure) from the ball B(center, r), deterministically given ``seed``.
        """
        center = self.validate(center)
        if not r > 0:
            raise InputError("Ball radius must be positive. Got {}".format(r))
        if count < 1:
            raise InputError("Sample count must be at least 1. Got {}".format(count))
        self.check_ball(center, r)
        rng = make_rng(seed)
        draw, _ = self.enclosure(center, r)

        accepted = []
        total = 0
        while total < count:
            batch = draw(rng, max(2 * (count - total), 64))
            batch = batch[self.get_distance(center, batch) <= r]
            accepted.append(batch)
            total += len(batch)
        return np.concatenate(accepted)[:count]

    def sample_domain(self, count, rng):
        """
        Uniform points of the default working region around the base point.
        """
        draw, _ = self.enclosure(self.base_point, self.domain_radius)
        return draw(rng, count)

    def structured_configurations(self):
        """
        Configurations ``(p, x0, x1)`` tried before random ones when hunting
        counterexamples.
        """
        empty = np.empty((0, self.chart_dim))
        return empty, empty, empty
