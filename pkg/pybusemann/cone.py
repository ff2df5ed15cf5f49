import math

import numpy as np

from .exceptions import InputError, RangeError
from .space import CurvatureParams, Kind, SpaceModel


class EuclideanCone(SpaceModel):
    """
    The flat cone of total angle ``theta`` in (0, 2*pi).

    Charts are ``(radius, angle)`` with the angle taken modulo ``theta``;
    the apex is the single point of radius 0 and is stored with angle 0.
    Distances and geodesics come from unfolding the two rays into the
    plane: with angular gap g = min(a, theta - a) the distance is the
    Euclidean one between points at angle g, and a geodesic is the
    straight unfolded segment folded back onto the cone.

    >>> from pybusemann import EuclideanCone
    >>> cone = EuclideanCone(theta=math.pi)
    >>> round(cone.distance([1, 0], [1, math.pi / 2]), 12)  # sqrt(2)
    1.414213562373
    >>> cone = EuclideanCone(theta=3.0)
    >>> mid = cone.geodesic([1, 0], [1, 1]).midpoint
    >>> round(mid[0], 12) == round(math.cos(0.5), 12)
    True
    """

    kind = Kind.CONE
    chart_dim = 2
    tangent_dim = 2

    def __init__(self, theta, S=1.0, C=0.0, D=math.inf):
        if not 0 < theta < 2 * math.pi:
            raise InputError("Cone angle must lie in (0, 2*pi). Got {}".format(theta))
        self.theta = float(theta)
        super().__init__(CurvatureParams(S=S, C=C, D=D, n=2))

    @classmethod
    def from_description(cls, description):
        if "theta" not in description:
            raise InputError("A cone description needs theta")
        return cls(
            theta=float(description["theta"]),
            S=float(description.get("S") or 1.0),
            C=float(description.get("C") or 0.0),
            D=description.get("D"),
        )

    @property
    def label(self):
        return "cone theta={:g}".format(self.theta)

    def get_description_parts(self):
        return {"theta": self.theta}

    @property
    def base_point(self):
        return np.zeros(2)

    def wrap(self, angle):
        angle = np.mod(angle, self.theta)
        # np.mod can round a tiny negative angle up to theta itself
        return np.where(angle >= self.theta, angle - self.theta, angle)

    def check_chart(self, x):
        radius = x[..., 0]
        if np.any(radius < 0):
            raise InputError("Cone radius must be non-negative. Got {}".format(x))
        angle = np.where(radius > 0, self.wrap(x[..., 1]), 0.0)
        return np.stack([radius, angle], axis=-1)

    def signed_gap(self, a1, a2):
        """
        Angle from ``a1`` to ``a2`` in (-theta/2, theta/2].
        """
        gap = np.mod(a2 - a1, self.theta)
        return np.where(gap <= self.theta / 2, gap, gap - self.theta)

    def get_distance(self, x, y):
        r1, r2 = x[..., 0], y[..., 0]
        gap = self.signed_gap(x[..., 1], y[..., 1])
        # the gap never reaches pi because theta < 2*pi, so the unfolded
        # segment never runs through the apex
        return np.sqrt((r1 - r2) ** 2 + 4.0 * r1 * r2 * np.sin(gap / 2.0) ** 2)

    def is_unique(self, x, y):
        if x[0] == 0 or y[0] == 0:
            return True
        gap = abs(float(self.signed_gap(x[1], y[1])))
        return abs(gap - self.theta / 2) > 1e-12

    def fold(self, base_angle, qx, qy, strict=True):
        """
        Fold the unfolded plane point ``(qx, qy)`` back onto the cone, the
        positive x axis being the ray at ``base_angle``.

        Points whose unfolded segment would pass the apex raise
        :class:`RangeError`, or become NaN when ``strict`` is off.
        """
        rho = np.hypot(qx, qy)
        beta = np.arctan2(qy, qx)
        past_apex = np.abs(beta) > self.theta / 2 + 1e-12
        if strict and np.any(past_apex):
            raise RangeError(
                "Geodesic extension runs past the apex of {}".format(self.label)
            )
        angle = np.where(rho > 0, self.wrap(base_angle + beta), 0.0)
        folded = np.stack([rho, angle], axis=-1)
        return np.where(past_apex[..., None], np.nan, folded)

    def interpolate(self, x, y, t):
        t = np.asarray(t, dtype=float)
        r1, a1 = x[..., 0], x[..., 1]
        r2 = y[..., 0]
        gap = self.signed_gap(a1, y[..., 1])
        qx = r1 + t * (r2 * np.cos(gap) - r1)
        qy = t * r2 * np.sin(gap)
        return self.fold(a1, qx, qy)

    def chart_step(self, x, v, strict=True):
        """
        Step by ``v`` given in the local frame (radial, angular) at ``x``.

        At the apex the direction circle of length 2*pi is mapped onto the
        apex circle of length theta.
        """
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        rho, angle = x[..., 0], x[..., 1]
        if np.all(rho == 0):
            length = np.hypot(v[..., 0], v[..., 1])
            phi = np.mod(np.arctan2(v[..., 1], v[..., 0]), 2 * math.pi)
            apex_angle = self.wrap(phi * self.theta / (2 * math.pi))
            apex_angle = np.where(length > 0, apex_angle, 0.0)
            return np.stack([length, apex_angle], axis=-1)
        if np.any(rho == 0):
            raise InputError("chart_step batches cannot mix the apex with other points")
        return self.fold(angle, rho + v[..., 0], v[..., 1], strict=strict)

    def reach(self, x):
        rho = float(np.asarray(x, dtype=float)[0])
        if rho == 0:
            return math.inf
        return rho * math.sin(min(self.theta / 2, math.pi / 2))

    def local_convexity_radius(self, p):
        # half the reach: the ball is a flat disc away from the apex
        rho = np.asarray(p, dtype=float)[..., 0]
        flat = rho * math.sin(min(self.theta / 2, math.pi / 2)) / 2
        return np.minimum(self.params.D, flat)

    def enclosure(self, center, r):
        outer = float(center[0]) + r
        theta = self.theta

        def draw(rng, count):
            rho = outer * np.sqrt(rng.uniform(size=count))
            angle = theta * rng.uniform(size=count)
            return np.stack([rho, angle], axis=-1)

        return draw, theta / 2.0 * outer**2
