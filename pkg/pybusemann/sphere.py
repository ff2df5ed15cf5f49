import math

import numpy as np

from .exceptions import InputError, RangeError
from .space import CurvatureParams, Kind, SpaceModel

#: Chart points must have unit length within this tolerance
UNIT_TOLERANCE = 1e-12

NORTH = np.array([0.0, 0.0, 1.0])


def _normalize(v):
    norm = np.linalg.norm(v, axis=-1)
    return v / np.where(norm > 0, norm, 1.0)[..., None]


class SphericalCap(SpaceModel):
    """
    The open cap of radius ``cap`` < pi/2 around the north pole of the
    round unit sphere.

    Points are unit 3-vectors. Caps smaller than a hemisphere are convex
    and uniquely geodesic, with great-circle arcs as geodesics.

    >>> from pybusemann import SphericalCap
    >>> cap = SphericalCap(cap=1.0)
    >>> mid = cap.geodesic([0, 0, 1], [1, 0, 0]).midpoint
    >>> round(float(np.arccos(mid[2])), 12) == round(math.pi / 4, 12)
    True

    The declared semi-convexity constant is 0: inside the cap every
    distance is below pi/2, where d*cot(d) > 0 and squared distance
    functions are convex along geodesics.
    """

    kind = Kind.SPHERE
    chart_dim = 3
    tangent_dim = 2

    def __init__(self, cap=1.0, S=1.0, C=0.0, D=None):
        if not 0 < cap < math.pi / 2:
            raise InputError("Cap radius must lie in (0, pi/2). Got {}".format(cap))
        self.cap = float(cap)
        if D is None:
            D = self.cap
        super().__init__(CurvatureParams(S=S, C=C, D=D, n=2))

    @classmethod
    def from_description(cls, description):
        return cls(
            cap=float(description.get("cap", 1.0)),
            S=float(description.get("S") or 1.0),
            C=float(description.get("C") or 0.0),
            D=description.get("D"),
        )

    @property
    def label(self):
        return "sphere cap={:g}".format(self.cap)

    def get_description_parts(self):
        return {"cap": self.cap}

    @property
    def base_point(self):
        return NORTH.copy()

    @property
    def domain_radius(self):
        return self.cap

    def check_chart(self, x):
        norm = np.linalg.norm(x, axis=-1)
        if np.any(np.abs(norm - 1.0) > UNIT_TOLERANCE):
            raise InputError("Sphere points must be unit vectors. Got {}".format(x))
        return x / norm[..., None]

    def colatitude(self, x):
        return self.get_distance(NORTH, np.asarray(x, dtype=float))

    def contains(self, x):
        return self.colatitude(x) <= self.cap + UNIT_TOLERANCE

    def check_segment(self, x, y):
        for point in (x, y):
            if self.colatitude(point) > self.cap + UNIT_TOLERANCE:
                raise RangeError("{} lies outside {}".format(point, self.label))

    def check_ball(self, center, r):
        if self.colatitude(center) + r > self.cap + UNIT_TOLERANCE:
            raise RangeError(
                "Ball of radius {} around {} escapes {}".format(r, center, self.label)
            )

    def get_distance(self, x, y):
        cross = np.linalg.norm(np.cross(x, y), axis=-1)
        dot = np.sum(x * y, axis=-1)
        return np.arctan2(cross, dot)

    def interpolate(self, x, y, t):
        t = np.asarray(t, dtype=float)[..., None]
        omega = self.get_distance(x, y)[..., None]
        short = omega < 1e-7
        # slerp weights; short arcs fall back to a normalized chord
        safe = np.where(short, 1.0, omega)
        sin_omega = np.sin(safe)
        a = np.where(short, 1.0 - t, np.sin((1.0 - t) * safe) / sin_omega)
        b = np.where(short, t, np.sin(t * safe) / sin_omega)
        return _normalize(a * x + b * y)

    def frame(self, x):
        """
        Orthonormal tangent frame ``(e1, e2)`` at ``x``: e1 points east,
        e2 = x cross e1 points north. At the poles e1 is the first axis.
        """
        east = np.cross(NORTH, x)
        size = np.linalg.norm(east, axis=-1)
        fallback = np.broadcast_to(np.array([1.0, 0.0, 0.0]), east.shape)
        at_pole = (size <= 1e-12)[..., None]
        e1 = np.where(at_pole, fallback, east / np.where(size > 0, size, 1.0)[..., None])
        e2 = np.cross(x, e1)
        return e1, e2

    def chart_step(self, x, v, strict=True):
        """
        The exponential map at ``x`` applied to ``v`` in the frame of
        :meth:`frame`.
        """
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        e1, e2 = self.frame(x)
        w = v[..., 0:1] * e1 + v[..., 1:2] * e2
        r = np.linalg.norm(w, axis=-1)[..., None]
        unit = w / np.where(r > 0, r, 1.0)
        return _normalize(np.cos(r) * x + np.sin(r) * unit)

    def reach(self, x):
        return max(self.cap - float(self.colatitude(x)), 0.0)

    def enclosure(self, center, r):
        """
        The geodesic ball itself, sampled exactly by drawing the height
        uniformly (Archimedes) and the azimuth uniformly.
        """
        center = np.asarray(center, dtype=float)
        e1, e2 = self.frame(center)
        lowest = math.cos(r)

        def draw(rng, count):
            z = 1.0 - rng.uniform(size=count) * (1.0 - lowest)
            phi = rng.uniform(0.0, 2 * math.pi, size=count)
            ring = np.sqrt(np.clip(1.0 - z * z, 0.0, None))[:, None]
            points = (
                z[:, None] * center
                + ring * (np.cos(phi)[:, None] * e1 + np.sin(phi)[:, None] * e2)
            )
            return _normalize(points)

        return draw, 2 * math.pi * (1.0 - lowest)
