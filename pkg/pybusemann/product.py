import numpy as np

from .exceptions import InputError
from .space import CurvatureParams, Kind, SpaceModel


class ProductSpace(SpaceModel):
    """
    The l^2 product of two models.

    Charts are the concatenation of the factor charts. Geodesics run
    along both factor geodesics at the same time, each at constant speed,
    and the declared constants combine as S = max, C = max, D = min,
    n = sum.

    >>> from pybusemann import LpSpace, ProductSpace
    >>> plane = ProductSpace(LpSpace(p=2, n=1), LpSpace(p=2, n=1))
    >>> plane.distance([0, 0], [3, 4])
    5.0
    """

    kind = Kind.PRODUCT

    def __init__(self, first, second, S=None, C=None, D=None):
        self.first = first
        self.second = second
        self.split = first.chart_dim
        self.tangent_split = first.tangent_dim
        self.chart_dim = first.chart_dim + second.chart_dim
        self.tangent_dim = first.tangent_dim + second.tangent_dim
        a, b = first.params, second.params
        super().__init__(
            CurvatureParams(
                S=max(a.S, b.S) if S is None else S,
                C=max(a.C, b.C) if C is None else C,
                D=min(a.D, b.D) if D is None else D,
                n=a.n + b.n,
            )
        )

    @classmethod
    def from_description(cls, description):
        from . import parse_space

        try:
            first, second = description["first"], description["second"]
        except KeyError:
            raise InputError("A product description needs first and second factors")
        return cls(
            parse_space(first),
            parse_space(second),
            S=description.get("S"),
            C=description.get("C"),
            D=description.get("D"),
        )

    @property
    def label(self):
        return "product ({}) x ({})".format(self.first.label, self.second.label)

    def get_description_parts(self):
        return {"first": self.first.description, "second": self.second.description}

    def parts(self, x):
        return x[..., : self.split], x[..., self.split :]

    def tangent_parts(self, v):
        return v[..., : self.tangent_split], v[..., self.tangent_split :]

    @property
    def base_point(self):
        return np.concatenate([self.first.base_point, self.second.base_point])

    @property
    def domain_radius(self):
        return min(self.first.domain_radius, self.second.domain_radius)

    def check_chart(self, x):
        a, b = self.parts(x)
        return np.concatenate(
            [self.first.check_chart(a), self.second.check_chart(b)], axis=-1
        )

    def check_segment(self, x, y):
        (xa, xb), (ya, yb) = self.parts(x), self.parts(y)
        self.first.check_segment(xa, ya)
        self.second.check_segment(xb, yb)

    def check_ball(self, center, r):
        a, b = self.parts(center)
        self.first.check_ball(a, r)
        self.second.check_ball(b, r)

    def is_unique(self, x, y):
        (xa, xb), (ya, yb) = self.parts(x), self.parts(y)
        unique = True
        if self.first.get_distance(xa, ya) > 0:
            unique = unique and self.first.is_unique(xa, ya)
        if self.second.get_distance(xb, yb) > 0:
            unique = unique and self.second.is_unique(xb, yb)
        return unique

    def get_distance(self, x, y):
        (xa, xb), (ya, yb) = self.parts(x), self.parts(y)
        return np.hypot(self.first.get_distance(xa, ya), self.second.get_distance(xb, yb))

    def interpolate(self, x, y, t):
        (xa, xb), (ya, yb) = self.parts(x), self.parts(y)
        return np.concatenate(
            [self.first.interpolate(xa, ya, t), self.second.interpolate(xb, yb, t)],
            axis=-1,
        )

    def tangent_norm(self, v):
        a, b = self.tangent_parts(np.asarray(v, dtype=float))
        return np.hypot(self.first.tangent_norm(a), self.second.tangent_norm(b))

    def chart_step(self, x, v, strict=True):
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        xa, xb = self.parts(x)
        va, vb = self.tangent_parts(v)
        return np.concatenate(
            [
                self.first.chart_step(xa, va, strict),
                self.second.chart_step(xb, vb, strict),
            ],
            axis=-1,
        )

    def reach(self, x):
        a, b = self.parts(np.asarray(x, dtype=float))
        return min(self.first.reach(a), self.second.reach(b))

    def local_convexity_radius(self, p):
        a, b = self.parts(np.asarray(p, dtype=float))
        return np.minimum(
            self.first.local_convexity_radius(a), self.second.local_convexity_radius(b)
        )

    def contains(self, x):
        a, b = self.parts(np.asarray(x, dtype=float))
        return self.first.contains(a) & self.second.contains(b)

    def enclosure(self, center, r):
        a, b = self.parts(np.asarray(center, dtype=float))
        draw_a, measure_a = self.first.enclosure(a, r)
        draw_b, measure_b = self.second.enclosure(b, r)

        def draw(rng, count):
            return np.concatenate([draw_a(rng, count), draw_b(rng, count)], axis=-1)

        return draw, measure_a * measure_b
