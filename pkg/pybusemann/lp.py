import itertools
import math

import numpy as np

from .exceptions import InputError
from .space import CurvatureParams, Kind, SpaceModel


class LpSpace(SpaceModel):
    """
    R^n with the l^p norm for p >= 2.

    These norms are strictly convex, so geodesics are the unique straight
    segments. The declared constants are the 2-uniform smoothness constant
    S = p - 1 and C = 0 on the whole space.

    >>> from pybusemann import LpSpace
    >>> space = LpSpace(p=3, n=2)
    >>> space.distance([1, 0], [0, 1])  # 2 ** (1 / 3)
    1.2599210498948732
    >>> space.params
    CurvatureParams(S=2.0, C=0.0, D=inf, n=2)

    The Euclidean plane is ``LpSpace(p=2, n=2)``.
    """

    kind = Kind.LP

    def __init__(self, p=2.0, n=2, S=None, C=0.0, D=math.inf):
        if not (math.isfinite(p) and p >= 2):
            raise InputError("l^p models need a finite p >= 2. Got {}".format(p))
        if int(n) < 1:
            raise InputError("Dimension must be at least 1. Got {}".format(n))
        self.p = float(p)
        self.n = int(n)
        self.chart_dim = self.n
        self.tangent_dim = self.n
        if S is None:
            S = self.p - 1
        super().__init__(CurvatureParams(S=S, C=C, D=D, n=self.n))

    @classmethod
    def from_description(cls, description):
        return cls(
            p=float(description.get("p", 2.0)),
            n=int(description.get("n", 2)),
            S=description.get("S"),
            C=float(description.get("C") or 0.0),
            D=description.get("D"),
        )

    @property
    def label(self):
        return "lp p={:g} n={}".format(self.p, self.n)

    def get_description_parts(self):
        return {"p": self.p, "n": self.n}

    @property
    def base_point(self):
        return np.zeros(self.n)

    def norm(self, v):
        """
        The l^p norm along the last axis.

        Coordinates are divided by their largest magnitude before the
        power is taken so tiny vectors do not underflow.
        """
        v = np.abs(np.asarray(v, dtype=float))
        if self.p == 2:
            return np.sqrt(np.sum(v * v, axis=-1))
        top = np.max(v, axis=-1)
        safe = np.where(top > 0, top, 1.0)
        return top * np.sum((v / safe[..., None]) ** self.p, axis=-1) ** (1.0 / self.p)

    def tangent_norm(self, v):
        return self.norm(v)

    def get_distance(self, x, y):
        return self.norm(y - x)

    def get_distance_gap(self, p, x, y):
        """
        |p y| - |p x| without subtracting two rounded distances.

        With a = x - p and w = y - x, each coordinate contributes
        |a_i + w_i|^p - |a_i|^p, taken as |a_i|^p expm1(p log1p(w_i / a_i))
        when w_i is small against a_i, and the p-th root is expanded the
        same way. The gap keeps its relative accuracy when y is much
        closer to x than p is.

        >>> space = LpSpace(p=3, n=2)
        >>> gap = space.get_distance_gap([1e8, 0], [0, 0], [-1e-9, 0])
        >>> abs(gap - 1e-9) < 1e-22
        True
        """
        a = np.asarray(x, dtype=float) - np.asarray(p, dtype=float)
        w = np.asarray(y, dtype=float) - np.asarray(x, dtype=float)
        a, w = np.broadcast_arrays(a, w)
        top = np.max(np.abs(a), axis=-1)
        safe = np.where(top > 0, top, 1.0)[..., None]
        a, w = a / safe, w / safe
        power = np.abs(a) ** self.p
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            ratio = w / a
            close = np.abs(ratio) < 0.5
            stable = power * np.expm1(self.p * np.log1p(np.where(close, ratio, 0.0)))
            direct = np.abs(a + w) ** self.p - power
            total = np.sum(power, axis=-1)
            change = np.sum(np.where(close, stable, direct), axis=-1)
            gap = top * total ** (1.0 / self.p) * np.expm1(
                np.log1p(change / total) / self.p
            )
        return np.where(top > 0, gap, self.norm(w * safe))

    def interpolate(self, x, y, t):
        t = np.asarray(t, dtype=float)[..., None]
        return x + t * (y - x)

    def chart_step(self, x, v, strict=True):
        return np.asarray(x, dtype=float) + np.asarray(v, dtype=float)

    def enclosure(self, center, r):
        n = self.n

        def draw(rng, count):
            return center + r * rng.uniform(-1.0, 1.0, size=(count, n))

        return draw, (2.0 * r) ** n

    def structured_configurations(self):
        """
        Symmetric configurations where l^p inequalities are tightest.

        Short segments centred on a diagonal unit vector and tangent to the
        unit sphere there, with the viewpoint at the origin, attain the
        smoothness constant p - 1 in the limit. Axis-aligned segments seen
        from another axis complete the set.
        """
        n = self.n
        eye = np.eye(n)
        p_points, starts, ends = [], [], []
        half_lengths = (0.02, 0.1, 0.3)
        scale = 2.0 ** (-1.0 / self.p)

        for i, j in itertools.combinations(range(n), 2):
            for sign in (1.0, -1.0):
                centre = scale * (eye[i] + sign * eye[j])
                tangent = eye[i] - sign * eye[j]
                tangent = tangent / self.norm(tangent)
                for half in half_lengths:
                    p_points.append(np.zeros(n))
                    starts.append(centre - half * tangent)
                    ends.append(centre + half * tangent)

        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                for height in (0.5, 1.0):
                    p_points.append(height * eye[j])
                    starts.append(-eye[i])
                    ends.append(eye[i])
                for half in half_lengths:
                    p_points.append(np.zeros(n))
                    starts.append(eye[i] - half * eye[j])
                    ends.append(eye[i] + half * eye[j])

        if not p_points:
            return super().structured_configurations()
        return np.array(p_points), np.array(starts), np.array(ends)
