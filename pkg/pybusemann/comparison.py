"""
Euclidean comparison triangles and the two notions of angle.

The angle viewed from a point p at x along a geodesic xi is the limit of
comparison-type quotients of |p xi(t)| as t -> 0; the angle of fixed
scale between two geodesics from x is the limit of comparison angles of
the rescaled triangles x, gamma(theta t), eta(theta s). Both limits are
monotone under the declared curvature parameters, and a move against the
expected direction is reported as a curvature violation.
"""
import logging
import math
from collections import namedtuple

import numpy as np

from .exceptions import (
    BusemannConcavityViolation,
    CurvatureViolation,
    DegenerateVertexError,
    DomainError,
    InputError,
)
from .utils import (
    CLAMP_TOLERANCE,
    NON_DECREASING,
    NON_INCREASING,
    clamp_cosine,
    monotone_defect,
    monotone_limit,
    richardson_limit,
)

LOGGER = logging.getLogger(__name__)

#: S-concave mode of :func:`angle_from_point`
CONCAVE = "concave"
#: locally semi-convex mode of :func:`angle_from_point`
SEMICONVEX = "semiconvex"

#: Allowed move of a monotone quotient against its direction
MONOTONE_TOLERANCE = 1e-9

#: Gap between the angle derivative and the finite difference tolerated
DERIVATIVE_TOLERANCE = 1e-5

AngleEstimate = namedtuple("AngleEstimate", "value grid residual monotone_ok clamped")

ErrorBudget = namedtuple(
    "ErrorBudget", "delta_S delta_C bar_delta_S bar_delta_SC clamped"
)

DerivativeCheck = namedtuple("DerivativeCheck", "value finite_difference mismatch")


class ComparisonTriangle(namedtuple("ComparisonTriangle", "a b c")):
    """
    Euclidean triangle with sides a = |xy|, b = |xz| and c = |yz|.

    >>> triangle = ComparisonTriangle(1.0, 1.0, math.sqrt(2))
    >>> round(triangle.angle_at_x, 12) == round(math.pi / 2, 12)
    True
    >>> round(sum(triangle.angles), 12) == round(math.pi, 12)
    True
    """

    __slots__ = ()

    @property
    def angle_at_x(self):
        return comparison_angle(self.a, self.b, self.c)

    @property
    def angle_at_y(self):
        return comparison_angle(self.a, self.c, self.b)

    @property
    def angle_at_z(self):
        return comparison_angle(self.b, self.c, self.a)

    @property
    def angles(self):
        return self.angle_at_x, self.angle_at_y, self.angle_at_z


def comparison_angle(a, b, c, tolerance=CLAMP_TOLERANCE):
    """
    Angle opposite ``c`` in the Euclidean triangle with sides ``a``, ``b``, ``c``.

    Works on scalars and on broadcastable arrays. Cosines are clamped
    into [-1, 1]; a clamp further than ``tolerance`` is logged.

    >>> comparison_angle(1, 1, 2) == math.pi
    True
    >>> round(comparison_angle(1, 1, 2 ** (1 / 3)), 4)
    1.363

    :raises DegenerateVertexError: if ``a`` or ``b`` is zero
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    if np.any(a == 0) or np.any(b == 0):
        raise DegenerateVertexError("Comparison angle needs sides a, b > 0")
    cosine, fired = clamp_cosine((a * a + b * b - c * c) / (2.0 * a * b), tolerance)
    if fired:
        LOGGER.debug("comparison cosine clamped for sides %r, %r, %r", a, b, c)
    angle = np.arccos(cosine)
    if np.ndim(angle) == 0:
        return float(angle)
    return angle


def error_functions(params, t, d):
    """
    The closed-form angle error budgets at scale ``t`` seen from distance ``d``.

        delta_S      = arccos(1 - (S - 1) t / (2d))
        delta_C      = arccos(1 - (C + 1) t / (2d))
        bar_delta_S  = arccos(1 - S t / (2d))
        bar_delta_SC = arccos(1 - (S + C) t / (2d))

    ``clamped`` is set when some argument left [-1, 1], that is when
    ``t`` is too large relative to ``d`` for the budget to mean anything.

    >>> from pybusemann import CurvatureParams
    >>> budget = error_functions(CurvatureParams(S=2.0), 1.0, 1.0)
    >>> budget.bar_delta_S == math.pi / 2
    True
    """
    if d <= 0:
        raise DomainError("Error functions need a positive distance. Got {}".format(d))
    if t < 0:
        raise DomainError("Error functions need t >= 0. Got {}".format(t))
    ratio = t / (2.0 * d)
    budgets = []
    clamped = False
    for factor in (params.S - 1, params.C + 1, params.S, params.S + params.C):
        cosine, fired = clamp_cosine(1.0 - factor * ratio)
        clamped = clamped or fired
        budgets.append(math.acos(cosine))
    return ErrorBudget(*budgets, clamped=clamped)


def _vertex_distance(space, p, xi):
    px = space.distance(p, xi.x)
    if px == 0:
        raise DegenerateVertexError("The viewpoint {} is the vertex {}".format(p, xi.x))
    return px


def angle_from_point(space, p, xi, mode=CONCAVE, params=None):
    """
    The angle at ``xi(0)`` between ``xi`` and the direction of ``p``.

    The unit-speed quotient

        Q(t) = (|px|^2 - |p xi(t)|^2 + S t^2) / (2 t |px|)

    is non-increasing as t decreases on an S-concave space. In semi-convex
    mode the quotient uses ``- C t^2`` and is non-decreasing instead; it
    needs |px| < D. The arccosine of the limit is the angle.

    >>> from pybusemann import LpSpace
    >>> plane = LpSpace(p=2, n=2)
    >>> xi = plane.geodesic([0, 0], [0, 1])
    >>> round(angle_from_point(plane, [1, 0], xi).value, 9) == round(math.pi / 2, 9)
    True

    :param mode: :data:`CONCAVE` or :data:`SEMICONVEX`
    :param params: curvature parameters to assume, the space's own by default
    :raises CurvatureViolation: when the quotient moves against its direction
    """
    params = params or space.params
    p = space.validate(p)
    px = _vertex_distance(space, p, xi)

    if mode == CONCAVE:
        weight, direction = params.S, NON_INCREASING
    elif mode == SEMICONVEX:
        if not px < params.D:
            raise DomainError(
                "Semi-convex angles need |px| < D. Got |px| = {} with D = {}".format(
                    px, params.D
                )
            )
        weight, direction = -params.C, NON_DECREASING
    else:
        raise InputError("Unknown angle mode {}".format(mode))

    def quotient(t):
        p_xi = space.get_distance(p, xi.at_distance(t))
        return (px * px - p_xi * p_xi + weight * t * t) / (2.0 * t * px)

    start = min(xi.length, px / 4.0)
    limit = monotone_limit(
        quotient,
        start,
        direction=direction,
        floor=1e-6 * px,
        tolerance=MONOTONE_TOLERANCE,
    )
    cosine, clamped = clamp_cosine(limit.value)
    estimate = AngleEstimate(
        math.acos(cosine), limit.grid, limit.residual, limit.monotone_ok, clamped
    )
    if not limit.monotone_ok:
        raise CurvatureViolation(
            "Angle quotient at {} seen from {} is not {} under {}".format(
                xi.x, p, direction, params
            ),
            estimate=estimate,
            defect=monotone_defect(limit.values, direction),
        )
    return estimate


def fixed_scale_limit(space, gamma, eta, t, s):
    """
    The monotone limit of |gamma(theta t) eta(theta s)| / theta as theta -> 0,
    for unit-speed parametrizations of ``gamma`` and ``eta``.

    :raises BusemannConcavityViolation: if the ratio decreases as theta shrinks
    """
    if not np.allclose(gamma.x, eta.x, rtol=0, atol=1e-12):
        raise InputError(
            "Geodesics {} and {} do not share a base point".format(gamma, eta)
        )
    if not (t > 0 and s > 0):
        raise InputError("Scales must be positive. Got t={}, s={}".format(t, s))

    def ratio(theta):
        ends = gamma.at_distance(theta * t), eta.at_distance(theta * s)
        return space.get_distance(*ends) / theta

    start = min(1.0, gamma.length / t, eta.length / s)
    limit = monotone_limit(
        ratio,
        start,
        direction=NON_DECREASING,
        floor=1e-6 * start,
        tolerance=MONOTONE_TOLERANCE * max(t, s),
    )
    if not limit.monotone_ok:
        raise BusemannConcavityViolation(
            "Rescaled distances between {} and {} grow as the scale shrinks".format(
                gamma, eta
            ),
            estimate=limit,
        )
    return limit


def angle_fixed_scale(space, gamma, eta, t, s):
    """
    The angle of fixed scale between ``gamma`` at scale ``t`` and ``eta`` at
    scale ``s``.

    The comparison angle of x, gamma(theta t), eta(theta s) only grows as
    theta shrinks, so the supremum is the angle whose opposite side is
    the limit of the rescaled distances.

    >>> from pybusemann import LpSpace
    >>> space = LpSpace(p=4, n=2)
    >>> gamma = space.geodesic([0, 0], [1, 0])
    >>> eta = space.geodesic([0, 0], [0, 1])
    >>> value = angle_fixed_scale(space, gamma, eta, 1.0, 1.0).value
    >>> abs(value - math.acos(1 - 2 ** (2 / 4 - 1))) < 1e-9
    True
    """
    limit = fixed_scale_limit(space, gamma, eta, t, s)
    cosine, clamped = clamp_cosine((t * t + s * s - limit.value**2) / (2.0 * t * s))
    return AngleEstimate(
        math.acos(cosine), limit.grid, limit.residual, limit.monotone_ok, clamped
    )


def distance_derivative(space, p, xi, mode=CONCAVE, params=None):
    """
    The one-sided derivative of t -> |p xi(t)| at t = 0 for unit speed.

    It equals minus the cosine of the angle viewed from ``p``. The value
    is cross-checked against the second-order one-sided difference

        (-3 f(0) + 4 f(h) - f(2h)) / (2h)

    extrapolated over a few halvings of h. A gap above
    :data:`DERIVATIVE_TOLERANCE` sets ``mismatch`` and is logged.
    """
    angle = angle_from_point(space, p, xi, mode=mode, params=params)
    value = -math.cos(angle.value)

    p = space.validate(p)
    f0 = space.get_distance(p, xi.x)
    h0 = min(xi.length / 2.0, f0 / 8.0)

    differences = []
    for j in range(4):
        h = h0 * 0.5**j
        f1 = space.get_distance(p, xi.at_distance(h))
        f2 = space.get_distance(p, xi.at_distance(2 * h))
        differences.append((-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h))
    finite_difference = float(richardson_limit(2.0, differences))

    mismatch = abs(finite_difference - value) > DERIVATIVE_TOLERANCE
    if mismatch:
        LOGGER.warning(
            "Distance derivative %.9g disagrees with finite difference %.9g at %s",
            value,
            finite_difference,
            xi.x,
        )
    return DerivativeCheck(value, finite_difference, mismatch)
