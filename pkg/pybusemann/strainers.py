"""
Strainers and strainer maps.

A (k, delta)-strainer at x is an ordered tuple of pairs (p_i, q_i). Each
pair is almost opposite at x, later pairs sit at hierarchically smaller
distances, and each later pair is almost orthogonal to the earlier p_i.
The distance map y -> (|p_1 y|, ..., |p_k y|) is then an almost
orthogonal coordinate chart near x.

The conditions are checked in the strictly inductive reading: level j is
tested against the points p_i with i < j only, never against earlier q_i.
"""
import logging
import math
from collections import namedtuple

import numpy as np
from scipy import optimize

from .comparison import CONCAVE, angle_from_point
from .exceptions import InputError, RangeError
from .space import CurvatureParams
from .utils import make_rng

LOGGER = logging.getLogger(__name__)

#: Margins above -SLACK count as satisfied strict inequalities
SLACK = 1e-9

#: Directions tried per level before doubling, and the doubling cap
DIRECTIONS = 64
MAX_DIRECTIONS = 512

#: Refined placements kept per level for backtracking, and the smallest
#: angle between their directions
BRANCHES = 3
BRANCH_SEPARATION = math.pi / 8

MAX_DESCENT_STEPS = 10**4
MAX_HALVINGS = 20

#: Verified improvements move the base at most this many working radii
DISPLACEMENT_BOUND = 2.0

#: Nearest strainer point, relative to the size of the base coordinates,
#: that still resolves strainer angles in double precision
SMALLEST_OFFSET = 1e-11

#: Relative floor of the preimage tolerance during improvement
PREIMAGE_FLOOR = 1e-14

#: Condition indices reported by :func:`is_k_strainer`
PAIR_CONDITION = 1
HIERARCHY_CONDITION = 2
ORTHOGONALITY_CONDITION = 3

StrainerPair = namedtuple("StrainerPair", "p q")

StrainerConstants = namedtuple("StrainerConstants", "delta_k epsilon_k bar_epsilon_k")

OneStrainerCheck = namedtuple(
    "OneStrainerCheck", "ok angle_margin distance_margin range_margin"
)

StrainerCheck = namedtuple("StrainerCheck", "ok level condition index margin margins")

SearchResult = namedtuple("SearchResult", "found strainer check")

PreimageResult = namedtuple("PreimageResult", "point converged steps error")

OpennessReport = namedtuple(
    "OpennessReport", "achieved_epsilon targets_tried failures worst_case"
)

BilipschitzBounds = namedtuple("BilipschitzBounds", "lower upper")

ImprovementResult = namedtuple(
    "ImprovementResult", "strainer verified failed_stage displacement working_radius"
)


class Strainer(object):
    """
    An ordered tuple of strainer pairs at a base point.

    Calling the strainer evaluates its strainer map.

    >>> from pybusemann import LpSpace
    >>> plane = LpSpace(p=2, n=2)
    >>> strainer = Strainer(plane, [([1, 0], [-0.004, 0])], 0.1, [0, 0])
    >>> strainer([0.5, 0])
    array([0.5])
    """

    def __init__(self, space, pairs, delta, base):
        pairs = tuple(
            StrainerPair(space.validate(p), space.validate(q)) for p, q in pairs
        )
        if not pairs:
            raise InputError("A strainer needs at least one pair")
        if not 0 < delta < 0.5:
            raise InputError("Strainer delta must lie in (0, 1/2). Got {}".format(delta))
        self.space = space
        self.pairs = pairs
        self.delta = float(delta)
        self.base = space.validate(base)

    @property
    def k(self):
        return len(self.pairs)

    @property
    def p_points(self):
        return np.array([pair.p for pair in self.pairs])

    @property
    def q_points(self):
        return np.array([pair.q for pair in self.pairs])

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        return self.space.get_distance(self.p_points, y[..., None, :])

    def __repr__(self):
        return "<Strainer k={} delta={:g} at {}>".format(
            self.k, self.delta, list(self.base)
        )

    def with_delta(self, delta):
        return Strainer(self.space, self.pairs, delta, self.base)

    def reordered(self, order):
        return Strainer(self.space, [self.pairs[i] for i in order], self.delta, self.base)

    def to_dict(self):
        return {
            "space": self.space.description,
            "delta": self.delta,
            "base": [float(v) for v in self.base],
            "pairs": [
                {"p": [float(v) for v in pair.p], "q": [float(v) for v in pair.q]}
                for pair in self.pairs
            ],
        }

    @classmethod
    def from_dict(cls, data):
        from . import parse_space

        space = parse_space(data["space"])
        pairs = [(pair["p"], pair["q"]) for pair in data["pairs"]]
        return cls(space, pairs, data["delta"], data["base"])


def strainer_constants(k, delta):
    """
    Closed-form openness constants of a k-strainer map.

        delta_k       = 2^(-2k-1) / k
        epsilon_k     = (1 - 2 delta) / 4^(k-1)
        bar_epsilon_k = epsilon_k / sqrt(k)

    >>> strainer_constants(1, 0.1).delta_k
    0.125
    >>> round(strainer_constants(3, 0.1).epsilon_k, 12)
    0.05
    """
    if int(k) != k or k < 1:
        raise InputError("Strainer level must be a positive integer. Got {}".format(k))
    if not 0 <= delta < 0.5:
        raise InputError("Strainer delta must lie in [0, 1/2). Got {}".format(delta))
    delta_k = 2.0 ** (-2 * k - 1) / k
    epsilon_k = (1 - 2 * delta) / 4.0 ** (k - 1)
    return StrainerConstants(delta_k, epsilon_k, epsilon_k / math.sqrt(k))


def _gap_cosine(far, near, gap):
    """
    Cosine of the angle at x in the triangle (f, x, y) with |fx| = ``far``,
    |xy| = ``near`` and |fy| = far + ``gap``.
    """
    with np.errstate(invalid="ignore", divide="ignore"):
        cosine = (near * near - 2.0 * far * gap - gap * gap) / (2.0 * far * near)
    return np.clip(cosine, -1.0, 1.0)


def _bar(factor, r, d):
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.arccos(np.clip(1.0 - factor * r / (2.0 * d), -1.0, 1.0))


def _pair_margins(space, params, x, p, q, delta):
    px = space.get_distance(x, p)
    qx = space.get_distance(x, q)
    gap = space.get_distance_gap(p, x, q)
    angle = np.arccos(_gap_cosine(px, qx, gap)) - (math.pi - delta)
    distance = delta - _bar(params.S, qx, px)
    in_range = params.D - px
    return angle, distance, in_range, px, qx


def _cross_margins(space, params, x, earlier, p, q, px, qx, delta):
    """
    Hierarchy and orthogonality margins of a level against an earlier p_i.
    """
    pix = space.get_distance(x, earlier)
    hierarchy = delta - _bar(params.S + params.C, px, pix)
    towards_p = np.arccos(_gap_cosine(pix, px, space.get_distance_gap(earlier, x, p)))
    towards_q = np.arccos(_gap_cosine(pix, qx, space.get_distance_gap(earlier, x, q)))
    return (
        hierarchy,
        delta - np.abs(towards_p - math.pi / 2),
        delta - np.abs(towards_q - math.pi / 2),
    )


def is_one_strainer(space, params, p, x, q, delta):
    """
    Whether ``q`` is a delta-opposite strainer of ``p`` at ``x``.

    The comparison angle at x must exceed pi - delta, the distance
    budget bar_delta_S(|qx|; |px|) must stay below delta, and |px| < D.

    >>> from pybusemann import LpSpace
    >>> plane = LpSpace(p=2, n=2)
    >>> is_one_strainer(plane, plane.params, [1, 0], [0, 0], [-0.004, 0], 0.1).ok
    True
    """
    p, x, q = space.validate(p), space.validate(x), space.validate(q)
    if space.get_distance(p, x) == 0 or space.get_distance(q, x) == 0:
        raise InputError("Strainer points must differ from the base point")
    angle, distance, in_range, _, _ = _pair_margins(space, params, x, p, q, delta)
    ok = min(angle, distance, in_range) > -SLACK
    return OneStrainerCheck(bool(ok), float(angle), float(distance), float(in_range))


def is_k_strainer(space, params, candidate):
    """
    Check every level of ``candidate`` inductively.

    On failure ``level`` (1-based), ``condition`` (:data:`PAIR_CONDITION`,
    :data:`HIERARCHY_CONDITION` or :data:`ORTHOGONALITY_CONDITION`) and
    ``index`` (the earlier pair involved, 1-based) name the first failing
    condition. ``margins`` lists the margins of every level.

    >>> from pybusemann import LpSpace
    >>> plane = LpSpace(p=2, n=2)
    >>> pairs = [([1, 0], [-0.004, 0]), ([0, 0.004], [0, -0.00002])]
    >>> is_k_strainer(plane, plane.params, Strainer(plane, pairs, 0.1, [0, 0])).ok
    True
    """
    x, delta = candidate.base, candidate.delta
    failure = None
    levels = []
    for j, pair in enumerate(candidate.pairs, start=1):
        angle, distance, in_range, px, qx = _pair_margins(
            space, params, x, pair.p, pair.q, delta
        )
        level = {
            "pair": [float(angle), float(distance), float(in_range)],
            "hierarchy": [],
            "orthogonality": [],
        }
        found = []
        if min(angle, distance, in_range) <= -SLACK:
            found.append((PAIR_CONDITION, None))
        for i, earlier in enumerate(candidate.pairs[: j - 1], start=1):
            hierarchy, towards_p, towards_q = _cross_margins(
                space, params, x, earlier.p, pair.p, pair.q, px, qx, delta
            )
            level["hierarchy"].append(float(hierarchy))
            level["orthogonality"].append([float(towards_p), float(towards_q)])
            if hierarchy <= -SLACK:
                found.append((HIERARCHY_CONDITION, i))
            if min(towards_p, towards_q) <= -SLACK:
                found.append((ORTHOGONALITY_CONDITION, i))
        levels.append(level)
        if found and failure is None:
            failure = (j,) + min(found, key=lambda item: item[0])

    margin = min(
        min(
            level["pair"]
            + level["hierarchy"]
            + [value for pair in level["orthogonality"] for value in pair]
        )
        for level in levels
    )
    if failure is None:
        return StrainerCheck(True, None, None, None, margin, levels)
    LOGGER.debug(
        "strainer %r fails condition %d at level %d", candidate, failure[1], failure[0]
    )
    return StrainerCheck(False, failure[0], failure[1], failure[2], margin, levels)


def strainer_map(strainer):
    """
    The map y -> (|p_1 y|, ..., |p_k y|) of ``strainer``.
    """
    space = strainer.space

    def evaluate(y):
        return strainer(space.validate(y))

    return evaluate


def _level_margins(space, params, x, earlier, p, q, delta):
    """
    Smallest margin of each candidate pair (rows of ``p``, ``q``) placed
    after the pairs whose p points are ``earlier``.
    """
    angle, distance, in_range, px, qx = _pair_margins(space, params, x, p, q, delta)
    margins = [angle, distance, np.broadcast_to(in_range, angle.shape)]
    for previous in earlier:
        margins.extend(_cross_margins(space, params, x, previous, p, q, px, qx, delta))
    worst = np.min(np.stack(margins), axis=0)
    inside = space.contains(p) & space.contains(q)
    return np.where(np.isnan(worst) | ~inside, -np.inf, worst)


def strainer_scale(params, k, delta, near):
    """
    The first-level scale at which :func:`find_strainer` places q_k at
    distance ``near`` from the base.

    >>> from pybusemann.space import CurvatureParams
    >>> scale = strainer_scale(CurvatureParams(S=1.0), 1, 0.1, 1e-3)
    >>> round(scale * (1 - math.cos(0.1)), 12)
    0.001
    """
    if not near > 0:
        raise InputError("Strainer offsets must be positive. Got {}".format(near))
    opposite = (1.0 - math.cos(delta)) / params.S
    shrink = delta**2 / (2.0 * (params.S + params.C))
    return near / (opposite * shrink ** (k - 1))


def _level_candidates(space, params, x, earlier, rho, offset, delta, rng):
    """
    Up to :data:`BRANCHES` refined (p, q, margin) placements of one level,
    best first, with directions at least :data:`BRANCH_SEPARATION` apart.
    """

    def margins(directions):
        p = space.exp(x, directions, rho, strict=False)
        q = space.exp(x, -directions, offset, strict=False)
        return p, q, _level_margins(space, params, x, earlier, p, q, delta)

    count = DIRECTIONS
    while True:
        directions = space.random_directions(count, rng)
        _, _, values = margins(directions)
        if np.max(values) > 0 or count >= MAX_DIRECTIONS:
            break
        count *= 2

    starts = []
    for index in np.argsort(-values):
        if not np.isfinite(values[index]) or len(starts) == BRANCHES:
            break
        unit = directions[index] / np.linalg.norm(directions[index])
        if all(np.dot(unit, other) < math.cos(BRANCH_SEPARATION) for other in starts):
            starts.append(unit)

    def objective(w):
        norm = np.linalg.norm(w)
        if norm == 0:
            return math.inf
        return -float(margins((w / norm)[None, :])[2][0])

    placed = []
    for start in starts:
        refined = optimize.minimize(
            objective,
            start,
            method="Nelder-Mead",
            options={"xatol": 1e-8, "fatol": 1e-12, "maxiter": 400},
        )
        direction, margin = start, -objective(start)
        if -refined.fun > margin:
            direction, margin = refined.x / np.linalg.norm(refined.x), -refined.fun
        p, q, _ = margins(direction[None, :])
        placed.append((StrainerPair(p[0], q[0]), margin))
    placed.sort(key=lambda item: -item[1])
    return placed


def find_strainer(space, params, x, k, delta, scale, seed=0, near=None):
    """
    Build a (k, delta)-strainer at ``x`` one level at a time.

    Level j places p_j at distance rho_j along a direction u and q_j at
    distance (1 - cos delta) rho_j / S along -u, capped by ``near`` when
    given, with rho_1 = ``scale`` and rho_j = delta^2 / (2 (S + C)) rho_(j-1).
    Directions are sampled (64, doubled up to 512 while no candidate has a
    positive margin) and the best few well separated ones are refined with
    Nelder-Mead. The search backtracks depth first over those branches
    when a later level cannot be placed. The result is re-verified.

    :return: :class:`SearchResult`; on failure ``strainer`` holds the
             deepest partial candidate and ``check`` its failing condition
    """
    if int(k) != k or k < 1:
        raise InputError("Strainer level must be a positive integer. Got {}".format(k))
    if not scale > 0:
        raise InputError("Strainer scale must be positive. Got {}".format(scale))
    if near is not None and not near > 0:
        raise InputError("Strainer offsets must be positive. Got {}".format(near))
    x = space.validate(x)
    rng = make_rng(seed)
    shrink = delta**2 / (2.0 * (params.S + params.C))
    deepest = []

    def extend(pairs, rho):
        if len(pairs) == k:
            return pairs
        offset = (1.0 - math.cos(delta)) / params.S * rho
        if near is not None:
            offset = min(offset, near)
        earlier = [pair.p for pair in pairs]
        for pair, margin in _level_candidates(
            space, params, x, earlier, rho, offset, delta, rng
        ):
            LOGGER.debug(
                "level %d of strainer at %s: margin %.3g", len(pairs) + 1, x, margin
            )
            if len(pairs) + 1 > len(deepest):
                deepest[:] = pairs + [pair]
            if margin <= 0:
                break
            result = extend(pairs + [pair], rho * shrink)
            if result is not None:
                return result
        return None

    pairs = extend([], float(scale)) or deepest
    if not pairs:
        return SearchResult(False, None, None)
    candidate = Strainer(space, pairs, delta, x)
    check = is_k_strainer(space, params, candidate)
    return SearchResult(check.ok and candidate.k == k, candidate, check)


def _move(space, strainer, y, m, value, tol):
    """
    Move ``y`` along a geodesic toward p_m (or q_m) until coordinate m
    equals ``value``. Returns None when no such step exists.
    """
    pair = strainer.pairs[m - 1]
    gap = float(space.get_distance(pair.p, y)) - value
    end = pair.p if gap > 0 else pair.q
    length = float(space.get_distance(y, end))
    if length == 0:
        return None

    def offset(s):
        point = space.interpolate(y, end, s / length)
        return float(space.get_distance(pair.p, point)) - value

    try:
        high = 2.0 * abs(gap)
        for _ in range(4):
            if offset(0.0) * offset(high) <= 0:
                break
            high *= 2.0
        else:
            return None
        s = optimize.brentq(offset, 0.0, high, xtol=max(tol * 1e-3, 1e-300))
        point = space.interpolate(y, end, s / length)
    except RangeError:
        return None
    if np.any(np.isnan(point)) or not space.contains(point):
        return None
    return point


def preimage(space, strainer, target, start=None, tol=1e-10, max_steps=MAX_DESCENT_STEPS):
    """
    Find y with ``strainer(y)`` = ``target`` by the openness descent.

    Solving the first m coordinates alternates two moves: along a geodesic
    toward p_m or q_m to put coordinate m on target, then recursively
    re-solving the first m - 1 coordinates. A round is accepted only if
    it decreases the anisotropic norm

        ||w||_m = ||w_[m-1]||_1 + (epsilon_(m-1) / 2) |w_m|

    of the residual w = f(y) - target; otherwise the descent stalls.

    :return: :class:`PreimageResult` with the final point, whether the
             L1 error fell below ``tol``, the step count and the error
    """
    target = np.asarray(target, dtype=float)
    if target.shape != (strainer.k,):
        raise InputError("Target needs {} coordinates. Got {}".format(strainer.k, target))
    y = strainer.base if start is None else space.validate(start)
    weights = [1.0] + [
        strainer_constants(m, strainer.delta).epsilon_k / 2.0
        for m in range(1, strainer.k)
    ]
    steps = [0]

    def residual(point, m):
        return strainer(point)[:m] - target[:m]

    def anisotropic(w, m):
        return float(np.sum(np.abs(w[: m - 1])) + weights[m - 1] * abs(w[m - 1]))

    def solve(m, point):
        while True:
            w = residual(point, m)
            if np.sum(np.abs(w)) < tol:
                return point, True
            if steps[0] >= max_steps:
                return point, False
            candidate = point
            if abs(w[m - 1]) >= tol / 2 or m == 1:
                candidate = _move(space, strainer, candidate, m, target[m - 1], tol)
                steps[0] += 1
                if candidate is None:
                    return point, False
            if m > 1:
                candidate, ok = solve(m - 1, candidate)
                if not ok:
                    return point, False
            if anisotropic(residual(candidate, m), m) >= anisotropic(w, m):
                return point, False
            point = candidate

    point, converged = solve(strainer.k, y)
    error = float(np.sum(np.abs(strainer(point) - target)))
    return PreimageResult(point, converged, steps[0], error)


def verify_openness(space, strainer, radius, targets=100, seed=0, tol=1e-10):
    """
    Measure how open the strainer map is around its base point.

    Targets v = f(base) + U[-radius, radius]^k are solved with
    :func:`preimage` from the base; each success contributes the ratio
    |f(base) v|_1 / |y base|. ``achieved_epsilon`` is the smallest ratio,
    and targets the descent cannot reach are counted as failures.
    """
    rng = make_rng(seed)
    f_base = strainer(strainer.base)
    achieved, worst_case, failures = math.inf, None, 0
    for _ in range(targets):
        target = f_base + rng.uniform(-radius, radius, size=strainer.k)
        result = preimage(space, strainer, target, tol=tol)
        if not result.converged:
            failures += 1
            LOGGER.debug("openness descent failed for target %s", target)
            continue
        moved = float(space.get_distance(result.point, strainer.base))
        if moved == 0:
            continue
        ratio = float(np.sum(np.abs(f_base - target))) / moved
        if ratio < achieved:
            achieved, worst_case = ratio, [float(v) for v in target]
    if worst_case is None:
        achieved = 0.0
    return OpennessReport(achieved, targets, failures, worst_case)


def openness_residual(space, strainer, target, floor, tol=1e-10):
    """
    Openness ratio of a single target minus ``floor``, or None when the
    descent does not reach it.
    """
    f_base = strainer(strainer.base)
    target = np.asarray(target, dtype=float)
    result = preimage(space, strainer, target, tol=tol)
    if not result.converged:
        return None
    moved = float(space.get_distance(result.point, strainer.base))
    if moved == 0:
        return None
    return float(np.sum(np.abs(f_base - target))) / moved - floor


def estimate_bilipschitz(space, strainer, radius, trials=1000, seed=0):
    """
    Smallest and largest |f(x) f(y)|_1 / |xy| over sampled pairs of
    B(base, radius).
    """
    points = space.sample_ball(strainer.base, radius, 2 * trials, seed)
    x, y = points[:trials], points[trials:]
    gaps = space.get_distance(x, y)
    keep = gaps > 0
    ratios = np.sum(np.abs(strainer(x) - strainer(y)), axis=-1)[keep] / gaps[keep]
    return BilipschitzBounds(float(np.min(ratios)), float(np.max(ratios)))


def _choose_step(params, length, delta_prime):
    """
    Largest t = length * 2^-m with bar_delta_SC(t; length - t) < delta' / 8.
    """
    t = length / 2.0
    factor = params.S + params.C
    while t > 0 and math.acos(max(-1.0, 1.0 - factor * t / (2.0 * (length - t)))) >= (
        delta_prime / 8.0
    ):
        t /= 2.0
    return t


def improve_strainer(space, params, strainer, delta_prime, seed=0):
    """
    Turn a (k, delta)-strainer into a (k, delta')-strainer at a nearby base.

    Each stage moves to a point y that is closer to the first p by

        r = delta'^2 / (2 (S + C)) * min_i |p_i x|

    with all other coordinates preserved, steps a short distance t toward y
    and replaces the first pair by (y, old base) appended at the end. After
    k stages every pair has been replaced.

    The result is verified when the final strainer passes
    :func:`is_k_strainer` and the base moved at most
    :data:`DISPLACEMENT_BOUND` working radii.

    :return: :class:`ImprovementResult`; ``failed_stage`` is the 1-based
             stage whose preimage or verification failed, ``displacement``
             the distance from the input base and ``working_radius`` r of
             the first stage
    :raises InputError: unless delta < delta_k and 0 < delta' < delta
    """
    if not 0 < delta_prime < strainer.delta:
        raise InputError(
            "delta' must lie in (0, {}). Got {}".format(strainer.delta, delta_prime)
        )
    k = strainer.k
    delta_k = strainer_constants(k, 0.0).delta_k
    if strainer.delta >= delta_k:
        raise InputError(
            "Improving a {}-strainer needs delta below {:g}. Got {}".format(
                k, delta_k, strainer.delta
            )
        )
    start = strainer.base
    current = strainer
    working_radius = None

    for stage in range(1, k + 1):
        x = current.base
        coordinates = current(x)
        r = delta_prime**2 / (2.0 * (params.S + params.C)) * float(np.min(coordinates))
        if working_radius is None:
            working_radius = r
        target = coordinates.copy()
        target[0] -= r
        tol = max(1e-6 * r, PREIMAGE_FLOOR * float(np.max(coordinates)))
        solved = preimage(space, current, target, start=x, tol=tol)
        displacement = float(space.get_distance(start, x))
        if not solved.converged:
            return ImprovementResult(current, False, stage, displacement, working_radius)

        y = solved.point
        length = float(space.get_distance(x, y))
        t = _choose_step(params, length, delta_prime)
        pairs = list(current.pairs[1:]) + [StrainerPair(y, x)]
        for _ in range(MAX_HALVINGS + 1):
            z = space.interpolate(x, y, t / length)
            full = Strainer(space, pairs, strainer.delta, z)
            tail = Strainer(space, pairs[k - stage :], delta_prime, z)
            if (
                is_k_strainer(space, params, full).ok
                and is_k_strainer(space, params, tail).ok
            ):
                break
            t /= 2.0
        else:
            return ImprovementResult(current, False, stage, displacement, working_radius)
        current = full

    final = current.with_delta(delta_prime)
    displacement = float(space.get_distance(start, final.base))
    verified = (
        is_k_strainer(space, params, final).ok
        and displacement <= DISPLACEMENT_BOUND * working_radius
    )
    return ImprovementResult(final, verified, None, displacement, working_radius)


def strainer_number(space, params, x, delta, scales, seed=0, candidates=8):
    """
    Largest k such that a (k, delta)-strainer is found near ``x`` at every
    scale tried.

    At each scale the search tries ``x`` and ``candidates`` points sampled
    from B(x, scale). A level fails once two consecutive scales (or the
    only scale) produce no strainer. Levels k = 1 .. n + 1 with
    delta < delta_k are tried. A strainer is laid out at the given scale
    unless that would put its nearest point within roughly
    :data:`SMALLEST_OFFSET` relative of the base, where angles stop
    resolving; then the layout is stretched until they do.

    :raises InputError: if delta >= delta_k for some k <= n
    """
    scales = list(scales)
    if not scales:
        raise InputError("strainer_number needs at least one scale")
    x = space.validate(x)
    levels = [
        k
        for k in range(1, params.n + 2)
        if delta < strainer_constants(k, 0.0).delta_k
    ]
    if len(levels) < params.n:
        raise InputError(
            "delta = {} is not below delta_{} = {:g}".format(
                delta, params.n, strainer_constants(params.n, 0.0).delta_k
            )
        )

    def found_at(k, index, scale):
        points = [x]
        try:
            points.extend(space.sample_ball(x, scale, candidates, seed + index))
        except RangeError:
            LOGGER.debug("ball of radius %g around %s leaves the model", scale, x)
        for point in points:
            offset = SMALLEST_OFFSET * (1.0 + float(np.max(np.abs(point))))
            layout = max(scale, strainer_scale(params, k, delta, offset))
            found = find_strainer(
                space, params, point, k, delta, layout, seed=seed + index
            ).found
            if found:
                return True
        return False

    number = 0
    for k in levels:
        misses = [not found_at(k, index, scale) for index, scale in enumerate(scales)]
        consecutive = any(a and b for a, b in zip(misses, misses[1:]))
        if consecutive or all(misses):
            break
        number = k
    return number


def is_r_long(space, strainer, R):
    """
    Whether every strainer point is farther than R / delta from the base.
    """
    far = R / strainer.delta
    distances = np.concatenate(
        [
            space.get_distance(strainer.p_points, strainer.base),
            space.get_distance(strainer.q_points, strainer.base),
        ]
    )
    return bool(np.min(distances) > far)


def almost_orthogonality(space, strainer):
    """
    Worst |angle(p_i, x, xi_j) - pi/2| over i < j, where xi_j runs from the
    base toward p_j or q_j and the angle is viewed from p_i.
    """
    worst = 0.0
    for j in range(1, strainer.k):
        for end in strainer.pairs[j]:
            xi = space.geodesic(strainer.base, end)
            for i in range(j):
                angle = angle_from_point(space, strainer.pairs[i].p, xi, mode=CONCAVE)
                worst = max(worst, abs(angle.value - math.pi / 2))
    return worst


def replay_strainer(space, witness):
    """
    Smallest condition margin of a stored strainer witness.
    """
    strainer = Strainer.from_dict(witness["strainer"])
    params = CurvatureParams(**witness["params"])
    return is_k_strainer(space, params, strainer).margin


def replay_openness(space, witness):
    strainer = Strainer.from_dict(witness["strainer"])
    residual = openness_residual(
        space, strainer, witness["target"], witness["floor"], witness["tol"]
    )
    if residual is None:
        raise InputError("Openness witness target is no longer reached")
    return residual
