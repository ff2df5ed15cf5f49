"""
Sampled checks of the synthetic curvature conditions.

Every check draws configurations in batches, evaluates a normalized
residual that is non-negative exactly when the inequality holds, and
keeps the most adverse value together with a witness that
:func:`evaluate_witness` turns back into the same residual. Violations
are data here, never exceptions.

Residuals of squared-distance inequalities are divided by the squared
scale of the configuration, max(|p x0|^2, |p x1|^2, |x0 x1|^2), so a
single threshold applies at every scale.
"""
import logging
import math
from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .comparison import (
    MONOTONE_TOLERANCE,
    SEMICONVEX,
    angle_from_point,
    comparison_angle,
    error_functions,
)
from .exceptions import CurvatureViolation, EmptyDomainError, InputError
from .lp import LpSpace
from .space import CurvatureParams
from .utils import derive_seed, make_rng

LOGGER = logging.getLogger(__name__)

#: Normalized residuals below this count as violations
VIOLATION_THRESHOLD = -1e-9

#: Fixed interpolation parameters of every inequality check
T_GRID = np.arange(1, 8) / 8.0

#: Uniform interpolation parameters drawn per trial on top of the grid
RANDOM_T = 20

BATCH_SIZE = 2048

#: Threads evaluating batches of one check
BATCH_WORKERS = 4

#: Busemann ratios are compared on t = 2^-j for j = 0..BUSEMANN_LEVELS-1
BUSEMANN_LEVELS = 11

CONCAVE = "concave"
CONVEX = "convex"
SMOOTH = "smooth"


class ResidualReport(
    namedtuple("ResidualReport", "worst_residual worst_witness trials seed")
):
    """
    The most adverse residual found by a sampled check.

    worst_residual - signed; >= 0 means the inequality held everywhere sampled
    worst_witness - a replayable description of the configuration attaining it
    trials - number of configurations requested
    seed - master seed of the run
    """

    __slots__ = ()

    @property
    def held(self):
        return bool(self.worst_residual >= VIOLATION_THRESHOLD)


def _listed(x):
    return [float(v) for v in np.asarray(x, dtype=float).ravel()]


def _batches(trials):
    batch, done = 0, 0
    while done < trials:
        count = min(BATCH_SIZE, trials - done)
        yield batch, count
        batch += 1
        done += count


def _run(trials, seed, evaluate_batch, reduce=min, workers=BATCH_WORKERS):
    """
    Map ``evaluate_batch(rng, count, first)`` over the batches on a thread
    pool and fold the results in batch order.

    Each batch draws from its own seed derived from ``seed`` and the
    batch index, so the result does not depend on scheduling.
    """
    if trials < 1:
        raise InputError("Checks need at least one trial. Got {}".format(trials))

    def evaluate(item):
        batch, count = item
        return evaluate_batch(make_rng(derive_seed(seed, batch)), count, batch == 0)

    batches = list(_batches(trials))
    worst, witness = None, None
    with ThreadPoolExecutor(max_workers=min(workers, len(batches))) as executor:
        for value, candidate in executor.map(evaluate, batches):
            if value is None:
                continue
            if worst is None or reduce(value, worst) != worst:
                worst, witness = value, candidate
    return worst, witness


def _t_values(rng, count):
    fixed = np.broadcast_to(T_GRID, (count, len(T_GRID)))
    return np.concatenate([fixed, rng.uniform(size=(count, RANDOM_T))], axis=1)


def sample_configurations(space, count, rng, structured=False):
    """
    Draw triples ``(p, x0, x1)`` from the working region of ``space``.

    With ``structured`` the model's symmetric configurations come first.
    Triples with x0 = x1 are dropped.
    """
    p = space.sample_domain(count, rng)
    x0 = space.sample_domain(count, rng)
    x1 = space.sample_domain(count, rng)
    if structured:
        extra = space.structured_configurations()
        p, x0, x1 = (np.concatenate([e, r]) for e, r in zip(extra, (p, x0, x1)))
    keep = space.get_distance(x0, x1) > 0
    return p[keep], x0[keep], x1[keep]


def sample_local_configurations(space, radius, count, rng):
    """
    Draw triples ``(p, x0, x1)`` with x0, x1 inside the ball around ``p`` in
    which local semi-convexity is claimed.

    :return: the triples and the radius limit of each
    """
    p = space.sample_domain(count, rng)
    limit = np.minimum(radius, space.local_convexity_radius(p))
    limit = np.where(np.isfinite(limit), limit, 2.0 * space.domain_radius)
    keep = limit > 0
    p, limit = p[keep], limit[keep]
    size = len(p)
    x0 = space.exp(
        p, space.random_directions(size, rng), limit * rng.uniform(0.05, 0.999, size)
    )
    x1 = space.exp(
        p, space.random_directions(size, rng), limit * rng.uniform(0.05, 0.999, size)
    )
    keep = space.contains(x0) & space.contains(x1) & (space.get_distance(x0, x1) > 0)
    return p[keep], x0[keep], x1[keep], limit[keep]


def segment_terms(space, p, x0, x1, t):
    """
    Distances of a batch of configurations.

    ``p``, ``x0``, ``x1`` have shape (count, dim) and ``t`` has shape
    (count, m). Returns ``a = |p x0|``, ``b = |p x1|`` and ``L = |x0 x1|`` of
    shape (count, 1), ``d = |p xi(t)|`` of shape (count, m), and the squared
    configuration scale.
    """
    a = space.get_distance(p, x0)[..., None]
    b = space.get_distance(p, x1)[..., None]
    L = space.get_distance(x0, x1)[..., None]
    points = space.interpolate(x0[..., None, :], x1[..., None, :], t)
    d = space.get_distance(p[..., None, :], points)
    scale = np.maximum(np.maximum(a * a, b * b), L * L)
    return a, b, L, d, scale


def s_concavity_residual(space, S, p, x0, x1, t):
    """
    |p xi(t)|^2 - [(1-t)|p x0|^2 + t|p x1|^2 - S t(1-t)|x0 x1|^2], normalized.
    """
    a, b, L, d, scale = segment_terms(space, p, x0, x1, t)
    weighted = (1 - t) * a * a + t * b * b
    return (d * d - weighted + S * t * (1 - t) * L * L) / scale


def semiconvexity_residual(space, C, p, x0, x1, t):
    """
    [(1-t)|p x0|^2 + t|p x1|^2 + C t(1-t)|x0 x1|^2] - |p xi(t)|^2, normalized.
    """
    a, b, L, d, scale = segment_terms(space, p, x0, x1, t)
    weighted = (1 - t) * a * a + t * b * b
    return (weighted + C * t * (1 - t) * L * L - d * d) / scale


def _tight_constants(space, p, x0, x1, t):
    """
    The constant that makes each sampled S-concavity inequality an
    equality; the matching semi-convexity constant is its negative.
    """
    a, b, L, d, scale = segment_terms(space, p, x0, x1, t)
    weighted = (1 - t) * a * a + t * b * b
    modulus = t * (1 - t) * L * L
    usable = modulus > 1e-12 * scale
    return np.where(usable, (weighted - d * d) / np.where(usable, modulus, 1.0), np.nan)


def _worst(residual, make_witness):
    if residual.size == 0:
        return None, None
    index = np.unravel_index(np.argmin(residual), residual.shape)
    value = float(residual[index])
    return value, make_witness(index, value)


def check_s_concavity(space, params=None, trials=10**4, seed=0):
    """
    Hunt for violations of S-concavity of squared distance functions.

    >>> from pybusemann import LpSpace
    >>> check_s_concavity(LpSpace(p=2, n=2), trials=100).held
    True
    """
    params = params or space.params

    def evaluate_batch(rng, count, first):
        p, x0, x1 = sample_configurations(space, count, rng, structured=first)
        t = _t_values(rng, len(p))
        residual = s_concavity_residual(space, params.S, p, x0, x1, t)

        def witness(index, value):
            i, j = index
            return {
                "check": "s_concavity",
                "space": space.description,
                "S": params.S,
                "p": _listed(p[i]),
                "x0": _listed(x0[i]),
                "x1": _listed(x1[i]),
                "t": float(t[i, j]),
                "residual": value,
            }

        return _worst(residual, witness)

    worst, witness = _run(trials, seed, evaluate_batch)
    LOGGER.debug("s-concavity of %s at S=%g: worst %.3g", space, params.S, worst)
    return ResidualReport(worst, witness, trials, seed)


def check_local_semiconvexity(space, params=None, trials=10**4, seed=0):
    """
    Hunt for violations of (C, D)-local semi-convexity.

    Only configurations whose geodesic stays within distance
    min(D, local convexity radius of p) of p are tested.

    :raises EmptyDomainError: if no sampled configuration fits
    """
    params = params or space.params

    def evaluate_batch(rng, count, first):
        p, x0, x1, limit = sample_local_configurations(space, params.D, count, rng)
        t = _t_values(rng, len(p))
        a, b, _, d, _ = segment_terms(space, p, x0, x1, t)
        reach = np.maximum(np.maximum(a[:, 0], b[:, 0]), d.max(axis=1, initial=0.0))
        inside = reach < limit
        p, x0, x1, t = p[inside], x0[inside], x1[inside], t[inside]
        residual = semiconvexity_residual(space, params.C, p, x0, x1, t)

        def witness(index, value):
            i, j = index
            return {
                "check": "semiconvexity",
                "space": space.description,
                "C": params.C,
                "p": _listed(p[i]),
                "x0": _listed(x0[i]),
                "x1": _listed(x1[i]),
                "t": float(t[i, j]),
                "residual": value,
            }

        return _worst(residual, witness)

    worst, witness = _run(trials, seed, evaluate_batch)
    if worst is None:
        raise EmptyDomainError(
            "No configuration of {} fits inside D = {}".format(space, params.D)
        )
    return ResidualReport(worst, witness, trials, seed)


def busemann_residual(space, direction, x, y, z):
    """
    Successive differences of t -> |gamma(t) eta(t)| / t along t = 2^-j.

    ``gamma`` runs from ``x`` to ``y`` and ``eta`` from ``x`` to ``z``.
    The differences are signed so that concave (non-increasing ratio) or
    convex (non-decreasing ratio) behaviour gives non-negative values, and
    divided by max(|xy|, |xz|).
    """
    ts = 0.5 ** np.arange(BUSEMANN_LEVELS)
    gy = space.interpolate(x[..., None, :], y[..., None, :], ts)
    gz = space.interpolate(x[..., None, :], z[..., None, :], ts)
    ratio = space.get_distance(gy, gz) / ts
    step = ratio[..., 1:] - ratio[..., :-1]
    if direction == CONVEX:
        step = -step
    elif direction != CONCAVE:
        raise InputError("Unknown Busemann direction {}".format(direction))
    scale = np.maximum(space.get_distance(x, y), space.get_distance(x, z))[..., None]
    return step / scale


def check_busemann_monotone(space, direction=CONCAVE, trials=10**4, seed=0):
    """
    Check that |gamma(t) eta(t)| / t is monotone for geodesics from a
    common point, non-increasing for ``concave`` and non-decreasing for
    ``convex``.
    """

    def evaluate_batch(rng, count, first):
        x, y, z = sample_configurations(space, count, rng)
        keep = (space.get_distance(x, y) > 0) & (space.get_distance(x, z) > 0)
        x, y, z = x[keep], y[keep], z[keep]
        residual = busemann_residual(space, direction, x, y, z)

        def witness(index, value):
            i, j = index
            return {
                "check": "busemann",
                "space": space.description,
                "direction": direction,
                "x": _listed(x[i]),
                "y": _listed(y[i]),
                "z": _listed(z[i]),
                "level": int(j),
                "residual": value,
            }

        return _worst(residual, witness)

    worst, witness = _run(trials, seed, evaluate_batch)
    return ResidualReport(worst, witness, trials, seed)


def norm_uniform_residual(norm, mode, power, constant, u, v):
    """
    Residual of p-uniform convexity or smoothness at the midpoint.

        convex: ½‖u‖^q + ½‖v‖^q - constant ‖(u-v)/2‖^q - ‖(u+v)/2‖^q
        smooth: ‖(u+v)/2‖^q - ½‖u‖^q - ½‖v‖^q + constant ‖(u-v)/2‖^q

    normalized by max(‖u‖, ‖v‖)^q. Pairs with u = v = 0 give 0.
    """
    nu, nv = norm(u) ** power, norm(v) ** power
    half_sum = norm((u + v) / 2.0) ** power
    half_gap = norm((u - v) / 2.0) ** power
    if mode == CONVEX:
        raw = 0.5 * nu + 0.5 * nv - constant * half_gap - half_sum
    elif mode == SMOOTH:
        raw = half_sum - 0.5 * nu - 0.5 * nv + constant * half_gap
    else:
        raise InputError("Unknown uniformity mode {}".format(mode))
    scale = np.maximum(nu, nv)
    return np.where(scale > 0, raw / np.where(scale > 0, scale, 1.0), 0.0)


def _structured_pairs(n):
    eye = np.eye(n)
    pairs = []
    for i in range(n):
        pairs.append((eye[i], eye[i]))
        pairs.append((eye[i], -eye[i]))
        for j in range(n):
            if i != j:
                pairs.append((eye[i], eye[j]))
                pairs.append((eye[i] + eye[j], eye[i] - eye[j]))
                pairs.append((eye[i] + 0.5 * eye[j], eye[i] - 0.5 * eye[j]))
    u, v = zip(*pairs)
    return np.array(u), np.array(v)


def check_norm_uniform(
    p_norm, mode, power, constant, trials=10**4, seed=0, n=2, norm=None
):
    """
    Sample the p-uniform convexity or smoothness inequality of a norm.

    :param p_norm: exponent of the l^p norm on R^n, ignored when ``norm`` is given
    :param mode: :data:`CONVEX` or :data:`SMOOTH`
    :param power: the exponent q of the inequality
    :param constant: the convexity or smoothness constant
    :param norm: optional vectorized norm on R^n to test instead

    >>> check_norm_uniform(4, SMOOTH, 2, 3.0, trials=500).held
    True
    """
    if power <= 1:
        raise InputError("Uniformity power must exceed 1. Got {}".format(power))
    if norm is None:
        norm = LpSpace(p=p_norm, n=n).norm
        p_label = float(p_norm)
    else:
        p_label = None

    def evaluate_batch(rng, count, first):
        u = rng.uniform(-1.0, 1.0, size=(count, n))
        v = rng.uniform(-1.0, 1.0, size=(count, n))
        if first:
            su, sv = _structured_pairs(n)
            u, v = np.concatenate([su, u]), np.concatenate([sv, v])
        residual = norm_uniform_residual(norm, mode, power, constant, u, v)

        def witness(index, value):
            (i,) = index
            return {
                "check": "norm_uniform",
                "p_norm": p_label,
                "n": n,
                "mode": mode,
                "power": power,
                "constant": constant,
                "u": _listed(u[i]),
                "v": _listed(v[i]),
                "residual": value,
            }

        return _worst(residual, witness)

    worst, witness = _run(trials, seed, evaluate_batch)
    return ResidualReport(worst, witness, trials, seed)


def distance_convexity_residual(space, power, constant, y, x0, x1):
    """
    ½|y x0|^q + ½|y x1|^q - constant (|x0 x1|/2)^q - |y xi(1/2)|^q,
    normalized by max(|y x0|, |y x1|)^q.
    """
    half = np.full((len(y), 1), 0.5)
    a, b, L, d, _ = segment_terms(space, y, x0, x1, half)
    raw = 0.5 * a**power + 0.5 * b**power - constant * (L / 2.0) ** power - d**power
    return (raw / np.maximum(a, b) ** power)[:, 0]


def check_distance_convexity(space, power, constant=1.0, trials=10**4, seed=0):
    """
    Sample the p-uniform convexity of distance functions along geodesics,
    the convexity hypothesis under which tangent norms are p-uniformly convex.
    """

    def evaluate_batch(rng, count, first):
        y, x0, x1 = sample_configurations(space, count, rng, structured=first)
        keep = np.maximum(space.get_distance(y, x0), space.get_distance(y, x1)) > 0
        y, x0, x1 = y[keep], x0[keep], x1[keep]
        residual = distance_convexity_residual(space, power, constant, y, x0, x1)

        def witness(index, value):
            (i,) = index
            return {
                "check": "distance_convexity",
                "space": space.description,
                "power": power,
                "constant": constant,
                "y": _listed(y[i]),
                "x0": _listed(x0[i]),
                "x1": _listed(x1[i]),
                "residual": value,
            }

        return _worst(residual, witness)

    worst, witness = _run(trials, seed, evaluate_batch)
    return ResidualReport(worst, witness, trials, seed)


def angle_configuration(space, p, x, u):
    """
    The geodesic from ``x`` along ``u`` used by the angle checks, short
    enough to stay inside the model and well away from ``p``.
    """
    px = float(space.get_distance(p, x))
    reach = space.reach(x)
    if math.isinf(reach):
        reach = space.domain_radius
    span = min(0.5 * px, 0.5 * reach)
    if not span > 0:
        return None
    return space.geodesic(x, space.exp(x, u, span))


def _angle_value(space, p, xi, mode, params):
    """
    The angle viewed from ``p`` along ``xi`` and the monotonicity residual
    of its quotient: the allowed tolerance minus the largest move against
    the declared direction, negative when the declared constants fail.
    """
    try:
        estimate = angle_from_point(space, p, xi, mode=mode, params=params)
        return estimate.value, math.inf
    except CurvatureViolation as error:
        return error.estimate.value, MONOTONE_TOLERANCE - error.defect


def almost_comparison_residual(space, params, mode, p, xi, t):
    """
    Residual of the almost comparison inequalities at arclength ``t``.

        concave:    angle + delta_S(t; |px|) - angle~(p, x, xi(t))
        semiconvex: angle~(p, x, xi(t)) - angle + delta_C(t; |px|)

    A quotient that is not monotone under the declared constants caps the
    residual at its monotonicity residual.
    """
    px = float(space.get_distance(p, xi.x))
    angle, monotone = _angle_value(space, p, xi, mode, params)
    budget = error_functions(params, t, px)
    seen = comparison_angle(px, t, float(space.get_distance(p, xi.at_distance(t))))
    if mode == CONCAVE:
        return min(angle + budget.delta_S - seen, monotone)
    return min(seen - angle + budget.delta_C, monotone)


def check_almost_comparison(space, mode=CONCAVE, params=None, trials=200, seed=0):
    """
    Sample the comparison angle of p, x, xi(t) against the angle viewed
    from p, corrected by the delta_S (concave) or delta_C (semi-convex)
    budget, along the fixed t grid.
    """
    params = params or space.params
    if mode not in (CONCAVE, SEMICONVEX):
        raise InputError("Unknown angle mode {}".format(mode))

    def evaluate_batch(rng, count, first):
        p = space.sample_domain(count, rng)
        x = space.sample_domain(count, rng)
        u = space.random_directions(count, rng)
        worst, witness = None, None
        for i in range(count):
            if mode == SEMICONVEX and not space.get_distance(p[i], x[i]) < params.D:
                continue
            xi = angle_configuration(space, p[i], x[i], u[i])
            if xi is None:
                continue
            for t in T_GRID * xi.length:
                value = almost_comparison_residual(space, params, mode, p[i], xi, t)
                if worst is None or value < worst:
                    worst = float(value)
                    witness = {
                        "check": "almost_comparison",
                        "space": space.description,
                        "params": params.to_dict(),
                        "mode": mode,
                        "p": _listed(p[i]),
                        "x": _listed(xi.x),
                        "y": _listed(xi.y),
                        "t": float(t),
                        "residual": worst,
                    }
        return worst, witness

    worst, witness = _run(trials, seed, evaluate_batch)
    return ResidualReport(worst, witness, trials, seed)


def angle_sum_residual(space, params, mode, p, x, u):
    """
    pi minus the sum of the angles viewed from ``p`` along the two halves
    of a geodesic through ``x`` (concave), or its negative (semi-convex).
    """
    forward = angle_configuration(space, p, x, u)
    if forward is None:
        return None
    backward = space.geodesic(x, space.exp(x, -np.asarray(u), forward.length))
    first, first_monotone = _angle_value(space, p, forward, mode, params)
    second, second_monotone = _angle_value(space, p, backward, mode, params)
    monotone = min(first_monotone, second_monotone)
    if mode == CONCAVE:
        return min(math.pi - (first + second), monotone)
    return min(first + second - math.pi, monotone)


def check_angle_sums(space, mode=CONCAVE, params=None, trials=200, seed=0):
    """
    Sample the angle sum bounds: the two halves of a geodesic through x
    seen from p make angles summing to at most pi under S-concavity and at
    least pi under semi-convexity.
    """
    params = params or space.params
    if mode not in (CONCAVE, SEMICONVEX):
        raise InputError("Unknown angle mode {}".format(mode))

    def evaluate_batch(rng, count, first):
        p = space.sample_domain(count, rng)
        x = space.sample_domain(count, rng)
        u = space.random_directions(count, rng)
        worst, witness = None, None
        for i in range(count):
            if mode == SEMICONVEX and not space.get_distance(p[i], x[i]) < params.D:
                continue
            value = angle_sum_residual(space, params, mode, p[i], x[i], u[i])
            if value is not None and (worst is None or value < worst):
                worst = float(value)
                witness = {
                    "check": "angle_sum",
                    "space": space.description,
                    "params": params.to_dict(),
                    "mode": mode,
                    "p": _listed(p[i]),
                    "x": _listed(x[i]),
                    "u": _listed(u[i]),
                    "residual": worst,
                }
        return worst, witness

    worst, witness = _run(trials, seed, evaluate_batch)
    return ResidualReport(worst, witness, trials, seed)


def estimate_best_S(space, trials=10**4, seed=0):
    """
    Smallest S making every sampled S-concavity inequality hold.

    Each configuration is solved for its tight constant in closed form;
    the estimate is the maximum over all of them.
    """

    def evaluate_batch(rng, count, first):
        p, x0, x1 = sample_configurations(space, count, rng, structured=first)
        tight = _tight_constants(space, p, x0, x1, _t_values(rng, len(p)))
        if np.all(np.isnan(tight)):
            return None, None
        return float(np.nanmax(tight)), None

    best, _ = _run(trials, seed, evaluate_batch, reduce=max)
    LOGGER.debug("best S of %s over %d trials: %r", space, trials, best)
    return best


def estimate_best_C(space, radius=math.inf, trials=10**4, seed=0):
    """
    Smallest C >= 0 making every sampled semi-convexity inequality hold
    within distance ``radius`` (and the model's local convexity radius).
    """

    def evaluate_batch(rng, count, first):
        p, x0, x1, limit = sample_local_configurations(space, radius, count, rng)
        tight = -_tight_constants(space, p, x0, x1, _t_values(rng, len(p)))
        if np.all(np.isnan(tight)):
            return None, None
        return float(np.nanmax(tight)), None

    best, _ = _run(trials, seed, evaluate_batch, reduce=max)
    if best is None:
        raise EmptyDomainError(
            "No configuration of {} fits inside {}".format(space, radius)
        )
    return max(0.0, best)


def _replay_s_concavity(space, witness):
    arrays = [np.array([witness[key]]) for key in ("p", "x0", "x1")]
    t = np.array([[witness["t"]]])
    return s_concavity_residual(space, witness["S"], *arrays, t)[0, 0]


def _replay_semiconvexity(space, witness):
    arrays = [np.array([witness[key]]) for key in ("p", "x0", "x1")]
    t = np.array([[witness["t"]]])
    return semiconvexity_residual(space, witness["C"], *arrays, t)[0, 0]


def _replay_busemann(space, witness):
    arrays = [np.array([witness[key]]) for key in ("x", "y", "z")]
    return busemann_residual(space, witness["direction"], *arrays)[0, witness["level"]]


def _replay_distance_convexity(space, witness):
    arrays = [np.array([witness[key]]) for key in ("y", "x0", "x1")]
    return distance_convexity_residual(
        space, witness["power"], witness["constant"], *arrays
    )[0]


def _replay_almost_comparison(space, witness):
    params = CurvatureParams(**witness["params"])
    xi = space.geodesic(witness["x"], witness["y"])
    p = space.validate(witness["p"])
    return almost_comparison_residual(space, params, witness["mode"], p, xi, witness["t"])


def _replay_angle_sum(space, witness):
    params = CurvatureParams(**witness["params"])
    arrays = [space.validate(witness[key]) for key in ("p", "x")]
    return angle_sum_residual(space, params, witness["mode"], *arrays, witness["u"])


def _replay_norm_uniform(witness):
    if witness.get("p_norm") is None:
        raise InputError("Witnesses of fitted norms cannot be replayed")
    norm = LpSpace(p=witness["p_norm"], n=witness["n"]).norm
    return norm_uniform_residual(
        norm,
        witness["mode"],
        witness["power"],
        witness["constant"],
        np.array(witness["u"]),
        np.array(witness["v"]),
    )


def evaluate_witness(witness):
    """
    Re-evaluate the residual of a stored witness.

    >>> report = check_s_concavity(LpSpace(p=4, n=2), trials=50, seed=3)
    >>> abs(evaluate_witness(report.worst_witness) - report.worst_residual) < 1e-12
    True
    """
    from . import parse_space
    from .measure import replay_bishop_gromov
    from .strainers import replay_openness, replay_strainer
    from .tangent import replay_metric_relation

    space_replays = {
        "s_concavity": _replay_s_concavity,
        "semiconvexity": _replay_semiconvexity,
        "busemann": _replay_busemann,
        "distance_convexity": _replay_distance_convexity,
        "strainer": replay_strainer,
        "openness": replay_openness,
        "almost_comparison": _replay_almost_comparison,
        "angle_sum": _replay_angle_sum,
        "metric_relation": replay_metric_relation,
    }
    check = witness.get("check")
    if check == "norm_uniform":
        return float(_replay_norm_uniform(witness))
    if check == "bishop_gromov":
        return float(replay_bishop_gromov(witness))
    try:
        space_replays[check]
    except KeyError:
        raise InputError("Cannot replay a witness of check {}".format(check))
    space = parse_space(witness["space"])
    return float(space_replays[check](space, witness))
