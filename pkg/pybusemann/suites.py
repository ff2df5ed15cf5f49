"""
Named checks grouped into suites.

Every check is registered once, in a fixed order; its seed is derived
from the master seed and its position in :data:`CHECKS`, so selecting a
different suite never changes the seeds of the checks that run. Checks
run in a thread pool and the report lists them by name.
"""
import logging
import math
import os
import time
from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor, as_completed

import numpy as np

from . import __version__, parse_space
from .comparison import DERIVATIVE_TOLERANCE, SEMICONVEX, distance_derivative
from .curvature import (
    CONCAVE,
    angle_configuration,
    check_almost_comparison,
    check_angle_sums,
    check_busemann_monotone,
    check_distance_convexity,
    check_local_semiconvexity,
    check_s_concavity,
    estimate_best_C,
    estimate_best_S,
)
from .exceptions import CurvatureViolation, EmptyDomainError, InputError
from .lp import LpSpace
from .measure import (
    CylinderRegion,
    bishop_gromov_check,
    covering_constant,
    doubling_constant,
    hausdorff_measure_2d,
    mc_ball_volume,
    packing_curve,
    rough_dimension,
    singular_packing,
    strained_fraction,
    threshold_constants,
    write_curve_csv,
)
from .report import INCONCLUSIVE, PASS, VIOLATION, Verdict, build_report, from_residual
from .strainers import (
    find_strainer,
    improve_strainer,
    openness_residual,
    strainer_constants,
    strainer_number,
    verify_openness,
)
from .tangent import (
    RELATION_TOLERANCE,
    blowup_sample,
    certify_norm,
    fit_norm,
    gh_distance_bounds,
    metric_relation_residual,
    packing_directions,
)
from .utils import derive_seed, make_rng

LOGGER = logging.getLogger(__name__)

#: Slack of the angle inequalities
ANGLE_SLACK = 1e-8

#: K is only materialized while it has at most this many bits
MAX_BOUND_BITS = 4096

Check = namedtuple("Check", "name suite run")

Context = namedtuple("Context", "space options seed name sidecar")

CHECKS = []


def check(suite, name):
    def register(function):
        CHECKS.append(Check("{}.{}".format(suite, name), suite, function))
        return function

    return register


def selected(suite):
    return [item for item in CHECKS if suite == "all" or item.suite == suite]


def check_seeds(master):
    return {item.name: derive_seed(master, index) for index, item in enumerate(CHECKS)}


# Shared helpers


def _trials(ctx, default):
    return int(ctx.options.get("trials", default))


def _point(ctx):
    """
    The point a local check works at: ``x`` from the options, otherwise a
    point of the working region drawn from the check's seed.
    """
    if ctx.options.get("x") is not None:
        return ctx.space.validate(ctx.options["x"])
    return ctx.space.sample_domain(1, make_rng(ctx.seed))[0]


def _extent(space, x):
    reach = space.reach(x)
    if math.isinf(reach):
        return space.domain_radius
    return min(space.domain_radius, 0.5 * reach)


def _inconclusive(ctx, measured=None, residual=None):
    return Verdict(ctx.name, INCONCLUSIVE, residual, ctx.seed, measured=measured)


def _write_curve(ctx, label, radii, values, stderrs=None):
    if ctx.sidecar is None:
        return None
    path = "{}.{}.{}.csv".format(ctx.sidecar, ctx.name, label)
    write_curve_csv(path, radii, values, stderrs)
    return os.path.basename(path)


def _strainer(ctx, k, delta, scale=None):
    x = _point(ctx)
    if scale is None:
        scale = float(ctx.options.get("scale", 0.5 * _extent(ctx.space, x)))
    return find_strainer(ctx.space, ctx.space.params, x, k, delta, scale, seed=ctx.seed)


# curvature


@check("curvature", "s_concavity")
def _s_concavity(ctx):
    trials = _trials(ctx, 10**4)
    report = check_s_concavity(ctx.space, trials=trials, seed=ctx.seed)
    measured = {
        "declared_S": ctx.space.params.S,
        "best_S": estimate_best_S(ctx.space, trials=trials, seed=ctx.seed),
    }
    return from_residual(ctx.name, report, ctx.seed, measured)


@check("curvature", "semiconvexity")
def _semiconvexity(ctx):
    trials = _trials(ctx, 10**4)
    params = ctx.space.params
    try:
        report = check_local_semiconvexity(ctx.space, trials=trials, seed=ctx.seed)
        best = estimate_best_C(ctx.space, radius=params.D, trials=trials, seed=ctx.seed)
    except EmptyDomainError as error:
        LOGGER.warning("%s: %s", ctx.name, error)
        return _inconclusive(ctx, {"declared_C": params.C})
    measured = {"declared_C": params.C, "best_C": best}
    return from_residual(ctx.name, report, ctx.seed, measured)


@check("curvature", "busemann")
def _busemann(ctx):
    direction = ctx.options.get("direction", CONCAVE)
    report = check_busemann_monotone(
        ctx.space, direction, trials=_trials(ctx, 10**4), seed=ctx.seed
    )
    return from_residual(ctx.name, report, ctx.seed)


@check("curvature", "distance_convexity")
def _distance_convexity(ctx):
    if "power" not in ctx.options:
        return None
    report = check_distance_convexity(
        ctx.space,
        ctx.options["power"],
        ctx.options.get("constant", 1.0),
        trials=_trials(ctx, 10**4),
        seed=ctx.seed,
    )
    return from_residual(ctx.name, report, ctx.seed)


# angles


def _angle_verdict(ctx, report):
    if report.worst_residual is None:
        return _inconclusive(ctx)
    return from_residual(ctx.name, report, ctx.seed, threshold=-ANGLE_SLACK)


@check("angles", "almost_comparison")
def _almost_comparison(ctx):
    report = check_almost_comparison(
        ctx.space, CONCAVE, trials=_trials(ctx, 200), seed=ctx.seed
    )
    return _angle_verdict(ctx, report)


@check("angles", "almost_comparison_semiconvex")
def _almost_comparison_semiconvex(ctx):
    report = check_almost_comparison(
        ctx.space, SEMICONVEX, trials=_trials(ctx, 200), seed=ctx.seed
    )
    return _angle_verdict(ctx, report)


@check("angles", "angle_sums")
def _angle_sums(ctx):
    report = check_angle_sums(ctx.space, CONCAVE, trials=_trials(ctx, 200), seed=ctx.seed)
    return _angle_verdict(ctx, report)


@check("angles", "angle_sums_semiconvex")
def _angle_sums_semiconvex(ctx):
    report = check_angle_sums(
        ctx.space, SEMICONVEX, trials=_trials(ctx, 200), seed=ctx.seed
    )
    return _angle_verdict(ctx, report)


@check("angles", "metric_relation")
def _metric_relation(ctx):
    space = ctx.space
    count = int(ctx.options.get("pairs", 100))
    rng = make_rng(ctx.seed)
    x = space.sample_domain(count, rng)
    u = space.random_directions(count, rng)
    v = space.random_directions(count, rng)
    scales = rng.uniform(0.5, 2.0, size=(count, 2))
    worst, witness, skipped = None, None, 0
    for i in range(count):
        t, s = (float(value) for value in scales[i])
        try:
            value = metric_relation_residual(space, x[i], u[i], v[i], t, s)
        except CurvatureViolation:
            skipped += 1
            continue
        if worst is None or value < worst:
            worst = value
            witness = {
                "check": "metric_relation",
                "space": space.description,
                "x": [float(c) for c in x[i]],
                "u": [float(c) for c in u[i]],
                "v": [float(c) for c in v[i]],
                "t": t,
                "s": s,
                "residual": value,
            }
    measured = {"skipped": skipped, "tolerance": RELATION_TOLERANCE}
    if worst is None:
        return _inconclusive(ctx, measured)
    verdict = PASS if worst >= 0 else VIOLATION
    return Verdict(ctx.name, verdict, worst, ctx.seed, witness, measured)


@check("angles", "derivative")
def _derivative(ctx):
    space = ctx.space
    count = int(ctx.options.get("pairs", 50))
    rng = make_rng(ctx.seed)
    p = space.sample_domain(count, rng)
    x = space.sample_domain(count, rng)
    u = space.random_directions(count, rng)
    worst, mismatches, skipped = 0.0, 0, 0
    for i in range(count):
        xi = angle_configuration(space, p[i], x[i], u[i])
        if xi is None:
            skipped += 1
            continue
        try:
            result = distance_derivative(space, p[i], xi)
        except CurvatureViolation:
            skipped += 1
            continue
        worst = max(worst, abs(result.finite_difference - result.value))
        mismatches += int(result.mismatch)
    measured = {"worst_gap": worst, "mismatches": mismatches, "skipped": skipped}
    residual = DERIVATIVE_TOLERANCE - worst
    # a mismatch is a numerical disagreement, not a curvature violation
    if mismatches:
        return _inconclusive(ctx, measured, residual)
    return Verdict(ctx.name, PASS, residual, ctx.seed, measured=measured)


# strainers


@check("strainers", "find")
def _find(ctx):
    k = int(ctx.options.get("k", ctx.space.params.n))
    delta = float(ctx.options.get("delta", 0.05))
    result = _strainer(ctx, k, delta)
    if not result.found:
        return _inconclusive(ctx, {"k": k, "delta": delta})
    witness = {
        "check": "strainer",
        "space": ctx.space.description,
        "params": ctx.space.params.to_dict(),
        "strainer": result.strainer.to_dict(),
        "residual": result.check.margin,
    }
    measured = {"k": k, "delta": delta}
    return Verdict(ctx.name, PASS, result.check.margin, ctx.seed, witness, measured)


@check("strainers", "openness")
def _openness(ctx):
    k = int(ctx.options.get("k", ctx.space.params.n))
    delta = float(ctx.options.get("delta", 0.05))
    result = _strainer(ctx, k, delta)
    if not result.found:
        return _inconclusive(ctx, {"k": k, "delta": delta})
    strainer = result.strainer
    floor = strainer_constants(k, delta).epsilon_k
    radius = float(ctx.options.get("radius", 0.01 * np.min(strainer(strainer.base))))
    tol = float(ctx.options.get("tol", 1e-10))
    report = verify_openness(
        ctx.space,
        strainer,
        radius,
        targets=int(ctx.options.get("targets", 100)),
        seed=ctx.seed,
        tol=tol,
    )
    measured = {
        "achieved_epsilon": report.achieved_epsilon,
        "epsilon_k": floor,
        "failures": report.failures,
    }
    if report.worst_case is None:
        return _inconclusive(ctx, measured)
    residual = openness_residual(ctx.space, strainer, report.worst_case, floor, tol)
    witness = {
        "check": "openness",
        "space": ctx.space.description,
        "strainer": strainer.to_dict(),
        "target": report.worst_case,
        "floor": floor,
        "tol": tol,
        "residual": residual,
    }
    verdict = PASS if residual >= 0 else VIOLATION
    return Verdict(ctx.name, verdict, residual, ctx.seed, witness, measured)


@check("strainers", "improve")
def _improve(ctx):
    space = ctx.space
    k = int(ctx.options.get("k", min(2, space.params.n)))
    delta_k = strainer_constants(k, 0.0).delta_k
    delta = float(ctx.options.get("delta", min(0.1, 0.9 * delta_k)))
    delta_prime = float(ctx.options.get("delta_prime", delta / 2.0))
    runs = int(ctx.options.get("runs", 20))
    required = float(ctx.options.get("rate", 0.95))

    attempted, verified, spread = 0, 0, 0.0
    for run in range(runs):
        seed = derive_seed(ctx.seed, run)
        local = ctx._replace(seed=seed)
        found = _strainer(local, k, delta)
        if not found.found:
            continue
        attempted += 1
        result = improve_strainer(space, space.params, found.strainer, delta_prime, seed)
        if result.verified:
            verified += 1
            spread = max(spread, result.displacement / result.working_radius)
    measured = {
        "attempted": attempted,
        "verified": verified,
        "max_displacement_ratio": spread,
    }
    if not attempted:
        return _inconclusive(ctx, measured)
    rate = verified / attempted
    measured["rate"] = rate
    if rate < required:
        return _inconclusive(ctx, measured, rate - required)
    return Verdict(ctx.name, PASS, rate - required, ctx.seed, measured=measured)


# tangent


@check("tangent", "norm")
def _norm(ctx):
    x = _point(ctx)
    norm = fit_norm(ctx.space, x, seed=ctx.seed)
    fit = certify_norm(
        norm,
        ctx.options.get("S", ctx.space.params.S),
        power=ctx.options.get("power"),
        constant=ctx.options.get("constant", 1.0),
        trials=_trials(ctx, 2000),
        seed=ctx.seed,
    )
    measured = {
        "drift": norm.drift,
        "symmetry_error": norm.symmetry_error,
        "convexity_gap": norm.convexity_gap,
        "certified": fit.certified,
    }
    if not fit.certified:
        # fitted norms carry no replayable witness
        return _inconclusive(ctx, measured, fit.smooth.worst_residual)
    return Verdict(ctx.name, PASS, fit.smooth.worst_residual, ctx.seed, measured=measured)


@check("tangent", "blowup")
def _blowup(ctx):
    space = ctx.space
    x = _point(ctx)
    count = int(ctx.options.get("points", 8))
    scales = ctx.options.get("scales", [1.0, 0.5, 0.25])
    base_lam = float(ctx.options.get("reference", min(scales) / 4.0))
    radius = _extent(space, x)
    reference = blowup_sample(space, x, base_lam, count, radius, seed=ctx.seed)
    uppers = []
    for lam in scales:
        sample = blowup_sample(space, x, float(lam), count, radius, seed=ctx.seed)
        uppers.append(gh_distance_bounds(sample, reference).upper)
    growth = max([b - a for a, b in zip(uppers, uppers[1:])], default=0.0)
    measured = {"scales": list(scales), "upper_bounds": uppers}
    # the bounds should shrink toward the tangent cone; growth only flags
    if growth > 0:
        return _inconclusive(ctx, measured, -growth)
    return Verdict(ctx.name, PASS, -growth, ctx.seed, measured=measured)


@check("tangent", "directions")
def _directions(ctx):
    space = ctx.space
    x = _point(ctx)
    eps = float(ctx.options.get("eps", 0.5))
    lengths = ctx.options.get("lengths", [0.1, 1.0, 10.0])
    budget = int(ctx.options.get("budget", 64))
    doubling = ctx.options.get("doubling")
    packings = []
    for length in lengths:
        packing = packing_directions(
            space, x, float(length), eps, budget, ctx.seed, doubling
        )
        doubling = packing.doubling
        packings.append(packing)
    counts = [packing.count for packing in packings]
    measured = {
        "lengths": list(lengths),
        "counts": counts,
        "bound": packings[0].bound,
        "doubling": packings[0].doubling,
    }
    within = all(packing.within_bound for packing in packings)
    verdict = PASS if within else INCONCLUSIVE
    residual = float(packings[0].bound - max(counts))
    return Verdict(ctx.name, verdict, residual, ctx.seed, measured=measured)


# dimension


@check("dimension", "strainer_number")
def _strainer_number(ctx):
    space = ctx.space
    x = _point(ctx)
    extent = _extent(space, x)
    scales = ctx.options.get("scales", [0.4 * extent, 0.2 * extent, 0.1 * extent])
    delta_n = strainer_constants(space.params.n, 0.0).delta_k
    delta = float(ctx.options.get("delta", 0.5 * delta_n))
    k = strainer_number(space, space.params, x, delta, scales, seed=ctx.seed)
    measured = {"strainer_number": k, "n": space.params.n}
    verdict = PASS if k == space.params.n else INCONCLUSIVE
    residual = float(k - space.params.n)
    return Verdict(ctx.name, verdict, residual, ctx.seed, measured=measured)


@check("dimension", "rough")
def _rough(ctx):
    space = ctx.space
    samples = int(ctx.options.get("samples", 2000))
    radii = [float(r) for r in ctx.options.get("radii", [0.1, 0.05, 0.025])]
    points = space.sample_domain(samples, make_rng(ctx.seed))
    curve = packing_curve(points, radii, space)
    dimension = rough_dimension(curve)
    tolerance = float(ctx.options.get("tolerance", 0.25))
    measured = {"rough_dimension": dimension, "counts": list(curve.counts)}
    csv = _write_curve(ctx, "packing", curve.radii, curve.counts)
    if csv:
        measured["curve"] = csv
    residual = tolerance - abs(dimension - space.params.n)
    verdict = PASS if residual >= 0 else INCONCLUSIVE
    return Verdict(ctx.name, verdict, residual, ctx.seed, measured=measured)


@check("dimension", "volume")
def _volume(ctx):
    space = ctx.space
    x = space.validate(ctx.options.get("x", space.base_point))
    extent = _extent(space, x)
    radii = ctx.options.get("radii", [f * extent for f in (0.2, 0.4, 0.6, 0.8)])
    samples = int(ctx.options.get("samples", 10**4))
    curve = mc_ball_volume(space, x, radii, samples=samples, seed=ctx.seed)
    report = bishop_gromov_check(curve, space.params.n)
    measured = {"volumes": list(curve.volumes), "stderrs": list(curve.stderrs)}
    csv = _write_curve(ctx, "volume", curve.radii, curve.volumes, curve.stderrs)
    if csv:
        measured["curve"] = csv
    return from_residual(ctx.name, report, ctx.seed, measured)


@check("dimension", "hausdorff")
def _hausdorff(ctx):
    space = ctx.space
    if not isinstance(space, LpSpace) or space.n != 2:
        return None
    origin = np.zeros(2)

    def indicator(points):
        return space.get_distance(origin, points) <= 1.0

    estimate = hausdorff_measure_2d(indicator, p=space.p)
    tolerance = float(ctx.options.get("tolerance", 0.05))
    residual = tolerance - abs(estimate.value - math.pi) / math.pi
    measured = {
        "measure": estimate.value,
        "area_ratio": estimate.area_ratio,
        "leftover": estimate.leftover,
        "levels": [list(level) for level in estimate.levels],
    }
    verdict = PASS if residual >= 0 else INCONCLUSIVE
    return Verdict(ctx.name, verdict, residual, ctx.seed, measured=measured)


# strata


@check("strata", "strained_fraction")
def _strained_fraction(ctx):
    space = ctx.space
    k = int(ctx.options.get("k", space.params.n))
    delta = float(ctx.options.get("delta", 0.05))
    count = int(ctx.options.get("count", 200))
    scale = float(ctx.options.get("scale", 0.1 * space.domain_radius))
    result = strained_fraction(space, space.params, k, delta, count, scale, seed=ctx.seed)
    required = float(ctx.options.get("fraction", 0.99))
    measured = {
        "strained": result.strained,
        "not_found": result.not_found,
        "fraction": result.fraction,
    }
    residual = result.fraction - required
    verdict = PASS if residual >= 0 else INCONCLUSIVE
    return Verdict(ctx.name, verdict, residual, ctx.seed, measured=measured)


def _bound_constants(ctx, delta):
    """
    Threshold constants with the doubling and covering data measured on
    the model around the working point.
    """
    space = ctx.space
    x = _point(ctx)
    radius = _extent(space, x)
    doubling = doubling_constant(space, x, radius, seed=ctx.seed)
    constants = threshold_constants(delta, doubling=doubling)
    points = space.sample_ball(x, radius, int(ctx.options.get("samples", 300)), ctx.seed)
    covering = covering_constant(points, constants.L_1, space)
    bits = (constants.M - 1) * math.log2(max(covering, 2))
    if bits <= MAX_BOUND_BITS:
        constants = threshold_constants(delta, doubling=doubling, covering=covering)
    return constants, doubling, covering, bits


@check("strata", "thresholds")
def _thresholds(ctx):
    delta = float(ctx.options.get("delta", 0.1))
    constants, doubling, covering, bits = _bound_constants(ctx, delta)
    measured = {
        "L_0": constants.L_0,
        "S_0": constants.S_0,
        "L_1": constants.L_1,
        "S_1": constants.S_1,
        "M": constants.M,
        "N_0": constants.N_0,
        "doubling": doubling,
        "covering": covering,
        "log2_K": bits,
    }
    residual = constants.S_1 - ctx.space.params.S
    # a larger S only leaves the strata bound without its hypothesis
    verdict = PASS if residual >= 0 else INCONCLUSIVE
    return Verdict(ctx.name, verdict, residual, ctx.seed, measured=measured)


@check("strata", "singular_packing")
def _singular_packing(ctx):
    space = ctx.space
    k = int(ctx.options.get("k", space.params.n - 1))
    if k < 1:
        return None
    delta = float(ctx.options.get("delta", 0.01))
    found = _strainer(ctx, k, delta)
    if not found.found:
        return _inconclusive(ctx, {"k": k, "delta": delta})
    nearest = float(np.min(found.strainer(found.strainer.base)))
    radius = float(ctx.options.get("radius", 0.5 * delta * nearest))
    region = CylinderRegion(
        found.strainer.base, radius, delta * radius, (1,) * k, found.strainer
    )
    constants, _, _, bits = _bound_constants(ctx, delta)
    bound = constants.K if constants.K is not None else math.inf
    result = singular_packing(
        space,
        space.params,
        region,
        delta,
        bound,
        samples=int(ctx.options.get("samples", 200)),
        seed=ctx.seed,
    )
    measured = {
        "count": result.count,
        "members": result.members,
        "strained": result.strained,
        "radius": radius,
        "log2_K": bits,
    }
    verdict = PASS if result.within_bound else INCONCLUSIVE
    return Verdict(ctx.name, verdict, None, ctx.seed, measured=measured)


def run(config, workers=None):
    """
    Run the configured suite and assemble its report.

    :param workers: thread count, one per check by default
    """
    space = parse_space(config.space)
    checks = selected(config.suite)
    seeds = check_seeds(config.seed)
    sidecar = os.path.splitext(config.out)[0] if config.out else None
    if not checks:
        raise InputError("Suite {} has no checks".format(config.suite))

    def execute(item):
        ctx = Context(
            space, config.suite_params(item.suite), seeds[item.name], item.name, sidecar
        )
        started = time.perf_counter()
        verdict = item.run(ctx)
        LOGGER.debug("%s finished in %.3fs", item.name, time.perf_counter() - started)
        return verdict, time.perf_counter() - started

    started = time.perf_counter()
    verdicts, elapsed = [], {}
    with ThreadPoolExecutor(max_workers=workers or len(checks)) as executor:
        futures = {executor.submit(execute, item): item for item in checks}
        for future in as_completed(futures):
            item = futures[future]
            verdict, seconds = future.result()
            elapsed[item.name] = seconds
            if verdict is None:
                LOGGER.debug("%s does not apply to %s", item.name, space)
                continue
            LOGGER.info("%s: %s", item.name, verdict.verdict)
            verdicts.append(verdict)
    elapsed["total"] = time.perf_counter() - started

    used = {name: seeds[name] for name in (item.name for item in checks)}
    return build_report(config, verdicts, used, elapsed, __version__)
