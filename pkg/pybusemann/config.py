"""
Experiment configuration.

A configuration names a model space, a suite of checks and their
parameters. It is read from an INI-style file::

    [experiment]
    suite = curvature
    seed = 7
    out = report.json

    [space]
    kind = lp
    p = 4
    n = 2
    S = 3

    [curvature]
    trials = 20000

Products take their factors from ``[space.first]`` and ``[space.second]``.
The same nesting is accepted as JSON.
"""
import configparser
import json
import logging
import math
import os
from collections import namedtuple

from .exceptions import BusemannException, ConfigError

LOGGER = logging.getLogger(__name__)

SUITES = ("curvature", "angles", "strainers", "tangent", "dimension", "strata", "all")

#: Environment variable replacing every suite's trial budget
TRIALS_VARIABLE = "PYBUSEMANN_TRIALS"

AUTO = "auto"

_TRUE = ("true", "yes", "on")
_FALSE = ("false", "no", "off")


class ExperimentConfig(
    namedtuple("ExperimentConfig", "space suite params seed out")
):
    """
    space - space description mapping, as accepted by :func:`pybusemann.parse_space`
    suite - one of :data:`SUITES`
    params - mapping of suite name to its parameter mapping
    seed - master seed
    out - report path, or None
    """

    __slots__ = ()

    def suite_params(self, suite):
        return dict(self.params.get(suite, {}))

    def to_dict(self):
        return {
            "space": self.space,
            "suite": self.suite,
            "params": self.params,
            "seed": self.seed,
            "out": self.out,
        }


def coerce(value):
    """
    Turn a configuration string into an int, float, bool, None or list.

    >>> coerce("3"), coerce("0.5"), coerce("inf"), coerce("yes"), coerce("1, 2")
    (3, 0.5, inf, True, [1, 2])
    """
    if not isinstance(value, str):
        return value
    text = value.strip()
    lowered = text.lower()
    if lowered in _TRUE:
        return True
    if lowered in _FALSE:
        return False
    if lowered in ("none", ""):
        return None
    if "," in text:
        return [coerce(part) for part in text.split(",") if part.strip()]
    for kind in (int, float):
        try:
            return kind(text)
        except ValueError:
            pass
    return text


#: Suite options by expected type; anything else passes through unchecked
INT_OPTIONS = (
    "trials", "k", "targets", "runs", "points", "budget", "doubling", "samples",
    "count", "pairs",
)
FLOAT_OPTIONS = (
    "delta", "delta_prime", "scale", "radius", "tol", "rate", "S", "power",
    "constant", "reference", "eps", "tolerance", "fraction",
)
LIST_OPTIONS = ("scales", "lengths", "radii", "x")
TEXT_OPTIONS = ("direction",)


def _number(value, kind):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(value)
    if kind is int:
        if isinstance(value, float) and not value.is_integer():
            raise ValueError(value)
        return int(value)
    return float(value)


def _expected(key):
    if key in INT_OPTIONS:
        return "an integer"
    if key in FLOAT_OPTIONS:
        return "a number"
    if key in LIST_OPTIONS:
        return "a list of numbers"
    return "a string"


def validate_options(suite, options, path="<config>"):
    """
    Check the types of one suite's options and normalize them.

    >>> validate_options("strainers", {"k": 2.0, "scales": 0.5})
    {'k': 2, 'scales': [0.5]}

    :raises ConfigError: naming the offending ``suite.option`` field
    """
    checked = {}
    for key, value in options.items():
        if value is None:
            continue
        field = "{}: field {}.{}".format(path, suite, key)
        try:
            if key in INT_OPTIONS:
                value = _number(value, int)
            elif key in FLOAT_OPTIONS:
                value = _number(value, float)
            elif key in LIST_OPTIONS:
                items = value if isinstance(value, (list, tuple)) else [value]
                value = [_number(item, float) for item in items]
            elif key in TEXT_OPTIONS and not isinstance(value, str):
                raise ValueError(value)
        except ValueError:
            raise ConfigError(
                "{} must be {}. Got {!r}".format(field, _expected(key), value)
            )
        checked[key] = value
    return checked


def _from_ini(text, path):
    parser = configparser.ConfigParser()
    parser.optionxform = str
    try:
        parser.read_string(text, source=path)
    except configparser.MissingSectionHeaderError as error:
        raise ConfigError("{} line {}: missing section header".format(path, error.lineno))
    except configparser.ParsingError as error:
        line = error.errors[0][0] if error.errors else "?"
        raise ConfigError("{} line {}: cannot parse".format(path, line))
    except configparser.Error as error:
        raise ConfigError("{}: {}".format(path, error))

    raw = {}
    for section in parser.sections():
        values = {key: coerce(value) for key, value in parser.items(section)}
        head, _, tail = section.partition(".")
        if tail:
            raw.setdefault(head, {})[tail] = values
        else:
            raw.setdefault(head, {}).update(values)
    return raw


def _from_json(text, path):
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as error:
        raise ConfigError("{} line {}: {}".format(path, error.lineno, error.msg))
    if not isinstance(raw, dict):
        raise ConfigError("{}: top level must be an object".format(path))
    return raw


def _resolve_auto(description, field):
    """
    Replace ``C = auto`` by the constant estimated on the model itself.
    """
    from . import parse_space
    from .curvature import estimate_best_C

    for key in ("first", "second"):
        if isinstance(description.get(key), dict):
            _resolve_auto(description[key], "{}.{}".format(field, key))
    if description.get("C") == AUTO:
        draft = dict(description, C=None)
        space = parse_space(draft)
        estimate = estimate_best_C(space, radius=space.params.D, trials=2000)
        # round up so the declared constant sits above every sampled defect
        description["C"] = math.ceil(estimate * 1e6) / 1e6
        LOGGER.info("estimated %s.C = %g", field, description["C"])


def _section(raw, name, path):
    section = raw.get(name) or {}
    if not isinstance(section, dict):
        raise ConfigError("{}: field {} must be a section".format(path, name))
    return dict(section)


def parse_config(raw, path="<config>"):
    """
    Validate a nested mapping and build an :class:`ExperimentConfig`.
    """
    from . import parse_space

    experiment = raw.get("experiment", {})
    space = raw.get("space")
    if not space:
        raise ConfigError("{}: field space is missing".format(path))
    if "kind" not in space:
        raise ConfigError("{}: field space.kind is missing".format(path))

    suite = experiment.get("suite", "all")
    if suite not in SUITES:
        raise ConfigError(
            "{}: field experiment.suite must be one of {}. Got {}".format(
                path, ", ".join(SUITES), suite
            )
        )
    seed = experiment.get("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        raise ConfigError(
            "{}: field experiment.seed must be a non-negative integer".format(path)
        )

    space = json.loads(json.dumps(space))
    try:
        _resolve_auto(space, "space")
        parse_space(space)
    except BusemannException as error:
        raise ConfigError("{}: field space: {}".format(path, error))

    params = {
        name: validate_options(name, _section(raw, name, path), path)
        for name in SUITES
        if name != "all"
    }
    trials = os.environ.get(TRIALS_VARIABLE)
    if trials:
        try:
            trials = int(trials)
        except ValueError:
            raise ConfigError(
                "{} must be an integer. Got {}".format(TRIALS_VARIABLE, trials)
            )
        for values in params.values():
            values["trials"] = trials
    return ExperimentConfig(space, suite, params, seed, experiment.get("out"))


def load_config(path):
    """
    Read an experiment configuration from an INI or JSON file.

    :raises ConfigError: with the offending line or field
    """
    try:
        with open(path) as handle:
            text = handle.read()
    except OSError as error:
        raise ConfigError("Cannot read {}: {}".format(path, error))
    if str(path).endswith(".json"):
        raw = _from_json(text, path)
    else:
        raw = _from_ini(text, path)
    return parse_config(raw, path)
