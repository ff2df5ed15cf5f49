from .cone import EuclideanCone
from .exceptions import InputError
from .lp import LpSpace
from .product import ProductSpace
from .space import CurvatureParams, GeodesicSegment, Kind, SpaceModel
from .sphere import SphericalCap


__version__ = "0.1.0"


def _coerce(value):
    try:
        return int(value)
    except ValueError:
        pass
    try:
        return float(value)
    except ValueError:
        return value


def parse_description(text):
    """
    Parse ``"kind=lp p=3 n=2"`` into a description mapping.
    """
    description = {}
    for token in text.split():
        key, sep, value = token.partition("=")
        if not sep or not key:
            raise InputError("Cannot parse space token {!r}".format(token))
        description[key] = _coerce(value)
    return description


def parse_space(description, **overrides):
    """
    Build a space model from its description.

    The description is a mapping with a ``kind`` key (or the same thing
    written as ``"kind=cone theta=4.0"``). Keyword arguments ``S``, ``C``
    and ``D`` override the declared curvature parameters.

    >>> parse_space("kind=lp p=3 n=2")
    <lp p=3 n=2>
    >>> parse_space({"kind": "cone", "theta": 4.0}, C=0.5).params.C
    0.5
    """
    if isinstance(description, str):
        description = parse_description(description)
    else:
        description = dict(description)
    description.update({k: v for k, v in overrides.items() if v is not None})

    kind_class_map = {
        Kind.LP.value: LpSpace,
        "euclidean": LpSpace,
        Kind.CONE.value: EuclideanCone,
        Kind.SPHERE.value: SphericalCap,
        Kind.PRODUCT.value: ProductSpace,
    }
    # Step 1: Find the model class for the kind
    kind = description.get("kind")
    try:
        kind_class_map[kind]
    except KeyError:
        raise InputError("Cannot build a space of kind {}".format(kind))

    # Step 2: Euclidean space is the l^2 model
    if kind == "euclidean":
        description["p"] = 2.0

    return kind_class_map[kind].from_description(description)
