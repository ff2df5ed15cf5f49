import json
import math

import pytest

from pybusemann import ProductSpace, parse_space
from pybusemann.config import (
    TRIALS_VARIABLE,
    coerce,
    load_config,
    parse_config,
    validate_options,
)
from pybusemann.exceptions import ConfigError

CURVATURE = """\
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
trials = 500
"""


def test_coerce():
    assert coerce("12") == 12
    assert coerce("2.5") == 2.5
    assert math.isinf(coerce("inf"))
    assert coerce("off") is False
    assert coerce("none") is None
    assert coerce("0.5, 0.25") == [0.5, 0.25]
    assert coerce("lp") == "lp"
    assert coerce(3) == 3


def test_load_ini(tmp_path):
    path = tmp_path / "experiment.ini"
    path.write_text(CURVATURE)
    config = load_config(str(path))
    assert config.suite == "curvature"
    assert config.seed == 7
    assert config.out == "report.json"
    assert config.space == {"kind": "lp", "p": 4, "n": 2, "S": 3}
    assert config.suite_params("curvature") == {"trials": 500}
    assert config.suite_params("tangent") == {}


def test_defaults():
    config = parse_config({"space": {"kind": "cone", "theta": 4.0}})
    assert config.suite == "all"
    assert config.seed == 0
    assert config.out is None


def test_product_sections(tmp_path):
    path = tmp_path / "product.ini"
    path.write_text(
        "[space]\nkind = product\n\n"
        "[space.first]\nkind = lp\np = 3\nn = 1\n\n"
        "[space.second]\nkind = sphere\ncap = 0.5\n"
    )
    config = load_config(str(path))
    space = parse_space(config.space)
    assert isinstance(space, ProductSpace)
    assert space.params.n == 3


def test_load_json(tmp_path):
    path = tmp_path / "experiment.json"
    raw = {"experiment": {"suite": "angles"}, "space": {"kind": "lp"}}
    path.write_text(json.dumps(raw))
    assert load_config(str(path)).suite == "angles"


@pytest.mark.parametrize(
    "raw, field",
    [
        ({}, "space"),
        ({"space": {"p": 4}}, "space.kind"),
        (
            {"space": {"kind": "lp"}, "experiment": {"suite": "weather"}},
            "experiment.suite",
        ),
        ({"space": {"kind": "lp"}, "experiment": {"seed": -1}}, "experiment.seed"),
        ({"space": {"kind": "lp", "p": 1.5}}, "space"),
        ({"space": {"kind": "torus"}}, "space"),
        ({"space": {"kind": "lp"}, "curvature": {"trials": "many"}}, "curvature.trials"),
        ({"space": {"kind": "lp"}, "strainers": {"k": 1.5}}, "strainers.k"),
        ({"space": {"kind": "lp"}, "strainers": {"delta": True}}, "strainers.delta"),
        ({"space": {"kind": "lp"}, "dimension": {"scales": "big"}}, "dimension.scales"),
        ({"space": {"kind": "lp"}, "strata": 3}, "strata"),
    ],
)
def test_invalid_fields_are_named(raw, field):
    with pytest.raises(ConfigError) as info:
        parse_config(raw, "bad.ini")
    assert "field {}".format(field) in str(info.value)

def test_suite_options_are_normalized():
    options = validate_options(
        "dimension",
        {"trials": 400.0, "delta": 1, "scales": 0.5, "direction": "convex", "x": None},
    )
    assert options == {
        "trials": 400,
        "delta": 1.0,
        "scales": [0.5],
        "direction": "convex",
    }
    assert isinstance(options["trials"], int)
    config = parse_config({"space": {"kind": "lp"}, "strainers": {"mode": "fast"}})
    assert config.suite_params("strainers") == {"mode": "fast"}



def test_parse_errors_carry_the_line(tmp_path):
    path = tmp_path / "broken.ini"
    path.write_text("kind = lp\n")
    with pytest.raises(ConfigError, match="line 1"):
        load_config(str(path))
    path = tmp_path / "broken.json"
    path.write_text('{\n  "space": \n}\n')
    with pytest.raises(ConfigError, match="line 3"):
        load_config(str(path))
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.ini"))


def test_trials_from_the_environment(monkeypatch):
    monkeypatch.setenv(TRIALS_VARIABLE, "64")
    config = parse_config({"space": {"kind": "lp"}, "curvature": {"trials": 5000}})
    assert config.suite_params("curvature")["trials"] == 64
    assert config.suite_params("strata")["trials"] == 64
    monkeypatch.setenv(TRIALS_VARIABLE, "many")
    with pytest.raises(ConfigError):
        parse_config({"space": {"kind": "lp"}})


def test_semiconvexity_constant_on_auto():
    config = parse_config({"space": {"kind": "sphere", "cap": 1.0, "C": "auto"}})
    assert isinstance(config.space["C"], float)
    assert config.space["C"] >= 0
    assert parse_space(config.space).params.C == config.space["C"]
