from __future__ import annotations

import math

import numpy as np
import pytest

from ril import expr as ex
from ril.expr import ExprParseError, parse
from ril.jets import JetConfig, extract_partial, lift_coordinate


@pytest.mark.parametrize(
    "text, env, expected",
    [
        ("1 + x^2", {"x": 3.0}, 10.0),
        ("pow(x, 3) - 2*x", {"x": 2.0}, 4.0),
        ("exp(log(x))", {"x": 1.7}, 1.7),
        ("sin(pi/2) + cos(0)", {}, 2.0),
        ("sqrt(x*x + y*y)", {"x": 3.0, "y": 4.0}, 5.0),
        ("-x / (1 + y)", {"x": 2.0, "y": 1.0}, -1.0),
        ("2^3^2", {}, 512.0),
    ],
)
def test_parse_and_evaluate(text, env, expected):
    assert float(parse(text).evaluate(env)) == pytest.approx(expected)


def test_variables_and_substitute():
    e = parse("a*x^2 + b")
    assert e.variables() == {"a", "b", "x"}
    s = e.substitute({"a": 2.0, "b": 1.0})
    assert s.variables() == {"x"}
    assert float(s.evaluate({"x": 3.0})) == 19.0


@pytest.mark.parametrize(
    "text, line, column",
    [
        ("x + * y", 1, 5),
        ("x y", 1, 3),
        ("foo(x)", 1, 1),
        ("x + q", 1, 5),
        ("x % 2", 1, 1),
        ("sin(x, y)", 1, 1),
    ],
)
def test_parse_errors_carry_position(text, line, column):
    with pytest.raises(ExprParseError) as info:
        parse(text, {"x", "y"})
    assert (info.value.line, info.value.column) == (line, column)


def test_offsets_shift_positions():
    with pytest.raises(ExprParseError) as info:
        parse("x + q", {"x"}, line_offset=4, column_offset=10)
    assert (info.value.line, info.value.column) == (5, 15)


def test_same_tree_evaluates_floats_and_jets():
    e = parse("exp(x) * sin(y) / (2 + x*y)")
    cfg = JetConfig(2, 3, (0.2, 0.4))
    jet = e.evaluate({"x": lift_coordinate(0, cfg), "y": lift_coordinate(1, cfg)})
    assert jet.value() == pytest.approx(float(e.evaluate({"x": 0.2, "y": 0.4})))
    h = 1e-6
    dfdx = (float(e.evaluate({"x": 0.2 + h, "y": 0.4})) - float(e.evaluate({"x": 0.2 - h, "y": 0.4}))) / (2 * h)
    assert extract_partial(jet, (1, 0))[0] == pytest.approx(dfdx, rel=1e-8)


def test_float_domain_errors():
    with pytest.raises(ValueError):
        parse("log(x)").evaluate({"x": -1.0})


def test_builders_compose_with_operators():
    x = ex.var("x")
    e = 1 / (1 + x**2) - ex.exp(-x)
    assert float(e.evaluate({"x": 0.0})) == 0.0
    assert str(parse(str(e)).evaluate({"x": 0.5})) == str(e.evaluate({"x": 0.5}))
    assert math.isclose(float(ex.sqrt(x).evaluate({"x": 4.0})), 2.0)
    assert np.allclose(parse("x*2").evaluate({"x": np.arange(3.0)}), [0, 2, 4])
