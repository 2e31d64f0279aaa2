from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ril.catalog import SamplePlan, catalog_get, sample_points
from ril.flow import FlowVariation, heat_operator, ricci_direction
from ril.identities import EvalContext
from ril.jets import JetOrderError

from fd_oracle import ricci_flow_derivative


def ctx_at(name, order=6, k=0, **params):
    fam = catalog_get(name, **params)
    return EvalContext(fam, sample_points(fam, SamplePlan(k + 1, seed=7))[k], order)


def test_flat_direction_is_zero_and_nothing_moves():
    ctx = ctx_at("flat-3")
    var = ctx.flow(3)
    assert not np.any(var.direction.value())
    for name in ("christoffel", "ricci", "cotton"):
        assert not np.any(var.time_derivative(name))


def test_unit_sphere_direction_is_minus_four_g():
    ctx = ctx_at("round-sphere-3", r=1.0)
    h = ctx.flow(2).direction.value()
    assert np.abs(h + 4 * ctx.v.g).max() < 1e-12
    assert heat_operator(ctx.flow(2), "scalar") == pytest.approx(24.0, abs=1e-10)


def test_cigar_line_direction_has_no_vertical_part():
    ctx = ctx_at("cigar-r-steady")
    h = ctx.flow(2).direction.value()
    assert np.abs(h[2]).max() < 1e-14 and np.abs(h[:, 2]).max() < 1e-14


def test_varied_metric_flow_part_equals_direction():
    var = ctx_at("polynomial-perturb-4").flow(2)
    assert np.array_equal(var.varied.metric.flow().coefficients(), var.direction.coefficients())


@pytest.mark.parametrize("name", ["polynomial-perturb-3", "cigar-r-steady", "polynomial-perturb-5"])
def test_inverse_metric_heat(name):
    ctx = ctx_at(name)
    lhs = heat_operator(ctx.flow(0), "inverse_metric")
    assert np.abs(lhs - 2 * ctx.v.Ricu).max() < 1e-10


@pytest.mark.parametrize("name", ["polynomial-perturb-3", "conformal-flat-3", "warped-s2-interval", "cigar-r-steady"])
@pytest.mark.parametrize("field", ["christoffel", "ricci", "cotton"])
def test_dual_and_finite_difference_agree(name, field):
    ctx = ctx_at(name)
    var = ctx.flow(3)
    dual = var.time_derivative(field, "dual")
    fd = var.time_derivative(field, "fd")
    assert np.abs(dual - fd).max() < 1e-6 * (1 + np.abs(dual).max())


def test_christoffel_derivative_matches_oracle():
    fam = catalog_get("polynomial-perturb-3", eps=0.3)
    p = sample_points(fam, SamplePlan(1, seed=2))[0]
    dual = EvalContext(fam, p, 4).flow(1).time_derivative("christoffel")
    assert np.abs(dual - ricci_flow_derivative(fam, p, "christoffel")).max() < 1e-7


def test_ricci_derivative_matches_oracle():
    fam = catalog_get("polynomial-perturb-3", eps=0.3)
    p = sample_points(fam, SamplePlan(1, seed=2))[0]
    dual = EvalContext(fam, p, 4).flow(2).time_derivative("ricci")
    assert np.abs(dual - ricci_flow_derivative(fam, p, "ricci")).max() < 1e-5


@settings(max_examples=20, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_time_derivative_is_linear_in_direction(a, b):
    ctx = ctx_at("polynomial-perturb-3", order=4)
    h = ricci_direction(ctx.bundle, 2)
    g = ctx.bundle.metric.real().truncate(2)
    both = FlowVariation(ctx.bundle, 2, direction=h * a + g * b).time_derivative("ricci")
    one = FlowVariation(ctx.bundle, 2, direction=h).time_derivative("ricci")
    two = FlowVariation(ctx.bundle, 2, direction=g).time_derivative("ricci")
    assert np.allclose(both, a * one + b * two, atol=1e-12)
    # Ric is scale invariant: varying g by a constant multiple leaves it fixed.
    assert np.abs(two).max() < 1e-12


def test_direction_needs_enough_order():
    ctx = ctx_at("polynomial-perturb-3", order=4)
    with pytest.raises(JetOrderError):
        ricci_direction(ctx.bundle, 3)
    with pytest.raises(ValueError):
        ctx.flow(1).time_derivative("ricci", method="leapfrog")
