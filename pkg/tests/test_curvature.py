from __future__ import annotations

import numpy as np
import pytest

from ril.catalog import SamplePlan, catalog_get, evaluate_metric_jet, sample_points
from ril.curvature import CurvatureBundle, covariant_derivative, inverse_metric
from ril.identities import residual
from ril.jets import JetConfig, JetOrderError, constant, jet_einsum, lift_coordinate, stack

from fd_oracle import curvature


def bundle_at(name, order=4, k=0, **params):
    fam = catalog_get(name, **params)
    p = sample_points(fam, SamplePlan(k + 1, seed=11))[k]
    return fam, p, CurvatureBundle(evaluate_metric_jet(fam, p, order))


@pytest.mark.parametrize(
    "name",
    ["round-sphere-3", "hyperbolic-3", "warped-s2-interval", "cigar-r-steady", "polynomial-perturb-3",
     "polynomial-perturb-4", "conformal-flat-3"],
)
def test_curvature_matches_finite_difference_oracle(name):
    fam, p, b = bundle_at(name)
    oracle = curvature(fam, p)
    assert np.abs(b.value("christoffel") - oracle["christoffel"]).max() < 1e-11
    for key in ("riemann", "ricci", "scalar"):
        assert np.abs(b.value(key) - oracle[key]).max() < 1e-8, key


def test_unit_sphere_constant_curvature():
    _, _, b = bundle_at("round-sphere-3", r=1.0)
    g = b.value("metric")
    expected = np.einsum("ik,jl->ijkl", g, g) - np.einsum("il,jk->ijkl", g, g)
    assert np.abs(b.value("riemann") - expected).max() < 1e-12
    assert b.value("scalar") == pytest.approx(6.0, abs=1e-12)
    assert b.value("ricci_norm2") == pytest.approx(12.0, abs=1e-12)
    assert np.abs(b.value("cotton")).max() < 1e-12
    assert np.abs(b.deriv("scalar").value()).max() < 1e-12
    assert abs(b.field_laplacian("scalar").value()) < 1e-12


def test_hyperbolic_is_negative():
    _, _, b = bundle_at("hyperbolic-3")
    assert b.value("scalar") == pytest.approx(-6.0, abs=1e-10)


def test_cigar_scalar_at_origin():
    fam = catalog_get("cigar-r-steady")
    b = CurvatureBundle(evaluate_metric_jet(fam, (0.0, 0.0, 0.0), 4))
    assert b.value("scalar") == pytest.approx(4.0, abs=1e-12)


def test_inverse_metric_flow_part():
    fam, p, b = bundle_at("polynomial-perturb-3", order=4)
    h = (b.ricci * -2.0).real().truncate(2)
    gs = b.metric.real().truncate(2).with_flow(h)
    inv = inverse_metric(gs)
    gi = inv.value()
    assert np.abs(np.einsum("ij,jk->ik", gi, gs.value()) - np.eye(3)).max() < 1e-13
    assert np.allclose(inv.flow_value(), -gi @ h.value() @ gi, atol=1e-14)


@pytest.mark.parametrize("name", ["warped-s2-interval", "polynomial-perturb-5", "cigar-r-steady"])
def test_metric_is_parallel(name):
    _, _, b = bundle_at(name, order=3)
    assert np.abs(b.nabla(b.metric, "dd").value()).max() < 1e-12


def test_laplacian_of_constant_vanishes():
    _, _, b = bundle_at("polynomial-perturb-3", order=3)
    one = jet_einsum("ij,ij->", b.metric, b.inverse_metric)  # = n, as a jet
    assert abs(one.value() - 3) < 1e-13
    assert abs(b.laplacian(one, "").value()) < 1e-12


def test_weyl_vanishes_on_conformally_flat_4d_and_is_tracefree_otherwise():
    _, _, b = bundle_at("conformal-flat-4", order=3)
    assert np.abs(b.value("weyl")).max() < 1e-12
    _, _, b = bundle_at("polynomial-perturb-4", eps=0.3, order=3)
    w = b.value("weyl")
    gi = b.value("inverse_metric")
    assert np.abs(w).max() > 1e-3
    for sub in ("ik,ijkl->jl", "jl,ijkl->ik", "il,ijkl->jk"):
        assert np.abs(np.einsum(sub, gi, w)).max() < 1e-13


@pytest.mark.parametrize("name", ["warped-s2-interval", "round-sphere-3", "flat-3", "conformal-flat-3"])
def test_conformally_flat_families_have_no_cotton(name):
    _, _, b = bundle_at(name, order=4)
    assert np.abs(b.value("cotton")).max() < 1e-10


def test_cigar_times_line_has_cotton():
    _, _, b = bundle_at("cigar-r-steady", order=4)
    assert np.abs(b.value("cotton")).max() > 1e-3


def test_bach_symmetric_tracefree_on_perturbation():
    _, _, b = bundle_at("polynomial-perturb-3", order=5, eps=0.3)
    B = b.value("bach")
    nb = np.abs(B).max()
    assert nb > 1e-4
    assert np.abs(B - B.T).max() / nb < 1e-8
    assert abs(np.einsum("ik,ik->", b.value("inverse_metric"), B)) / nb < 1e-8


def test_flat_bach_zero():
    _, _, b = bundle_at("flat-4", order=4)
    assert not np.any(b.value("bach"))


def test_interchange_with_explicit_one_form():
    # w = dx0 + x1 dx2
    fam, p, b = bundle_at("polynomial-perturb-3", order=5)
    cfg = JetConfig(3, 5, tuple(p))
    x1 = lift_coordinate(1, cfg)
    w = stack([constant(1.0, cfg), constant(0.0, cfg), x1])
    dd = b.nabla(w, "d", times=2).value()  # dd[i, j, k] = nabla_i nabla_j w_k
    lhs = dd - np.einsum("jik->ijk", dd)
    rhs = np.einsum("ijkp,pq,q->ijk", b.value("riemann"), b.value("inverse_metric"), w.value())
    assert np.abs(lhs).max() > 1e-4
    assert residual(lhs, rhs) < 1e-8


def test_memoized_fields_are_reproducible():
    fam, p, b = bundle_at("polynomial-perturb-3", order=5)
    first = b.value("bach")
    fresh = CurvatureBundle(evaluate_metric_jet(fam, p, 5))
    assert np.array_equal(first, fresh.value("bach"))
    assert b.bach is b.bach


def test_insufficient_order_raises():
    _, _, b = bundle_at("polynomial-perturb-3", order=3)
    with pytest.raises(JetOrderError):
        b.bach
    with pytest.raises(JetOrderError):
        covariant_derivative(b.ricci, "dd", b.christoffel).truncate(5)
