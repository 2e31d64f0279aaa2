from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ril import jets as J
from ril.jets import JetConfig, JetError, JetOrderError, SingularJetError, constant, extract_partial, lift_coordinate


def coef(j, alpha):
    return float(j.coefficients()[..., j.layout.index(alpha)])


def xs(point, order=3):
    cfg = JetConfig(len(point), order, tuple(point))
    return cfg, [lift_coordinate(i, cfg) for i in range(len(point))]


def test_lift_coordinate_at_shifted_point():
    cfg, (x, _, _) = xs((2.0, 0.0, 0.0), order=2)
    assert coef(x, (0, 0, 0)) == 2.0
    assert coef(x, (1, 0, 0)) == 1.0
    assert np.count_nonzero(x.coefficients()) == 2


def test_lift_at_origin_is_linear():
    _, (_, _, z) = xs((0.0, 0.0, 0.0))
    c = z.coefficients()
    assert np.count_nonzero(c) == 1 and coef(z, (0, 0, 1)) == 1.0


def test_square_of_shifted_coordinate():
    _, (x, _, _) = xs((2.0, 0.0, 0.0), order=2)
    sq = x * x
    assert (coef(sq, (0, 0, 0)), coef(sq, (1, 0, 0)), coef(sq, (2, 0, 0))) == (4.0, 4.0, 1.0)


def test_lift_rejects_bad_index():
    cfg = JetConfig(3, 2, (0.0, 0.0, 0.0))
    with pytest.raises(JetError):
        lift_coordinate(3, cfg)


def test_coefficient_count_is_binomial():
    for dim, order in [(2, 3), (3, 7), (5, 6)]:
        cfg = JetConfig(dim, order, (0.0,) * dim)
        assert lift_coordinate(0, cfg).coefficients().size == math.comb(dim + order, order)


def test_product_of_conjugates():
    _, (x, _) = xs((0.0, 0.0), order=2)
    p = (1 + x) * (1 - x)
    assert coef(p, (0, 0)) == 1.0 and coef(p, (1, 0)) == 0.0 and coef(p, (2, 0)) == -1.0


def test_geometric_series():
    _, (x, _) = xs((0.0, 0.0), order=3)
    q = 1 / (1 + x)
    assert [coef(q, (k, 0)) for k in range(4)] == pytest.approx([1, -1, 1, -1], abs=1e-15)


def test_dual_square():
    cfg = JetConfig(2, 2, (0.0, 0.0))
    g = constant(3.0, cfg).with_flow(constant(2.0, cfg))
    assert extract_partial(g * g, (0, 0)) == (9.0, 12.0)


def test_division_by_zero_center_raises():
    _, (x, _) = xs((0.0, 0.0))
    with pytest.raises(SingularJetError):
        1 / x


def test_transcendental_examples():
    cfg, (x, y) = xs((0.0, 0.0), order=2)
    assert np.allclose(J.exp(constant(0.0, cfg)).coefficients(), constant(1.0, cfg).coefficients())
    lg = J.log(1 + x + y)
    expected = {(1, 0): 1, (0, 1): 1, (2, 0): -0.5, (1, 1): -1, (0, 2): -0.5}
    for alpha, val in expected.items():
        assert coef(lg, alpha) == pytest.approx(val, abs=1e-15)
    sq = J.sqrt(4 + x)
    assert coef(sq, (0, 0)) == pytest.approx(2.0) and coef(sq, (1, 0)) == pytest.approx(0.25)


@pytest.mark.parametrize("fn", [J.log, J.sqrt])
def test_domain_violation(fn):
    cfg = JetConfig(1, 2, (0.0,))
    with pytest.raises(SingularJetError):
        fn(lift_coordinate(0, cfg) - 1.0)


def test_extract_partial_examples():
    _, (x, y, _) = xs((0.0, 0.0, 0.0))
    assert extract_partial(x * x, (2, 0, 0))[0] == 2.0
    j = J.sin(x) * y
    assert extract_partial(j, (1, 1, 0))[0] == pytest.approx(1.0)
    assert extract_partial(j, (0, 0, 0)) == (0.0, 0.0)
    with pytest.raises(JetOrderError):
        extract_partial(x, (2, 2, 0))


def test_truncation_is_a_prefix():
    _, (x, y) = xs((0.3, -0.2), order=5)
    f = J.exp(x * y) + J.cos(x)
    low = J.exp(x.truncate(3) * y.truncate(3)) + J.cos(x.truncate(3))
    assert np.allclose(f.truncate(3).coefficients(), low.coefficients(), rtol=0, atol=1e-15)


def test_partial_lowers_order():
    _, (x, y) = xs((0.5, 0.1), order=4)
    f = x**3 * y
    fx = f.partial(0)
    assert fx.order == 3
    assert fx.value() == pytest.approx(3 * 0.25 * 0.1)


# -- properties --------------------------------------------------------------

def random_jet(seed, dim=2, order=4, flow=True):
    rng = np.random.default_rng(seed)
    lay = J.get_layout(dim, order)
    data = rng.normal(size=(2 if flow else 1, lay.size))
    return J.Jet(data, lay)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 10_000), st.integers(0, 10_000))
def test_ring_axioms(sa, sb, sc):
    a, b, c = random_jet(sa), random_jet(sb), random_jet(sc)
    close = lambda u, v: np.allclose(u.data, v.data, rtol=1e-14, atol=1e-13)  # noqa: E731
    assert close((a + b) + c, a + (b + c))
    assert close(a * b, b * a)
    assert close(a * (b + c), a * b + a * c)
    assert close((a * b) * c, a * (b * c))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 10_000))
def test_leibniz_at_first_order(sa, sb):
    a, b = random_jet(sa, flow=False), random_jet(sb, flow=False)
    for axis in range(2):
        alpha = [0, 0]
        alpha[axis] = 1
        da, db, dab = extract_partial(a, alpha)[0], extract_partial(b, alpha)[0], extract_partial(a * b, alpha)[0]
        assert dab == pytest.approx(da * b.value() + a.value() * db, rel=1e-14, abs=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_flow_slot_is_the_gateaux_derivative(g, h):
    cfg = JetConfig(1, 2, (0.0,))
    u = constant(g, cfg).with_flow(constant(h, cfg))
    assert extract_partial(u**3, (0,))[1] == pytest.approx(3 * g * g * h, rel=1e-14, abs=1e-14)


def _richardson(f, x, alpha, h=1e-2):
    """Mixed partial by nested order-8 central differences."""
    import sys
    from pathlib import Path

    sys.path.insert(0, str(Path(__file__).parent))
    from fd_oracle import d

    fn = f
    for axis, k in enumerate(alpha):
        for _ in range(k):
            fn = (lambda g, a: (lambda y: d(g, y, h)[a]))(fn, axis)
    return float(fn(np.asarray(x, float)))


EXPRESSIONS = [
    lambda x, y, m: m.exp(x * y) / (2 + m.sin(x)),
    lambda x, y, m: m.sin(x + 2 * y) * m.exp(-x),
    lambda x, y, m: (1 + x * x) / (3 + y + m.sin(x * y)),
    lambda x, y, m: m.exp(m.sin(x) * y) + x * y * y,
]


class _NP:
    exp, sin = staticmethod(np.exp), staticmethod(np.sin)


@pytest.mark.parametrize("expr", EXPRESSIONS)
@settings(max_examples=8, deadline=None)
@given(st.floats(-0.8, 0.8), st.floats(-0.8, 0.8))
def test_partials_match_finite_differences(expr, px, py):
    cfg, (x, y) = xs((px, py), order=3)
    jet = expr(x, y, J)
    f = lambda p: expr(p[0], p[1], _NP)  # noqa: E731
    for alpha in [(1, 0), (0, 1), (2, 0), (1, 1), (1, 2)]:
        exact = extract_partial(jet, alpha)[0]
        approx = _richardson(f, (px, py), alpha)
        assert exact == pytest.approx(approx, rel=1e-7, abs=1e-7)


def test_jet_einsum_matches_numpy_on_values():
    cfg = JetConfig(3, 2, (0.1, 0.2, 0.3))
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=(3, 3)), rng.normal(size=(3, 3, 3))
    ja, jb = constant(a, cfg), constant(b, cfg)
    out = J.jet_einsum("ij,jkl->ikl", ja, jb)
    assert np.allclose(out.value(), np.einsum("ij,jkl->ikl", a, b))


# -- random closed-form expressions against tensor-product central differences --

from ril import expr as ex  # noqa: E402

_LEAVES = st.one_of(
    st.sampled_from([ex.var("x"), ex.var("y")]),
    st.floats(-2, 2, allow_nan=False).map(lambda c: ex.const(round(c, 3))),
)


def _extend(children):
    return st.one_of(
        st.tuples(children, children).map(lambda t: t[0] + t[1]),
        st.tuples(children, children).map(lambda t: t[0] * t[1]),
        st.tuples(children, children).map(lambda t: t[0] / (2 + t[1] * t[1])),
        children.map(lambda c: ex.exp(c / 2)),
        children.map(ex.sin),
    )


RANDOM_EXPR = st.recursive(_LEAVES, _extend, max_leaves=6)
FD_H = 0.05


def _fd_partial(e, point, alpha):
    """Richardson extrapolation of the O(h^8) stencil over h and h/2."""
    coarse, fine = _fd_stencil(e, point, alpha, FD_H), _fd_stencil(e, point, alpha, FD_H / 2)
    return (256 * fine - coarse) / 255


def _fd_stencil(e, point, alpha, h):
    """Tensor-product order-8 central difference, evaluated in one vectorized call."""
    grids = []
    weights = np.ones(1)
    for axis, k in enumerate(alpha):
        offs, w = OFFSETS_1D, STENCIL_1D
        node_offsets = np.array([0.0])
        node_w = np.ones(1)
        for _ in range(k):
            node_offsets = (node_offsets[:, None] + offs[None, :] * h).ravel()
            node_w = (node_w[:, None] * w[None, :] / h).ravel()
        grids.append((node_offsets, node_w))
    ox, wx = grids[0]
    oy, wy = grids[1]
    X = point[0] + ox[:, None] + 0 * oy[None, :]
    Y = point[1] + oy[None, :] + 0 * ox[:, None]
    vals = np.asarray(e.evaluate({"x": X, "y": Y}), dtype=float) * np.ones_like(X)
    return float(np.einsum("i,j,ij->", wx, wy, vals))


STENCIL_1D = np.array([1 / 280, -4 / 105, 1 / 5, -4 / 5, 0.0, 4 / 5, -1 / 5, 4 / 105, -1 / 280])
OFFSETS_1D = np.arange(-4, 5, dtype=float)
PARTIALS = [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (2, 1), (1, 2), (3, 0), (2, 2), (1, 3), (0, 4)]


@settings(max_examples=1000, deadline=None)
@given(RANDOM_EXPR, st.floats(-0.5, 0.5), st.floats(-0.5, 0.5))
def test_random_expressions_match_finite_differences(e, px, py):
    cfg = JetConfig(2, 4, (px, py))
    env = {"x": lift_coordinate(0, cfg), "y": lift_coordinate(1, cfg)}
    jet = e.evaluate(env)
    if not isinstance(jet, J.Jet):
        jet = constant(float(jet), cfg)
    for alpha in PARTIALS:
        exact = extract_partial(jet, alpha)[0]
        approx = _fd_partial(e, (px, py), alpha)
        scale = max(1.0, abs(exact))
        assert abs(exact - approx) <= 1e-7 * scale, (str(e), alpha, exact, approx)
