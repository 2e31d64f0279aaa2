"""Plain-numpy finite-difference curvature, independent of the jet machinery.

Only float evaluation of the metric components is shared with the library.
Derivatives use the order-8 central stencil; nesting them gives Christoffel
symbols, curvature and Ricci time derivatives at roughly 1e-9 accuracy.
"""

from __future__ import annotations

import numpy as np

from ril.catalog import MetricFamily, evaluate_metric

STENCIL = np.array([1 / 280, -4 / 105, 1 / 5, -4 / 5, 0.0, 4 / 5, -1 / 5, 4 / 105, -1 / 280])
OFFSETS = np.arange(-4, 5)
H = 1e-2


def d(fn, x, h=H):
    """Stack of partial derivatives of an array-valued ``fn`` at ``x``; derivative index first."""
    x = np.asarray(x, dtype=float)
    out = []
    for a in range(len(x)):
        acc = 0.0
        for w, k in zip(STENCIL, OFFSETS):
            if w == 0.0:
                continue
            y = x.copy()
            y[a] += k * h
            acc = acc + w * np.asarray(fn(y))
        out.append(acc / h)
    return np.stack(out)


def metric_fn(fam: MetricFamily, shift=None):
    """``x -> g(x)``, optionally ``g + t * shift(x)`` via a ``(t, fn)`` pair."""
    if shift is None:
        return lambda x: evaluate_metric(fam, x)
    t, fn = shift
    return lambda x: evaluate_metric(fam, x) + t * fn(x)


def christoffel_fn(g):
    def gamma(x):
        dg = d(g, x)  # dg[a, i, j] = d_a g_ij
        gi = np.linalg.inv(g(x))
        # low[i, j, s] = (d_i g_js + d_j g_is - d_s g_ij) / 2
        low = 0.5 * (dg + np.einsum("jis->ijs", dg) - np.einsum("sij->ijs", dg))
        return np.einsum("ks,ijs->kij", gi, low)

    return gamma


def riemann_up_fn(g):
    """``R[i, j, k, l] = d_j Gamma^l_ik - d_i Gamma^l_jk + Gamma^m_ik Gamma^l_jm - Gamma^m_jk Gamma^l_im``."""
    gamma = christoffel_fn(g)

    def rm(x):
        G = gamma(x)  # G[l, i, k]
        dG = d(gamma, x)  # dG[a, l, i, k]
        return (np.einsum("jlik->ijkl", dG) - np.einsum("iljk->ijkl", dG)
                + np.einsum("mik,ljm->ijkl", G, G) - np.einsum("mjk,lim->ijkl", G, G))

    return rm


def ricci_fn(g):
    rm = riemann_up_fn(g)
    return lambda x: np.einsum("ijkj->ik", rm(x))


def curvature(fam: MetricFamily, x) -> dict[str, np.ndarray]:
    g = metric_fn(fam)
    gx = g(np.asarray(x, float))
    gi = np.linalg.inv(gx)
    rm_up = riemann_up_fn(g)(np.asarray(x, float))
    rm = np.einsum("ijkm,lm->ijkl", rm_up, gx)
    ric = np.einsum("ijkj->ik", rm_up)
    return {
        "metric": gx,
        "inverse_metric": gi,
        "christoffel": christoffel_fn(g)(np.asarray(x, float)),
        "riemann": rm,
        "ricci": ric,
        "scalar": np.einsum("ik,ik->", gi, ric),
    }


def potential_hessian(fam: MetricFamily, x) -> np.ndarray:
    """Covariant Hessian of the soliton potential."""
    from ril.catalog import evaluate_scalar_jet  # noqa: F401  (only floats are used below)

    def f(y):
        env = dict(zip(fam.coords, y))
        return float(fam.soliton.f.evaluate(env))

    x = np.asarray(x, float)
    df = d(f, x)
    ddf = d(lambda y: d(f, y), x)
    G = christoffel_fn(metric_fn(fam))(x)
    return ddf - np.einsum("kij,k->ij", G, df)


def ricci_flow_derivative(fam: MetricFamily, x, name: str, t: float = 1e-4) -> np.ndarray:
    """Centered difference in ``t`` of a field of ``g - 2 t Ric(g)``, everything by finite differences."""
    ric = ricci_fn(metric_fn(fam))
    fields = {"christoffel": christoffel_fn, "ricci": ricci_fn}
    plus = fields[name](metric_fn(fam, (-2 * t, ric)))(np.asarray(x, float))
    minus = fields[name](metric_fn(fam, (2 * t, ric)))(np.asarray(x, float))
    return (plus - minus) / (2 * t)
