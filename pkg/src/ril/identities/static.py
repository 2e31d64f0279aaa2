"""Pointwise algebraic and differential identities of a single metric."""

from __future__ import annotations

import numpy as np

from ..jets import lift_coordinate, constant, stack
from .base import EvalContext, IdentityCase, register

STATIC_TOL = 1e-8


def _case(id, description, evaluator, *, tolerance=STATIC_TOL, order=5, min_order=4, dims=None):
    return register(IdentityCase(id, "static", description, evaluator, tolerance, order, min_order, dims))


def riemann_symmetries(ctx: EvalContext):
    rm = ctx.v.Rm
    lhs = np.stack([rm, rm, rm, rm + rm.transpose(1, 2, 0, 3) + rm.transpose(2, 0, 1, 3)])
    rhs = np.stack([-rm.transpose(1, 0, 2, 3), -rm.transpose(0, 1, 3, 2), rm.transpose(2, 3, 0, 1), np.zeros_like(rm)])
    return lhs, rhs


def cotton_antisymmetry(ctx: EvalContext):
    c = ctx.v.C
    return c, -c.transpose(0, 2, 1)


def cotton_cyclic(ctx: EvalContext):
    c = ctx.v.C
    # C_ijk + C_jki + C_kij
    total = c + np.einsum("jki->ijk", c) + np.einsum("kij->ijk", c)
    return total, np.zeros_like(total)


def cotton_traces(ctx: EvalContext):
    v = ctx.v
    traces = np.stack([v.ctr("iik->k", v.C), v.ctr("iji->j", v.C), v.ctr("ijj->i", v.C)])
    return traces, np.zeros_like(traces)


def weyl_traces(ctx: EvalContext):
    v = ctx.v
    w = v.W
    traces = np.stack([v.ctr(s, w) for s in ("iijk->jk", "ijik->jk", "ijki->jk", "ijjk->ik", "ijkj->ik", "ijkk->ij")])
    sym = np.stack([w + w.transpose(1, 0, 2, 3), w + w.transpose(0, 1, 3, 2), w - w.transpose(2, 3, 0, 1)])
    lhs = np.concatenate([traces.ravel(), sym.ravel()])
    return lhs, np.zeros_like(lhs)


def weyl_vanishes_3d(ctx: EvalContext):
    w = ctx.v.W
    return w, np.zeros_like(w)


def riemann_3d_reconstruction(ctx: EvalContext):
    v = ctx.v
    g, ric = v.g, v.Ric
    e = np.einsum
    rhs = (e("ik,jl->ijkl", ric, g) - e("il,jk->ijkl", ric, g) + e("jl,ik->ijkl", ric, g)
           - e("jk,il->ijkl", ric, g) - v.R / 2 * (e("ik,jl->ijkl", g, g) - e("il,jk->ijkl", g, g)))
    return v.Rm, rhs


def schur_lemma(ctx: EvalContext):
    v = ctx.v
    return 2 * v.ctr("ppi->i", v.dRic), v.dR


def _test_one_form(ctx: EvalContext):
    """The 1-form dx^0 + x^1 dx^2 (padded with zeros) as a jet field."""
    comps = [constant(0.0, ctx.cfg) for _ in range(ctx.n)]
    comps[0] = constant(1.0, ctx.cfg)
    comps[2] = lift_coordinate(1, ctx.cfg)
    return stack(comps)


def interchange_formula(ctx: EvalContext):
    b = ctx.bundle
    omega = _test_one_form(ctx)
    dd = b.nabla(omega, "d", 2).value()  # [i, j, k] = nabla_i nabla_j w_k
    lhs = dd - dd.transpose(1, 0, 2)
    w = omega.value()
    rhs = np.einsum("ijkp,pq,q->ijk", ctx.v.Rm, ctx.v.gi, w)
    return lhs, rhs


def weyl_divergence(ctx: EvalContext):
    v = ctx.v
    n = ctx.n
    # nabla^l W_lijk with the derivative slot first: dW[a, l, i, j, k]
    lhs = v.ctr("llijk->ijk", v.dW)
    return lhs, -(n - 3) / (n - 2) * v.C


def schouten_divergence(ctx: EvalContext):
    v = ctx.v
    n = ctx.n
    return v.ctr("jij->i", v.dS), (n - 2) / (2 * (n - 1)) * v.dR


def bach_symmetry(ctx: EvalContext):
    return ctx.v.B, ctx.v.B.T


def bach_trace(ctx: EvalContext):
    v = ctx.v
    return np.array([v.ctr("ii->", v.B)]), np.zeros(1)


def bach_divergence_rhs(v, n: int) -> np.ndarray:
    """``-(n-4)/(n-2)^2 C_jli R_jl``."""
    return -(n - 4) / (n - 2) ** 2 * v.ctr("jli,jl->i", v.C, v.Ric)


def bach_divergence(ctx: EvalContext):
    v = ctx.v
    return v.ctr("kik->i", v.dB), bach_divergence_rhs(v, ctx.n)


def metric_compatibility(ctx: EvalContext):
    dg = ctx.bundle.value("metric", 1)
    return dg, np.zeros_like(dg)


_case("riemann-symmetries", "R_ijkl = -R_jikl = -R_ijlk = R_klij and the first Bianchi identity",
      riemann_symmetries, order=5, min_order=2)
_case("cotton-antisymmetry", "C_ijk = -C_ikj", cotton_antisymmetry, min_order=3)
_case("cotton-cyclic", "C_ijk + C_jki + C_kij = 0", cotton_cyclic, min_order=3)
_case("cotton-traces", "every metric trace of C vanishes", cotton_traces, min_order=3)
_case("weyl-traces", "W has the curvature symmetries and is totally trace-free", weyl_traces, min_order=2)
_case("weyl-vanishes-3d", "W = 0 in dimension three", weyl_vanishes_3d, min_order=2, dims=(3,))
_case("riemann-3d-reconstruction", "three-dimensional Riemann tensor from Ric, R and g",
      riemann_3d_reconstruction, min_order=2, dims=(3,))
_case("schur-lemma", "2 g^pq nabla_p R_qi = nabla_i R", schur_lemma, min_order=3)
_case("interchange-formula", "nabla_i nabla_j w_k - nabla_j nabla_i w_k = R_ijkp g^pq w_q",
      interchange_formula, min_order=2, dims=(3, 4, 5))
_case("weyl-divergence", "nabla^l W_lijk = -(n-3)/(n-2) C_ijk", weyl_divergence, tolerance=1e-7, min_order=3)
_case("schouten-divergence", "nabla_j S_ij = (n-2)/(2(n-1)) nabla_i R", schouten_divergence, min_order=3)
_case("bach-symmetry", "B_ik = B_ki", bach_symmetry, min_order=4)
_case("bach-trace", "g^ik B_ik = 0", bach_trace, min_order=4)
_case("bach-divergence", "nabla_k B_ik = -(n-4)/(n-2)^2 C_jli R_jl", bach_divergence, tolerance=1e-7, min_order=5)
_case("metric-compatibility", "nabla g = 0", metric_compatibility, tolerance=1e-12, min_order=1)
