"""Evolution equations along Ricci flow: curvature kernel, Cotton tensor, Bach tensor.

Left-hand sides come from the flow variation (``d/dt`` in the ``s`` slot) and
the rough Laplacian of the base bundle; right-hand sides are assembled from
center values with every repeated index contracted through ``g^-1``.
"""

from __future__ import annotations

import numpy as np

from ..catalog import COTTON_FLAT_FLOW, WEYL_FLAT_FLOW
from .base import EvalContext, IdentityCase, Values, register

E = np.einsum


def _case(id, group, description, evaluator, *, tolerance, order, min_order, flow_order, dims=None, asserted=True,
          requires=()):
    return register(IdentityCase(id, group, description, evaluator, tolerance, order, min_order, dims,
                                 flow_order=flow_order, asserted=asserted, requires=frozenset(requires)))


# -- curvature kernel --------------------------------------------------------

def christoffel_evolution(ctx: EvalContext):
    v = ctx.v
    lhs = ctx.dt("christoffel", 1)
    d = v.dRic  # d[a, i, j] = nabla_a R_ij
    inner = E("ijs->sij", d) + E("jis->sij", d) - d  # nabla_i R_js + nabla_j R_is - nabla_s R_ij
    return lhs, -E("ks,sij->kij", v.gi, inner)


def ricci_evolution(ctx: EvalContext):
    v = ctx.v
    lhs = ctx.heat("ricci", 2)
    rhs = -2 * v.ctr("kl,kijl->ij", v.Ric, v.Rm) - 2 * v.ctr("ip,jp->ij", v.Ric, v.Ric)
    return lhs, rhs


def ricci_evolution_3d(ctx: EvalContext):
    v = ctx.v
    rr = v.ctr("ip,jp->ij", v.Ric, v.Ric)
    rhs = -6 * rr + 3 * v.R * v.Ric + 2 * v.ric2 * v.g - v.R**2 * v.g
    return ctx.heat("ricci", 2), rhs


def ricci_evolution_weyl_rhs(v: Values, n: int) -> np.ndarray:
    rr = v.ctr("ip,jp->ij", v.Ric, v.Ric)
    return (-2 * n / (n - 2) * rr + 2 * n / ((n - 1) * (n - 2)) * v.R * v.Ric + 2 / (n - 2) * v.ric2 * v.g
            - 2 / ((n - 1) * (n - 2)) * v.R**2 * v.g - 2 * v.ctr("pq,pijq->ij", v.Ric, v.W))


def ricci_evolution_weyl(ctx: EvalContext):
    return ctx.heat("ricci", 2), ricci_evolution_weyl_rhs(ctx.v, ctx.n)


def scalar_evolution(ctx: EvalContext):
    return np.atleast_1d(ctx.heat("scalar", 2)), np.atleast_1d(2 * ctx.v.ric2)


def inverse_metric_heat(ctx: EvalContext):
    b = ctx.bundle
    lhs = ctx.dt("inverse_metric", 0) - b.laplacian(b.inverse_metric, "uu").value()
    return lhs, 2 * ctx.v.Ricu


FLOW_TOL = 1e-6
_case("christoffel-evolution", "flow", "d/dt Gamma^k_ij = -g^ks (nabla_i R_js + nabla_j R_is - nabla_s R_ij)",
      christoffel_evolution, tolerance=FLOW_TOL, order=4, min_order=3, flow_order=1)
_case("ricci-evolution", "flow", "(d/dt - Laplacian) R_ij = -2 R^kl R_kijl - 2 g^pq R_ip R_jq",
      ricci_evolution, tolerance=FLOW_TOL, order=4, min_order=4, flow_order=2)
_case("ricci-evolution-3d", "flow", "three-dimensional Ricci evolution in terms of Ric, R and g",
      ricci_evolution_3d, tolerance=FLOW_TOL, order=4, min_order=4, flow_order=2, dims=(3,))
_case("ricci-evolution-weyl", "flow", "n-dimensional Ricci evolution with the Weyl coupling -2 R^pq W_pijq",
      ricci_evolution_weyl, tolerance=FLOW_TOL, order=4, min_order=4, flow_order=2, dims=(3, 4, 5))
_case("scalar-evolution", "flow", "(d/dt - Laplacian) R = 2 |Ric|^2",
      scalar_evolution, tolerance=FLOW_TOL, order=4, min_order=4, flow_order=2)
_case("inverse-metric-heat", "flow", "(d/dt - Laplacian) g^ij = 2 R^ij",
      inverse_metric_heat, tolerance=1e-8, order=4, min_order=2, flow_order=0)


# -- Cotton tensor -----------------------------------------------------------

def cotton_rhs_3d_parts(v: Values) -> tuple[np.ndarray, np.ndarray]:
    """The Cotton evolution right-hand side in 3D, split as (Cotton terms, the rest)."""
    c, ric, g, R = v.C, v.Ric, v.g, v.R
    ctr = v.ctr
    cot = (ctr("pj,kpi->ijk", ric, c) + ctr("pj,pki->ijk", ric, c)
           + 5 * ctr("ip,pkj->ijk", ric, c)
           + ctr("pk,jip->ijk", ric, c) + ctr("pk,pij->ijk", ric, c)
           + 2 * R * c
           + 2 * ctr("ql,qjl,ik->ijk", ric, c, g) - 2 * ctr("ql,qkl,ij->ijk", ric, c, g))
    d2, dR, dric = v.d_ric2, v.dR, v.dRic
    rest = (0.5 * E("k,ij->ijk", d2, g) - 0.5 * E("j,ik->ijk", d2, g)
            + R / 2 * E("j,ik->ijk", dR, g) - R / 2 * E("k,ij->ijk", dR, g)
            + 2 * ctr("pk,jpi->ijk", ric, dric) - 2 * ctr("pj,kpi->ijk", ric, dric)
            + E("ij,k->ijk", ric, dR) - E("ik,j->ijk", ric, dR))
    return cot, rest


def cotton_rhs_3d(v: Values) -> np.ndarray:
    cot, rest = cotton_rhs_3d_parts(v)
    return cot + rest


def cotton_constraint_tensor_3d(v: Values) -> np.ndarray:
    """The 3-tensor that must vanish when C stays zero along the flow (3D)."""
    g, R, ctr = v.g, v.R, v.ctr
    d2, dR, dric, ric = v.d_ric2, v.dR, v.dRic, v.Ric
    return (E("k,ij->ijk", d2, g) - E("j,ik->ijk", d2, g)
            + R * E("j,ik->ijk", dR, g) - R * E("k,ij->ijk", dR, g)
            + 4 * ctr("pk,jpi->ijk", ric, dric) - 4 * ctr("pj,kpi->ijk", ric, dric)
            + 2 * E("ij,k->ijk", ric, dR) - 2 * E("ik,j->ijk", ric, dR))


def cotton_rhs_nd_parts(v: Values, n: int) -> dict[str, np.ndarray]:
    """The n-dimensional right-hand side grouped as in the display."""
    c, ric, g, R, ctr = v.C, v.Ric, v.g, v.R, v.ctr
    a = 1.0 / (n - 2)
    b = 1.0 / ((n - 1) * (n - 2))
    d2, dR, dric = v.d_ric2, v.dR, v.dRic
    parts = {
        "ricci-cotton": a * (ctr("pj,kpi->ijk", ric, c) + ctr("pj,pki->ijk", ric, c) + (n - 3) * ctr("pj,ikp->ijk", ric, c)
                             + (n + 2) * ctr("ip,pkj->ijk", ric, c)
                             - ctr("pk,jpi->ijk", ric, c) - ctr("pk,pji->ijk", ric, c) - (n - 3) * ctr("pk,ijp->ijk", ric, c)),
        "scalar-cotton": 2 * a * R * c + 2 * a * ctr("ql,qjl,ik->ijk", ric, c, g) - 2 * a * ctr("ql,qkl,ij->ijk", ric, c, g),
        "gradients": (b * E("k,ij->ijk", d2, g) - b * E("j,ik->ijk", d2, g)
                      + b * R * E("j,ik->ijk", dR, g) - b * R * E("k,ij->ijk", dR, g)
                      + 2 * a * ctr("pk,jpi->ijk", ric, dric) - 2 * a * ctr("pj,kpi->ijk", ric, dric)
                      + a * E("ij,k->ijk", ric, dR) - a * E("ik,j->ijk", ric, dR)),
    }
    if n > 3:
        w, dw = v.W, v.dW  # dw[a, ...] = nabla_a W_...
        parts["weyl"] = (-2 * ctr("pikl,pjl->ijk", w, c) + 2 * ctr("pijl,pkl->ijk", w, c) - 2 * ctr("jklp,pil->ijk", w, c)
                         + 2 * ctr("pl,jpikl->ijk", ric, dw) - 2 * ctr("pl,kpijl->ijk", ric, dw))
    else:
        parts["weyl"] = np.zeros_like(c)
    return parts


def cotton_rhs_nd(v: Values, n: int) -> np.ndarray:
    return sum(cotton_rhs_nd_parts(v, n).values())


def weyl_flat_constraint_tensor(v: Values, n: int) -> np.ndarray:
    """Gradient terms of the n-dimensional display: must vanish when W stays zero."""
    return cotton_rhs_nd_parts(v, n)["gradients"]


def cotton_evolution_3d(ctx: EvalContext):
    return ctx.heat("cotton", 3), cotton_rhs_3d(ctx.v)


def cotton_evolution_3d_traces(ctx: EvalContext):
    v = ctx.v
    lhs = ctx.heat("cotton", 3)
    traces = np.stack([v.ctr("iik->k", lhs), v.ctr("iji->j", lhs), v.ctr("ijj->i", lhs)])
    expected = np.stack([-2 * v.ctr("ij,ijk->k", v.Ric, v.C), -2 * v.ctr("ik,ijk->j", v.Ric, v.C), np.zeros(ctx.n)])
    return traces, expected


def cotton_evolution_nd(ctx: EvalContext):
    return ctx.heat("cotton", 3), cotton_rhs_nd(ctx.v, ctx.n)


def cotton_evolution_reduction(ctx: EvalContext):
    """The n-dimensional right-hand side at n = 3 against the 3D one."""
    v = ctx.v
    return cotton_rhs_nd(v, 3), cotton_rhs_3d(v)


def cotton_evolution_weyl_flat(ctx: EvalContext):
    v = ctx.v
    ctx.require_small("Weyl tensor", v.W)
    n = ctx.n
    parts = cotton_rhs_nd_parts(v, n)
    return ctx.heat("cotton", 3), parts["ricci-cotton"] + parts["scalar-cotton"] + parts["gradients"]


def weyl_flat_constraint(ctx: EvalContext):
    v = ctx.v
    ctx.require_small("Weyl tensor", v.W)
    ctx.require_small("nabla Weyl", v.dW)
    t = weyl_flat_constraint_tensor(v, ctx.n)
    return t, np.zeros_like(t)


def cotton_constraint(ctx: EvalContext):
    v = ctx.v
    ctx.require_small("Cotton tensor", v.C)
    t = cotton_constraint_tensor_3d(v)
    return t, np.zeros_like(t)


def cotton_constraint_traces(ctx: EvalContext):
    v = ctx.v
    ctx.require_small("Cotton tensor", v.C)
    t = cotton_constraint_tensor_3d(v)
    traces = np.stack([v.ctr("iik->k", t), v.ctr("iji->j", t), v.ctr("ijj->i", t)])
    return traces, np.zeros_like(traces)


def codazzi_tensor(b):
    """Jet field |Ric|^2 g - 4 R_pj R_pi + 3 R R_ij - 7/8 R^2 g."""
    from ..jets import jet_einsum

    ric, g, r = b.ricci, b.metric, b.scalar
    rr = jet_einsum("pq,pj,qi->ij", b.inverse_metric, ric, ric)
    return (jet_einsum(",ij->ij", b.ricci_norm2, g) - rr * 4.0 + jet_einsum(",ij->ij", r, ric) * 3.0
            - jet_einsum(",,ij->ij", r, r, g) * (7.0 / 8.0))


def codazzi_defect(ctx: EvalContext):
    v = ctx.v
    ctx.require_small("Cotton tensor", v.C)
    b = ctx.bundle
    dt = b.nabla(codazzi_tensor(b), "dd").value()  # [k, i, j] = nabla_k T_ij
    return dt, E("jik->kij", dt)  # nabla_k T_ij against nabla_j T_ik, both stored as [k, i, j]


def cotton_constraint_consistency(ctx: EvalContext):
    """Twice the non-Cotton part of the 3D right-hand side is the constraint tensor."""
    v = ctx.v
    _, rest = cotton_rhs_3d_parts(v)
    return 2 * rest, cotton_constraint_tensor_3d(v)


def cotton_norm_rhs(v: Values, n: int) -> float:
    c, ric, ctr = v.C, v.Ric, v.ctr
    a = 1.0 / (n - 2)
    grad_c2 = float(ctr("aijk,aijk->", v.dC, v.dC))
    total = (-2 * grad_c2 - 16 * a * ctr("ipk,iqk,pq->", c, c, ric) + 24 * a * ctr("ipk,kqi,pq->", c, c, ric)
             + 4 * a * v.R * v.C2 + 8 * a * ctr("ijk,pk,jpi->", c, ric, v.dRic) + 4 * a * ctr("ijk,ij,k->", c, ric, v.dR))
    if n > 3:
        w, dw = v.W, v.dW
        total += (8 * ctr("ijk,lp,jpikl->", c, ric, dw) - 8 * ctr("ijk,pjl,pikl->", c, c, w)
                  - 4 * ctr("jpi,ljk,pikl->", c, c, w))
    return float(total)


def cotton_norm_evolution(ctx: EvalContext):
    lhs = ctx.heat("cotton_norm2", 3)
    return np.atleast_1d(lhs), np.atleast_1d(cotton_norm_rhs(ctx.v, ctx.n))


COTTON_TOL = 1e-6
_case("cotton-evolution-3d", "cotton", "(d/dt - Laplacian) C_ijk in dimension three",
      cotton_evolution_3d, tolerance=COTTON_TOL, order=6, min_order=5, flow_order=3, dims=(3,))
_case("cotton-evolution-3d-traces", "cotton", "metric traces of (d/dt - Laplacian) C_ijk",
      cotton_evolution_3d_traces, tolerance=COTTON_TOL, order=6, min_order=5, flow_order=3, dims=(3,))
_case("cotton-evolution-nd", "cotton", "(d/dt - Laplacian) C_ijk in dimension n with Weyl terms",
      cotton_evolution_nd, tolerance=COTTON_TOL, order=6, min_order=5, flow_order=3, dims=(3, 4, 5))
_case("cotton-evolution-reduction", "cotton", "n-dimensional right-hand side at n = 3 equals the 3D one",
      cotton_evolution_reduction, tolerance=1e-10, order=6, min_order=4, flow_order=None, dims=(3,))
_case("cotton-evolution-weyl-flat", "cotton", "n-dimensional Cotton evolution without Weyl terms where W = 0",
      cotton_evolution_weyl_flat, tolerance=COTTON_TOL, order=6, min_order=5, flow_order=3, dims=(4, 5),
      requires=(WEYL_FLAT_FLOW,))
_case("weyl-flat-constraint", "cotton", "gradient terms vanish when W stays zero along the flow",
      weyl_flat_constraint, tolerance=COTTON_TOL, order=6, min_order=4, flow_order=None, dims=(4, 5),
      requires=(WEYL_FLAT_FLOW,))
_case("cotton-norm-evolution", "cotton", "(d/dt - Laplacian) |C|^2 (with Weyl terms when n > 3)",
      cotton_norm_evolution, tolerance=COTTON_TOL, order=6, min_order=5, flow_order=3, dims=(3, 4, 5))
_case("cotton-constraint", "cotton", "constraint tensor vanishes when C stays zero along the flow",
      cotton_constraint, tolerance=COTTON_TOL, order=6, min_order=4, flow_order=None, dims=(3,),
      requires=(COTTON_FLAT_FLOW,))
_case("cotton-constraint-traces", "cotton", "every trace of the constraint tensor vanishes",
      cotton_constraint_traces, tolerance=COTTON_TOL, order=6, min_order=4, flow_order=None, dims=(3,),
      requires=(COTTON_FLAT_FLOW,))
_case("codazzi-defect", "cotton", "|Ric|^2 g - 4 Ric.Ric + 3 R Ric - 7/8 R^2 g is Codazzi when C stays zero",
      codazzi_defect, tolerance=COTTON_TOL, order=6, min_order=4, flow_order=None, dims=(3,),
      requires=(COTTON_FLAT_FLOW,))
_case("cotton-constraint-consistency", "cotton", "non-Cotton part of the 3D evolution is half the constraint tensor",
      cotton_constraint_consistency, tolerance=1e-10, order=6, min_order=4, flow_order=None, dims=(3,))


# -- Bach tensor ---------------------------------------------------------------

def bach_rhs_brackets(v: Values) -> list[np.ndarray]:
    """The four bracketed groups of the 3D Bach evolution, each a symmetric 2-tensor."""
    ctr, g = v.ctr, v.g
    c, ric, b, R = v.C, v.Ric, v.B, v.R
    dR, dric, ddric, ddR, dC = v.dR, v.dRic, v.ddRic, v.ddR, v.dC
    lap_ric, lap_r = v.lapRic, v.lapR
    grad_r2 = float(ctr("p,p->", dR, dR))
    first = 3 * ctr("p,ipk->ik", dR, c) + ctr("p,pki->ik", dR, c) - ctr("p,kip->ik", dR, dric)
    second = (-2 * ctr("pl,pikl->ik", ric, dC) - 3 * ctr("pk,pi->ik", ric, b) - 5 * ctr("pi,pk->ik", ric, b)
              + 2 * ctr("ip,kp->ik", lap_ric, ric) - 2 * ctr("lkpi,pl->ik", ddric, ric)
              + ctr("lk,li->ik", ddR, ric) - lap_r * ric)
    third = (-2 * ctr("pkl,lpi->ik", dric, c) - 2 * ctr("pkl,ilp->ik", dric, c)
             - 4 * ctr("pil,lpk->ik", dric, c) - 2 * ctr("ipl,pkl->ik", dric, c))
    fourth = (3 * R * b + 2 * ctr("spl,psl->", dric, c) * g + 2 * ctr("pl,pl->", ric, b) * g
              + 0.5 * (grad_r2 + R * lap_r - v.lap_ric2) * g - 0.5 * (R * ddR - v.dd_ric2)
              + 2 * ctr("lip,lkp->ik", dric, dric) - ctr("l,lik->ik", dR, dric))
    return [first, second, third, fourth]


def bach_rhs_3d(v: Values) -> np.ndarray:
    return sum(bach_rhs_brackets(v))


def bach_evolution_3d(ctx: EvalContext):
    return ctx.heat("bach", 4), bach_rhs_3d(ctx.v)


def bach_evolution_rhs_symmetry(ctx: EvalContext):
    rhs = bach_rhs_3d(ctx.v)
    return rhs, rhs.T


def bach_norm_rhs_from_evolution(v: Values) -> float:
    """2 B.(d/dt - Laplacian)B + (d/dt g^-1) terms - 2|nabla B|^2, with the displayed Bach evolution."""
    b, ctr = v.B, v.ctr
    grad_b2 = float(ctr("aik,aik->", v.dB, v.dB))
    return float(2 * ctr("ik,ik->", b, bach_rhs_3d(v)) + 4 * ctr("ia,ik,ak->", v.Ric, b, b) - 2 * grad_b2)


def bach_norm_rhs_displayed(v: Values) -> float:
    """The displayed |B|^2 evolution, reading the truncated term as 6 B_ik nabla_p R C_ipk."""
    b, ctr = v.B, v.ctr
    c, ric, R = v.C, v.Ric, v.R
    dR, dric, ddric, ddR, dC = v.dR, v.dRic, v.ddRic, v.ddR, v.dC
    grad_b2 = float(ctr("aik,aik->", v.dB, v.dB))
    return float(
        -2 * grad_b2 - 12 * ctr("ik,iq,qk->", b, b, ric) + 6 * ctr("ik,p,ipk->", b, dR, c)
        - 4 * ctr("ik,pl,pikl->", b, ric, dC)
        + 4 * ctr("ik,pkl,pil->", b, dric, c) - 8 * ctr("ik,pkl,lpi->", b, dric, c)
        - 4 * ctr("ik,ipl,pkl->", b, dric, c) + 6 * R * v.B2
        - 2 * ctr("ik,p,kip->", b, dR, dric) + 4 * ctr("ik,ip,kp->", b, v.lapRic, ric)
        - 4 * ctr("ik,lkpi,pl->", b, ddric, ric) + 2 * ctr("ik,lk,li->", b, ddR, ric)
        - 2 * v.lapR * ctr("ik,ik->", b, ric) - R * ctr("ik,ik->", b, ddR) + ctr("ik,ik->", b, v.dd_ric2)
        - 2 * ctr("ik,l,lik->", b, dR, dric) + 4 * ctr("ik,lip,lkp->", b, dric, dric)
    )


def bach_norm_evolution(ctx: EvalContext):
    return np.atleast_1d(ctx.heat("bach_norm2", 4)), np.atleast_1d(bach_norm_rhs_from_evolution(ctx.v))


def bach_norm_evolution_displayed(ctx: EvalContext):
    return np.atleast_1d(ctx.heat("bach_norm2", 4)), np.atleast_1d(bach_norm_rhs_displayed(ctx.v))


BACH_TOL = 1e-5
_case("bach-evolution-3d", "bach", "(d/dt - Laplacian) B_ik in dimension three",
      bach_evolution_3d, tolerance=BACH_TOL, order=7, min_order=6, flow_order=4, dims=(3,))
_case("bach-evolution-rhs-symmetry", "bach", "the Bach evolution right-hand side is symmetric",
      bach_evolution_rhs_symmetry, tolerance=1e-7, order=7, min_order=6, flow_order=None, dims=(3,))
_case("bach-norm-evolution", "bach", "(d/dt - Laplacian) |B|^2 derived from the Bach evolution by contraction",
      bach_norm_evolution, tolerance=BACH_TOL, order=7, min_order=6, flow_order=4, dims=(3,))
_case("bach-norm-evolution-displayed", "bach", "(d/dt - Laplacian) |B|^2 as displayed (truncated term read as C_ipk)",
      bach_norm_evolution_displayed, tolerance=BACH_TOL, order=7, min_order=6, flow_order=4, dims=(3,),
      asserted=False)
