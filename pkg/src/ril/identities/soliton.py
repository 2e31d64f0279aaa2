"""Identities of three-dimensional gradient Ricci solitons ``Ric + Hess f = lam g``."""

from __future__ import annotations

import numpy as np

from .base import EvalContext, IdentityCase, Values, register

E = np.einsum
SOLITON_TOL = 1e-6


def _case(id, group, description, evaluator, *, tolerance=SOLITON_TOL, order=6, min_order=4, diagnose=None):
    return register(IdentityCase(id, group, description, evaluator, tolerance, order, min_order, (3,),
                                 needs_soliton=True, diagnose=diagnose))


def _vec(x) -> np.ndarray:
    return np.atleast_1d(np.asarray(x, dtype=float))


def structure(ctx: EvalContext):
    v = ctx.v
    return v.Ric + v.hess, v.lam * v.g


def ricci_laplacian(ctx: EvalContext):
    v = ctx.v
    rhs = (v.ctr("lij,l->ij", v.dRic, v.df) + 2 * v.lam * v.Ric - 2 * v.ric2 * v.g + v.R**2 * v.g
           - 3 * v.R * v.Ric + 4 * v.ctr("is,sj->ij", v.Ric, v.Ric))
    return v.lapRic, rhs


def scalar_laplacian(ctx: EvalContext):
    v = ctx.v
    return _vec(v.lapR), _vec(v.ctr("l,l->", v.dR, v.df) + 2 * v.lam * v.R - 2 * v.ric2)


def scalar_gradient(ctx: EvalContext):
    v = ctx.v
    return v.dR, 2 * v.ctr("li,l->i", v.Ric, v.df)


def soliton_cotton_rhs(v: Values) -> np.ndarray:
    g, ric, R, df = v.g, v.Ric, v.R, v.df
    a = v.ctr("lk,l->k", ric, df)  # R_lk nabla_l f
    return (0.5 * E("k,ij->ijk", a, g) - 0.5 * E("j,ik->ijk", a, g)
            + E("ij,k->ijk", ric, df) - E("ik,j->ijk", ric, df)
            + R / 2 * E("ik,j->ijk", g, df) - R / 2 * E("ij,k->ijk", g, df))


def soliton_cotton_rhs_alt(v: Values) -> np.ndarray:
    g, ric, R, df, dR = v.g, v.Ric, v.R, v.df, v.dR
    a = ric - R / 2 * g
    return (0.25 * E("k,ij->ijk", dR, g) - 0.25 * E("j,ik->ijk", dR, g)
            + E("ij,k->ijk", a, df) - E("ik,j->ijk", a, df))


def cotton(ctx: EvalContext):
    return ctx.v.C, soliton_cotton_rhs(ctx.v)


def cotton_alt(ctx: EvalContext):
    return ctx.v.C, soliton_cotton_rhs_alt(ctx.v)


def cotton_dot_df(ctx: EvalContext):
    v = ctx.v
    return v.ctr("ijk,i->jk", v.C, v.df), 0.25 * (E("j,k->jk", v.dR, v.df) - E("k,j->jk", v.dR, v.df))


def cotton_df_df(ctx: EvalContext):
    v = ctx.v
    lhs = v.ctr("ijk,i,j->k", v.C, v.df, v.df)
    rhs = 0.25 * v.ctr("p,p->", v.df, v.dR) * v.df - 0.25 * v.ctr("p,p->", v.df, v.df) * v.dR
    return lhs, rhs


def cotton_norm(ctx: EvalContext):
    v = ctx.v
    t = E("ij,k->ijk", v.Ric, v.df) - E("ik,j->ijk", v.Ric, v.df)
    return _vec(v.ctr("ijk,ijk->", t, v.C)), _vec(v.C2)


def cotton_norm_closed_rhs(v: Values) -> float:
    df2 = v.ctr("p,p->", v.df, v.df)
    return float(2 * v.ric2 * df2 - v.R**2 * df2 + v.R * v.ctr("p,p->", v.dR, v.df) - 0.75 * v.ctr("p,p->", v.dR, v.dR))


def cotton_norm_closed(ctx: EvalContext):
    return _vec(ctx.v.C2), _vec(cotton_norm_closed_rhs(ctx.v))


def cotton_laplacian_terms(v: Values) -> dict[str, float]:
    """Terms of the displayed Laplacian of |C|^2, keyed by their coefficient-free form."""
    c, ric, ctr = v.C, v.Ric, v.ctr
    return {
        "transport": float(ctr("p,p->", v.d_C2, v.df)),
        "grad": 2 * float(ctr("aijk,aijk->", v.dC, v.dC)),
        "scalar": -2 * v.R * v.C2,
        "C Ric dR": float(ctr("ijk,ij,k->", c, ric, v.dR)),
        "CC Ric a": 8 * float(ctr("jsk,jik,si->", c, c, ric)),
        "CC Ric b": -16 * float(ctr("jsk,kij,si->", c, c, ric)),
        "C Ric dRic": -8 * float(ctr("ijk,lk,jil->", c, ric, v.dRic)),
    }


CNORM_FLAGGED_COEFFICIENT = -6.0


def cotton_laplacian_rhs(v: Values, coefficient: float = CNORM_FLAGGED_COEFFICIENT) -> float:
    t = cotton_laplacian_terms(v)
    return sum(val for k, val in t.items() if k != "C Ric dR") + coefficient * t["C Ric dR"]


def cotton_laplacian(ctx: EvalContext):
    v = ctx.v
    return _vec(v.lap_C2), _vec(cotton_laplacian_rhs(v))


def cotton_laplacian_contracted(ctx: EvalContext):
    """Laplacian of |C|^2 from the soliton expression of C, expanded by the product rule."""
    v = ctx.v
    b = ctx.bundle
    from ..jets import jet_einsum

    g, ric, r, df = b.metric, b.ricci, b.scalar, b.potential_gradient
    gi = b.inverse_metric
    a = jet_einsum("lm,mk,l->k", gi, ric, df)
    gr = jet_einsum(",ij->ij", r, g)
    c = (jet_einsum("k,ij->ijk", a, g) * 0.5 - jet_einsum("j,ik->ijk", a, g) * 0.5
         + jet_einsum("ij,k->ijk", ric, df) - jet_einsum("ik,j->ijk", ric, df)
         + jet_einsum("ik,j->ijk", gr, df) * 0.5 - jet_einsum("ij,k->ijk", gr, df) * 0.5)
    norm = b.norm2(c, "ddd")
    return _vec(v.lap_C2), _vec(b.laplacian(norm, "").value())


def best_fit_coefficient(contexts) -> float | None:
    """Least-squares coefficient of the flagged ``C_ijk R_ij nabla_k R`` term over several points."""
    xs, ys = [], []
    for ctx in contexts:
        v = ctx.v
        t = cotton_laplacian_terms(v)
        rest = sum(val for k, val in t.items() if k != "C Ric dR")
        xs.append(t["C Ric dR"])
        ys.append(v.lap_C2 - rest)
    x, y = np.asarray(xs), np.asarray(ys)
    denom = float(x @ x)
    return None if denom == 0.0 else float(x @ y) / denom


def flag_cotton_laplacian(contexts) -> str:
    fit = best_fit_coefficient(contexts)
    if fit is None:
        return "flagged term C_ijk R_ij nabla_k R vanishes at every point; no coefficient fit"
    return (f"suspected typo: best-fit coefficient of C_ijk R_ij nabla_k R is {fit:.6g} "
            f"(displayed {CNORM_FLAGGED_COEFFICIENT:g})")


def bach_hessian_form(ctx: EvalContext):
    v = ctx.v
    g, ric, R = v.g, v.Ric, v.R
    ctr = v.ctr
    rhs = (0.25 * v.ddR - 0.25 * v.lapR * g - ctr("jik,j->ik", v.dRic, v.df) + 0.5 * ctr("p,p->", v.dR, v.df) * g
           + ctr("ij,jk->ik", ric - R / 2 * g, v.hess) - (ric - R / 2 * g) * v.lap_f)
    return v.B, rhs


def bach_long(ctx: EvalContext):
    v = ctx.v
    g, ric, R, lam = v.g, v.Ric, v.R, v.lam
    ctr = v.ctr
    rhs = (0.5 * ctr("ilk,l->ik", v.dRic, v.df) + 0.25 * ctr("p,p->", v.dR, v.df) * g - ctr("jik,j->ik", v.dRic, v.df)
           - 1.5 * ctr("ij,jk->ik", ric, ric) - 1.5 * lam * ric + 1.5 * R * ric + lam / 2 * R * g
           + 0.5 * v.ric2 * g - 0.5 * R**2 * g)
    return v.B, rhs


def bach_compact(ctx: EvalContext):
    v = ctx.v
    g, ric, lam = v.g, v.Ric, v.lam
    ctr = v.ctr
    rhs = (0.5 * ctr("ilk,l->ik", v.dRic, v.df) + 0.25 * v.lapR * g - 0.5 * v.lapRic
           - 0.5 * ctr("jik,j->ik", v.dRic, v.df) - lam / 2 * ric + 0.5 * ctr("ij,jk->ik", ric, ric))
    return v.B, rhs


def bach_divergence(ctx: EvalContext):
    v = ctx.v
    ctr = v.ctr
    lhs = ctr("kik->i", v.dB)
    rhs = 0.5 * v.R * v.dR - 0.75 * ctr("il,l->i", v.Ric, v.dR) + v.ric2 * v.df - 0.5 * v.R**2 * v.df
    return lhs, rhs


def bach_divergence_df(ctx: EvalContext):
    v = ctx.v
    return _vec(v.ctr("kik,i->", v.dB, v.df)), _vec(0.5 * v.C2)


_case("soliton-structure", "soliton", "Ric + Hess f = lam g", structure, tolerance=1e-8, min_order=2)
_case("soliton-ricci-laplacian", "soliton", "Laplacian of Ric on a 3D soliton", ricci_laplacian)
_case("soliton-scalar-laplacian", "soliton", "Laplacian R = <nabla R, nabla f> + 2 lam R - 2 |Ric|^2", scalar_laplacian)
_case("soliton-scalar-gradient", "soliton", "nabla_i R = 2 R_li nabla_l f", scalar_gradient, min_order=3)
_case("soliton-cotton", "soliton", "C_ijk in terms of Ric, R and nabla f", cotton, min_order=3)
_case("soliton-cotton-alt", "soliton", "C_ijk in terms of nabla R and the Einstein tensor", cotton_alt, min_order=3)
_case("soliton-cotton-dot-df", "soliton", "C_ijk nabla_i f = (nabla_j R nabla_k f - nabla_k R nabla_j f) / 4",
      cotton_dot_df, min_order=3)
_case("soliton-cotton-df-df", "soliton", "C_ijk nabla_i f nabla_j f = (<nabla f, nabla R> nabla_k f - |nabla f|^2 nabla_k R) / 4",
      cotton_df_df, min_order=3)
_case("soliton-cotton-norm", "soliton", "(R_ij nabla_k f - R_ik nabla_j f) C_ijk = |C|^2", cotton_norm, min_order=3)
_case("soliton-cotton-norm-closed", "soliton", "|C|^2 in closed form from Ric, R, nabla R and nabla f",
      cotton_norm_closed, min_order=3)
_case("soliton-cotton-laplacian", "soliton", "Laplacian of |C|^2 on a 3D soliton, as displayed",
      cotton_laplacian, min_order=5, diagnose=flag_cotton_laplacian)
_case("soliton-cotton-laplacian-contracted", "soliton",
      "Laplacian of |C|^2 from the soliton expression of C by direct contraction", cotton_laplacian_contracted,
      min_order=5)
_case("soliton-bach-hessian-form", "soliton-bach", "B_ik from Hess R, nabla Ric and Hess f", bach_hessian_form,
      min_order=4)
_case("soliton-bach-long", "soliton-bach", "B_ik with Hess f eliminated through the soliton equation", bach_long,
      min_order=4)
_case("soliton-bach-compact", "soliton-bach", "B_ik through the Laplacian of Ric", bach_compact, min_order=4)
_case("soliton-bach-divergence", "soliton-bach", "nabla_k B_ik on a 3D soliton", bach_divergence, min_order=5)
_case("soliton-bach-divergence-df", "soliton-bach", "nabla_k B_ik nabla_i f = |C|^2 / 2", bach_divergence_df,
      min_order=5)
