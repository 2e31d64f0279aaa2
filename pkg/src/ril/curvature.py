"""Curvature of a jet-valued metric, with the sign and index conventions used throughout.

Conventions (all tensors are stored as dense arrays, covariant slots unless
the valence string says otherwise):

=====================  ==========================================================
``christoffel[k,i,j]``  ``Gamma^k_ij = 1/2 g^ks (d_i g_js + d_j g_is - d_s g_ij)``
``riemann_up[i,j,k,l]`` ``R^l_ijk = d_j Gamma^l_ik - d_i Gamma^l_jk
                        + Gamma^m_ik Gamma^l_jm - Gamma^m_jk Gamma^l_im``
``riemann[i,j,k,l]``    ``R_ijkl = g_lm R^m_ijk``; unit sphere: ``g_ik g_jl - g_il g_jk``
``ricci[i,k]``          ``R_ik = g^jl R_ijkl``
``scalar``              ``R = g^ik R_ik``
``weyl[i,j,k,l]``       Riemann minus its Ricci part (Kulkarni-Nomizu decomposition)
``schouten[i,j]``       ``R_ij - R g_ij / (2(n-1))``
``cotton[i,j,k]``       ``d_k R_ij - d_j R_ik - (d_k R g_ij - d_j R g_ik) / (2(n-1))``
                        (covariant derivatives; antisymmetric in j, k)
``bach[i,k]``           ``(g^jl nabla_l C_ijk - R^jl W_ijkl) / (n-2)``
=====================  ==========================================================

Covariant derivatives put the new index first: ``nabla(T)[a, ...] = nabla_a T``,
so ``nabla(nabla(w))[a, b, k] = nabla_a nabla_b w_k`` and the rough Laplacian is
``g^ab nabla_a nabla_b T``.

Every quantity is itself a jet field, so derivatives of derived tensors are
exact Taylor coefficients; each covariant derivative costs one jet order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .jets import Jet, JetError, JetOrderError, constant, jet_einsum

__all__ = ["TensorComponents", "CurvatureBundle", "covariant_derivative", "inverse_metric", "FIELDS"]


@dataclass(frozen=True)
class TensorComponents:
    """Center values (and flow coefficients) of a tensor with a valence signature."""

    valence: str
    value: np.ndarray
    flow: np.ndarray
    order_used: int = 0

    @property
    def dim(self) -> int:
        return self.value.shape[0] if self.value.ndim else 0

    @property
    def rank(self) -> int:
        return len(self.valence)

    @classmethod
    def from_jet(cls, jet: Jet, valence: str, order_used: int = 0) -> TensorComponents:
        if len(valence) != jet.ndim:
            raise ValueError(f"valence {valence!r} does not match tensor rank {jet.ndim}")
        return cls(valence, jet.value(), jet.flow_value(), order_used)


def inverse_metric(g: Jet) -> Jet:
    """Jet inverse of a symmetric matrix jet by a terminating Neumann series.

    With ``g = g0 + u`` and ``u`` nilpotent (no constant spatial term, at most
    one power of ``s``), ``X = g0^-1 - g0^-1 u X`` converges in order + 2 steps.
    """
    g0 = g.value()
    if np.linalg.cond(g0) > 1e12:
        raise JetError("metric is singular at the expansion point")
    a = np.linalg.inv(g0)
    a = 0.5 * (a + a.T)
    u = g - g0
    au = jet_einsum("ij,jk->ik", a, u)
    x = constant(a, dim=g.dim, order=g.order)
    for _ in range(g.order + (2 if g.has_flow else 1)):
        x = -jet_einsum("ij,jk->ik", au, x) + a
    return x


_SLOTS = "bcdefghijklmnoprstuvwx"


def covariant_derivative(t: Jet, valence: str, gamma: Jet) -> Jet:
    """``nabla_a T`` with the derivative index prepended."""
    if len(valence) != t.ndim:
        raise ValueError(f"valence {valence!r} does not match tensor rank {t.ndim}")
    if t.order == 0:
        raise JetOrderError("tensor field has no derivative order left")
    out = t.gradient()
    letters = _SLOTS[: t.ndim]
    target = "a" + letters
    for s, kind in enumerate(valence):
        src = letters[:s] + "q" + letters[s + 1 :]
        if kind == "d":
            out = out - jet_einsum(f"qa{letters[s]},{src}->{target}", gamma, t)
        elif kind == "u":
            out = out + jet_einsum(f"{letters[s]}aq,{src}->{target}", gamma, t)
        else:
            raise ValueError(f"valence letters must be 'u' or 'd', got {kind!r}")
    return out


# name -> (valence, number of metric derivatives consumed)
FIELDS = {
    "metric": ("dd", 0),
    "inverse_metric": ("uu", 0),
    "christoffel": ("udd", 1),
    "riemann_up": ("dddu", 2),
    "riemann": ("dddd", 2),
    "ricci": ("dd", 2),
    "ricci_up": ("uu", 2),
    "scalar": ("", 2),
    "weyl": ("dddd", 2),
    "schouten": ("dd", 2),
    "cotton": ("ddd", 3),
    "bach": ("dd", 4),
    "ricci_norm2": ("", 2),
    "cotton_norm2": ("", 3),
    "bach_norm2": ("", 4),
    "potential": ("", 0),
    "potential_gradient": ("d", 0),
    "potential_hessian": ("dd", 0),
}


class CurvatureBundle:
    """Memoized curvature of one metric jet (optionally with a soliton potential).

    ``metric`` is a ``(n, n)`` jet of ``g_ij`` about the point; its flow slot,
    if present, is carried through every derived quantity.
    """

    def __init__(self, metric: Jet, potential: Jet | None = None, lam: float | None = None):
        if metric.ndim != 2 or metric.shape[0] != metric.shape[1]:
            raise ValueError(f"metric jet must be square, got shape {metric.shape}")
        self.metric = metric
        self.n = metric.shape[0]
        self.order = metric.order
        self.potential = potential
        self.lam = lam
        self._derivs: dict[tuple[str, int], Jet] = {}

    def __repr__(self):
        return f"CurvatureBundle(n={self.n}, order={self.order}, flow={self.metric.has_flow})"

    # -- metric-level --------------------------------------------------------
    @cached_property
    def inverse_metric(self) -> Jet:
        return inverse_metric(self.metric)

    @cached_property
    def christoffel(self) -> Jet:
        lower = _christoffel_lower(self.metric.gradient())
        return jet_einsum("ks,sij->kij", self.inverse_metric, lower)

    @cached_property
    def riemann_up(self) -> Jet:
        gam = self.christoffel
        dgam = gam.gradient()  # dgam[a, l, i, k] = d_a Gamma^l_ik
        quad = jet_einsum("mik,ljm->ijkl", gam, gam)
        lin = jet_einsum("jlik->ijkl", dgam)
        return lin - lin.transpose(1, 0, 2, 3) + quad - quad.transpose(1, 0, 2, 3)

    @cached_property
    def riemann(self) -> Jet:
        return jet_einsum("lm,ijkm->ijkl", self.metric, self.riemann_up)

    @cached_property
    def ricci(self) -> Jet:
        return jet_einsum("jl,ijkl->ik", self.inverse_metric, self.riemann)

    @cached_property
    def ricci_up(self) -> Jet:
        return self.raise_all(self.ricci, "dd")

    @cached_property
    def scalar(self) -> Jet:
        return jet_einsum("ik,ik->", self.inverse_metric, self.ricci)

    @cached_property
    def ricci_norm2(self) -> Jet:
        return jet_einsum("ij,ij->", self.ricci_up, self.ricci)

    @cached_property
    def weyl(self) -> Jet:
        n = self.n
        if n < 3:
            raise ValueError("the Weyl tensor needs dimension at least 3")
        g, ric, r = self.metric, self.ricci, self.scalar
        gr = jet_einsum("ik,jl->ijkl", ric, g)  # R_ik g_jl
        kn = gr - gr.transpose(0, 1, 3, 2) + gr.transpose(1, 0, 3, 2) - gr.transpose(1, 0, 2, 3)
        gg = jet_einsum("ik,jl->ijkl", g, g)
        gg = gg - gg.transpose(0, 1, 3, 2)
        return self.riemann - kn * (1.0 / (n - 2)) + jet_einsum(",ijkl->ijkl", r, gg) * (1.0 / ((n - 1) * (n - 2)))

    @cached_property
    def schouten(self) -> Jet:
        return self.ricci - jet_einsum(",ij->ij", self.scalar, self.metric) * (1.0 / (2 * (self.n - 1)))

    @cached_property
    def cotton(self) -> Jet:
        n = self.n
        d_ric = self.deriv("ricci")  # [a, i, j]
        d_r = self.deriv("scalar")  # [a]
        g = self.metric
        main = jet_einsum("kij->ijk", d_ric) - jet_einsum("jik->ijk", d_ric)
        tr = jet_einsum("k,ij->ijk", d_r, g)
        return main - (tr - tr.transpose(0, 2, 1)) * (1.0 / (2 * (n - 1)))

    @cached_property
    def cotton_norm2(self) -> Jet:
        return self.norm2(self.cotton, "ddd")

    @cached_property
    def bach(self) -> Jet:
        n = self.n
        div = jet_einsum("aj,aijk->ik", self.inverse_metric, self.deriv("cotton"))
        if n == 3:
            return div
        rw = jet_einsum("jl,ijkl->ik", self.ricci_up, self.weyl)
        return (div - rw) * (1.0 / (n - 2))

    @cached_property
    def bach_norm2(self) -> Jet:
        return self.norm2(self.bach, "dd")

    # -- soliton potential ---------------------------------------------------
    def _need_potential(self) -> Jet:
        if self.potential is None:
            raise ValueError("this bundle carries no soliton potential")
        return self.potential

    @cached_property
    def potential_gradient(self) -> Jet:
        return self._need_potential().gradient()

    @cached_property
    def potential_hessian(self) -> Jet:
        return covariant_derivative(self.potential_gradient, "d", self.christoffel)

    # -- generic operations --------------------------------------------------
    def field(self, name: str) -> Jet:
        if name not in FIELDS:
            raise KeyError(f"unknown field {name!r}")
        if name == "metric":
            return self.metric
        if name == "potential":
            return self._need_potential()
        return getattr(self, name)

    def nabla(self, t: Jet, valence: str, times: int = 1) -> Jet:
        for _ in range(times):
            t = covariant_derivative(t, valence, self.christoffel)
            valence = "d" + valence
        return t

    def deriv(self, name: str, times: int = 1) -> Jet:
        """Memoized ``times``-fold covariant derivative of a named field."""
        if times == 0:
            return self.field(name)
        key = (name, times)
        if key not in self._derivs:
            valence = FIELDS[name][0]
            prev = self.deriv(name, times - 1)
            self._derivs[key] = covariant_derivative(prev, "d" * (times - 1) + valence, self.christoffel)
        return self._derivs[key]

    def laplacian(self, t: Jet, valence: str) -> Jet:
        dd = self.nabla(t, valence, 2)
        rest = _SLOTS[: t.ndim]
        return jet_einsum(f"aq,aq{rest}->{rest}", self.inverse_metric, dd)

    def field_laplacian(self, name: str) -> Jet:
        rest = _SLOTS[: len(FIELDS[name][0])]
        return jet_einsum(f"aq,aq{rest}->{rest}", self.inverse_metric, self.deriv(name, 2))

    def raise_all(self, t: Jet, valence: str) -> Jet:
        """Raise every covariant slot of ``t`` with the inverse metric."""
        for s, kind in enumerate(valence):
            if kind == "d":
                letters = _SLOTS[: t.ndim]
                t = jet_einsum(f"q{letters[s]},{letters[:s]}q{letters[s + 1:]}->{letters}", self.inverse_metric, t)
        return t

    def norm2(self, t: Jet, valence: str) -> Jet:
        """Full metric contraction ``<T, T>``."""
        letters = _SLOTS[: t.ndim]
        up = self.raise_all(t, valence)
        return jet_einsum(f"{letters},{letters}->", up, t)

    def components(self, name: str, times: int = 0) -> TensorComponents:
        valence, used = FIELDS[name]
        return TensorComponents.from_jet(self.deriv(name, times), "d" * times + valence, used + times)

    def value(self, name: str, times: int = 0) -> np.ndarray:
        return self.deriv(name, times).value()

    def flow_value(self, name: str, times: int = 0) -> np.ndarray:
        return self.deriv(name, times).flow_value()


def _christoffel_lower(dg: Jet) -> Jet:
    # dg[a, i, j] = d_a g_ij ; result[s, i, j] = (d_i g_js + d_j g_is - d_s g_ij) / 2
    a = dg.transpose(2, 0, 1)  # [s, i, j] <- dg[i, j, s]  (d_i g_js)
    b = dg.transpose(2, 1, 0)  # [s, i, j] <- dg[j, i, s]  (d_j g_is)
    return (a + b - dg) * 0.5

