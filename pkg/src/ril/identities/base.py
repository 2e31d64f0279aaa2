"""Identity cases, evaluation contexts, and residual reports."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from ..catalog import MetricFamily, evaluate_metric_jet, evaluate_scalar_jet
from ..curvature import CurvatureBundle
from ..flow import FlowVariation
from ..jets import JetConfig

__all__ = [
    "IdentityCase",
    "CaseResult",
    "ResidualReport",
    "EvalContext",
    "Values",
    "PreconditionViolation",
    "residual",
    "ctr",
    "register",
    "REGISTRY",
    "PASS",
    "FAIL",
    "SKIP",
    "VIOLATION",
    "REPORT",
]

PASS, FAIL, SKIP, VIOLATION, REPORT = "pass", "fail", "skip", "violation", "report"


class PreconditionViolation(Exception):
    """The (family, point) does not satisfy a case's hypothesis."""


def residual(lhs, rhs) -> float:
    """``max|lhs - rhs| / (1 + max(max|lhs|, max|rhs|))``."""
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    if lhs.shape != rhs.shape:
        raise ValueError(f"sides have different shapes {lhs.shape} and {rhs.shape}")
    if lhs.size == 0:
        return 0.0
    scale = max(np.abs(lhs).max(), np.abs(rhs).max())
    return float(np.abs(lhs - rhs).max() / (1.0 + scale))


def ctr(subscripts: str, *ops: np.ndarray, gi: np.ndarray) -> np.ndarray:
    """Einsum over covariant tensors, contracting each repeated index with ``g^-1``.

    This is how an orthonormal-frame display such as ``C_ipk C_iqk R_pq`` is
    read in a coordinate basis: the first occurrence of every summed index is
    raised before the plain sum.
    """
    lhs, _, out = subscripts.partition("->")
    terms = lhs.split(",")
    if len(terms) != len(ops):
        raise ValueError(f"{subscripts!r} expects {len(terms)} operands, got {len(ops)}")
    counts: dict[str, int] = {}
    for t in terms:
        for c in t:
            counts[c] = counts.get(c, 0) + 1
    raised = set()
    new_ops = []
    for t, op in zip(terms, ops):
        op = np.asarray(op, dtype=float)
        for pos, c in enumerate(t):
            if counts[c] == 2 and c not in out and c not in raised:
                op = np.moveaxis(np.tensordot(gi, op, axes=([1], [pos])), 0, pos)
                raised.add(c)
            elif counts[c] > 2:
                raise ValueError(f"index {c!r} appears {counts[c]} times in {subscripts!r}")
        new_ops.append(op)
    return np.einsum(subscripts, *new_ops, optimize=True)


@dataclass(frozen=True)
class IdentityCase:
    """One displayed identity, evaluated as ``(lhs, rhs)`` at a point.

    ``order`` is the metric jet order used; ``min_order`` the least that
    still leaves enough derivatives.  ``flow_order`` is the spatial order of
    the flow direction when the identity involves ``d/dt``.
    """

    id: str
    group: str
    description: str
    evaluator: Callable[["EvalContext"], tuple[np.ndarray, np.ndarray]]
    tolerance: float
    order: int
    min_order: int
    dims: tuple[int, ...] | None = None
    needs_soliton: bool = False
    flow_order: int | None = None
    asserted: bool = True
    requires: frozenset[str] = frozenset()
    # Called with the contexts of a failing (case, family) to explain the failure.
    diagnose: Callable[[list["EvalContext"]], str] | None = None

    @property
    def uses_flow(self) -> bool:
        return self.flow_order is not None

    def applicability(self, fam: MetricFamily) -> str | None:
        """Reason the case cannot run on ``fam`` (``None`` if it can)."""
        if self.dims is not None and fam.dim not in self.dims:
            return f"needs dimension in {list(self.dims)}, family has {fam.dim}"
        if self.needs_soliton and not fam.is_soliton:
            return "family carries no soliton data"
        missing = self.requires - fam.tags
        if missing:
            return f"family lacks {', '.join(sorted(missing))}"
        return None


REGISTRY: dict[str, IdentityCase] = {}


def register(case: IdentityCase) -> IdentityCase:
    if case.id in REGISTRY:
        raise ValueError(f"duplicate identity id {case.id!r}")
    if case.min_order > case.order:
        raise ValueError(f"{case.id}: default order below minimum")
    REGISTRY[case.id] = case
    return case


@dataclass(frozen=True)
class CaseResult:
    """Outcome of one case at one point."""

    residual: float | None
    status: str  # "ok", "violation" or "error"
    message: str = ""
    lhs_norm: float = 0.0
    rhs_norm: float = 0.0


@dataclass
class ResidualReport:
    case: str
    family: str
    points: list[tuple[float, ...]]
    residuals: list[float | None]
    tolerance: float
    verdict: str
    max_residual: float | None = None
    argmax_point: tuple[float, ...] | None = None
    message: str = ""
    asserted: bool = True

    @classmethod
    def build(cls, case: IdentityCase, family: str, points, results: list[CaseResult],
              tolerance: float | None = None) -> ResidualReport:
        tol = case.tolerance if tolerance is None else tolerance
        residuals = [r.residual for r in results]
        bad = [r for r in results if r.status != "ok"]
        finite = [(r, p) for r, p in zip(residuals, points) if r is not None]
        max_res, arg = (None, None)
        if finite:
            max_res, arg = max(finite, key=lambda rp: rp[0])
        if any(r.status == "error" for r in bad):
            verdict = FAIL
            message = next(r.message for r in bad if r.status == "error")
        elif bad:
            verdict = VIOLATION
            message = bad[0].message
        elif not case.asserted:
            verdict = REPORT
            message = "displayed form, reported without assertion"
        else:
            verdict = PASS if max_res is not None and max_res < tol else FAIL
            message = ""
        return cls(case.id, family, [tuple(p) for p in points], residuals, tol, verdict, max_res,
                   tuple(arg) if arg is not None else None, message, case.asserted)

    @classmethod
    def skipped(cls, case: IdentityCase, family: str, reason: str, tolerance: float | None = None) -> ResidualReport:
        tol = case.tolerance if tolerance is None else tolerance
        return cls(case.id, family, [], [], tol, SKIP, message=reason, asserted=case.asserted)

    def to_dict(self) -> dict:
        return {
            "case": self.case,
            "family": self.family,
            "points": [list(p) for p in self.points],
            "residuals": list(self.residuals),
            "tolerance": self.tolerance,
            "verdict": self.verdict,
            "max_residual": self.max_residual,
            "argmax_point": list(self.argmax_point) if self.argmax_point is not None else None,
            "message": self.message,
            "asserted": self.asserted,
        }

    @classmethod
    def from_dict(cls, d: dict) -> ResidualReport:
        return cls(
            d["case"], d["family"], [tuple(p) for p in d["points"]], list(d["residuals"]), d["tolerance"],
            d["verdict"], d["max_residual"],
            tuple(d["argmax_point"]) if d["argmax_point"] is not None else None,
            d.get("message", ""), d.get("asserted", True),
        )


class EvalContext:
    """Everything an evaluator needs at one (family, point, jet order)."""

    def __init__(self, family: MetricFamily, point, order: int, method: str = "dual", fd_step: float = 1e-4):
        self.family = family
        self.point = tuple(float(c) for c in point)
        self.order = order
        self.method = method
        self.fd_step = fd_step
        self._flows: dict[int, FlowVariation] = {}

    @property
    def n(self) -> int:
        return self.family.dim

    @cached_property
    def cfg(self) -> JetConfig:
        return JetConfig(self.family.dim, self.order, self.point)

    @cached_property
    def bundle(self) -> CurvatureBundle:
        metric = evaluate_metric_jet(self.family, self.point, self.cfg)
        potential, lam = None, None
        if self.family.soliton is not None:
            potential = evaluate_scalar_jet(self.family.soliton.f, self.family, self.cfg)
            lam = self.family.soliton.lam
        return CurvatureBundle(metric, potential, lam)

    @cached_property
    def v(self) -> Values:
        return Values(self.bundle)

    def flow(self, m: int) -> FlowVariation:
        if m not in self._flows:
            self._flows[m] = FlowVariation(self.bundle, m, fd_step=self.fd_step)
        return self._flows[m]

    def dt(self, target, m: int) -> np.ndarray:
        return self.flow(m).time_derivative(target, self.method)

    def heat(self, name: str, m: int) -> np.ndarray:
        return self.dt(name, m) - self.bundle.field_laplacian(name).value()

    def require_small(self, name: str, values: np.ndarray, tol: float = 1e-8):
        size = float(np.abs(values).max()) if values.size else 0.0
        if size > tol:
            raise PreconditionViolation(f"{name} is not zero at this point (max component {size:.3e})")


class Values:
    """Center values of the bundle's fields and of their covariant derivatives.

    Attribute names follow the displays: ``Ric``, ``R``, ``C``, ``B``, ``W``,
    ``dRic[a,i,j] = nabla_a R_ij``, ``ddR[a,b] = nabla_a nabla_b R``,
    ``lapRic = Laplacian R_ij``, ``ric2 = |Ric|^2`` and so on.
    """

    def __init__(self, bundle: CurvatureBundle):
        self.b = bundle
        self.n = bundle.n

    def ctr(self, subscripts: str, *ops) -> np.ndarray:
        return ctr(subscripts, *ops, gi=self.gi)

    @cached_property
    def g(self):
        return self.b.value("metric")

    @cached_property
    def gi(self):
        return self.b.value("inverse_metric")

    @cached_property
    def Rm(self):
        return self.b.value("riemann")

    @cached_property
    def Ric(self):
        return self.b.value("ricci")

    @cached_property
    def Ricu(self):
        return self.b.value("ricci_up")

    @cached_property
    def R(self):
        return float(self.b.value("scalar"))

    @cached_property
    def W(self):
        return self.b.value("weyl")

    @cached_property
    def S(self):
        return self.b.value("schouten")

    @cached_property
    def C(self):
        return self.b.value("cotton")

    @cached_property
    def B(self):
        return self.b.value("bach")

    @cached_property
    def dRic(self):
        return self.b.value("ricci", 1)

    @cached_property
    def ddRic(self):
        return self.b.value("ricci", 2)

    @cached_property
    def lapRic(self):
        return self.b.field_laplacian("ricci").value()

    @cached_property
    def dR(self):
        return self.b.value("scalar", 1)

    @cached_property
    def ddR(self):
        return self.b.value("scalar", 2)

    @cached_property
    def lapR(self):
        return float(self.b.field_laplacian("scalar").value())

    @cached_property
    def dW(self):
        return self.b.value("weyl", 1)

    @cached_property
    def dS(self):
        return self.b.value("schouten", 1)

    @cached_property
    def dC(self):
        return self.b.value("cotton", 1)

    @cached_property
    def dB(self):
        return self.b.value("bach", 1)

    @cached_property
    def ric2(self):
        return float(self.b.value("ricci_norm2"))

    @cached_property
    def d_ric2(self):
        return self.b.value("ricci_norm2", 1)

    @cached_property
    def dd_ric2(self):
        return self.b.value("ricci_norm2", 2)

    @cached_property
    def lap_ric2(self):
        return float(self.b.field_laplacian("ricci_norm2").value())

    @cached_property
    def C2(self):
        return float(self.b.value("cotton_norm2"))

    @cached_property
    def d_C2(self):
        return self.b.value("cotton_norm2", 1)

    @cached_property
    def lap_C2(self):
        return float(self.b.field_laplacian("cotton_norm2").value())

    @cached_property
    def B2(self):
        return float(self.b.value("bach_norm2"))

    @cached_property
    def lap_B2(self):
        return float(self.b.field_laplacian("bach_norm2").value())

    @cached_property
    def df(self):
        return self.b.value("potential", 1)

    @cached_property
    def hess(self):
        return self.b.value("potential", 2)

    @cached_property
    def lap_f(self):
        return float(self.ctr("aa->", self.hess))

    @cached_property
    def lam(self):
        return float(self.b.lam)


def finite_or_nan(x: float | None) -> float:
    return float("nan") if x is None or not math.isfinite(x) else float(x)
