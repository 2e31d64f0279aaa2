"""Registered identity cases, grouped into suites."""

from __future__ import annotations

from .base import (
    FAIL,
    PASS,
    REGISTRY,
    REPORT,
    SKIP,
    VIOLATION,
    CaseResult,
    EvalContext,
    IdentityCase,
    PreconditionViolation,
    ResidualReport,
    ctr,
    residual,
)
from . import static, evolution, soliton  # noqa: F401  (registration side effects)

SUITES = ("static", "flow", "cotton", "bach", "soliton", "soliton-bach")


def cases_in(suites) -> list[IdentityCase]:
    """Cases of the named suites, in registration order."""
    wanted = set(suites)
    return [c for c in REGISTRY.values() if c.group in wanted]


__all__ = [
    "SUITES", "REGISTRY", "cases_in", "IdentityCase", "EvalContext", "ResidualReport", "CaseResult",
    "PreconditionViolation", "residual", "ctr", "PASS", "FAIL", "SKIP", "VIOLATION", "REPORT",
]
