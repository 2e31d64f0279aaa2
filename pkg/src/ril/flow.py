"""Time derivatives along Ricci flow as directional derivatives of the curvature map.

At ``t = 0`` a Ricci flow moves the metric in the direction ``h = -2 Ric(g)``.
Building a :class:`~ril.curvature.CurvatureBundle` from ``g + s h`` with
``s**2 == 0`` makes every derived tensor carry its own first variation in the
``s`` slot, so ``d/dt T`` at the expansion point is read off directly.

A centered finite difference in ``t`` over the same direction field is kept
as an independent cross-check (``method="fd"``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .curvature import CurvatureBundle, FIELDS
from .jets import Jet, JetOrderError

__all__ = ["ricci_direction", "FlowVariation", "time_derivative", "heat_operator"]


def ricci_direction(bundle: CurvatureBundle, order: int) -> Jet:
    """``h = -2 Ric`` as a jet field of spatial order ``order``."""
    if bundle.order < order + 2:
        raise JetOrderError(f"a direction of order {order} needs metric jets of order {order + 2}, have {bundle.order}")
    return (bundle.ricci * -2.0).real().truncate(order)


TensorFn = Callable[[CurvatureBundle], Jet]


def _as_fn(target: str | TensorFn) -> TensorFn:
    if callable(target):
        return target
    if target not in FIELDS:
        raise KeyError(f"unknown field {target!r}")
    return lambda b: b.field(target)


@dataclass
class FlowVariation:
    """The base bundle, a direction field, and the bundle of ``g + s h``.

    ``order`` is the spatial order kept in the varied metric; it must cover
    the number of derivatives the differentiated tensor takes of ``g``.
    """

    base: CurvatureBundle
    order: int
    direction: Jet | None = None
    fd_step: float = 1e-4
    _varied: CurvatureBundle | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if self.direction is None:
            self.direction = ricci_direction(self.base, self.order)
        elif self.direction.order < self.order:
            raise JetOrderError(f"direction order {self.direction.order} is below the variation order {self.order}")
        else:
            self.direction = self.direction.real().truncate(self.order)

    @property
    def varied(self) -> CurvatureBundle:
        if self._varied is None:
            metric = self.base.metric.real().truncate(self.order).with_flow(self.direction)
            self._varied = CurvatureBundle(metric)
        return self._varied

    def shifted(self, t: float) -> CurvatureBundle:
        """Plain bundle of ``g + t h`` (no flow slot)."""
        return CurvatureBundle(self.base.metric.real().truncate(self.order) + self.direction * t)

    def time_derivative(self, target: str | TensorFn, method: str = "dual") -> np.ndarray:
        fn = _as_fn(target)
        if method == "dual":
            return fn(self.varied).flow_value()
        if method == "fd":
            t = self.fd_step
            plus = fn(self.shifted(t)).value()
            minus = fn(self.shifted(-t)).value()
            return (plus - minus) / (2 * t)
        raise ValueError(f"unknown time-derivative method {method!r}")


def time_derivative(variation: FlowVariation, target: str | TensorFn, method: str = "dual") -> np.ndarray:
    return variation.time_derivative(target, method)


def heat_operator(variation: FlowVariation, name: str, method: str = "dual") -> np.ndarray:
    """``(d/dt - Laplacian) T`` at the expansion point for a named field."""
    return variation.time_derivative(name, method) - variation.base.field_laplacian(name).value()
