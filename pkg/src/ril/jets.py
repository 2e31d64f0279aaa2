"""Truncated multivariate Taylor jets carrying a nilpotent flow coefficient.

A jet stores the Taylor coefficients of an analytic quantity about a fixed
center, up to a total spatial degree ``order``, together with a first-order
coefficient in an infinitesimal ``s`` with ``s**2 == 0``.  The ``s`` slot is
how a Gateaux (flow) derivative rides along with every spatial derivative.

Coefficients live in a dense graded array: monomials sorted by total degree,
so the layout of order ``k`` is a prefix of the layout of any higher order.
A :class:`Jet` may hold a whole tensor of jets; its ``data`` has shape
``shape + (S, M)`` with ``S`` in {1, 2} (real part, optional ``s`` part) and
``M = binomial(dim + order, order)`` coefficients.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from numbers import Integral, Real
from typing import Sequence

import numpy as np

__all__ = [
    "JetError",
    "SingularJetError",
    "JetOrderError",
    "JetConfig",
    "JetLayout",
    "Jet",
    "get_layout",
    "lift_coordinate",
    "constant",
    "stack",
    "jet_einsum",
    "exp",
    "log",
    "sin",
    "cos",
    "sqrt",
    "power",
    "extract_partial",
]


class JetError(ValueError):
    """Base class for jet arithmetic failures."""


class SingularJetError(JetError):
    """Division by, or a function evaluated outside its domain at, a jet."""


class JetOrderError(JetError):
    """Requested derivative order exceeds what the jet carries."""


@dataclass(frozen=True)
class JetConfig:
    """Where and how deep to expand: ``dim`` variables about ``point``."""

    dim: int
    order: int = 7
    point: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if not 1 <= self.dim <= 8:
            raise ValueError(f"jet dimension must be in 1..8, got {self.dim}")
        if self.order < 0:
            raise ValueError(f"jet order must be non-negative, got {self.order}")
        point = tuple(float(c) for c in self.point) if self.point else (0.0,) * self.dim
        if len(point) != self.dim:
            raise ValueError(f"point has {len(point)} coordinates, expected {self.dim}")
        object.__setattr__(self, "point", point)


def _graded_exponents(dim: int, order: int) -> np.ndarray:
    rows = []
    for deg in range(order + 1):
        # descending lexicographic inside a degree: x0^deg first
        block = [c for c in itertools.product(range(deg, -1, -1), repeat=dim) if sum(c) == deg]
        rows.extend(block)
    return np.array(rows, dtype=np.int64).reshape(-1, dim)


class JetLayout:
    """Monomial bookkeeping and product tables for one (dim, order) pair."""

    def __init__(self, dim: int, order: int):
        self.dim = dim
        self.order = order
        self.exponents = _graded_exponents(dim, order)
        self.size = len(self.exponents)
        self.degrees = self.exponents.sum(axis=1)
        self.factorials = np.array(
            [math.prod(math.factorial(int(e)) for e in row) for row in self.exponents],
            dtype=float,
        )
        base = order + 1
        self._radix = base ** np.arange(dim, dtype=np.int64)
        codes = self.exponents @ self._radix
        lookup = np.full(base**dim, -1, dtype=np.int64)
        lookup[codes] = np.arange(self.size)
        self._lookup = lookup

        # pairs (a, b) whose product survives truncation, grouped by target
        deg = self.degrees
        ia, ib = np.nonzero(deg[:, None] + deg[None, :] <= order)
        target = lookup[codes[ia] + codes[ib]]
        perm = np.argsort(target, kind="stable")
        self.left = ia[perm]
        self.right = ib[perm]
        target = target[perm]
        self.starts = np.searchsorted(target, np.arange(self.size))

        # d/dx_a maps this layout onto the order-1 prefix
        self.deriv_src = []
        self.deriv_fac = []
        if order > 0:
            lower = self.exponents[: self.prefix_size(order - 1)]
            for a in range(dim):
                shifted = lower.copy()
                shifted[:, a] += 1
                self.deriv_src.append(lookup[shifted @ self._radix])
                self.deriv_fac.append((lower[:, a] + 1).astype(float))

    def prefix_size(self, order: int) -> int:
        return math.comb(self.dim + order, order)

    def index(self, alpha: Sequence[int]) -> int:
        alpha = tuple(int(a) for a in alpha)
        if len(alpha) != self.dim or min(alpha) < 0:
            raise JetError(f"bad multi-index {alpha} for dimension {self.dim}")
        if sum(alpha) > self.order:
            raise JetOrderError(f"multi-index {alpha} exceeds jet order {self.order}")
        return int(self._lookup[np.dot(alpha, self._radix)])

    def convolve(self, a: np.ndarray, b: np.ndarray, op=np.multiply) -> np.ndarray:
        """Truncated Cauchy product along the last axis, ``op`` combining gathers."""
        prod = op(a[..., self.left], b[..., self.right])
        return np.add.reduceat(prod, self.starts, axis=-1)


@functools.lru_cache(maxsize=None)
def get_layout(dim: int, order: int) -> JetLayout:
    return JetLayout(dim, order)


class Jet:
    """A tensor (possibly 0-dimensional) whose entries are jets."""

    __slots__ = ("data", "layout")
    __array_priority__ = 1000

    def __init__(self, data: np.ndarray, layout: JetLayout):
        data = np.asarray(data, dtype=float)
        if data.ndim < 2 or data.shape[-1] != layout.size or data.shape[-2] not in (1, 2):
            raise JetError(f"jet data of shape {data.shape} does not match layout size {layout.size}")
        self.data = data
        self.layout = layout

    # -- structure -------------------------------------------------------
    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape[:-2]

    @property
    def ndim(self) -> int:
        return self.data.ndim - 2

    @property
    def dim(self) -> int:
        return self.layout.dim

    @property
    def order(self) -> int:
        return self.layout.order

    @property
    def has_flow(self) -> bool:
        return self.data.shape[-2] == 2

    def __repr__(self):
        return f"Jet(shape={self.shape}, dim={self.dim}, order={self.order}, flow={self.has_flow})"

    def __getitem__(self, key) -> Jet:
        if not isinstance(key, tuple):
            key = (key,)
        return Jet(self.data[key + (Ellipsis, slice(None), slice(None))], self.layout)

    def transpose(self, *axes: int) -> Jet:
        axes = tuple(axes) + (self.ndim, self.ndim + 1)
        return Jet(self.data.transpose(axes), self.layout)

    def truncate(self, order: int) -> Jet:
        if order > self.order:
            raise JetOrderError(f"cannot raise jet order from {self.order} to {order}")
        if order == self.order:
            return self
        lay = get_layout(self.dim, order)
        return Jet(self.data[..., : lay.size], lay)

    def real(self) -> Jet:
        """Drop the flow coefficient."""
        return Jet(self.data[..., :1, :], self.layout)

    def flow(self) -> Jet:
        """The flow coefficient as a plain jet (zero if absent)."""
        if self.has_flow:
            return Jet(self.data[..., 1:, :], self.layout)
        return Jet(np.zeros_like(self.data[..., :1, :]), self.layout)

    def with_flow(self, direction: Jet | None) -> Jet:
        """``self + s * direction`` where both are flow-free jets."""
        base = self.real()
        if direction is None:
            return base
        if direction.shape != self.shape:
            raise JetError(f"direction shape {direction.shape} != {self.shape}")
        order = min(self.order, direction.order)
        base = base.truncate(order)
        d = direction.real().truncate(order)
        return Jet(np.concatenate([base.data, d.data], axis=-2), base.layout)

    # -- point values ----------------------------------------------------
    def value(self) -> np.ndarray:
        return self.data[..., 0, 0].copy()

    def flow_value(self) -> np.ndarray:
        if self.has_flow:
            return self.data[..., 1, 0].copy()
        return np.zeros(self.shape)

    def coefficients(self) -> np.ndarray:
        return self.data[..., 0, :].copy()

    # -- derivatives -----------------------------------------------------
    def partial(self, axis: int) -> Jet:
        if not 0 <= axis < self.dim:
            raise JetError(f"variable index {axis} out of range for dimension {self.dim}")
        if self.order == 0:
            raise JetOrderError("cannot differentiate an order-0 jet")
        lay = self.layout
        data = self.data[..., lay.deriv_src[axis]] * lay.deriv_fac[axis]
        return Jet(data, get_layout(self.dim, self.order - 1))

    def gradient(self) -> Jet:
        """All first partials, new index first: ``out[a, ...] = d_a self[...]``."""
        return stack([self.partial(a) for a in range(self.dim)])

    # -- arithmetic ------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.dim != self.dim:
                raise JetError(f"dimension mismatch {self.dim} vs {other.dim}")
            order = min(self.order, other.order)
            return self.truncate(order), other.truncate(order)
        return self, other

    def __add__(self, other):
        if isinstance(other, Jet):
            a, b = self._coerce(other)
            return Jet(_pad_add(a.data, b.data), a.layout)
        other = np.asarray(other, dtype=float)
        data = np.broadcast_to(self.data, np.broadcast_shapes(self.data.shape, other.shape + (1, 1))).copy()
        data[..., 0, 0] += other
        return Jet(data, self.layout)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.data, self.layout)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            a, b = self._coerce(other)
            return Jet(_dual_convolve(a.data, b.data, a.layout, np.multiply), a.layout)
        other = np.asarray(other, dtype=float)
        return Jet(self.data * other[..., None, None], self.layout)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * reciprocal(other)
        other = np.asarray(other, dtype=float)
        if np.any(other == 0):
            raise SingularJetError("division by zero")
        return self * (1.0 / other)

    def __rtruediv__(self, other):
        return reciprocal(self) * other

    def __pow__(self, exponent):
        return power(self, exponent)

    def sum(self, axis=None) -> Jet:
        if axis is None:
            axis = tuple(range(self.ndim))
        axis = np.atleast_1d(axis)
        axis = tuple(int(a) % self.ndim for a in axis) if self.ndim else ()
        return Jet(self.data.sum(axis=axis), self.layout)


def _pad_add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[-2] == b.shape[-2]:
        return a + b
    if a.shape[-2] == 1:
        a, b = b, a
    out = np.broadcast_to(a, np.broadcast_shapes(a.shape, b.shape)).copy()
    out[..., :1, :] += b
    return out


def _dual_convolve(a: np.ndarray, b: np.ndarray, lay: JetLayout, op) -> np.ndarray:
    """Truncated product of dual jets: (a0 + s a1)(b0 + s b1) with s^2 = 0."""
    real = lay.convolve(a[..., 0, :], b[..., 0, :], op)
    parts = []
    if b.shape[-2] == 2:
        parts.append(lay.convolve(a[..., 0, :], b[..., 1, :], op))
    if a.shape[-2] == 2:
        parts.append(lay.convolve(a[..., 1, :], b[..., 0, :], op))
    if not parts:
        return real[..., None, :]
    flow = parts[0] if len(parts) == 1 else parts[0] + parts[1]
    return np.stack([real, flow], axis=-2)


def stack(jets: Sequence[Jet], axis: int = 0) -> Jet:
    """Stack jets of equal shape into a new leading (or ``axis``) tensor index."""
    order = min(j.order for j in jets)
    jets = [j.truncate(order) for j in jets]
    flow = any(j.has_flow for j in jets)
    if flow:
        jets = [j if j.has_flow else j.with_flow(Jet(np.zeros_like(j.data), j.layout)) for j in jets]
    return Jet(np.stack([j.data for j in jets], axis=axis), jets[0].layout)


def constant(value, cfg: JetConfig | None = None, *, dim: int | None = None, order: int | None = None) -> Jet:
    """Jet of a constant (scalar or array) value."""
    if cfg is not None:
        dim, order = cfg.dim, cfg.order
    lay = get_layout(dim, order)
    value = np.asarray(value, dtype=float)
    data = np.zeros(value.shape + (1, lay.size))
    data[..., 0, 0] = value
    return Jet(data, lay)


def lift_coordinate(i: int, cfg: JetConfig) -> Jet:
    """Jet of the coordinate function ``x_i`` expanded about ``cfg.point``."""
    if not 0 <= i < cfg.dim:
        raise JetError(f"coordinate index {i} out of range for dimension {cfg.dim}")
    lay = get_layout(cfg.dim, cfg.order)
    data = np.zeros((1, lay.size))
    data[0, 0] = cfg.point[i]
    if cfg.order >= 1:
        alpha = [0] * cfg.dim
        alpha[i] = 1
        data[0, lay.index(alpha)] = 1.0
    return Jet(data, lay)


# -- contraction ---------------------------------------------------------

def _split_subscripts(subscripts: str, count: int):
    lhs, _, out = subscripts.replace(" ", "").partition("->")
    ins = lhs.split(",")
    if len(ins) != count:
        raise JetError(f"subscripts {subscripts!r} expect {len(ins)} operands, got {count}")
    if not _:
        counts = {c: lhs.count(c) for c in set(lhs) if c != ","}
        out = "".join(sorted(c for c, k in counts.items() if k == 1))
    return ins, out


def _einsum_pair(sa: str, sb: str, so: str, a, b):
    if isinstance(a, Jet) and isinstance(b, Jet):
        a, b = a._coerce(b)
        lay = a.layout
        op = functools.partial(_ein, f"{sa}Z,{sb}Z->{so}Z")
        return Jet(_dual_convolve(a.data, b.data, lay, op), lay)
    if isinstance(a, Jet):
        return Jet(np.einsum(f"{sa}YZ,{sb}->{so}YZ", a.data, np.asarray(b, dtype=float)), a.layout)
    if isinstance(b, Jet):
        return Jet(np.einsum(f"{sa},{sb}YZ->{so}YZ", np.asarray(a, dtype=float), b.data), b.layout)
    return np.einsum(f"{sa},{sb}->{so}", a, b)


def _ein(subscripts, x, y):
    return np.einsum(subscripts, x, y, optimize=False)


def jet_einsum(subscripts: str, *operands):
    """``numpy.einsum`` over tensor indices, truncated products over jet coefficients.

    Operands may be :class:`Jet` or constant arrays.  More than two operands are
    contracted pairwise from the left.  Index letters ``Y`` and ``Z`` are reserved.
    """
    ins, out = _split_subscripts(subscripts, len(operands))
    if "Y" in subscripts or "Z" in subscripts:
        raise JetError("index letters Y and Z are reserved")
    if len(operands) == 1:
        (a,) = operands
        if isinstance(a, Jet):
            return Jet(np.einsum(f"{ins[0]}YZ->{out}YZ", a.data), a.layout)
        return np.einsum(f"{ins[0]}->{out}", a)
    acc, acc_sub = operands[0], ins[0]
    for k in range(1, len(operands)):
        rest = "".join(ins[k + 1 :]) + out
        keep = [c for c in dict.fromkeys(acc_sub + ins[k]) if c in rest]
        mid = "".join(keep) if k < len(operands) - 1 else out
        acc = _einsum_pair(acc_sub, ins[k], mid, acc, operands[k])
        acc_sub = mid
    return acc


# -- series composition --------------------------------------------------

def _compose(a: Jet, coeffs: list[np.ndarray]) -> Jet:
    """Evaluate sum_k coeffs[k] * u**k with u = a - a(center); u is nilpotent."""
    u = Jet(a.data.copy(), a.layout)
    u.data[..., 0, 0] = 0.0
    result = constant(coeffs[-1], dim=a.dim, order=a.order)
    for c in reversed(coeffs[:-1]):
        result = result * u + c
    return result


def _series_length(a: Jet) -> int:
    return a.order + (2 if a.has_flow else 1)


def _center(a: Jet) -> np.ndarray:
    return a.data[..., 0, 0]


def exp(a: Jet) -> Jet:
    c = np.exp(_center(a))
    return _compose(a, [c / math.factorial(k) for k in range(_series_length(a))])


def log(a: Jet) -> Jet:
    c = _center(a)
    if np.any(c <= 0):
        raise SingularJetError("log of a jet with non-positive constant term")
    coeffs = [np.log(c)] + [(-1.0) ** (k + 1) / (k * c**k) for k in range(1, _series_length(a))]
    return _compose(a, coeffs)


def _trig(a: Jet, shift: int) -> Jet:
    c = _center(a)
    cycle = [np.sin(c), np.cos(c), -np.sin(c), -np.cos(c)]
    return _compose(a, [cycle[(k + shift) % 4] / math.factorial(k) for k in range(_series_length(a))])


def sin(a: Jet) -> Jet:
    return _trig(a, 0)


def cos(a: Jet) -> Jet:
    return _trig(a, 1)


def _binomial_series(a: Jet, p: float) -> Jet:
    c = _center(a)
    coeffs = []
    binom = 1.0
    for k in range(_series_length(a)):
        coeffs.append(binom * c ** (p - k))
        binom *= (p - k) / (k + 1)
    return _compose(a, coeffs)


def sqrt(a: Jet) -> Jet:
    if np.any(_center(a) <= 0):
        raise SingularJetError("sqrt of a jet with non-positive constant term")
    return _binomial_series(a, 0.5)


def reciprocal(a: Jet) -> Jet:
    if np.any(_center(a) == 0):
        raise SingularJetError("division by a jet with zero constant term")
    return _binomial_series(a, -1.0)


def power(a: Jet, p) -> Jet:
    """``a ** p``; non-negative integers by repeated squaring, otherwise by series."""
    if isinstance(p, Jet):
        return exp(p * log(a))
    if isinstance(p, Integral) or (isinstance(p, Real) and float(p).is_integer() and p >= 0):
        p = int(p)
        if p < 0:
            return reciprocal(power(a, -p))
        result = constant(np.ones(a.shape), dim=a.dim, order=a.order)
        base = a
        while p:
            if p & 1:
                result = result * base
            p >>= 1
            if p:
                base = base * base
        return result
    if np.any(_center(a) <= 0):
        raise SingularJetError("non-integer power of a jet with non-positive constant term")
    return _binomial_series(a, float(p))


def extract_partial(a: Jet, alpha: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """Partial derivative ``d^alpha`` at the center and its flow coefficient."""
    idx = a.layout.index(alpha)
    fac = a.layout.factorials[idx]
    value = a.data[..., 0, idx] * fac
    flow = a.data[..., 1, idx] * fac if a.has_flow else np.zeros(a.shape)
    if value.ndim == 0:
        return float(value), float(flow)
    return value, flow


