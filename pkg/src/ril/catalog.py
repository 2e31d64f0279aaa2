"""Closed-form metric families, their chart domains, and deterministic sampling.

Every family is a dim x dim symmetric matrix of :mod:`ril.expr` trees in the
chart coordinates, an open box domain, and optionally gradient-soliton data
``(f, lambda)`` with ``Ric + Hess f = lambda g``.  Families are looked up by
name, optionally with parameters: ``catalog_get("round-sphere-3", r=2)`` or
``catalog_get("round-sphere-3(r=2)")``.
"""

from __future__ import annotations

import itertools
import math
import re
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping

import numpy as np

from . import expr as ex
from .expr import Expr, ExprParseError
from .jets import Jet, JetConfig, JetOrderError, constant, lift_coordinate, stack

__all__ = [
    "CatalogError",
    "DomainError",
    "SamplingError",
    "Soliton",
    "MetricFamily",
    "SamplePlan",
    "Polynomial",
    "COTTON_FLAT_FLOW",
    "WEYL_FLAT_FLOW",
    "catalog_get",
    "catalog_names",
    "catalog_entries",
    "evaluate_metric_jet",
    "evaluate_metric",
    "sample_points",
    "load_family_file",
    "register_family",
]


class CatalogError(ValueError):
    """Unknown family name or invalid family parameters."""


class DomainError(ValueError):
    """Point outside a family's chart domain."""


class SamplingError(RuntimeError):
    """Could not find positive-definite sample points within the retry cap."""


SOLITON_KINDS = {"steady": 0, "shrinking": 1, "expanding": -1}


@dataclass(frozen=True)
class Soliton:
    f: Expr
    lam: float
    kind: str

    def __post_init__(self):
        if self.kind not in SOLITON_KINDS:
            raise CatalogError(f"soliton kind must be one of {sorted(SOLITON_KINDS)}, got {self.kind!r}")
        if int(np.sign(self.lam)) != SOLITON_KINDS[self.kind]:
            raise CatalogError(f"{self.kind} soliton needs lambda of sign {SOLITON_KINDS[self.kind]:+d}, got {self.lam}")


@dataclass(frozen=True)
class MetricFamily:
    name: str
    coords: tuple[str, ...]
    components: tuple[tuple[Expr, ...], ...]
    domain: tuple[tuple[float, float], ...]
    parameters: Mapping[str, object] = field(default_factory=dict)
    soliton: Soliton | None = None
    description: str = ""
    tags: frozenset[str] = frozenset()

    def __post_init__(self):
        n = self.dim
        if not 2 <= n <= 5:
            raise CatalogError(f"{self.name}: dimension must be 2..5, got {n}")
        if len(self.components) != n or any(len(row) != n for row in self.components):
            raise CatalogError(f"{self.name}: components must be a {n}x{n} array")
        if len(self.domain) != n or any(not lo < hi for lo, hi in self.domain):
            raise CatalogError(f"{self.name}: domain must be {n} non-empty open intervals")
        for i, j in itertools.combinations(range(n), 2):
            if str(self.components[i][j]) != str(self.components[j][i]):
                raise CatalogError(f"{self.name}: component ({i},{j}) is not symmetric")
        allowed = set(self.coords)
        for row in self.components:
            for c in row:
                extra = c.variables() - allowed
                if extra:
                    raise CatalogError(f"{self.name}: unbound names {sorted(extra)} in components")

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def is_soliton(self) -> bool:
        return self.soliton is not None

    def label(self) -> str:
        if not self.parameters:
            return self.name
        args = ",".join(f"{k}={v}" for k, v in sorted(self.parameters.items()))
        return f"{self.name}({args})"

    def contains(self, p, margin: float = 0.0) -> bool:
        p = np.asarray(p, dtype=float)
        for x, (lo, hi) in zip(p, self.domain):
            pad = margin * (hi - lo)
            if not lo + pad < x < hi - pad:
                return False
        return True


@dataclass(frozen=True)
class SamplePlan:
    count: int
    seed: int = 0
    margin: float = 0.1

    def __post_init__(self):
        if self.count < 1:
            raise ValueError(f"sample count must be at least 1, got {self.count}")
        if not 0.0 <= self.margin < 0.5:
            raise ValueError(f"margin must lie in [0, 0.5), got {self.margin}")


class Polynomial(Expr):
    """Sum of ``coef * prod(x_i ** e_i)``; evaluated with shared power tables."""

    def __init__(self, coords: tuple[str, ...], terms: tuple[tuple[float, tuple[int, ...]], ...]):
        self.coords = tuple(coords)
        self.terms = tuple((float(c), tuple(int(e) for e in exps)) for c, exps in terms)

    def evaluate(self, env):
        xs = [env[name] for name in self.coords]
        top = max((max(e) for _, e in self.terms), default=0)
        powers = []
        for x in xs:
            row = [1.0, x]
            for _ in range(2, top + 1):
                row.append(row[-1] * x)
            powers.append(row)
        total = 0.0
        for coef, exps in self.terms:
            term = coef
            for i, e in enumerate(exps):
                if e:
                    term = powers[i][e] * term
            total = term + total
        return total

    def variables(self):
        return frozenset(c for i, c in enumerate(self.coords) if any(e[i] for _, e in self.terms))

    def substitute(self, values):
        return self

    def __str__(self):
        parts = []
        for coef, exps in self.terms:
            mono = "*".join(f"{c}^{e}" if e > 1 else c for c, e in zip(self.coords, exps) if e)
            parts.append(f"{coef!r}*{mono}" if mono else repr(coef))
        return "(" + " + ".join(parts) + ")" if parts else "0.0"


# -- built-in families ---------------------------------------------------

def _coords(n: int) -> tuple[str, ...]:
    return ("x", "y", "z", "w", "v")[:n]


# Family tags: the Cotton (3D) or Weyl (n > 3) tensor vanishes and stays zero along Ricci flow by symmetry.
COTTON_FLAT_FLOW = "cotton-flat-flow"
WEYL_FLAT_FLOW = "weyl-flat-flow"


def _diag(entries, n) -> tuple[tuple[Expr, ...], ...]:
    zero = ex.const(0.0)
    return tuple(tuple(ex._wrap(entries[i]) if i == j else zero for j in range(n)) for i in range(n))


def _flat(n: int) -> Callable[..., MetricFamily]:
    def build() -> MetricFamily:
        return MetricFamily(f"flat-{n}", _coords(n), _diag([1.0] * n, n), ((-1.0, 1.0),) * n,
                            description="Euclidean metric", tags=frozenset({COTTON_FLAT_FLOW, WEYL_FLAT_FLOW}))

    return build


def _round_sphere_3(r: float = 1.0) -> MetricFamily:
    if not r > 0:
        raise CatalogError(f"sphere radius must be positive, got {r}")
    chi, th = ex.var("chi"), ex.var("theta")
    r2 = float(r) ** 2
    comps = _diag([ex.const(r2), r2 * ex.sin(chi) ** 2, r2 * ex.sin(chi) ** 2 * ex.sin(th) ** 2], 3)
    return MetricFamily(
        "round-sphere-3", ("chi", "theta", "phi"), comps,
        ((0.0, math.pi), (0.0, math.pi), (-math.pi, math.pi)),
        parameters={"r": float(r)},
        soliton=Soliton(ex.const(0.0), 2.0 / r2, "shrinking"),
        description="round 3-sphere of radius r in hyperspherical angles, a shrinker with f = 0",
        tags=frozenset({COTTON_FLAT_FLOW}),
    )


def _hyperbolic_3() -> MetricFamily:
    z = ex.var("z")
    conf = 1 / z**2
    return MetricFamily("hyperbolic-3", ("x", "y", "z"), _diag([conf] * 3, 3),
                        ((-1.0, 1.0), (-1.0, 1.0), (0.5, 2.0)),
                        description="upper half-space model of constant curvature -1",
                        tags=frozenset({COTTON_FLAT_FLOW}))


def _warped_s2_interval(warp: str = "1 + r^2/10") -> MetricFamily:
    try:
        phi = ex.parse(warp, {"r"})
    except ExprParseError as err:
        raise CatalogError(f"warped-s2-interval: bad warp {warp!r}: {err}") from None
    th = ex.var("theta")
    comps = _diag([ex.const(1.0), phi**2, phi**2 * ex.sin(th) ** 2], 3)
    return MetricFamily("warped-s2-interval", ("r", "theta", "phi"), comps,
                        ((0.0, 2.0), (0.0, math.pi), (-math.pi, math.pi)),
                        parameters={"warp": warp},
                        description="rotationally symmetric dr^2 + warp(r)^2 g_S2",
                        tags=frozenset({COTTON_FLAT_FLOW}))


def _cigar_r_steady() -> MetricFamily:
    x, y = ex.var("x"), ex.var("y")
    q = 1 + x**2 + y**2
    return MetricFamily("cigar-r-steady", ("x", "y", "z"), _diag([1 / q, 1 / q, 1.0], 3),
                        ((-2.0, 2.0), (-2.0, 2.0), (-1.0, 1.0)),
                        soliton=Soliton(-ex.log(q), 0.0, "steady"),
                        description="Hamilton's cigar times a line, steady soliton")


def _gaussian_shrinker_3(lam: float = 0.5) -> MetricFamily:
    if not lam > 0:
        raise CatalogError(f"gaussian shrinker needs lam > 0, got {lam}")
    x, y, z = ex.var("x"), ex.var("y"), ex.var("z")
    f = float(lam) * (x**2 + y**2 + z**2) / 2
    return MetricFamily("gaussian-shrinker-3", ("x", "y", "z"), _diag([1.0] * 3, 3),
                        ((-1.0, 1.0),) * 3, parameters={"lam": float(lam)},
                        soliton=Soliton(f, float(lam), "shrinking"),
                        description="flat metric with quadratic potential",
                        tags=frozenset({COTTON_FLAT_FLOW}))


def random_symmetric_polynomials(n: int, seed: int) -> tuple[tuple[Polynomial, ...], ...]:
    """Seeded symmetric matrix of homogeneous quadratic plus cubic polynomials."""
    coords = _coords(n)
    monos = [m for d in (2, 3) for m in itertools.product(range(d + 1), repeat=n) if sum(m) == d]
    monos.sort(key=lambda m: (sum(m), tuple(-e for e in m)))
    rng = np.random.default_rng(seed)
    scale = 1.0 / math.sqrt(len(monos))
    entries = {}
    for i in range(n):
        for j in range(i, n):
            coefs = rng.uniform(-1.0, 1.0, size=len(monos)) * scale
            entries[i, j] = Polynomial(coords, tuple(zip(coefs, monos)))
    return tuple(tuple(entries[min(i, j), max(i, j)] for j in range(n)) for i in range(n))


def _polynomial_perturb(n: int) -> Callable[..., MetricFamily]:
    def build(seed: int = 0, eps: float = 0.05) -> MetricFamily:
        if not 0 <= eps <= 0.5:
            raise CatalogError(f"perturbation size eps must lie in [0, 0.5], got {eps}")
        q = random_symmetric_polynomials(n, int(seed))
        comps = tuple(
            tuple((1.0 if i == j else 0.0) + float(eps) * q[i][j] for j in range(n)) for i in range(n)
        )
        return MetricFamily(f"polynomial-perturb-{n}", _coords(n), comps, ((-1.0, 1.0),) * n,
                            parameters={"eps": float(eps), "seed": int(seed)},
                            description="identity plus a seeded quadratic-cubic symmetric perturbation")

    return build


def _conformal_flat(n: int) -> Callable[..., MetricFamily]:
    default = "0.1*(" + " + ".join(f"{c}^2" for c in _coords(n)) + ")"

    def build(phi: str = default) -> MetricFamily:
        coords = _coords(n)
        try:
            p = ex.parse(phi, set(coords))
        except ExprParseError as err:
            raise CatalogError(f"conformal-flat-{n}: bad conformal factor {phi!r}: {err}") from None
        factor = ex.exp(2 * p)
        # Only the radial default is known to stay conformally flat along the flow.
        tags = frozenset({COTTON_FLAT_FLOW if n == 3 else WEYL_FLAT_FLOW}) if phi == default else frozenset()
        return MetricFamily(f"conformal-flat-{n}", coords, _diag([factor] * n, n), ((-1.0, 1.0),) * n,
                            parameters={"phi": phi},
                            description="conformally flat metric exp(2 phi) delta", tags=tags)

    return build


_REGISTRY: dict[str, Callable[..., MetricFamily]] = {
    "flat-3": _flat(3),
    "flat-4": _flat(4),
    "flat-5": _flat(5),
    "round-sphere-3": _round_sphere_3,
    "hyperbolic-3": _hyperbolic_3,
    "warped-s2-interval": _warped_s2_interval,
    "cigar-r-steady": _cigar_r_steady,
    "gaussian-shrinker-3": _gaussian_shrinker_3,
    "polynomial-perturb-3": _polynomial_perturb(3),
    "polynomial-perturb-4": _polynomial_perturb(4),
    "polynomial-perturb-5": _polynomial_perturb(5),
    "conformal-flat-3": _conformal_flat(3),
    "conformal-flat-4": _conformal_flat(4),
}


def register_family(name: str, factory: Callable[..., MetricFamily]) -> None:
    _REGISTRY[name] = factory


def catalog_names() -> list[str]:
    return list(_REGISTRY)


_CALL = re.compile(r"^\s*([A-Za-z0-9_.-]+)\s*(?:\((.*)\))?\s*$", re.S)


def _parse_value(text: str):
    text = text.strip()
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text.strip("'\"")


def split_family_spec(spec: str) -> tuple[str, dict]:
    """``"name(a=1,b=x^2)"`` -> ``("name", {"a": 1, "b": "x^2"})``."""
    m = _CALL.match(spec)
    if not m:
        raise CatalogError(f"malformed family spec {spec!r}")
    name, args = m.group(1), m.group(2)
    params = {}
    if args and args.strip():
        for part in re.split(r",(?![^()]*\))", args):
            key, sep, value = part.partition("=")
            if not sep:
                raise CatalogError(f"family parameter {part!r} must look like key=value")
            params[key.strip()] = _parse_value(value)
    return name, params


def catalog_get(name: str, **params) -> MetricFamily:
    base, inline = split_family_spec(name)
    inline.update(params)
    try:
        factory = _REGISTRY[base]
    except KeyError:
        raise CatalogError(f"unknown metric family {base!r}") from None
    try:
        return factory(**inline)
    except TypeError as err:
        raise CatalogError(f"{base}: bad parameters {inline}: {err}") from None


def catalog_entries() -> list[MetricFamily]:
    return [catalog_get(n) for n in _REGISTRY]


# -- evaluation ----------------------------------------------------------

def _as_jet(value, cfg: JetConfig) -> Jet:
    if isinstance(value, Jet):
        return value
    return constant(float(value), cfg)


def evaluate_metric_jet(fam: MetricFamily, p, cfg: JetConfig | int, direction: Jet | None = None) -> Jet:
    """Jets of ``g_ij`` (plus ``s * direction_ij`` if given) about ``p``.

    ``cfg`` may be a :class:`JetConfig` or just the order.  The returned jet
    has shape ``(dim, dim)``.
    """
    p = tuple(float(c) for c in p)
    if isinstance(cfg, int):
        cfg = JetConfig(fam.dim, cfg, p)
    elif cfg.point != p:
        cfg = JetConfig(cfg.dim, cfg.order, p)
    if cfg.dim != fam.dim:
        raise ValueError(f"jet dimension {cfg.dim} does not match {fam.name} (dimension {fam.dim})")
    if not fam.contains(p):
        raise DomainError(f"point {p} lies outside the domain of {fam.name}")
    env = {c: lift_coordinate(i, cfg) for i, c in enumerate(fam.coords)}
    n = fam.dim
    cells = {}
    for i in range(n):
        for j in range(i, n):
            cells[i, j] = _as_jet(fam.components[i][j].evaluate(env), cfg)
    g = stack([stack([cells[min(i, j), max(i, j)] for j in range(n)]) for i in range(n)])
    if direction is None:
        return g
    if direction.shape != (n, n):
        raise ValueError(f"direction must have shape {(n, n)}, got {direction.shape}")
    if direction.order < cfg.order - 2:
        raise JetOrderError(f"direction order {direction.order} is below metric order {cfg.order} - 2")
    return g.with_flow(direction)


def evaluate_scalar_jet(e: Expr, fam: MetricFamily, cfg: JetConfig) -> Jet:
    env = {c: lift_coordinate(i, cfg) for i, c in enumerate(fam.coords)}
    return _as_jet(e.evaluate(env), cfg)


def evaluate_metric(fam: MetricFamily, p) -> np.ndarray:
    """Plain float metric matrix at ``p``."""
    env = {c: float(x) for c, x in zip(fam.coords, p)}
    n = fam.dim
    out = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            out[i, j] = out[j, i] = float(fam.components[i][j].evaluate(env))
    return out


def sample_points(fam: MetricFamily, plan: SamplePlan, max_retries: int = 100) -> list[tuple[float, ...]]:
    """Deterministic uniform points in the margined domain where g is positive definite."""
    rng = np.random.default_rng([plan.seed, zlib.crc32(fam.label().encode())])
    lo = np.array([a for a, _ in fam.domain])
    hi = np.array([b for _, b in fam.domain])
    pad = plan.margin * (hi - lo)
    lo, hi = lo + pad, hi - pad
    points = []
    for k in range(plan.count):
        for _ in range(max_retries):
            p = rng.uniform(lo, hi)
            try:
                ok = np.linalg.eigvalsh(evaluate_metric(fam, p)).min() > 1e-8
            except (ValueError, ZeroDivisionError, FloatingPointError):
                ok = False
            if ok:
                points.append(tuple(float(c) for c in p))
                break
        else:
            raise SamplingError(f"{fam.label()}: no positive-definite sample for point {k} after {max_retries} tries")
    return points


# -- metric definition files -----------------------------------------------

def _scalar_position(node) -> tuple[int, int]:
    mark = node.start_mark
    extra = 1 if getattr(node, "style", None) in ("'", '"') else 0
    return mark.line, mark.column + extra


def _node_value(node):
    import yaml

    return yaml.safe_load(yaml.serialize(node)) if node is not None else None


def load_family_file(path: str | Path) -> MetricFamily:
    """Load a family from a YAML definition file.

    Layout::

        name: my-metric
        coordinates: [x, y, z]
        parameters: {a: 0.2}          # optional named constants
        components:                   # full symmetric matrix or upper triangle
          - ["1 + a*x^2", "0", "0"]
          - ["0", "1", "0"]
          - ["0", "0", "exp(2*a*y)"]
        domain: {x: [-1, 1], y: [-1, 1], z: [-1, 1]}
        soliton: {f: "a*x^2", lambda: 0.0, kind: steady}   # optional

    Expression errors are raised as :class:`ExprParseError` with the file's
    line and column.
    """
    import yaml

    text = Path(path).read_text()
    try:
        root = yaml.compose(text)
    except yaml.YAMLError as err:
        mark = getattr(err, "problem_mark", None)
        line, col = (mark.line + 1, mark.column + 1) if mark else (1, 1)
        raise ExprParseError(f"invalid YAML: {getattr(err, 'problem', err)}", line, col) from None
    if root is None or not isinstance(root, yaml.MappingNode):
        raise ExprParseError("family file must be a mapping", 1, 1)
    fields = {k.value: v for k, v in root.value}

    def need(key):
        if key not in fields:
            raise ExprParseError(f"missing key {key!r}", root.start_mark.line + 1, 1)
        return fields[key]

    name = str(_node_value(need("name")))
    coords = tuple(str(c) for c in _node_value(need("coordinates")))
    params = _node_value(fields.get("parameters")) or {}
    n = len(coords)
    allowed = set(coords) | set(params)

    def parse_node(node, names=allowed) -> Expr:
        if not isinstance(node, yaml.ScalarNode):
            line, col = node.start_mark.line + 1, node.start_mark.column + 1
            raise ExprParseError("expected an expression string", line, col)
        line, col = _scalar_position(node)
        e = ex.parse(node.value, names, line_offset=line, column_offset=col)
        return e.substitute({k: float(v) for k, v in params.items()})

    rows_node = need("components")
    if not isinstance(rows_node, yaml.SequenceNode) or len(rows_node.value) != n:
        raise ExprParseError(f"components must be a list of {n} rows", rows_node.start_mark.line + 1,
                             rows_node.start_mark.column + 1)
    cells: dict[tuple[int, int], Expr] = {}
    for i, row in enumerate(rows_node.value):
        if not isinstance(row, yaml.SequenceNode) or len(row.value) not in (n, n - i):
            raise ExprParseError(f"row {i} must list {n} (or {n - i} upper-triangle) entries",
                                 row.start_mark.line + 1, row.start_mark.column + 1)
        offset = 0 if len(row.value) == n else i
        for j, node in enumerate(row.value, start=offset):
            cells[i, j] = parse_node(node)
    for i in range(n):
        for j in range(i):
            if (i, j) in cells and str(cells[i, j]) != str(cells[j, i]):
                raise ExprParseError(f"component ({i},{j}) differs from ({j},{i})", 1, 1)
    comps = tuple(tuple(cells[min(i, j), max(i, j)] for j in range(n)) for i in range(n))
    domain_raw = _node_value(need("domain"))
    try:
        domain = tuple((float(domain_raw[c][0]), float(domain_raw[c][1])) for c in coords)
    except (KeyError, TypeError, IndexError):
        node = fields["domain"]
        raise ExprParseError("domain must give [low, high] for every coordinate", node.start_mark.line + 1,
                             node.start_mark.column + 1) from None
    soliton = None
    if "soliton" in fields:
        sol = {k.value: v for k, v in fields["soliton"].value}
        soliton = Soliton(parse_node(sol["f"]), float(_node_value(sol.get("lambda")) or 0.0),
                          str(_node_value(sol.get("kind")) or "steady"))
    tags = frozenset(str(t) for t in (_node_value(fields.get("tags")) or ()))
    return MetricFamily(name, coords, comps, domain, parameters=params, soliton=soliton,
                        description=f"loaded from {Path(path).name}", tags=tags)
