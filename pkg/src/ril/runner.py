"""Batch verification: resolve a run configuration, evaluate cases over sampled points, collect reports."""

from __future__ import annotations

import difflib
import os
import time
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .catalog import CatalogError, MetricFamily, SamplePlan, catalog_get, catalog_names, sample_points, split_family_spec
from .identities import FAIL, REGISTRY, SUITES, CaseResult, EvalContext, IdentityCase, PreconditionViolation
from .identities import ResidualReport, residual
from .jets import JetError

__all__ = ["ConfigError", "RunConfig", "resolve_cases", "resolve_families", "run_verify", "evaluate_point",
           "default_parallelism", "EXIT_OK", "EXIT_FAIL", "EXIT_CONFIG"]

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
PARALLELISM_ENV = "RIL_PARALLELISM"


class ConfigError(ValueError):
    """Invalid run configuration (unknown names, bad values)."""


def nearest(name: str, choices) -> str:
    close = difflib.get_close_matches(name, list(choices), n=1, cutoff=0.0)
    return f"; did you mean {close[0]!r}?" if close else ""


def default_parallelism() -> int:
    raw = os.environ.get(PARALLELISM_ENV, "").strip()
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{PARALLELISM_ENV} must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise ConfigError(f"{PARALLELISM_ENV} must be a positive integer, got {raw!r}")
    return value


@dataclass
class RunConfig:
    suites: list[str] = field(default_factory=lambda: ["all"])
    families: list[str] = field(default_factory=lambda: ["all"])
    points: int = 5
    seed: int = 0
    order: int | None = None
    tolerances: dict[str, float] = field(default_factory=dict)
    output: str | None = None
    format: str = "json"
    parallelism: int | None = None
    method: str = "dual"

    def validate(self) -> RunConfig:
        if self.points < 1:
            raise ConfigError(f"points must be at least 1, got {self.points}")
        if self.format not in ("json", "csv"):
            raise ConfigError(f"format must be json or csv, got {self.format!r}")
        if self.method not in ("dual", "fd"):
            raise ConfigError(f"method must be dual or fd, got {self.method!r}")
        if self.parallelism is not None and self.parallelism < 1:
            raise ConfigError(f"parallelism must be positive, got {self.parallelism}")
        for cid, tol in self.tolerances.items():
            if cid not in REGISTRY:
                raise ConfigError(f"tolerance override for unknown case {cid!r}{nearest(cid, REGISTRY)}")
            if not tol >= 0:
                raise ConfigError(f"tolerance for {cid} must be non-negative, got {tol}")
        return self

    def echo(self) -> dict:
        """Everything that determines the residuals (not where they are written)."""
        d = asdict(self)
        for key in ("output", "format", "parallelism"):
            d.pop(key)
        d["tolerances"] = dict(sorted(self.tolerances.items()))
        return d

    @classmethod
    def from_mapping(cls, data: dict) -> RunConfig:
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            bad = sorted(extra)[0]
            raise ConfigError(f"unknown config key {bad!r}{nearest(bad, known)}")
        data = dict(data)
        for key in ("suites", "families"):
            if isinstance(data.get(key), str):
                data[key] = [s.strip() for s in data[key].split(",") if s.strip()]
        return cls(**data)


def resolve_cases(names) -> list[IdentityCase]:
    """Suite names, case ids or ``all`` -> cases in registration order."""
    wanted: set[str] = set()
    for name in names:
        if name == "all":
            wanted.update(REGISTRY)
        elif name in SUITES:
            wanted.update(c.id for c in REGISTRY.values() if c.group == name)
        elif name in REGISTRY:
            wanted.add(name)
        else:
            raise ConfigError(f"unknown suite or case {name!r}{nearest(name, list(SUITES) + list(REGISTRY))}")
    return [c for c in REGISTRY.values() if c.id in wanted]


def resolve_families(specs) -> list[MetricFamily]:
    out: list[MetricFamily] = []
    for spec in specs:
        if spec == "all":
            out.extend(catalog_get(n) for n in catalog_names())
            continue
        try:
            base, _ = split_family_spec(spec)
        except CatalogError as err:
            raise ConfigError(str(err)) from None
        if base not in catalog_names():
            raise ConfigError(f"unknown metric family {base!r}{nearest(base, catalog_names())}")
        try:
            out.append(catalog_get(spec))
        except CatalogError as err:
            raise ConfigError(str(err)) from None
    seen, unique = set(), []
    for fam in out:
        if fam.label() not in seen:
            seen.add(fam.label())
            unique.append(fam)
    return unique


def case_order(case: IdentityCase, override: int | None) -> int:
    if override is None:
        return case.order
    if override < case.min_order:
        raise ConfigError(f"jet order {override} is below the minimum {case.min_order} for {case.id}")
    return override


def evaluate_case(case: IdentityCase, ctx: EvalContext) -> CaseResult:
    try:
        lhs, rhs = case.evaluator(ctx)
        lhs, rhs = np.asarray(lhs, dtype=float), np.asarray(rhs, dtype=float)
        r = residual(lhs, rhs)
    except PreconditionViolation as err:
        return CaseResult(None, "violation", str(err))
    except (JetError, ArithmeticError, ValueError, FloatingPointError) as err:
        return CaseResult(None, "error", f"{type(err).__name__}: {err}")
    if not np.isfinite(r):
        return CaseResult(None, "error", "non-finite residual")
    size = lambda a: float(np.abs(a).max()) if a.size else 0.0  # noqa: E731
    return CaseResult(r, "ok", lhs_norm=size(lhs), rhs_norm=size(rhs))


def evaluate_point(family: MetricFamily, point, cases: list[tuple[IdentityCase, int]], method: str,
                   fd_step: float = 1e-4) -> dict[str, CaseResult]:
    """All ``(case, order)`` pairs at one point; cases sharing an order share their jets."""
    by_order: dict[int, list[IdentityCase]] = defaultdict(list)
    for case, order in cases:
        by_order[order].append(case)
    out = {}
    for order in sorted(by_order):
        ctx = EvalContext(family, point, order, method=method, fd_step=fd_step)
        for case in by_order[order]:
            out[case.id] = evaluate_case(case, ctx)
    return out


def _task(args):
    family, point, cases, method = args
    return evaluate_point(family, point, cases, method)


def run_verify(config: RunConfig):
    """Run the configured suites; returns a :class:`~ril.report.RunReport`."""
    from .report import RunReport

    config.validate()
    cases = resolve_cases(config.suites)
    families = resolve_families(config.families)
    parallelism = config.parallelism if config.parallelism is not None else default_parallelism()
    started = time.perf_counter()

    plan = SamplePlan(config.points, config.seed)
    tasks, layout, reports = [], [], []
    for fam in families:
        runnable, skipped = [], []
        for case in cases:
            reason = case.applicability(fam)
            (skipped if reason else runnable).append((case, reason))
        for case, reason in skipped:
            reports.append(ResidualReport.skipped(case, fam.label(), reason, config.tolerances.get(case.id)))
        if not runnable:
            continue
        pairs = [(case, case_order(case, config.order)) for case, _ in runnable]
        points = sample_points(fam, plan)
        for k, p in enumerate(points):
            tasks.append((fam, p, pairs, config.method))
            layout.append((fam, k))

    if parallelism > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(_task, tasks, chunksize=1))
    else:
        results = [_task(t) for t in tasks]

    grouped: dict[tuple[str, str], list[tuple[int, tuple, CaseResult]]] = defaultdict(list)
    for (fam, k), task, res in zip(layout, tasks, results):
        for cid, r in res.items():
            grouped[cid, fam.label()].append((k, task[1], r))
    for (cid, label), items in grouped.items():
        items.sort(key=lambda t: t[0])
        reports.append(ResidualReport.build(REGISTRY[cid], label, [p for _, p, _ in items],
                                            [r for _, _, r in items], config.tolerances.get(cid)))
    for rep in reports:
        case = REGISTRY[rep.case]
        if rep.verdict == FAIL and case.diagnose is not None and rep.points:
            fam = next(f for f in families if f.label() == rep.family)
            order = case_order(case, config.order)
            note = case.diagnose([EvalContext(fam, p, order, method=config.method) for p in rep.points])
            rep.message = f"{rep.message}; {note}" if rep.message else note
    reports.sort(key=lambda r: (r.case, r.family))
    return RunReport.create(config, reports, wall_time=time.perf_counter() - started)


def exit_code(report) -> int:
    return EXIT_FAIL if any(r.verdict == FAIL for r in report.reports) else EXIT_OK
