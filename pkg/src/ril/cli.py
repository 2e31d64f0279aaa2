"""``ril`` command line: ``verify``, ``list`` and ``report``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import yaml

from . import __version__
from .catalog import SamplingError, catalog_get, catalog_names
from .identities import REGISTRY, SUITES
from .report import emit_report, from_json, summary_table
from .runner import EXIT_CONFIG, ConfigError, RunConfig, exit_code, run_verify


def _split(values) -> list[str]:
    out = []
    for v in values or ():
        out.extend(s.strip() for s in v.split(",") if s.strip())
    return out


def _tolerance(text: str) -> tuple[str, float]:
    case, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected CASE=VALUE, got {text!r}")
    try:
        return case.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tolerance {value!r} is not a number") from None


def load_config_file(path: str) -> dict:
    try:
        data = yaml.safe_load(Path(path).read_text())
    except OSError as err:
        raise ConfigError(f"cannot read config file: {err}") from None
    except yaml.YAMLError as err:
        raise ConfigError(f"config file {path} is not valid YAML/JSON: {err}") from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a mapping")
    return data


def build_config(args) -> RunConfig:
    data = load_config_file(args.config) if args.config else {}
    overrides = {
        "suites": _split(args.suites) or None,
        "families": _split(args.families) or None,
        "points": args.points,
        "seed": args.seed,
        "order": args.order,
        "output": args.output,
        "format": args.format,
        "parallelism": args.parallelism,
        "method": args.method,
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    if args.tolerance:
        tols = dict(data.get("tolerances") or {})
        tols.update(dict(args.tolerance))
        data["tolerances"] = tols
    try:
        return RunConfig.from_mapping(data).validate()
    except TypeError as err:
        raise ConfigError(str(err)) from None


def cmd_verify(args) -> int:
    try:
        config = build_config(args)
        report = run_verify(config)
    except (ConfigError, SamplingError) as err:
        print(f"ril: error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        text = emit_report(report, config.format, config.output)
    except OSError as err:
        print(f"ril: error: cannot write report: {err}", file=sys.stderr)
        return EXIT_CONFIG
    if config.output is None:
        sys.stdout.write(text)
    table = summary_table(report, quiet=args.quiet)
    if table:
        print(table, file=sys.stderr)
    counts = ", ".join(f"{v} {k}" for k, v in report.counts().items() if v)
    print(f"ril {__version__}: {report.verdict.upper()} ({counts}) in {report.wall_time:.1f}s", file=sys.stderr)
    return exit_code(report)


def cmd_list(args) -> int:
    if args.cases:
        for case in REGISTRY.values():
            dims = "any" if case.dims is None else ",".join(map(str, case.dims))
            flag = "" if case.asserted else "  (reported, not asserted)"
            print(f"{case.group:13s} {case.id:38s} dim {dims:6s} tol {case.tolerance:.0e}  {case.description}{flag}")
        return 0
    print(f"{'name':22s} {'dim':>3s}  {'soliton':10s} {'lambda':>8s}  parameters")
    for name in catalog_names():
        fam = catalog_get(name)
        kind, lam = ("-", "-") if fam.soliton is None else (fam.soliton.kind, f"{fam.soliton.lam:g}")
        params = ", ".join(f"{k}={v}" for k, v in sorted(fam.parameters.items())) or "-"
        print(f"{name:22s} {fam.dim:3d}  {kind:10s} {lam:>8s}  {params}")
    return 0


def cmd_report(args) -> int:
    try:
        report = from_json(Path(args.path).read_text())
    except (OSError, ValueError, KeyError) as err:
        print(f"ril: error: cannot read report {args.path}: {err}", file=sys.stderr)
        return EXIT_CONFIG
    if args.format == "csv":
        sys.stdout.write(emit_report(report, "csv"))
        return exit_code(report)
    print(f"ril report: tool {report.tool_version}, config {report.config_hash}, verdict {report.verdict.upper()}")
    print(f"config: {json.dumps(report.config, sort_keys=True)}")
    table = summary_table(report, quiet=args.quiet)
    if table:
        print(table)
    return exit_code(report)


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ril", description="Numerical verification of curvature identities along Ricci flow.")
    p.add_argument("--version", action="version", version=f"ril {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="evaluate identity suites on sampled points of metric families")
    v.add_argument("--suites", nargs="+", help=f"suite names ({', '.join(SUITES)}), case ids, or all")
    v.add_argument("--families", nargs="+", help="family names, optionally with parameters: name(k=v,...), or all")
    v.add_argument("--points", type=int, help="sample points per family (default 5)")
    v.add_argument("--seed", type=int, help="sampling seed (default 0)")
    v.add_argument("--order", type=int, help="override the jet order of every case")
    v.add_argument("--tolerance", action="append", type=_tolerance, metavar="CASE=VALUE",
                   help="override the tolerance of one case (repeatable)")
    v.add_argument("--format", choices=("json", "csv"))
    v.add_argument("--output", "-o", help="write the report here instead of stdout")
    v.add_argument("--parallelism", "-j", type=int, help="worker processes (default: $RIL_PARALLELISM or 1)")
    v.add_argument("--method", choices=("dual", "fd"), help="time derivative: dual variation or finite difference")
    v.add_argument("--config", help="YAML or JSON file with RunConfig fields; flags override it")
    v.add_argument("--quiet", "-q", action="store_true", help="list only failures, violations and reported forms")
    v.set_defaults(func=cmd_verify)

    ls = sub.add_parser("list", help="list catalog families (or identity cases)")
    ls.add_argument("--cases", action="store_true", help="list identity cases instead of families")
    ls.set_defaults(func=cmd_list)

    r = sub.add_parser("report", help="summarize or convert a saved JSON report")
    r.add_argument("path")
    r.add_argument("--format", choices=("text", "csv"), default="text")
    r.add_argument("--quiet", "-q", action="store_true")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
