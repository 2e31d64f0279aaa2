"""Run reports and their byte-stable JSON and CSV renderings."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .identities import FAIL, PASS, REPORT, SKIP, VIOLATION, ResidualReport

__all__ = ["SCHEMA_VERSION", "RunReport", "config_hash", "to_json", "to_csv", "from_json", "emit_report",
           "summary_table"]

SCHEMA_VERSION = 1
CSV_COLUMNS = ("tool_version", "config_hash", "case", "family", "point_index", "point", "residual", "tolerance",
               "verdict")


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def config_hash(echo: dict, version: str = __version__) -> str:
    return hashlib.sha256(_canonical({"config": echo, "tool_version": version}).encode()).hexdigest()[:16]


@dataclass
class RunReport:
    tool_version: str
    config: dict
    reports: list[ResidualReport]
    verdict: str
    schema_version: int = SCHEMA_VERSION
    # Wall time is kept in memory and printed, but never serialized: the JSON must be byte-stable.
    wall_time: float | None = field(default=None, compare=False)

    @classmethod
    def create(cls, config, reports: list[ResidualReport], wall_time: float | None = None) -> RunReport:
        verdict = FAIL if any(r.verdict == FAIL for r in reports) else PASS
        return cls(__version__, config.echo(), list(reports), verdict, wall_time=wall_time)

    @property
    def config_hash(self) -> str:
        return config_hash(self.config, self.tool_version)

    def counts(self) -> dict[str, int]:
        out = {v: 0 for v in (PASS, FAIL, SKIP, VIOLATION, REPORT)}
        for r in self.reports:
            out[r.verdict] += 1
        return out

    def find(self, case: str, family: str) -> ResidualReport:
        for r in self.reports:
            if r.case == case and r.family == family:
                return r
        raise KeyError((case, family))

    def to_dict(self) -> dict:
        results: dict[str, dict[str, dict]] = {}
        for r in self.reports:
            entry = r.to_dict()
            entry.pop("case")
            entry.pop("family")
            results.setdefault(r.case, {})[r.family] = entry
        return {
            "schema_version": self.schema_version,
            "tool": "ril",
            "tool_version": self.tool_version,
            "config": self.config,
            "config_hash": self.config_hash,
            "verdict": self.verdict,
            "counts": self.counts(),
            "results": results,
        }

    @classmethod
    def from_dict(cls, d: dict) -> RunReport:
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema {d.get('schema_version')!r}")
        reports = []
        for case, fams in d["results"].items():
            for fam, entry in fams.items():
                reports.append(ResidualReport.from_dict({"case": case, "family": fam, **entry}))
        reports.sort(key=lambda r: (r.case, r.family))
        return cls(d["tool_version"], d["config"], reports, d["verdict"], d["schema_version"])


def to_json(report: RunReport) -> str:
    return json.dumps(report.to_dict(), sort_keys=True, indent=2, allow_nan=False) + "\n"


def from_json(text: str) -> RunReport:
    return RunReport.from_dict(json.loads(text))


def to_csv(report: RunReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    h = report.config_hash
    for r in report.reports:
        for k, (p, res) in enumerate(zip(r.points, r.residuals)):
            w.writerow([report.tool_version, h, r.case, r.family, k, " ".join(repr(c) for c in p),
                        "" if res is None else repr(res), repr(r.tolerance), r.verdict])
    return buf.getvalue()


def emit_report(report: RunReport, fmt: str = "json", path: str | Path | None = None) -> str:
    """Render ``report``; write it to ``path`` when given.  Returns the rendered text."""
    text = to_json(report) if fmt == "json" else to_csv(report)
    if path is not None:
        Path(path).write_text(text)
    return text


def summary_table(report: RunReport, quiet: bool = False) -> str:
    """One line per (case, family); ``quiet`` keeps only failures, violations and reported forms."""
    rows = []
    for r in report.reports:
        if quiet and r.verdict in (PASS, SKIP):
            continue
        res = "-" if r.max_residual is None else f"{r.max_residual:.2e}"
        rows.append((r.verdict.upper(), r.case, r.family, res, f"{r.tolerance:.0e}", r.message))
    if not rows:
        return ""
    widths = [max(len(row[i]) for row in rows) for i in range(5)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row[:5], widths)) + (f"  {row[5]}" if row[5] else "")
             for row in rows]
    return "\n".join(line.rstrip() for line in lines)
