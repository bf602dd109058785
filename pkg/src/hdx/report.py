"""Verification reports: check records, JSON/CSV/text emission."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

SCHEMA_VERSION = 1
TIMING_FIELDS = ("wall_time", "total_wall_time")


@dataclass
class Tolerances:
    exact: float = 1e-12       # row sums, detailed balance, weight recursion, bound coincidences
    eq: float = 1e-10          # relative residual of exact identities
    spectral: float = 1e-9     # eigenvalue comparisons
    opt_margin: float = 1e-6   # margins between optimizer estimates


@dataclass
class CheckRecord:
    id: str
    suite: str
    anchor: str
    measured: object
    bound: object = None
    margin: float | None = None
    tolerance: float | None = None
    status: str = "pass"        # pass | fail | skipped
    details: dict = field(default_factory=dict)
    wall_time: float = 0.0


@dataclass
class VerificationReport:
    instance: dict
    metadata: dict
    checks: list[CheckRecord] = field(default_factory=list)
    total_wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    def counts(self) -> dict:
        out = {"pass": 0, "fail": 0, "skipped": 0}
        for c in self.checks:
            out[c.status] += 1
        return out

    def to_dict(self) -> dict:
        return _clean({
            "schema": SCHEMA_VERSION,
            "instance": self.instance,
            "metadata": self.metadata,
            "summary": self.counts(),
            "checks": [asdict(c) for c in self.checks],
            "total_wall_time": self.total_wall_time,
        })

    @classmethod
    def from_dict(cls, data: dict) -> "VerificationReport":
        if data.get("schema") != SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema {data.get('schema')!r}")
        checks = [CheckRecord(**c) for c in data["checks"]]
        return cls(data["instance"], data["metadata"], checks, data.get("total_wall_time", 0.0))


def _clean(obj):
    """JSON-safe copy: tuples become lists, inf becomes a string, nan becomes null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        obj = obj.item()
    if isinstance(obj, float):
        if math.isnan(obj):
            return None
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
    return obj


def strip_timing(data):
    """Report dict with wall-time fields removed (for determinism comparisons)."""
    if isinstance(data, dict):
        return {k: strip_timing(v) for k, v in data.items() if k not in TIMING_FIELDS}
    if isinstance(data, list):
        return [strip_timing(v) for v in data]
    return data


def _fmt(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, float):
        return f"{x:.6g}"
    if isinstance(x, list) and len(x) > 4:
        return "[" + ", ".join(_fmt(v) for v in x[:4]) + ", ...]"
    if isinstance(x, list):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    return str(x)


def render_text(report: VerificationReport) -> str:
    rows = [("check", "status", "measured", "bound", "margin")]
    for c in report.checks:
        rows.append((c.id, c.status, _fmt(c.measured), _fmt(c.bound), _fmt(c.margin)))
    widths = [max(len(r[i]) for r in rows) for i in range(5)]
    lines = [f"instance: {report.instance.get('source')}  d={report.instance.get('d')}  "
             f"faces per level={report.instance.get('face_counts')}"]
    for r in rows:
        lines.append("  ".join(s.ljust(w) for s, w in zip(r, widths)).rstrip())
    failed = [c for c in report.checks if c.status == "fail"]
    if failed:
        lines.append("")
        lines.append("failed checks:")
        for c in failed:
            lines.append(f"  {c.id}: {c.anchor} (tolerance {_fmt(c.tolerance)})")
    n = report.counts()
    lines.append("")
    lines.append(f"{n['pass']} passed, {n['fail']} failed, {n['skipped']} skipped")
    return "\n".join(lines) + "\n"


def render_csv(report: VerificationReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", "measured", "bound", "margin", "status"])
    for c in report.to_dict()["checks"]:
        w.writerow([c["id"], json.dumps(c["measured"]), json.dumps(c["bound"]),
                    json.dumps(c["margin"]), c["status"]])
    return buf.getvalue()


def render_json(report: VerificationReport) -> str:
    return json.dumps(report.to_dict(), indent=1, sort_keys=True) + "\n"


def emit_report(report: VerificationReport, fmt: str = "text", path=None) -> str:
    """Render ``report`` as text, json or csv; write it to ``path`` when given."""
    renderers = {"text": render_text, "json": render_json, "csv": render_csv}
    if fmt not in renderers:
        raise ValueError(f"unknown report format {fmt!r}")
    out = renderers[fmt](report)
    if path is not None:
        try:
            Path(path).write_text(out)
        except OSError as exc:
            raise OSError(f"cannot write report to {path}: {exc}") from exc
    return out
