"""Report serialization: deterministic JSON, CSV trace tables and a text summary.

Floats are written with 17 significant digits so that a value survives a
round trip bit for bit.  Non-finite floats become the strings "inf", "-inf"
and "nan".  Complex numbers become [re, im] pairs.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
import os
from pathlib import Path

import numpy as np

from .errors import ReportIOError
from .spaces import ExtReal, SparseVector

REPORT_SCHEMA = "tvspec-report/1"
FORMATS = ("json", "csv", "text")


def fmt_float(v: float) -> str:
    if math.isnan(v):
        return '"nan"'
    if math.isinf(v):
        return '"inf"' if v > 0 else '"-inf"'
    return "%.17g" % v


def plain(obj):
    """Reduce report objects to dicts, lists, strings, ints, floats, bools and None."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, enum.Enum):
        return plain(obj.value)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, ExtReal):
        v = obj.value
        if math.isinf(v) and math.isfinite(obj.log2):
            return {"log2": obj.log2}
        return v
    if isinstance(obj, SparseVector):
        return {str(k): plain(v) for k, v in sorted(obj.items())}
    if isinstance(obj, np.ndarray):
        return [plain(v) for v in obj.tolist()]
    if hasattr(obj, "to_dict"):
        return plain(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (frozenset, set)):
        return [plain(v) for v in sorted(obj)]
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    return str(obj)


def _dump(obj, out: list, indent: int) -> None:
    pad = "  " * indent
    if isinstance(obj, float):
        out.append(fmt_float(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        items = list(obj.items())
        for i, (k, v) in enumerate(items):
            out.append(f"{pad}  {json.dumps(k)}: ")
            _dump(v, out, indent + 1)
            out.append(",\n" if i + 1 < len(items) else "\n")
        out.append(pad + "}")
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
        elif all(not isinstance(v, (dict, list)) for v in obj):
            out.append("[")
            for i, v in enumerate(obj):
                _dump(v, out, indent)
                if i + 1 < len(obj):
                    out.append(", ")
            out.append("]")
        else:
            out.append("[\n")
            for i, v in enumerate(obj):
                out.append(pad + "  ")
                _dump(v, out, indent + 1)
                out.append(",\n" if i + 1 < len(obj) else "\n")
            out.append(pad + "]")
    else:
        out.append(json.dumps(obj))


def to_json(report: dict) -> str:
    """JSON text of a report; timing is left out so that reruns compare equal."""
    body = {k: v for k, v in report.items() if k != "timing"}
    out: list[str] = []
    _dump(plain(body), out, 0)
    return "".join(out) + "\n"


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return fmt_float(v).strip('"')
    return str(v)


def radius_rows(report: dict) -> list[list]:
    rows = []
    for i, task in enumerate(report["tasks"]):
        for est in task.get("radii", {}).values():
            for n, it in est["iterates"]:
                rows.append([i, est["kind"], n, it, est["lower"], est["upper"]])
    return rows


def neumann_rows(report: dict) -> list[list]:
    rows = []
    for i, task in enumerate(report["tasks"]):
        for rep in task.get("neumann", []):
            lam = rep["lambda"]
            partial = {n: v for n, v in rep["partial_trace"]}
            for n, inc in rep["residual_trace"]:
                rows.append([i, lam[0], lam[1], rep["kind"], n, inc, partial.get(n)])
    return rows


def to_csv(rows: list[list], header: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


RADIUS_HEADER = ["task", "kind", "n", "iterate", "lower", "upper"]
NEUMANN_HEADER = ["task", "lambda_re", "lambda_im", "kind", "n", "increment", "partial"]


def to_text(report: dict) -> str:
    lines = [f"scenario: {report['scenario'].get('name', '')}",
             f"status:   {'PASS' if report['passed'] else 'FAIL'}"]
    timing = report.get("timing", {})
    for i, task in enumerate(report["tasks"]):
        mark = "ok  " if task["passed"] else "FAIL"
        head = f"[{mark}] #{i} {task['task']}"
        if task.get("id"):
            head += f" {task['id']}"
        if i < len(timing.get("tasks", [])):
            head += f" ({timing['tasks'][i]:.2f} s)"
        lines.append(head)
        for line in task.get("summary", []):
            lines.append(f"       {line}")
        for f in task.get("failures", []):
            lines.append(f"       ! {f}")
    if "total" in timing:
        lines.append(f"total time: {timing['total']:.2f} s")
    return "\n".join(lines) + "\n"


def emit(report: dict, formats=("json",), out_dir: str | os.PathLike = ".") -> list[Path]:
    """Write the report in the requested formats and return the written paths."""
    out = Path(out_dir)
    written = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        plain_report = plain({k: v for k, v in report.items() if k != "timing"})
        for fmt in formats:
            if fmt == "json":
                p = out / "report.json"
                p.write_text(to_json(report), encoding="utf-8")
                written.append(p)
            elif fmt == "csv":
                for name, rows, header in (("radii.csv", radius_rows(plain_report), RADIUS_HEADER),
                                           ("neumann.csv", neumann_rows(plain_report), NEUMANN_HEADER)):
                    p = out / name
                    p.write_text(to_csv(rows, header), encoding="utf-8")
                    written.append(p)
            elif fmt == "text":
                p = out / "summary.txt"
                p.write_text(to_text({**plain_report, "timing": report.get("timing", {})}), encoding="utf-8")
                written.append(p)
            else:
                raise ValueError(f"unknown format {fmt!r}")
    except OSError as e:
        raise ReportIOError(f"cannot write report to {out}: {e}") from e
    return written
