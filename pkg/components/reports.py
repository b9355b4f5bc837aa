"""Report persistence.

Writes the analysis report as JSON, sweep curves as CSV and a plotting
script that reads only those CSV files. The report shape is described by
``assets/report_schema.json``.

Usage:
  from components.reports import write_report, write_csv, load_report
"""
from __future__ import annotations

import csv
import json
import logging
import math
import os
from typing import Any, Dict, Iterable, List, Sequence

import jsonschema
import numpy as np

logger = logging.getLogger(__name__)

BASE_DIR = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
SCHEMA_FILE = os.path.join(BASE_DIR, "assets", "report_schema.json")
REPORT_NAME = "report.json"
PLOT_SCRIPT_NAME = "plot_curves.py"


def _ensure_out_dir(out_dir: str) -> None:
    if not os.path.exists(out_dir):
        os.makedirs(out_dir, exist_ok=True)


def _float17(x: float):
    if not math.isfinite(x):
        return None
    return float(f"{x:.17g}")


def to_jsonable(obj: Any) -> Any:
    """Plain JSON types; non-finite floats become null, complex become [re, im]."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _float17(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return [_float17(obj.real), _float17(obj.imag)]
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def write_report(report: Dict[str, Any], out_dir: str, name: str = REPORT_NAME) -> str:
    _ensure_out_dir(out_dir)
    path = os.path.join(out_dir, name)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(to_jsonable(report), f, ensure_ascii=False, indent=2, sort_keys=True)
        f.write("\n")
    logger.info("wrote %s", path)
    return path


def load_report(path: str) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def _cell(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}" if math.isfinite(value) else ""
    if value is None:
        return ""
    return str(value)


def write_csv(rows: Iterable[Sequence[Any]], header: Sequence[str], path: str) -> str:
    _ensure_out_dir(os.path.dirname(path) or ".")
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    logger.info("wrote %s", path)
    return path


def read_csv(path: str) -> List[Dict[str, str]]:
    with open(path, "r", encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))


PLOT_TEMPLATE = '''"""Plots the cutoff curves written next to this script."""
import csv
import os

import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))


def read(name):
    with open(os.path.join(HERE, name), newline="") as f:
        return list(csv.DictReader(f))


def num(value):
    return float(value) if value else float("nan")

{body}
plt.show()
'''

_R_BODY = '''
rows = read("curve_r.csv")
fig, ax = plt.subplots()
for eps in sorted({{r["epsilon"] for r in rows}}, key=float):
    sel = [r for r in rows if r["epsilon"] == eps]
    ax.plot([num(r["r"]) for r in sel], [num(r["empirical_renormalized_Wp"]) for r in sel], "o-", label=f"eps={{eps}}")
    ax.fill_between([num(r["r"]) for r in sel], [num(r["sandwich_lo"]) for r in sel],
                    [num(r["sandwich_hi"]) for r in sel], alpha=0.2)
ref = [r for r in rows if r["predicted_profile"]]
if ref:
    ax.plot([num(r["r"]) for r in ref], [num(r["predicted_profile"]) for r in ref], "k--", label="profile")
ax.set_xlabel("r")
ax.set_ylabel("W_p / eps")
ax.legend()
'''

_DELTA_BODY = '''
rows = read("curve_delta.csv")
fig, ax = plt.subplots()
for delta in sorted({{r["delta"] for r in rows}}, key=float):
    sel = [r for r in rows if r["delta"] == delta]
    ax.loglog([num(r["epsilon"]) for r in sel], [num(r["empirical_renormalized_Wp"]) for r in sel], "o-",
              label=f"delta={{delta}}")
ax.set_xlabel("eps")
ax.set_ylabel("W_p / eps")
ax.legend()
'''

_MOMENT_BODY = '''
rows = read("curve_moment.csv")
fig, ax = plt.subplots()
for eps in sorted({{r["epsilon"] for r in rows}}, key=float):
    sel = [r for r in rows if r["epsilon"] == eps]
    ax.semilogy([num(r["r"]) for r in sel], [num(r["empirical_renormalized_moment"]) for r in sel], "o-",
                label=f"eps={{eps}}")
ref = [r for r in rows if r["predicted_large_r"]]
if ref:
    ax.semilogy([num(r["r"]) for r in ref], [num(r["predicted_large_r"]) for r in ref], "k--", label="large r")
ax.set_xlabel("r")
ax.set_ylabel("renormalized moment")
ax.legend()
'''


def write_plot_script(out_dir: str, csv_names: Sequence[str]) -> str:
    """Emit a matplotlib script for the given CSV files; never executed here."""
    parts = []
    if "curve_r.csv" in csv_names:
        parts.append(_R_BODY.format())
    if "curve_delta.csv" in csv_names:
        parts.append(_DELTA_BODY.format())
    if "curve_moment.csv" in csv_names:
        parts.append(_MOMENT_BODY.format())
    path = os.path.join(out_dir, PLOT_SCRIPT_NAME)
    _ensure_out_dir(out_dir)
    with open(path, "w", encoding="utf-8") as f:
        f.write(PLOT_TEMPLATE.format(body="".join(parts)))
    return path


def load_schema(path: str = SCHEMA_FILE) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def _error_path(where: str, error: jsonschema.ValidationError) -> str:
    parts = [f"[{p}]" if isinstance(p, int) else f".{p}" for p in error.absolute_path]
    return where + "".join(parts)


def validate_report(report: Any, schema: Dict[str, Any], where: str = "report") -> List[str]:
    """
    Check ``report`` against a draft-07 JSON schema.

    Returns a list of problems, one per validation error; empty when the
    report conforms.
    """
    validator = jsonschema.Draft7Validator(schema)
    errors = sorted(validator.iter_errors(report), key=lambda e: [str(p) for p in e.absolute_path])
    return [f"{_error_path(where, e)}: {e.message}" for e in errors]
