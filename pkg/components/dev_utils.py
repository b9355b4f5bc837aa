"""
Development utilities for inspecting analysis reports.
"""

import sys
from typing import TextIO


def _fmt(value) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def format_report(report: dict) -> str:
    """Compact summary of an analyze report"""
    dec = report.get("decomposition", {})
    growth = report.get("normal_growth", {})
    cut = report.get("cutoff", {})
    lines = [
        f"scenario        : {report.get('scenario', 'custom')}",
        f"verdict         : {cut.get('verdict', 'n/a')}",
        f"rate q          : {_fmt(dec.get('rate'))}",
        f"multiplicity    : {_fmt(dec.get('ell'))}",
        f"angles          : {', '.join(_fmt(a) for a in dec.get('angles', [])) or 'none'}",
        f"resonant        : {_fmt(growth.get('resonant'))}",
        f"orthogonal      : {_fmt(growth.get('orthogonal'))}",
        f"equal norms     : {_fmt(growth.get('equal_norms'))}",
        f"|v|             : {_fmt(growth.get('representative_norm'))}",
        f"gap             : {_fmt(cut.get('gap'))}",
        f"C0, q*          : {_fmt(cut.get('C0'))}, {_fmt(cut.get('q_star'))}",
        f"E|O_inf|        : {_fmt(cut.get('stationary_moment'))}"
        f" (bound {_fmt(cut.get('stationary_moment_bound'))})",
    ]
    window = cut.get("epsilon_interval")
    if window:
        lines.append(f"epsilon window  : [{_fmt(window.get('lo'))}, {_fmt(window.get('hi'))}]")
    return "\n".join(lines)


def show_report(report: dict, stream: TextIO = None):
    """Write the summary to stdout"""
    stream = stream or sys.stdout
    stream.write(format_report(report) + "\n")
