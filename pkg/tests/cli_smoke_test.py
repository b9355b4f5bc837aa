#!/usr/bin/env python3
"""Command line smoke test.

Runs analyze, curve and one reproduce target through the real entry script
in a temporary output directory and checks that the expected files appear
and the exit codes are right. Not collected by pytest; run it directly.
"""
import json
import os
import subprocess
import sys
import tempfile

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
APP = os.path.join(ROOT, "cutofflab_app.py")


def run(*args):
    cmd = [sys.executable, APP, *args]
    print("$", " ".join(cmd))
    return subprocess.run(cmd, cwd=ROOT, capture_output=True, text=True)


def main():
    failures = 0
    with tempfile.TemporaryDirectory() as out:
        result = run("analyze", "--scenario", "rotation51", "--samples", "200", "--out", out, "--verbose")
        report_path = os.path.join(out, "report.json")
        if result.returncode != 0 or not os.path.exists(report_path):
            print("FAIL analyze:", result.stderr)
            failures += 1
        else:
            with open(report_path, "r", encoding="utf-8") as f:
                verdict = json.load(f)["cutoff"]["verdict"]
            print("analyze verdict:", verdict)

        result = run("curve", "--scenario", "rotation51", "--samples", "200", "--out", out, "--threads", "2")
        for name in ("curve_r.csv", "curve_delta.csv", "plot_curves.py"):
            if not os.path.exists(os.path.join(out, name)):
                print("FAIL curve: missing", name, result.stderr)
                failures += 1

        result = run("reproduce", "entropy-dichotomy", "--out", out)
        if result.returncode != 0:
            print("FAIL reproduce:", result.stdout, result.stderr)
            failures += 1

        result = run("analyze", "--scenario", "rotation51", "--lam", "-1", "--out", out)
        if result.returncode != 3:
            print("FAIL unstable drift exit code:", result.returncode)
            failures += 1

    print("OK" if failures == 0 else f"{failures} failure(s)")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
