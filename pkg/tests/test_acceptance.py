"""All twelve acceptance criteria, run once through the command line.

The suite runs ``ptrank verify-paper --exhaustive --seed 1`` in a subprocess (so
the exit code is checked exactly as a user would see it), then reports one
pass/fail line per criterion.  Runtime limits count toward pass/fail.
"""

import json
import subprocess
import sys

import pytest

from ptrank.acceptance import CRITERIA


@pytest.fixture(scope="module")
def suite(tmp_path_factory):
    out = tmp_path_factory.mktemp("acceptance") / "report.json"
    proc = subprocess.run([sys.executable, "-m", "ptrank.cli", "verify-paper", "--exhaustive", "--seed", "1",
                           "--out", str(out)], capture_output=True, text=True, timeout=3600)
    report = json.loads(proc.stdout)
    return proc.returncode, {c["criterion"]: c for c in report["criteria"]}


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, suite, capsys):
    _, results = suite
    r = results[number]
    ok = r["passed"] and r["within_time"]
    line = (f"criterion {number:2d} {r['key']:22s} {'PASS' if ok else 'FAIL'} "
            f"{r['seconds']:8.2f}s / {r['limit']:g}s")
    with capsys.disabled():
        print("\n" + line, end="")
    assert r["passed"], r["details"]
    assert r["within_time"], f"{r['seconds']}s exceeds the {r['limit']}s limit"


def test_verify_paper_exit_code(suite):
    code, results = suite
    assert len(results) == 12
    assert code == 0
