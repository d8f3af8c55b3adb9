#!/usr/bin/env python3
"""
Smoke check of an installation.
Runs two fast exact subcommands and returns exit code 0 if both pass, 1 otherwise.
"""
import io
import json
import sys
from contextlib import redirect_stdout
from pathlib import Path

from latcover.main import run

FIXTURES = Path(__file__).parent / "fixtures"

CHECKS = [
    (["verify-theorem1", "--n", "3", "--mu", "2", "--nu", "1"], "match", True),
    (
        ["covering-check", "--body", str(FIXTURES / "t2.json"), "--lattice", str(FIXTURES / "fary.json"), "--depth", "8"],
        "verdict",
        "Covered",
    ),
]


def check_health() -> bool:
    healthy = True
    for argv, key, expected in CHECKS:
        buffer = io.StringIO()
        with redirect_stdout(buffer):
            code = run(argv)
        if code != 0:
            print(f"❌ {argv[0]} exited with {code}")
            healthy = False
            continue
        value = json.loads(buffer.getvalue()).get(key)
        if value != expected:
            print(f"❌ {argv[0]}: {key} = {value!r}, expected {expected!r}")
            healthy = False
            continue
        print(f"✅ {argv[0]}: {key} = {value!r}")
    return healthy


if __name__ == "__main__":
    if check_health():
        sys.exit(0)
    else:
        sys.exit(1)
