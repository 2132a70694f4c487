"""Regenerate docs/golden/<name>.json from docs/golden/commands.json."""

import json
import sys
from pathlib import Path

from pdcperm.cli import main

ROOT = Path(__file__).resolve().parent.parent


def run() -> int:
    commands = json.loads((ROOT / "docs/golden/commands.json").read_text())
    status = 0
    for name, argv in commands.items():
        out = ROOT / "docs/golden" / f"{name}.json"
        code = main([*argv, "--format", "json", "--output", str(out)])
        print(f"{name}: exit {code}")
        status = max(status, code)
    return status


if __name__ == "__main__":
    sys.exit(run())
