import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sflab.problems import builtin_suite


@pytest.fixture(scope="session")
def problems():
    return {p.name: p for p in builtin_suite()}


@pytest.fixture(scope="session")
def acceptance_lines():
    """Collects one line per acceptance criterion; written at session end."""
    lines: list[str] = []
    yield lines
    if lines:
        out = Path(__file__).parent.parent / "acceptance_report.txt"
        out.write_text("\n".join(lines) + "\n")
        print("\n".join(["", "=" * 70] + lines + ["=" * 70]))
