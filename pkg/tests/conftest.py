import os
import sys

import pytest

# let `pytest` work from a plain checkout as well as an editable install
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))


def pytest_configure(config):
    config._acceptance_lines = []


@pytest.fixture
def record(request):
    """Append one PASS/FAIL line for an acceptance criterion, echoed in the summary."""
    lines = request.config._acceptance_lines

    def _record(label, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'}  {label}" + (f"  [{detail}]" if detail else "")
        print(line)
        lines.append(line)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
