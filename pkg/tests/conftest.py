import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

REPORT = Path(__file__).resolve().parent.parent / "acceptance_report.json"
_RESULTS: dict[str, dict] = {}


@pytest.fixture
def record():
    """Store one acceptance verdict: ``record("AC1", passed, detail, **numbers)``."""

    def _record(criterion: str, passed: bool, detail: str, **numbers):
        _RESULTS[criterion] = {"passed": bool(passed), "detail": detail, **numbers}

    return _record


@pytest.fixture(scope="session")
def oracle_values():
    import oracles

    return oracles.load()


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_RESULTS, key=lambda k: int(k[2:])):
        res = _RESULTS[key]
        terminalreporter.write_line(f"{key}: {'PASS' if res['passed'] else 'FAIL'}  {res['detail']}")
    REPORT.write_text(json.dumps(_RESULTS, indent=2, default=float) + "\n")
