import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from binderwatch import ArgValue, load_registry  # noqa: E402

ISMS = "com.android.internal.telephony.ISms"
FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def registry():
    return load_registry()


@pytest.fixture
def send_text_sig(registry):
    return registry.lookup(ISMS, 5)


@pytest.fixture
def send_text_args():
    return [ArgValue.str_(s) for s in ("com.example.app", "0499999999", "", "hello there")]


_VERDICTS = pytest.StashKey[list]()


@pytest.fixture
def verdict(request):
    """Record one acceptance line: ``verdict(n, ok, detail)``."""
    lines = request.config.stash.setdefault(_VERDICTS, [])

    def record(n, ok, detail=""):
        line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
        lines.append((n, line))
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_VERDICTS, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
