import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_VERDICTS: list[tuple[int, str, bool, str]] = []


@pytest.fixture
def criterion(request):
    """``criterion(n, title, ok, detail)`` records one acceptance verdict.

    A test that errors before recording is reported as FAIL.
    """
    seen = []

    def record(n, title, ok, detail=""):
        seen.append(n)
        _VERDICTS.append((n, title, bool(ok), detail))
        return bool(ok)

    yield record
    if not seen:
        _VERDICTS.append((0, request.node.name, False, "error before verdict"))


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for n, title, ok, detail in sorted(_VERDICTS, key=lambda v: v[0]):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {n:2d}. {title}: {detail}")
