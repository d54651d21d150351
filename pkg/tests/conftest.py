import numpy as np
import pytest

from sublinear.scenarios import bernoulli, dirac, family


@pytest.fixture
def bernoulli_pair():
    return family(bernoulli(0.3), bernoulli(0.7))


@pytest.fixture
def dirac_pair():
    return family(dirac(0.0), dirac(1.0))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line per acceptance criterion."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def record(number: int, title: str, ok: bool, detail: str = "") -> bool:
        lines.append((number, f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {title}" + (f" ({detail})" if detail else "")))
        return ok

    return record


_ACCEPTANCE = pytest.StashKey[list]()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(lines):
        terminalreporter.write_line(line)
