import numpy as np
import pytest

from chebyprop.graph import from_edges


def random_connected(n, extra, rng):
    """Random spanning tree on ``n`` nodes plus ``extra`` random edges."""
    parents = [int(rng.integers(0, i)) for i in range(1, n)]
    edges = [(p, i) for i, p in zip(range(1, n), parents)]
    edges += [tuple(rng.integers(0, n, size=2)) for _ in range(extra)]
    return from_edges(np.array(edges, dtype=np.int64))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE = []


@pytest.fixture
def criterion(request):
    """Call ``criterion(number, title, ok, detail, elapsed, budget)`` once per
    acceptance criterion; the line is echoed in the terminal summary."""

    def record(number, title, ok, detail, elapsed, budget):
        in_time = elapsed < budget
        status = "PASS" if ok and in_time else "FAIL"
        line = (f"[{status}] criterion {number:2d}: {title} | {detail} | "
                f"{elapsed:.2f}s (budget {budget:g}s)")
        _ACCEPTANCE.append((number, line))
        print(line)
        assert ok, line
        assert in_time, line

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_ACCEPTANCE):
        terminalreporter.write_line(line)
