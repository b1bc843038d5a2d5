import time
from contextlib import contextmanager

import numpy as np
import pytest
from hypothesis import settings

from steinerfn import convex1d as c1

settings.register_profile("repro", derandomize=True, deadline=None, max_examples=60)
settings.load_profile("repro")


def random_pl(rng: np.random.Generator, pieces: int) -> c1.PLConvex1D:
    """Coercive max of ``pieces`` lines with at least one slope of each sign."""
    while True:
        neg = -rng.uniform(0.2, 3.0, size=1)
        pos = rng.uniform(0.2, 3.0, size=1)
        rest = rng.uniform(-3.0, 3.0, size=pieces - 2)
        slopes = np.concatenate([neg, pos, rest])
        intercepts = rng.uniform(-2.0, 2.0, size=pieces)
        f = c1.max_affine(slopes, intercepts)
        if f.breakpoints.size == pieces - 1:
            return f


def random_family(seed: int, count: int) -> list[c1.PLConvex1D]:
    """Seeded mix of two-slope and three-slope functions."""
    rng = np.random.default_rng(seed)
    return [random_pl(rng, 2 + i % 2) for i in range(count)]


@pytest.fixture
def family():
    return random_family(2024, 50)


_CRITERIA = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """Context manager that times a block and logs one PASS/FAIL line for it.

    A block that overruns its time budget fails after its checks pass.
    """
    log = request.config.stash.setdefault(_CRITERIA, [])

    @contextmanager
    def run(number: int, title: str, budget: float | None = None):
        start = time.perf_counter()
        try:
            yield
            elapsed = time.perf_counter() - start
            assert budget is None or elapsed < budget, (
                f"took {elapsed:.2f} s, budget {budget:g} s")
        except AssertionError as exc:
            elapsed = time.perf_counter() - start
            line = f"FAIL criterion {number}: {title} ({elapsed:.2f} s): {exc}"
            log.append(line)
            print(line)
            raise
        line = f"PASS criterion {number}: {title} ({elapsed:.2f} s)"
        log.append(line)
        print(line)

    return run


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_CRITERIA, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
