import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "convexbench",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("convexbench")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_polytope(rng, n, k=None):
    """Hull of ``k`` Gaussian points; retried until full-dimensional."""
    from convexbench.bodies import VPolytope

    k = k or 2 * n + 4
    while True:
        P = rng.standard_normal((k, n))
        if np.linalg.matrix_rank(P - P.mean(axis=0)) == n:
            return VPolytope(P)


def random_map(rng, n, cond=20.0):
    from convexbench.bodies import AffineMap

    while True:
        A = rng.standard_normal((n, n))
        if np.linalg.cond(A) < cond:
            return AffineMap(A, rng.standard_normal(n))


_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line per acceptance criterion."""
    lines = request.config.stash.setdefault(_ACCEPTANCE_KEY, [])

    def record(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        lines.append(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
