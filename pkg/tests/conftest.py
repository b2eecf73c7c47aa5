"""Shared small-grid fixtures; the full-size runs live in test_acceptance.py."""

import numpy as np
import pytest

from nonharm.differences import make_family
from nonharm.spectral_model import build_model, gauss_legendre_grid

SMALL_NODES = 256
SMALL_XI = 16


@pytest.fixture(scope="session")
def small_grid():
    return gauss_legendre_grid(SMALL_NODES)


@pytest.fixture(scope="session")
def h2(small_grid):
    return build_model("h-model", SMALL_XI, h=2.0, nodes=SMALL_NODES)


@pytest.fixture(scope="session")
def periodic(small_grid):
    return build_model("periodic", SMALL_XI, nodes=SMALL_NODES)


@pytest.fixture(scope="session")
def dirichlet(small_grid):
    return build_model("dirichlet", SMALL_XI, nodes=SMALL_NODES)


@pytest.fixture(scope="session", params=["h2", "periodic", "dirichlet"])
def any_model(request):
    return request.getfixturevalue(request.param)


@pytest.fixture(scope="session", params=["h2", "periodic"])
def wz_model(request):
    """Models whose eigenfunctions never vanish."""
    return request.getfixturevalue(request.param)


@pytest.fixture(scope="session")
def exp_family(small_grid):
    return make_family("exp_diff", small_grid)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# ── acceptance report lines ────────────────────────────────────────────────

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_line(capsys):
    """Print ``PASS``/``FAIL`` for one criterion (bypassing capture) and remember it."""

    def emit(number, title, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} | {detail}"
        _ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
        return ok

    return emit


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
