import numpy as np
import pytest

from waveguide_nls import make_geometry

D3 = [("line", 8, 64), ("torus", 1, 16), ("torus", 1, 16)]


@pytest.fixture
def t1():
    return make_geometry([("torus", 1, 16)])


@pytest.fixture
def d3_small():
    return make_geometry([("line", 8, 32), ("torus", 1, 8), ("torus", 1, 8)])


@pytest.fixture
def d3():
    return make_geometry(D3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_values(geometry, rng):
    return rng.standard_normal(geometry.shape) + 1j * rng.standard_normal(geometry.shape)


# acceptance lines, echoed in the terminal summary so they survive output capture
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
