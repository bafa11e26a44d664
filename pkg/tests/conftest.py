from functools import lru_cache

import numpy as np
import pytest

from pluripot import build_cone, classify_nodes, lattice_for_domain, make_domain


@lru_cache(maxsize=None)
def grid(name: str, h: float, **kw):
    """Cached (domain, lattice, mask, cone) for a zoo domain."""
    dom = make_domain(name)
    lat = lattice_for_domain(dom, h, node_cap=kw.get("node_cap"))
    mask = classify_nodes(lat, dom)
    cone = build_cone(lat, mask)
    return dom, lat, mask, cone


@pytest.fixture(scope="session")
def disk01():
    return grid("unit_disk", 0.1)


@pytest.fixture(scope="session")
def disk005():
    return grid("unit_disk", 0.05)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
