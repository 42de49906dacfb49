import numpy as np
import pytest

from adimaxwell.grid import make_grid
from adimaxwell.harness import corner_inclusion_boxes
from adimaxwell.materials import build_material_map, uniform_map


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def grid8():
    return make_grid((8, 8, 8))


@pytest.fixture(scope="session")
def jump_map8(grid8):
    return build_material_map(grid8, corner_inclusion_boxes())


@pytest.fixture(scope="session")
def uniform4():
    return uniform_map(make_grid((4, 4, 4)))


@pytest.fixture(scope="session")
def jump_map_aniso():
    # unequal cell counts and spacings exercise every axis permutation
    return build_material_map(make_grid((6, 8, 4)), corner_inclusion_boxes())


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion."""

    def record(number, title, passed, detail):
        line = f"criterion {number}: " if isinstance(number, int) else f"{number}: "
        status = "MEASURED" if passed is None else ("PASS" if passed else "FAIL")
        line += f"{status}  {title}  [{detail}]"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
