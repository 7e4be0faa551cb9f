import numpy as np
import pytest

from hankel_admm.signal import FOUR_TONE, SampleGrid, synthesize

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def four_tone():
    grid = SampleGrid.unit_interval(160)
    model = FOUR_TONE.sampled(grid)
    return model, grid, synthesize(model, grid)


def random_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
