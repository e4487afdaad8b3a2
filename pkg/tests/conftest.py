import numpy as np
import pytest

from sdsimat.pilots import PilotPattern, load_base_cds

CDS_91_10 = (1, 3, 7, 8, 19, 22, 32, 55, 64, 72)


@pytest.fixture
def rng():
    return np.random.default_rng(20221)


@pytest.fixture
def cds91():
    return PilotPattern(91, CDS_91_10)


@pytest.fixture(scope="session")
def cds2257():
    return load_base_cds(2257, 48)


def dft_entry(n_total, k, l):
    """Reference DFT kernel evaluated with Python complex arithmetic."""
    import cmath

    return cmath.exp(-2j * cmath.pi * k * l / n_total)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
