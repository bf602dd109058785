import numpy as np
import pytest

from hdx.complex import (
    generate_complete_complex,
    generate_graphic_matroid_bases,
    generate_random_complex,
)


@pytest.fixture(scope="session")
def complete53():
    return generate_complete_complex(5, 3)


@pytest.fixture(scope="session")
def complete64():
    return generate_complete_complex(6, 4)


@pytest.fixture(scope="session")
def triangle_matroid():
    return generate_graphic_matroid_bases([(0, 1), (1, 2), (0, 2)])


@pytest.fixture(scope="session")
def random_d3():
    """Three seeded weighted d=3 complexes on 6 or 7 elements."""
    return [generate_random_complex(6 + (s % 2), 3, np.random.default_rng(100 + s), density=0.6)
            for s in range(3)]


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


# one summary line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
