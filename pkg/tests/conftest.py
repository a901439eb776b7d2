import pytest

from geosim import Grid2D, Relationship, RelationshipKind, Rng, VariogramModel, generate_pair


@pytest.fixture(scope="session")
def grid25():
    return Grid2D(25, 25)


@pytest.fixture(scope="session")
def models():
    return VariogramModel.spherical(1.0, 12.0), VariogramModel.exponential(1.0, 6.0)


@pytest.fixture(scope="session")
def pairs(grid25, models):
    """Default seed-42 data for every relationship."""
    mx, my = models
    return {
        rel: generate_pair(grid25, mx, my, RelationshipKind(rel), Rng(42).child("data"))
        for rel in Relationship
    }


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
