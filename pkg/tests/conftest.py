import numpy as np
import pytest

from sombrero.sat import Assignment, Clause, CnfInstance, generate_usa_instance

# Published 6-variable, 27-clause benchmark formula.  Exhaustive substitution
# confirms exactly one satisfying assignment, (x1..x6) = (0,1,0,1,0,0).  The
# printed formula repeats two clauses, hence allow_duplicate_clauses below.
BENCHMARK6_CLAUSES = [
    (-1, -4, -5), (-2, -3, -4), (1, 2, -5),
    (3, 4, 5), (4, 5, -6), (-1, -3, -5),
    (1, -2, -5), (2, -3, -6), (-1, -2, -6),
    (3, -5, -6), (-1, -2, -4), (2, 3, -4),
    (2, 5, -6), (2, -3, -5), (-2, -3, -4),
    (2, 3, 6), (-1, -2, -3), (-1, -4, -5),
    (-3, -4, -6), (-4, -5, 6), (-2, 3, -6),
    (2, 5, 6), (3, 5, -6), (-1, 3, -6),
    (3, -5, 6), (4, 5, 6), (1, 2, -3),
]

BENCHMARK6_SOLUTION = Assignment.from_bits((0, 1, 0, 1, 0, 0))


@pytest.fixture(scope="session")
def benchmark6() -> CnfInstance:
    clauses = tuple(Clause.from_dimacs(c) for c in BENCHMARK6_CLAUSES)
    return CnfInstance(
        6, clauses,
        unique_solution=BENCHMARK6_SOLUTION,
        allow_duplicate_clauses=True,
    )


@pytest.fixture(scope="session")
def toy3() -> CnfInstance:
    """Seeded 3-variable unique-solution instance (7 distinct clauses rule
    out 7 of the 8 assignments)."""
    rng = np.random.default_rng(314)
    return generate_usa_instance(3, 7, rng)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260824)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion that ran."""
    from .test_acceptance import CRITERIA

    outcomes: dict[str, str] = {}
    for tag, label in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for report in terminalreporter.stats.get(tag, []):
            name = report.nodeid.rsplit("::", 1)[-1]
            if name in CRITERIA and outcomes.get(name) != "FAIL":
                outcomes[name] = label
    if not outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for name, label in CRITERIA.items():
        if name in outcomes:
            terminalreporter.line(f"{label}: {outcomes[name]}")
