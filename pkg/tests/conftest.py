from fractions import Fraction

import pytest

from support_lab.ec_core import CurveOverQ, RationalPoint

# Short-model battery (A, B) used for exhaustive checks over small fields.
BATTERY = [(1, 1), (0, 1), (1, 0), (-1, 0), (2, 3), (-3, 5), (0, 7)]


@pytest.fixture(scope="session")
def e37():
    """y^2 + y = x^3 - x with generator (0, 0)."""
    return CurveOverQ(0, 0, 1, -1, 0), RationalPoint(0, 0, 1)


@pytest.fixture(scope="session")
def two_torsion_curve():
    # y^2 = x^3 - 3x^2 - 5x, rank >= 1 with (-1, 1), torsion (0, 0)
    E = CurveOverQ(0, -3, 0, -5, 0)
    return E, RationalPoint(-1, 1, 1), RationalPoint(0, 0, 1)


def frac_point(x, y):
    return RationalPoint.from_affine(Fraction(x), Fraction(y))


# Acceptance verdict lines, printed in the terminal summary.
ACCEPTANCE_LINES: list[str] = []


def record(criterion, ok, detail):
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
