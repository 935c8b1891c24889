import math

import numpy as np
import pytest
from hypothesis import settings

from amoeba_scope import parse_curve, parse_polynomial

settings.register_profile("default", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("default")


@pytest.fixture(scope="session")
def line():
    return parse_polynomial("1 + z + w")


@pytest.fixture(scope="session")
def hyperbola():
    return parse_polynomial("1/6 + z + w + z*w")


@pytest.fixture(scope="session")
def hyperbola_curve():
    return parse_curve("2; t; -(t + 1/6)/(t + 1)")


@pytest.fixture(scope="session")
def fig1_curve():
    return parse_curve("3; t; t + 1/2; t - 3/2")


@pytest.fixture(scope="session")
def fig2_curve():
    return parse_curve("3; t; t + 1; t - 2i")


@pytest.fixture(scope="session")
def fig1_generators():
    return [parse_polynomial(t, 3) for t in ("z2 - z1 - 1/2", "z3 - z1 + 3/2", "z3 - z2 + 2")]


PINCH_R = 1 / math.sqrt(6)
PINCH_X = np.array([-0.5 * math.log(6), -0.5 * math.log(6)])


# acceptance bookkeeping: one PASS/FAIL line per criterion, repeated in the terminal summary
_ACCEPTANCE: dict = {}


class _Criterion:
    def __init__(self, number: int, title: str):
        self.number = number
        self.title = title
        self.details: list[str] = []

    def note(self, text: str) -> None:
        self.details.append(text)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        status = "PASS" if exc_type is None else "FAIL"
        detail = "; ".join(self.details)
        line = f"criterion {self.number:2d} {status}  {self.title}" + (f"  [{detail}]" if detail else "")
        _ACCEPTANCE[self.number] = line
        print(line)
        return False


@pytest.fixture
def criterion():
    return _Criterion


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[n])
