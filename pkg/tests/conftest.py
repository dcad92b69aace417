from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import strategies as st

from qwsojourn.algebra import EXACT, ExactComplex, Mat2, grover, hadamard, identity_coin

SMALL = st.fractions(min_value=-5, max_value=5, max_denominator=7)
EXACT_SCALARS = st.builds(ExactComplex.from_parts, SMALL, SMALL, SMALL, SMALL)
EXACT_MATS = st.builds(Mat2, EXACT_SCALARS, EXACT_SCALARS, EXACT_SCALARS, EXACT_SCALARS)

TEST_COINS = {
    "grover": grover(),
    "hadamard": hadamard(),
    "identity": identity_coin(),
}


def random_exact_scalar(rng: random.Random) -> ExactComplex:
    return ExactComplex.from_parts(
        *(Fraction(rng.randint(-9, 9), rng.randint(1, 6)) for _ in range(4))
    )


def random_exact_mat(rng: random.Random) -> Mat2:
    return Mat2(*(random_exact_scalar(rng) for _ in range(4)))


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240611)


@pytest.fixture(params=sorted(TEST_COINS))
def coin_name(request) -> str:
    return request.param


__all__ = ["EXACT", "EXACT_MATS", "EXACT_SCALARS", "TEST_COINS", "random_exact_mat",
           "random_exact_scalar"]


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
