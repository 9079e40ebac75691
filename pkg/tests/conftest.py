import numpy as np
import pytest

from altnash import BimatrixGame, normalize_game

CRITERIA_LINES = []


def random_game(rng: np.random.Generator, m: int, n: int = None, normalized: bool = True) -> BimatrixGame:
    n = m if n is None else n
    G = BimatrixGame(rng.random((m, n)), rng.random((m, n)))
    return normalize_game(G) if normalized else G


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA_LINES:
            terminalreporter.write_line(line)
