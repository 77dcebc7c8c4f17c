import pytest

from zero_regrets.game import MAXIMIZE, Constraint, GameInstance, Monomial2, PlayerProgram, QuadraticUtility, VarDomain
from zero_regrets.models import kpg

# lines reported by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def example1():
    return kpg.build_kpg(kpg.example1())


@pytest.fixture
def example2():
    return kpg.build_kpg(kpg.example2())


@pytest.fixture
def unbounded():
    return kpg.build_kpg(kpg.unbounded_price(100))


def matching_pennies() -> GameInstance:
    """Player 1 wants to match, player 2 wants to differ; no pure equilibrium."""
    b = [VarDomain.binary()]
    u1 = QuadraticUtility(MAXIMIZE, [(0, 0, -1), (1, 0, -1)], [Monomial2((0, 0), (1, 0), 2)], 1)
    u2 = QuadraticUtility(MAXIMIZE, [(0, 0, 1), (1, 0, 1)], [Monomial2((0, 0), (1, 0), -2)])
    return GameInstance([PlayerProgram(b, [], u1), PlayerProgram(b, [], u2)], name="pennies")


def single_player(values) -> GameInstance:
    """One player choosing x in [0, len(values)-1] with payoff values[x]
    written as a polynomial through the binary indicator variables."""
    k = len(values)
    u = QuadraticUtility(MAXIMIZE, [(0, j, v) for j, v in enumerate(values)])
    return GameInstance(
        [PlayerProgram([VarDomain.binary()] * k, [Constraint((1,) * k, "=", 1)], u)], name="single"
    )
