"""Pure Nash equilibria of integer programming games by equilibrium cutting planes."""

from .errors import BackendError, InputError, InternalError, NumericalError, OracleTimeout, ZeroRegretsError
from .game import MAXIMIZE, MINIMIZE, GameInstance, payoff, welfare
from .master import SolveConfig, SolveReport, enumerate_pnes, epsilon_pne, select_best_pne

__version__ = "0.1.0"
