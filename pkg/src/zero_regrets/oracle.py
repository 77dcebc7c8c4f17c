"""Equilibrium separation: best responses and violated equilibrium inequalities.

For a candidate profile, each player's best response against the fixed
opponents is computed on the lifted model with the opponents' columns
pinned.  A player with positive regret yields the inequality
``u^i(xhat^i, x^{-i}) <= u^i(x^i, x^{-i})`` written over lifted columns.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .backend import INFEASIBLE, OPTIMAL, SolverModel
from .errors import InputError, InternalError, OracleTimeout
from .game import MAXIMIZE, GameInstance, StrategyProfile, gain, replace_strategy
from .lifting import Extension, LiftedModel, Row, row_from_expr

GENERAL = "general"
DOMINANCE = "dominance"
PAYOFF = "payoff"
NOGOOD = "nogood"
EPSILON = "epsilon"


@dataclass
class EquilibriumCut:
    player: int | None
    deviation: tuple[int, ...] | None
    row: Row
    provenance: str = GENERAL
    extension: Extension | None = None

    @property
    def valid(self) -> bool:
        """No-good rows deliberately remove equilibria; everything else is valid."""
        return self.provenance != NOGOOD

    def to_dict(self) -> dict:
        return {
            "player": self.player,
            "deviation": None if self.deviation is None else list(self.deviation),
            "provenance": self.provenance,
            "row": {"coeffs": [list(t) for t in self.row.coeffs], "sense": self.row.sense, "rhs": self.row.rhs},
            "extra_columns": 0 if self.extension is None else len(self.extension.columns),
        }


@dataclass(frozen=True)
class Tolerance:
    """How much regret a player may keep.

    ``exact``: none.  ``abs``: at most ``value``; cuts carry the constant,
    or the column ``column`` when epsilon is a decision variable.
    ``rel``: payoff at least ``value`` times the best-response payoff.
    """

    kind: str = "exact"
    value: Fraction = Fraction(0)
    column: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("exact", "abs", "rel"):
            raise InputError(f"unknown tolerance kind {self.kind!r}")
        object.__setattr__(self, "value", Fraction(self.value))
        if self.value < 0:
            raise InputError("epsilon must be nonnegative")


EXACT = Tolerance()


@dataclass
class SeparationResult:
    is_equilibrium: bool
    profile: StrategyProfile
    cuts: list[EquilibriumCut] = field(default_factory=list)
    payoffs: list[Fraction] = field(default_factory=list)
    best_values: list[Fraction | None] = field(default_factory=list)
    best_responses: list[tuple[int, ...] | None] = field(default_factory=list)

    sense: str = MAXIMIZE

    @property
    def regrets(self) -> list[Fraction | None]:
        return [
            None if b is None else gain(self.sense, b - p) for b, p in zip(self.best_values, self.payoffs)
        ]


class Oracle:
    """Best-response solver and cut generator bound to one lifted model."""

    def __init__(self, game: GameInstance, lifted: LiftedModel, backend: str | None = None, workers: int = 1):
        self.game = game
        self.lifted = lifted
        self.backend = backend
        self.workers = max(1, int(workers))
        self._models: dict[int, SolverModel] = {}
        self.solves = 0

    def _subproblem(self, i: int) -> SolverModel:
        model = self._models.get(i)
        if model is None:
            model = SolverModel(self.lifted.columns, self.lifted.rows, self.backend, name=f"best_response{i}")
            model.set_objective(self.lifted.utilities[i], self.game.sense)
            self._models[i] = model
        return model

    def best_response(self, i: int, profile: StrategyProfile, time_limit: float | None = None) -> tuple[tuple[int, ...], Fraction]:
        """A best response of player ``i`` to the opponents in ``profile``
        and its exact payoff."""
        model = self._subproblem(i)
        fixed = {}
        base = self.lifted.induce(profile)
        for k in range(self.game.n):
            if k != i:
                for c in self.lifted.player_columns(k):
                    fixed[c] = int(base[c])
        self.solves += 1
        out = model.solve(time_limit, fixed=fixed)
        if out.status == INFEASIBLE:
            raise InputError(f"player {i} has no feasible strategy against the given opponents")
        if out.status != OPTIMAL:
            raise OracleTimeout(f"best response of player {i} hit the time limit")
        xhat = self.lifted.decode(out.values)[i]
        value = self.game.players[i].utility.evaluate(replace_strategy(profile, i, xhat))
        return xhat, value

    def cut_for(self, i: int, xhat: Sequence[int], start: int, tol: Tolerance = EXACT) -> EquilibriumCut:
        """The equilibrium inequality induced by deviation ``xhat`` of player ``i``."""
        dev, ext = self.lifted.deviation(i, xhat, start)
        own = self.lifted.utilities[i]
        if tol.kind == "rel":
            if self.game.sense != MAXIMIZE:
                raise InputError("relative epsilon is only defined for maximization games")
            expr = own - dev.scaled(tol.value)
        else:
            expr = own - dev if self.game.sense == MAXIMIZE else dev - own
            if tol.kind == "abs":
                if tol.column is not None:
                    expr.add_term(tol.column, 1)
                else:
                    expr.const += tol.value
        provenance = GENERAL if tol.kind == "exact" else EPSILON
        return EquilibriumCut(i, tuple(xhat), row_from_expr(expr, ">=", provenance), provenance, ext)

    def separate(
        self,
        profile: StrategyProfile,
        values: Sequence[Fraction] | None = None,
        tol: Tolerance = EXACT,
        threshold: Fraction | None = None,
        batch: str = "all",
        time_limit: float | None = None,
    ) -> SeparationResult:
        """Run the oracle on ``profile``.

        ``values`` is the exact lifted point the cuts must cut off (defaults
        to the point induced on the base model).  ``threshold`` overrides the
        regret a player may keep before a cut is emitted (used when epsilon
        is a decision variable).
        """
        if values is None:
            values = self.lifted.induce(profile)
        values = list(values)
        sense = self.game.sense
        n = self.game.n
        payoffs = [self.game.players[i].utility.evaluate(profile) for i in range(n)]

        def respond(i: int):
            return self.best_response(i, profile, time_limit)

        if self.workers > 1 and n > 1:
            with ThreadPoolExecutor(max_workers=min(self.workers, n)) as pool:
                responses = list(pool.map(respond, range(n)))
        else:
            responses = []
            for i in range(n):
                responses.append(respond(i))
                if batch == "one" and self._violates(i, responses[-1][1], payoffs[i], tol, threshold):
                    break

        result = SeparationResult(True, profile, sense=sense)
        result.payoffs = payoffs
        result.best_values = [None] * n
        result.best_responses = [None] * n
        for i, (xhat, value) in enumerate(responses):
            result.best_values[i] = value
            result.best_responses[i] = xhat
            if batch == "one" and result.cuts:
                continue
            if not self._violates(i, value, payoffs[i], tol, threshold):
                continue
            cut = self.cut_for(i, xhat, len(values), tol)
            if cut.extension is not None:
                values = extend_values(cut.extension, profile, values)
            if cut.row.satisfied(values):
                raise InternalError(f"equilibrium cut of player {i} does not cut off the incumbent")
            result.cuts.append(cut)
        result.is_equilibrium = not result.cuts
        return result

    def _violates(self, i: int, best: Fraction, current: Fraction, tol: Tolerance, threshold) -> bool:
        sense = self.game.sense
        if tol.kind == "rel":
            if best < 0:
                raise InputError(f"relative epsilon needs nonnegative best-response values (player {i}: {best})")
            return tol.value * best > current
        slack = threshold if threshold is not None else (tol.value if tol.kind == "abs" else Fraction(0))
        return gain(sense, best - current) > slack


def extend_values(ext: Extension, profile: StrategyProfile, values: Sequence) -> list:
    """Append the exact values of an extension's columns to ``values``."""
    out = list(values)
    for ev in ext.evaluators:
        out.append(ev(profile, out))
    return out


def best_response(game: GameInstance, lifted: LiftedModel, i: int, profile, time_limit=None, backend=None):
    return Oracle(game, lifted, backend).best_response(i, profile, time_limit)


def separate(game: GameInstance, lifted: LiftedModel, profile, tol: Tolerance = EXACT, **kwargs) -> SeparationResult:
    return Oracle(game, lifted).separate(profile, tol=tol, **kwargs)
