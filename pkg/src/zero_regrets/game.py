"""Integer programming game data model, payoff and welfare evaluation.

A game is a tuple of player programs.  Player ``i`` controls ``m`` bounded
integer variables subject to linear integer constraints, and evaluates a
utility that may depend on every player's variables.  All arithmetic on
payoffs is exact (``fractions.Fraction``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable, Sequence

from .errors import InputError, InternalError

MAXIMIZE = "maximize"
MINIMIZE = "minimize"
SENSES = (MAXIMIZE, MINIMIZE)
ROW_SENSES = ("<=", "=", ">=")

_INT64 = 2**63
_RANGE_BITS = 62

Var = tuple[int, int]
StrategyProfile = tuple[tuple[int, ...], ...]


def as_fraction(value: Any) -> Fraction:
    """Parse an exact rational from an int, Fraction, ``"a/b"`` string,
    ``[num, den]`` pair or float (taken at its shortest decimal repr)."""
    if isinstance(value, Fraction):
        q = value
    elif isinstance(value, bool):
        raise InputError(f"not a number: {value!r}")
    elif isinstance(value, int):
        q = Fraction(value)
    elif isinstance(value, float):
        q = Fraction(repr(value))
    elif isinstance(value, str):
        try:
            q = Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"not a rational: {value!r}") from exc
    elif isinstance(value, (list, tuple)) and len(value) == 2:
        num, den = value
        if int(den) == 0:
            raise InputError("zero denominator")
        q = Fraction(int(num), int(den))
    else:
        raise InputError(f"not a rational: {value!r}")
    if abs(q.numerator) >= _INT64 or q.denominator >= _INT64:
        raise InputError(f"coefficient {q} does not fit 64-bit numerator/denominator")
    return q


def as_int(value: Any, what: str = "value") -> int:
    if isinstance(value, bool):
        raise InputError(f"{what} must be an integer, got {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    if isinstance(value, Fraction) and value.denominator == 1:
        return int(value)
    raise InputError(f"{what} must be an integer, got {value!r}")


def gain(sense: str, value: Fraction) -> Fraction:
    """Orient a utility so that larger is always better."""
    return value if sense == MAXIMIZE else -value


@dataclass(frozen=True)
class VarDomain:
    lower: int
    upper: int
    kind: str = "integer"

    def __post_init__(self) -> None:
        if self.kind not in ("binary", "integer"):
            raise InputError(f"unknown variable kind {self.kind!r}")
        if self.kind == "binary" and (self.lower, self.upper) != (0, 1):
            raise InputError("binary variables have domain [0, 1]")
        if self.lower > self.upper:
            raise InputError(f"empty domain [{self.lower}, {self.upper}]")
        if (self.upper - self.lower).bit_length() > _RANGE_BITS:
            raise InputError("domain range exceeds 62 bits")

    @classmethod
    def binary(cls) -> "VarDomain":
        return cls(0, 1, "binary")

    def __contains__(self, v: int) -> bool:
        return self.lower <= v <= self.upper

    @property
    def size(self) -> int:
        return self.upper - self.lower + 1


@dataclass(frozen=True)
class Constraint:
    coeffs: tuple[int, ...]
    sense: str
    rhs: int

    def __post_init__(self) -> None:
        if self.sense not in ROW_SENSES:
            raise InputError(f"unknown constraint sense {self.sense!r}")

    def satisfied(self, x: Sequence[int]) -> bool:
        lhs = sum(a * v for a, v in zip(self.coeffs, x))
        if self.sense == "<=":
            return lhs <= self.rhs
        if self.sense == ">=":
            return lhs >= self.rhs
        return lhs == self.rhs


@dataclass(frozen=True)
class Monomial2:
    """``coefficient * x[a] * x[b]`` with ``a <= b`` lexicographically."""

    a: Var
    b: Var
    coefficient: Fraction

    def __post_init__(self) -> None:
        a, b = tuple(self.a), tuple(self.b)
        if b < a:
            a, b = b, a
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "coefficient", as_fraction(self.coefficient))


@dataclass(frozen=True)
class QuadraticUtility:
    """Polynomial utility of degree at most two over all players' variables."""

    sense: str
    linear: tuple[tuple[int, int, Fraction], ...] = ()
    quadratic: tuple[Monomial2, ...] = ()
    constant: Fraction = Fraction(0)
    polynomial = True

    def __post_init__(self) -> None:
        if self.sense not in SENSES:
            raise InputError(f"unknown utility sense {self.sense!r}")
        lin = tuple((int(p), int(j), as_fraction(c)) for p, j, c in self.linear)
        quad = tuple(
            q if isinstance(q, Monomial2) else Monomial2(q[0], q[1], q[2]) for q in self.quadratic
        )
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "quadratic", quad)
        object.__setattr__(self, "constant", as_fraction(self.constant))

    def variables(self) -> Iterable[Var]:
        for p, j, _ in self.linear:
            yield (p, j)
        for mono in self.quadratic:
            yield mono.a
            yield mono.b

    def evaluate(self, profile: StrategyProfile) -> Fraction:
        total = self.constant
        for p, j, c in self.linear:
            total += c * profile[p][j]
        for mono in self.quadratic:
            total += mono.coefficient * profile[mono.a[0]][mono.a[1]] * profile[mono.b[0]][mono.b[1]]
        return total


@dataclass(frozen=True)
class PlayerProgram:
    domains: tuple[VarDomain, ...]
    constraints: tuple[Constraint, ...]
    utility: Any

    def __post_init__(self) -> None:
        object.__setattr__(self, "domains", tuple(self.domains))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        for row in self.constraints:
            if len(row.coeffs) != self.m:
                raise InputError(
                    f"constraint has {len(row.coeffs)} coefficients for {self.m} variables"
                )

    @property
    def m(self) -> int:
        return len(self.domains)


@dataclass(frozen=True, eq=False)
class GameInstance:
    """An immutable integer programming game.

    ``welfare`` is ``"sum"`` (sum of utilities) or a ``QuadraticUtility``.
    Models whose utilities are not polynomial attach a ``custom_lift``;
    ``strategic`` optionally produces problem-specific equilibrium cuts
    for a lifted model.
    """

    players: tuple[PlayerProgram, ...]
    welfare_form: Any = "sum"
    name: str = ""
    custom_lift: Any = None
    strategic: Callable | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "players", tuple(self.players))
        if not self.players:
            raise InputError("a game needs at least one player")
        senses = {pl.utility.sense for pl in self.players}
        if len(senses) != 1:
            raise InputError("all players must share the same optimization sense")
        if self.welfare_form != "sum":
            if not isinstance(self.welfare_form, QuadraticUtility):
                raise InputError("welfare must be 'sum' or a polynomial utility")
            if self.welfare_form.sense != self.sense:
                raise InputError("welfare sense must match the players' sense")
        for i, pl in enumerate(self.players):
            if getattr(pl.utility, "polynomial", False):
                self._check_vars(pl.utility.variables(), f"utility of player {i}")
        if isinstance(self.welfare_form, QuadraticUtility):
            self._check_vars(self.welfare_form.variables(), "welfare")

    def _check_vars(self, variables: Iterable[Var], what: str) -> None:
        for p, j in variables:
            if not (0 <= p < self.n and 0 <= j < self.players[p].m):
                raise InputError(f"{what} references unknown variable ({p}, {j})")

    @property
    def n(self) -> int:
        return len(self.players)

    @property
    def sense(self) -> str:
        return self.players[0].utility.sense

    def dims(self) -> tuple[int, ...]:
        return tuple(pl.m for pl in self.players)


def check_profile(game: GameInstance, profile: Sequence[Sequence[int]]) -> StrategyProfile:
    """Validate dimensions and normalize a profile to nested int tuples."""
    if len(profile) != game.n:
        raise InputError(f"profile has {len(profile)} strategies for {game.n} players")
    out = []
    for i, (x, pl) in enumerate(zip(profile, game.players)):
        if len(x) != pl.m:
            raise InputError(f"player {i} strategy has length {len(x)}, expected {pl.m}")
        out.append(tuple(as_int(v, "strategy entry") for v in x))
    return tuple(out)


def is_feasible(game: GameInstance, i: int, x: Sequence[int]) -> bool:
    pl = game.players[i]
    if len(x) != pl.m:
        raise InputError(f"player {i} strategy has length {len(x)}, expected {pl.m}")
    if any(v not in dom for v, dom in zip(x, pl.domains)):
        return False
    return all(row.satisfied(x) for row in pl.constraints)


def payoff(game: GameInstance, i: int, profile: Sequence[Sequence[int]]) -> Fraction:
    profile = check_profile(game, profile)
    return game.players[i].utility.evaluate(profile)


def welfare(game: GameInstance, profile: Sequence[Sequence[int]]) -> Fraction:
    profile = check_profile(game, profile)
    if game.welfare_form == "sum":
        return sum((pl.utility.evaluate(profile) for pl in game.players), Fraction(0))
    return game.welfare_form.evaluate(profile)


def regret(game: GameInstance, i: int, profile: Sequence[Sequence[int]], best_value: Fraction) -> Fraction:
    """Best-response value minus current payoff, oriented so it is >= 0."""
    r = gain(game.sense, Fraction(best_value) - payoff(game, i, profile))
    if r < 0:
        raise InternalError(f"best_value {best_value} is worse than the current payoff of player {i}")
    return r


def replace_strategy(profile: StrategyProfile, i: int, x: Sequence[int]) -> StrategyProfile:
    return profile[:i] + (tuple(x),) + profile[i + 1 :]


# ---------------------------------------------------------------- JSON schema

def _utility_to_dict(u: QuadraticUtility) -> dict:
    def frac(q: Fraction) -> list[int]:
        return [q.numerator, q.denominator]

    return {
        "sense": u.sense,
        "linear": [[p, j, *frac(c)] for p, j, c in u.linear],
        "quadratic": [[*m.a, *m.b, *frac(m.coefficient)] for m in u.quadratic],
        "constant": frac(u.constant),
    }


def _utility_from_dict(d: dict) -> QuadraticUtility:
    try:
        linear = [(e[0], e[1], Fraction(int(e[2]), int(e[3]) if len(e) > 3 else 1)) for e in d.get("linear", [])]
        quad = [
            Monomial2((e[0], e[1]), (e[2], e[3]), Fraction(int(e[4]), int(e[5]) if len(e) > 5 else 1))
            for e in d.get("quadratic", [])
        ]
        return QuadraticUtility(d["sense"], tuple(linear), tuple(quad), as_fraction(d.get("constant", 0)))
    except (KeyError, IndexError, TypeError, ZeroDivisionError) as exc:
        raise InputError(f"malformed utility: {exc}") from exc


def game_to_dict(game: GameInstance) -> dict:
    if game.custom_lift is not None:
        raise InputError("games with custom lifts are serialized through their model schema")
    players = []
    for pl in game.players:
        players.append(
            {
                "m": pl.m,
                "domains": [{"lb": d.lower, "ub": d.upper, "kind": d.kind} for d in pl.domains],
                "constraints": [
                    {"coeffs": list(r.coeffs), "sense": r.sense, "rhs": r.rhs} for r in pl.constraints
                ],
                "utility": _utility_to_dict(pl.utility),
            }
        )
    welfare_out: Any = "sum" if game.welfare_form == "sum" else _utility_to_dict(game.welfare_form)
    return {"type": "game", "n": game.n, "players": players, "welfare": welfare_out}


def game_from_dict(data: dict, name: str = "") -> GameInstance:
    try:
        players = []
        for k, pd in enumerate(data["players"]):
            domains = tuple(
                VarDomain(as_int(d["lb"], "lb"), as_int(d["ub"], "ub"), d.get("kind", "integer"))
                for d in pd["domains"]
            )
            if "m" in pd and as_int(pd["m"], "m") != len(domains):
                raise InputError(f"player {k}: m={pd['m']} but {len(domains)} domains given")
            rows = tuple(
                Constraint(tuple(as_int(c, "coefficient") for c in r["coeffs"]), r["sense"], as_int(r["rhs"], "rhs"))
                for r in pd.get("constraints", [])
            )
            players.append(PlayerProgram(domains, rows, _utility_from_dict(pd["utility"])))
        if "n" in data and as_int(data["n"], "n") != len(players):
            raise InputError(f"n={data['n']} but {len(players)} players given")
        w = data.get("welfare", "sum")
        welfare_form = "sum" if w == "sum" else _utility_from_dict(w)
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed game: missing or invalid field {exc}") from exc
    return GameInstance(tuple(players), welfare_form, name=name)
