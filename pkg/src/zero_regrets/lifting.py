"""Lifted space: binary expansion of strategies plus linearized products.

Every integer variable ``x = lower + sum_k 2^k b_k`` is encoded by binary
columns ``b_k``.  Each product of two distinct bits gets one auxiliary
column ``z`` tied to its factors by ``z <= a``, ``z <= b``, ``z >= a + b - 1``.
Products are keyed by the canonical (sorted) pair of bit columns, so a
product shared by several utilities gets a single column.  Under these
rows utilities and welfare become linear expressions over the columns.

Models whose payoffs are not polynomial (shared edge costs, market
shares) plug in a custom lift object that registers its own columns and
rows through the same :class:`ModelBuilder`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .errors import InputError, InternalError
from .game import GameInstance, QuadraticUtility, StrategyProfile, Var, check_profile

Evaluator = Callable[[StrategyProfile, list], Fraction]


class LinExpr:
    """Sparse linear expression ``sum coeffs[c] * col_c + const`` with exact coefficients."""

    __slots__ = ("coeffs", "const")

    def __init__(self, coeffs: dict[int, Fraction] | None = None, const=0):
        self.coeffs: dict[int, Fraction] = {}
        self.const = Fraction(const)
        for c, v in (coeffs or {}).items():
            self.add_term(c, v)

    def add_term(self, col: int, coef) -> None:
        v = self.coeffs.get(col, Fraction(0)) + coef
        if v:
            self.coeffs[col] = Fraction(v)
        else:
            self.coeffs.pop(col, None)

    def iadd(self, other: "LinExpr", scale=1) -> "LinExpr":
        for c, v in other.coeffs.items():
            self.add_term(c, v * scale)
        self.const += other.const * scale
        return self

    def copy(self) -> "LinExpr":
        out = LinExpr()
        out.coeffs = dict(self.coeffs)
        out.const = self.const
        return out

    def __add__(self, other: "LinExpr") -> "LinExpr":
        return self.copy().iadd(other)

    def __sub__(self, other: "LinExpr") -> "LinExpr":
        return self.copy().iadd(other, -1)

    def scaled(self, k) -> "LinExpr":
        return LinExpr().iadd(self, k)

    def evaluate(self, values: Sequence) -> Fraction:
        return self.const + sum((v * values[c] for c, v in self.coeffs.items()), Fraction(0))

    def __repr__(self) -> str:
        terms = " + ".join(f"{v}*c{c}" for c, v in sorted(self.coeffs.items()))
        return f"LinExpr({terms or '0'} + {self.const})"


@dataclass(frozen=True)
class Column:
    name: str
    lower: Fraction
    upper: Fraction
    integer: bool = True


@dataclass(frozen=True)
class Row:
    """``sum coef * col  (sense)  rhs`` with integer data."""

    coeffs: tuple[tuple[int, int], ...]
    sense: str
    rhs: int
    tag: str = ""

    def activity(self, values: Sequence) -> Fraction:
        return sum((a * values[c] for c, a in self.coeffs), Fraction(0))

    def satisfied(self, values: Sequence) -> bool:
        lhs = self.activity(values)
        if self.sense == "<=":
            return lhs <= self.rhs
        if self.sense == ">=":
            return lhs >= self.rhs
        return lhs == self.rhs

    def violation(self, values: Sequence) -> Fraction:
        lhs = self.activity(values)
        if self.sense == "<=":
            return max(lhs - self.rhs, Fraction(0))
        if self.sense == ">=":
            return max(self.rhs - lhs, Fraction(0))
        return abs(lhs - self.rhs)


def row_from_expr(expr: LinExpr, sense: str, tag: str = "") -> Row:
    """Turn ``expr (sense) 0`` into an integer row by clearing denominators."""
    scale = 1
    for v in list(expr.coeffs.values()) + [expr.const]:
        scale = math.lcm(scale, v.denominator)
    coeffs = tuple(sorted((c, int(v * scale)) for c, v in expr.coeffs.items()))
    return Row(coeffs, sense, int(-expr.const * scale), tag)


def make_row(coeffs: dict[int, int] | Iterable[tuple[int, int]], sense: str, rhs, tag: str = "") -> Row:
    items = coeffs.items() if isinstance(coeffs, dict) else coeffs
    expr = LinExpr({c: Fraction(v) for c, v in items}, -Fraction(rhs))
    return row_from_expr(expr, sense, tag)


@dataclass(frozen=True)
class BitEncoding:
    nbits: int
    offset: int
    cap: int | None  # bound on sum 2^k b_k when the range is not a power of two


def binary_expand(domain) -> BitEncoding:
    span = domain.upper - domain.lower
    nbits = span.bit_length()
    cap = span if nbits and (span + 1) & span else None
    return BitEncoding(nbits, domain.lower, cap)


class ModelBuilder:
    """Accumulates columns, value evaluators and rows for a lifted model."""

    def __init__(self, start: int = 0):
        self.start = start
        self.columns: list[Column] = []
        self.evaluators: list[Evaluator] = []
        self.rows: list[Row] = []
        self.products: dict[tuple[int, int], int] = {}
        self.frozen = False

    def add_column(self, name: str, lower, upper, integer: bool, evaluator: Evaluator) -> int:
        self.columns.append(Column(name, Fraction(lower), Fraction(upper), integer))
        self.evaluators.append(evaluator)
        return self.start + len(self.columns) - 1

    def add_row(self, row: Row) -> None:
        self.rows.append(row)

    def product(self, c1: int, c2: int) -> int:
        """Column holding ``col c1 * col c2`` for two binary columns."""
        if c1 == c2:
            return c1
        key = (min(c1, c2), max(c1, c2))
        col = self.products.get(key)
        if col is None:
            if self.frozen:
                raise InternalError(f"product {key} was not lifted when the model was built")
            a, b = key
            col = self.add_column(f"z_{a}_{b}", 0, 1, True, lambda prof, vals, a=a, b=b: vals[a] * vals[b])
            self.add_row(make_row({col: 1, a: -1}, "<=", 0, "link"))
            self.add_row(make_row({col: 1, b: -1}, "<=", 0, "link"))
            self.add_row(make_row({col: 1, a: -1, b: -1}, ">=", -1, "link"))
            self.products[key] = col
        return col


@dataclass
class Extension:
    """Columns and rows appended to a model after it was built (e.g. by a cut)."""

    columns: list[Column] = field(default_factory=list)
    evaluators: list[Evaluator] = field(default_factory=list)
    rows: list[Row] = field(default_factory=list)

    @classmethod
    def from_builder(cls, builder: ModelBuilder) -> "Extension":
        return cls(builder.columns, builder.evaluators, builder.rows)


class LiftedModel:
    """The set K: bit columns, product columns, linking rows, player rows,
    and linear utility/welfare expressions.  Treat as read-only once built."""

    def __init__(self, game: GameInstance):
        self.game = game
        self._b = ModelBuilder()
        self.var_bits: dict[Var, tuple[tuple[int, ...], int]] = {}
        self.player_rows: list[list[Row]] = [[] for _ in range(game.n)]
        self.utilities: list[LinExpr] = []
        self.welfare: LinExpr = LinExpr()

    # -- read access
    @property
    def columns(self) -> list[Column]:
        return self._b.columns

    @property
    def rows(self) -> list[Row]:
        return self._b.rows

    @property
    def evaluators(self) -> list[Evaluator]:
        return self._b.evaluators

    @property
    def z_cols(self) -> dict[tuple[int, int], int]:
        return self._b.products

    @property
    def ncols(self) -> int:
        return len(self._b.columns)

    def linking_rows(self) -> list[Row]:
        return [r for r in self.rows if r.tag == "link"]

    def x_expr(self, p: int, j: int) -> LinExpr:
        bits, offset = self.var_bits[(p, j)]
        return LinExpr({c: Fraction(2**k) for k, c in enumerate(bits)}, offset)

    def x_col(self, p: int, j: int) -> int:
        """The single column of a binary variable."""
        bits, offset = self.var_bits[(p, j)]
        if len(bits) != 1 or offset != 0:
            raise InputError(f"variable ({p}, {j}) is not binary")
        return bits[0]

    def player_columns(self, i: int) -> list[int]:
        return [c for j in range(self.game.players[i].m) for c in self.var_bits[(i, j)][0]]

    def bit_columns(self) -> list[int]:
        return [c for i in range(self.game.n) for c in self.player_columns(i)]

    def product(self, c1: int, c2: int) -> int:
        return self._b.product(c1, c2)

    # -- polynomial lifting
    def lift_polynomial(self, linear, quadratic, constant=0, fixed: dict[int, tuple[int, ...]] | None = None) -> LinExpr:
        """Linearize a degree-2 polynomial.  Players listed in ``fixed``
        are replaced by the given strategies before lifting."""
        fixed = fixed or {}

        def factor(p: int, j: int) -> LinExpr:
            if p in fixed:
                return LinExpr(const=fixed[p][j])
            return self.x_expr(p, j)

        out = LinExpr(const=constant)
        for p, j, c in linear:
            out.iadd(factor(p, j), c)
        for mono in quadratic:
            fa, fb = factor(*mono.a), factor(*mono.b)
            out.const += mono.coefficient * fa.const * fb.const
            for c, v in fa.coeffs.items():
                out.add_term(c, mono.coefficient * v * fb.const)
            for c, v in fb.coeffs.items():
                out.add_term(c, mono.coefficient * v * fa.const)
            for ca, va in fa.coeffs.items():
                for cb, vb in fb.coeffs.items():
                    out.add_term(self._b.product(ca, cb), mono.coefficient * va * vb)
        return out

    # -- points
    def induce(self, profile: Sequence[Sequence[int]]) -> list[Fraction]:
        """Full column assignment induced by a strategy profile."""
        profile = check_profile(self.game, profile)
        values: list = []
        for ev in self.evaluators:
            values.append(ev(profile, values))
        return values

    def decode(self, values: Sequence) -> StrategyProfile:
        out = []
        for i, pl in enumerate(self.game.players):
            x = []
            for j in range(pl.m):
                bits, offset = self.var_bits[(i, j)]
                x.append(offset + sum(int(values[c]) << k for k, c in enumerate(bits)))
            out.append(tuple(x))
        return tuple(out)

    def deviation(self, i: int, xhat: Sequence[int], start: int) -> tuple[LinExpr, Extension | None]:
        """Linear expression of ``u^i(xhat, x^{-i})`` over the lifted columns.

        Custom lifts may need extra columns for it; those are numbered from
        ``start`` and returned as an :class:`Extension`.
        """
        utility = self.game.players[i].utility
        if getattr(utility, "polynomial", False):
            self._b.frozen = True
            expr = self.lift_polynomial(utility.linear, utility.quadratic, utility.constant, {i: tuple(xhat)})
            return expr, None
        return self.game.custom_lift.deviation(self, i, tuple(xhat), start)

    def to_lp_text(self, objective: str = "welfare") -> str:
        from .backend import lp_text

        if objective == "welfare":
            expr, sense = self.welfare, self.game.sense
        else:
            expr, sense = self.utilities[int(objective)], self.game.sense
        return lp_text(self.columns, self.rows, expr, sense)


def _bit_evaluator(p: int, j: int, k: int, offset: int) -> Evaluator:
    return lambda prof, vals: Fraction(((prof[p][j] - offset) >> k) & 1)


def build_lifted_model(game: GameInstance, custom=None) -> LiftedModel:
    """Build K for ``game``.  ``custom`` defaults to ``game.custom_lift``."""
    custom = custom if custom is not None else game.custom_lift
    model = LiftedModel(game)
    b = model._b
    for i, pl in enumerate(game.players):
        for j, dom in enumerate(pl.domains):
            enc = binary_expand(dom)
            bits = tuple(
                b.add_column(f"x{i}_{j}_b{k}", 0, 1, True, _bit_evaluator(i, j, k, enc.offset))
                for k in range(enc.nbits)
            )
            model.var_bits[(i, j)] = (bits, enc.offset)
            if enc.cap is not None:
                b.add_row(make_row({c: 2**k for k, c in enumerate(bits)}, "<=", enc.cap, "cap"))
        for r, con in enumerate(pl.constraints):
            expr = LinExpr()
            for j, a in enumerate(con.coeffs):
                if a:
                    expr.iadd(model.x_expr(i, j), a)
            expr.const -= con.rhs
            row = row_from_expr(expr, con.sense, f"player{i}")
            b.add_row(row)
            model.player_rows[i].append(row)

    custom_utils: dict[int, LinExpr] = {}
    if custom is not None:
        custom_utils = custom.build(model, b)
    for i, pl in enumerate(game.players):
        if i in custom_utils:
            model.utilities.append(custom_utils[i])
        elif getattr(pl.utility, "polynomial", False):
            u = pl.utility
            model.utilities.append(model.lift_polynomial(u.linear, u.quadratic, u.constant))
        else:
            raise InputError(f"player {i} has a non-polynomial utility and no custom lift covers it")
    if game.welfare_form == "sum":
        model.welfare = LinExpr()
        for u in model.utilities:
            model.welfare.iadd(u)
    else:
        w: QuadraticUtility = game.welfare_form
        model.welfare = model.lift_polynomial(w.linear, w.quadratic, w.constant)
    b.frozen = True
    return model


def evaluate_induced_z(model: LiftedModel, profile) -> list[Fraction]:
    return model.induce(profile)
