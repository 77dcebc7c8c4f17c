"""Competitive facility location with discrete designs.

Player ``i`` opens at most one design ``r`` per location ``l`` within its
budget and captures from customer ``j`` the share

    sum_lr u^i_ljr x^i_lr / (u0_j + sum_k sum_lr u^k_ljr x^k_lr)

of the demand ``w_j``.  ``u0_j > 0`` is the customers' outside option and
keeps every denominator positive.

Lift: a continuous column ``s^i_j`` in [0, 1] per (player, customer) with
``u0_j s + sum_k u^k (s * x^k) = sum u^i x^i``; each product of the share
with a binary gets its own column under McCormick rows, which are exact
whenever the binary is 0 or 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..errors import InputError
from ..game import MAXIMIZE, Constraint, GameInstance, PlayerProgram, VarDomain, as_fraction, as_int
from ..lifting import Extension, LinExpr, LiftedModel, ModelBuilder, make_row, row_from_expr


@dataclass
class CfldInstance:
    L: int
    J: int
    R: list[int]  # designs per location
    w: list[Fraction]
    u: list  # u[i][l][j][r]
    f: list  # f[i][l][r]
    B: list[int]
    u0: list[Fraction]
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.L, self.J = as_int(self.L, "L"), as_int(self.J, "J")
        if isinstance(self.R, int):
            self.R = [self.R] * self.L
        self.R = [as_int(r, "R") for r in self.R]
        if len(self.R) != self.L:
            raise InputError("R must list the designs of every location")
        self.w = [as_fraction(v) for v in self.w]
        if isinstance(self.u0, (int, str, Fraction)):
            self.u0 = [self.u0] * self.J
        self.u0 = [as_fraction(v) for v in self.u0]
        self.B = [as_int(v, "budget") for v in self.B]
        n = len(self.B)
        if n < 1:
            raise InputError("facility location needs at least one player")
        if len(self.w) != self.J or len(self.u0) != self.J:
            raise InputError("w and u0 need one entry per customer")
        if any(v <= 0 for v in self.u0):
            raise InputError("the outside option u0 must be positive for every customer")
        if any(v < 0 for v in self.w):
            raise InputError("demands must be nonnegative")
        try:
            self.u = [
                [[[as_fraction(self.u[i][l][j][r]) for r in range(self.R[l])] for j in range(self.J)] for l in range(self.L)]
                for i in range(n)
            ]
            self.f = [[[as_int(self.f[i][l][r], "fixed cost") for r in range(self.R[l])] for l in range(self.L)] for i in range(n)]
        except (IndexError, TypeError):
            raise InputError("u must be n x L x J x R_l and f must be n x L x R_l") from None
        if any(v < 0 for ui in self.u for ul in ui for uj in ul for v in uj):
            raise InputError("utilities must be nonnegative")

    @property
    def n(self) -> int:
        return len(self.B)

    @property
    def designs(self) -> list[tuple[int, int]]:
        """(location, design) pairs in variable order."""
        return [(l, r) for l in range(self.L) for r in range(self.R[l])]

    def attraction(self, i: int, x, j: int) -> Fraction:
        return sum((self.u[i][l][j][r] * x[k] for k, (l, r) in enumerate(self.designs)), Fraction(0))

    def share(self, i: int, profile, j: int) -> Fraction:
        total = self.u0[j] + sum(self.attraction(k, profile[k], j) for k in range(self.n))
        return self.attraction(i, profile[i], j) / total

    def payoff(self, i: int, profile) -> Fraction:
        return sum((self.w[j] * self.share(i, profile, j) for j in range(self.J)), Fraction(0))

    def to_dict(self) -> dict:
        fr = lambda q: str(q) if q.denominator != 1 else q.numerator  # noqa: E731
        return {
            "type": "cfld", "L": self.L, "J": self.J, "R": self.R,
            "w": [fr(v) for v in self.w],
            "u": [[[[fr(v) for v in uj] for uj in ul] for ul in ui] for ui in self.u],
            "f": self.f, "B": self.B, "u0": [fr(v) for v in self.u0],
        }

    @classmethod
    def from_dict(cls, d: dict, name: str = "") -> "CfldInstance":
        try:
            return cls(d["L"], d["J"], d["R"], d["w"], d["u"], d["f"], d["B"], d.get("u0", 1), name)
        except KeyError as exc:
            raise InputError(f"facility location instance is missing field {exc}") from None


class ShareUtility:
    polynomial = False
    sense = MAXIMIZE

    def __init__(self, inst: CfldInstance, i: int):
        self.inst = inst
        self.i = i

    def evaluate(self, profile) -> Fraction:
        return self.inst.payoff(self.i, profile)


def _share_rows(b: ModelBuilder, s: int, u0: Fraction, terms, rhs: LinExpr, tag: str):
    """Rows of ``u0 * s + sum coef * (s * x_col) = rhs`` with a McCormick
    column per product.  ``terms`` lists (x_col, coef)."""
    expr = LinExpr({s: u0})
    for col, coef in terms:
        y = b.add_column(f"{tag}_x{col}", 0, 1, False, lambda prof, vals, s=s, col=col: vals[s] * vals[col])
        b.add_row(make_row({y: 1, col: -1}, "<=", 0, "link"))
        b.add_row(make_row({y: 1, s: -1}, "<=", 0, "link"))
        b.add_row(make_row({y: 1, s: -1, col: -1}, ">=", -1, "link"))
        expr.add_term(y, coef)
    b.add_row(row_from_expr(expr - rhs, "=", "share"))


class ShareLift:
    def __init__(self, inst: CfldInstance):
        self.inst = inst
        self.s: dict[tuple[int, int], int] = {}

    def _attraction_terms(self, model: LiftedModel, players, j: int):
        inst = self.inst
        return [
            (model.x_col(k, v), inst.u[k][l][j][r])
            for k in players
            for v, (l, r) in enumerate(inst.designs)
            if inst.u[k][l][j][r]
        ]

    def build(self, model: LiftedModel, b: ModelBuilder) -> dict[int, LinExpr]:
        inst = self.inst
        everyone = range(inst.n)
        out = {}
        for i in everyone:
            expr = LinExpr()
            for j in range(inst.J):
                s = b.add_column(f"s{i}_{j}", 0, 1, False, lambda prof, vals, i=i, j=j: inst.share(i, prof, j))
                self.s[(i, j)] = s
                own = LinExpr({c: a for c, a in self._attraction_terms(model, [i], j)})
                _share_rows(b, s, inst.u0[j], self._attraction_terms(model, everyone, j), own, f"y{i}_{j}")
                expr.add_term(s, inst.w[j])
            out[i] = expr
        return out

    def deviation(self, model: LiftedModel, i: int, xhat, start: int):
        """Shares of ``xhat`` against free opponents need fresh columns."""
        inst = self.inst
        b = ModelBuilder(start)
        opponents = [k for k in range(inst.n) if k != i]
        expr = LinExpr()
        for j in range(inst.J):
            a = inst.attraction(i, xhat, j)
            if not a:
                continue

            def value(prof, vals, j=j, a=a):
                rest = sum(inst.attraction(k, prof[k], j) for k in opponents)
                return a / (inst.u0[j] + a + rest)

            t = b.add_column(f"dev{i}_{j}", 0, 1, False, value)
            _share_rows(b, t, inst.u0[j] + a, self._attraction_terms(model, opponents, j), LinExpr(const=a), f"dy{i}_{j}_{start}")
            expr.add_term(t, inst.w[j])
        ext = Extension.from_builder(b) if b.columns else None
        return expr, ext


def build_cfld(inst: CfldInstance) -> GameInstance:
    players = []
    designs = inst.designs
    for i in range(inst.n):
        rows = [Constraint(tuple(inst.f[i][l][r] for l, r in designs), "<=", inst.B[i])]
        for loc in range(inst.L):
            rows.append(Constraint(tuple(int(l == loc) for l, _ in designs), "<=", 1))
        players.append(PlayerProgram([VarDomain.binary()] * len(designs), rows, ShareUtility(inst, i)))
    return GameInstance(players, name=inst.name, custom_lift=ShareLift(inst), meta={"model": "cfld", "instance": inst})


def generate_cfld(n: int = 2, L: int = 3, J: int = 3, R: int = 1, seed: int = 0, budget: int | None = None) -> CfldInstance:
    """Small random instance: demands in [1, 10], utilities in [0, 5],
    fixed costs in [1, 5], unit outside option."""
    rng = np.random.default_rng(seed)
    w = rng.integers(1, 11, size=J).tolist()
    u = rng.integers(0, 6, size=(n, L, J, R)).tolist()
    f = rng.integers(1, 6, size=(n, L, R)).tolist()
    B = [budget if budget is not None else int(rng.integers(2, 3 * L + 1)) for _ in range(n)]
    return CfldInstance(L, J, [R] * L, w, u, f, B, [1] * J, name=f"cfld_n{n}_L{L}_J{J}_R{R}_s{seed}")
