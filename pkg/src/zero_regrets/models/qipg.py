"""Integer games with quadratic costs.

Player ``i`` minimizes ``1/2 x'Q x + (C x^{-i})' x + c' x`` over integers in
``[lb, ub]`` (plus optional linear rows), where ``x^{-i}`` stacks the
opponents' vectors in player order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..errors import InputError
from ..game import MINIMIZE, Constraint, GameInstance, Monomial2, PlayerProgram, QuadraticUtility, VarDomain, as_fraction, as_int

ENTRY_RANGE = 25


def _per_player(v, n: int, m: int, what: str) -> list[list[int]]:
    if len(v) == m and all(not isinstance(e, (list, tuple)) for e in v):
        v = [v] * n
    if len(v) != n or any(len(r) != m for r in v):
        raise InputError(f"{what} must have length m or shape n x m")
    return [[as_int(e, what) for e in r] for r in v]


@dataclass
class QipgInstance:
    n: int
    m: int
    Q: list  # n x m x m
    C: list  # n x m x m(n-1)
    c: list  # n x m
    lb: list
    ub: list
    rows: list = field(default_factory=list)  # per player: [{coeffs, sense, rhs}]
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        n, m = as_int(self.n, "n"), as_int(self.m, "m")
        self.n, self.m = n, m
        if n < 1 or m < 1:
            raise InputError("need n >= 1 and m >= 1")
        try:
            Q = [[[as_fraction(Qi[a][b]) for b in range(m)] for a in range(m)] for Qi in self.Q]
            C = [[[as_fraction(Ci[a][b]) for b in range(m * (n - 1))] for a in range(m)] for Ci in self.C]
        except (IndexError, TypeError):
            raise InputError("Q must be n x m x m and C must be n x m x m(n-1)") from None
        if len(Q) != n or len(C) != n:
            raise InputError("Q and C need one matrix per player")
        # symmetrize; the quadratic form is unchanged
        self.Q = [[[(Qi[a][b] + Qi[b][a]) / 2 for b in range(m)] for a in range(m)] for Qi in Q]
        self.C = C
        self.c = _per_player(self.c, n, m, "c")
        if self.lb is None or self.ub is None:
            raise InputError("every variable needs finite bounds")
        self.lb = _per_player(self.lb, n, m, "lb")
        self.ub = _per_player(self.ub, n, m, "ub")
        self.rows = list(self.rows or [])
        if self.rows and len(self.rows) != n:
            raise InputError("rows must list constraints for every player")

    def opponent_slot(self, i: int, k: int, l: int) -> int:
        """Column of C^i multiplying variable l of opponent k."""
        pos = k if k < i else k - 1
        return pos * self.m + l

    def cost(self, i: int, profile) -> Fraction:
        x = profile[i]
        m = self.m
        total = Fraction(0)
        for a in range(m):
            for b in range(m):
                total += Fraction(1, 2) * self.Q[i][a][b] * x[a] * x[b]
            for k in range(self.n):
                if k != i:
                    for l in range(m):
                        total += self.C[i][a][self.opponent_slot(i, k, l)] * x[a] * profile[k][l]
            total += self.c[i][a] * x[a]
        return total

    def to_dict(self) -> dict:
        fr = lambda q: str(q) if q.denominator != 1 else q.numerator  # noqa: E731
        out = {
            "type": "qipg", "n": self.n, "m": self.m,
            "Q": [[[fr(v) for v in r] for r in Qi] for Qi in self.Q],
            "C": [[[fr(v) for v in r] for r in Ci] for Ci in self.C],
            "c": self.c, "lb": self.lb, "ub": self.ub,
        }
        if self.rows:
            out["rows"] = self.rows
        return out

    @classmethod
    def from_dict(cls, d: dict, name: str = "") -> "QipgInstance":
        try:
            return cls(d["n"], d["m"], d["Q"], d["C"], d["c"], d.get("lb"), d.get("ub"), d.get("rows") or [], name)
        except KeyError as exc:
            raise InputError(f"quadratic game is missing field {exc}") from None


def build_qipg(inst: QipgInstance) -> GameInstance:
    players = []
    m = inst.m
    for i in range(inst.n):
        quadratic = []
        for a in range(m):
            if inst.Q[i][a][a]:
                quadratic.append(Monomial2((i, a), (i, a), inst.Q[i][a][a] / 2))
            for b in range(a + 1, m):
                if inst.Q[i][a][b]:
                    quadratic.append(Monomial2((i, a), (i, b), inst.Q[i][a][b]))
            for k in range(inst.n):
                if k == i:
                    continue
                for l in range(m):
                    coef = inst.C[i][a][inst.opponent_slot(i, k, l)]
                    if coef:
                        quadratic.append(Monomial2((i, a), (k, l), coef))
        linear = [(i, a, inst.c[i][a]) for a in range(m) if inst.c[i][a]]
        domains = [VarDomain(inst.lb[i][a], inst.ub[i][a], "integer") for a in range(m)]
        rows = []
        for r in (inst.rows[i] if inst.rows else []):
            rows.append(Constraint(tuple(r["coeffs"]), r.get("sense", "<="), r["rhs"]))
        players.append(PlayerProgram(domains, rows, QuadraticUtility(MINIMIZE, linear, quadratic)))
    return GameInstance(players, name=inst.name, meta={"model": "qipg", "instance": inst})


def generate_qipg(
    n: int = 2,
    m: int = 2,
    lb=None,
    ub=None,
    convex: bool = True,
    seed: int = 0,
) -> QipgInstance:
    """Random instance with Q, C entries in [-25, 25] and c in [-5, 5].

    Convex: ``Q = A'A + I`` for an integer ``A``, scaled by an exact
    rational so its largest entry is at most 25 (still positive definite).
    Otherwise ``Q`` is a random symmetric integer matrix.  Bounds default
    to ``lb`` in [-1000, 0] and ``ub`` in [5, 1000].
    """
    if not 1 <= n <= 6 or not 1 <= m <= 10:
        raise InputError("generator supports 1 <= n <= 6 and 1 <= m <= 10")
    rng = np.random.default_rng(seed)
    Qs = []
    for _ in range(n):
        if convex:
            A = rng.integers(-5, 6, size=(m, m))
            Q = A.T @ A + np.eye(m, dtype=np.int64)
            top = int(np.abs(Q).max())
            scale = Fraction(ENTRY_RANGE, top) if top > ENTRY_RANGE else Fraction(1)
            Qs.append([[Fraction(int(v)) * scale for v in row] for row in Q])
        else:
            U = rng.integers(-ENTRY_RANGE, ENTRY_RANGE + 1, size=(m, m))
            Q = np.triu(U) + np.triu(U, 1).T
            Qs.append([[Fraction(int(v)) for v in row] for row in Q])
    C = rng.integers(-ENTRY_RANGE, ENTRY_RANGE + 1, size=(n, m, m * (n - 1))).tolist()
    c = rng.integers(-5, 6, size=(n, m)).tolist()
    if lb is None:
        lb = rng.integers(-1000, 1, size=(n, m)).tolist()
    if ub is None:
        ub = rng.integers(5, 1001, size=(n, m)).tolist()
    kind = "cvx" if convex else "ncvx"
    return QipgInstance(n, m, Qs, C, c, lb, ub, name=f"qipg_n{n}_m{m}_{kind}_s{seed}")
