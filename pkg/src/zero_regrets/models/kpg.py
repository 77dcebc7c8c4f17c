"""Knapsack games: each player packs items into its own knapsack, and the
profit of item ``j`` shifts by ``C[i][k][j]`` when opponent ``k`` packs it too.

Also: the random instance generator, the two strategic cut families
(item dominance, negative-payoff interaction sets) and the construction
turning a bilevel knapsack instance into a two-player knapsack game.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..errors import InputError
from ..game import MAXIMIZE, Constraint, GameInstance, Monomial2, PlayerProgram, QuadraticUtility, VarDomain, as_int
from ..lifting import LiftedModel, make_row
from ..oracle import DOMINANCE, PAYOFF, EquilibriumCut

log = logging.getLogger(__name__)

DISTRIBUTIONS = ("A", "B", "C")
CAPACITY_FRACTIONS = ("0.2", "0.5", "0.8")
SUBSET_CAP = 2**12


@dataclass
class KpgInstance:
    n: int
    m: int
    p: list[list[int]]
    w: list[list[int]]
    b: list[int]
    C: list[list[list[int]]]  # C[i][k][j]; C[i][i] is all zeros
    dist: str | None = None
    seed: int | None = None
    name: str = ""

    def __post_init__(self) -> None:
        n, m = self.n, self.m
        if n < 1 or m < 0:
            raise InputError("a knapsack game needs n >= 1 players and m >= 0 items")
        self.p = [[as_int(v, "profit") for v in row] for row in self.p]
        self.w = [[as_int(v, "weight") for v in row] for row in self.w]
        self.b = [as_int(v, "capacity") for v in self.b]
        self.C = [[[as_int(v, "interaction") for v in row] for row in mat] for mat in self.C]
        if len(self.p) != n or any(len(r) != m for r in self.p):
            raise InputError("p must be n x m")
        if len(self.w) != n or any(len(r) != m for r in self.w):
            raise InputError("w must be n x m")
        if len(self.b) != n:
            raise InputError("b must have n entries")
        if len(self.C) != n or any(len(mat) != n or any(len(r) != m for r in mat) for mat in self.C):
            raise InputError("C must be n x n x m")
        if any(v < 0 for row in self.w for v in row) or any(v < 0 for v in self.b):
            raise InputError("weights and capacities must be nonnegative")
        for i in range(n):
            if any(self.C[i][i]):
                raise InputError(f"C[{i}][{i}] must be zero")

    def profit(self, i: int, j: int, selected_by: set[int]) -> int:
        return self.p[i][j] + sum(self.C[i][k][j] for k in selected_by if k != i)

    def to_dict(self) -> dict:
        out = {"type": "kpg", "n": self.n, "m": self.m, "p": self.p, "w": self.w, "b": self.b, "C": self.C}
        if self.dist is not None:
            out["dist"] = self.dist
        if self.seed is not None:
            out["seed"] = self.seed
        return out

    @classmethod
    def from_dict(cls, d: dict, name: str = "") -> "KpgInstance":
        try:
            return cls(int(d["n"]), int(d["m"]), d["p"], d["w"], d["b"], d["C"], d.get("dist"), d.get("seed"), name)
        except KeyError as exc:
            raise InputError(f"knapsack game is missing field {exc}") from None


def build_kpg(inst: KpgInstance, strategic: bool = True) -> GameInstance:
    players = []
    for i in range(inst.n):
        linear = [(i, j, inst.p[i][j]) for j in range(inst.m) if inst.p[i][j]]
        quadratic = [
            Monomial2((i, j), (k, j), inst.C[i][k][j])
            for k in range(inst.n)
            if k != i
            for j in range(inst.m)
            if inst.C[i][k][j]
        ]
        players.append(
            PlayerProgram(
                [VarDomain.binary()] * inst.m,
                [Constraint(tuple(inst.w[i]), "<=", inst.b[i])],
                QuadraticUtility(MAXIMIZE, linear, quadratic),
            )
        )
    hook = (lambda lifted: strategic_cuts(inst, lifted)) if strategic else None
    return GameInstance(players, name=inst.name, strategic=hook, meta={"model": "kpg", "instance": inst})


def generate_kpg(n: int, m: int, dist: str = "A", capacity: str | float | Fraction = "0.5", seed: int = 0) -> KpgInstance:
    """Random instance: p, w uniform in [1, 100], b = floor(capacity * sum w).

    Interaction distributions: ``A`` one value per item in [1, 100] shared by
    every (i, k) pair, ``B`` independent in [1, 100], ``C`` independent in
    [-100, 100].  Uses numpy's PCG64 stream seeded with ``seed``.
    """
    if dist not in DISTRIBUTIONS:
        raise InputError(f"unknown distribution {dist!r}")
    frac = Fraction(str(capacity)) if isinstance(capacity, (str, float)) else Fraction(capacity)
    rng = np.random.default_rng(seed)
    p = rng.integers(1, 101, size=(n, m))
    w = rng.integers(1, 101, size=(n, m))
    b = [int(frac * int(row.sum())) for row in w]
    if dist == "A":
        shared = rng.integers(1, 101, size=m)
        C = np.broadcast_to(shared, (n, n, m)).copy()
    elif dist == "B":
        C = rng.integers(1, 101, size=(n, n, m))
    else:
        C = rng.integers(-100, 101, size=(n, n, m))
    for i in range(n):
        C[i, i, :] = 0
    name = f"kpg_n{n}_m{m}_{dist}_{frac.numerator}-{frac.denominator}_s{seed}"
    return KpgInstance(n, m, p.tolist(), w.tolist(), b, C.tolist(), dist, seed, name)


# -- strategic cuts


def _x(lifted: LiftedModel | None, i: int, j: int, m: int) -> int:
    # binary players occupy one column per item in player-major order
    return lifted.x_col(i, j) if lifted is not None else i * m + j


def profit_bounds(inst: KpgInstance, i: int, j: int) -> tuple[int, int]:
    """Smallest and largest profit item ``j`` can give player ``i`` over all
    opponent choices."""
    cs = [inst.C[i][k][j] for k in range(inst.n) if k != i]
    return inst.p[i][j] + sum(min(c, 0) for c in cs), inst.p[i][j] + sum(max(c, 0) for c in cs)


def dominance_cuts(inst: KpgInstance, lifted: LiftedModel | None = None) -> list[EquilibriumCut]:
    """``x_j' <= x_j`` whenever item j is no heavier than j' and always more
    profitable.  With two players, also the version conditioned on the
    opponent packing j and not j'."""
    cuts = []
    for i in range(inst.n):
        bounds = [profit_bounds(inst, i, j) for j in range(inst.m)]
        for j, jp in itertools.permutations(range(inst.m), 2):
            if inst.w[i][j] > inst.w[i][jp]:
                continue
            xj, xjp = _x(lifted, i, j, inst.m), _x(lifted, i, jp, inst.m)
            if bounds[j][0] > bounds[jp][1]:
                row = make_row({xj: 1, xjp: -1}, ">=", 0, DOMINANCE)
                cuts.append(EquilibriumCut(i, None, row, DOMINANCE))
            elif inst.n == 2:
                k = 1 - i
                if inst.p[i][j] + inst.C[i][k][j] > inst.p[i][jp]:
                    yj, yjp = _x(lifted, k, j, inst.m), _x(lifted, k, jp, inst.m)
                    row = make_row({xj: 1, xjp: -1, yj: -1, yjp: 1}, ">=", -1, DOMINANCE)
                    cuts.append(EquilibriumCut(i, None, row, DOMINANCE))
    return cuts


def minimal_negative_sets(inst: KpgInstance, i: int, j: int) -> list[tuple[int, ...]] | None:
    """Minimal opponent sets forcing a negative profit on item j whatever
    the remaining opponents do.  ``None`` when the search exceeds the cap."""
    neg = [k for k in range(inst.n) if k != i and inst.C[i][k][j] < 0]
    if 2 ** len(neg) > SUBSET_CAP:
        return None
    base = inst.p[i][j] + sum(max(inst.C[i][k][j], 0) for k in range(inst.n) if k != i)
    if base + sum(inst.C[i][k][j] for k in neg) >= 0:
        return []
    out = []
    for size in range(1, len(neg) + 1):
        for S in itertools.combinations(neg, size):
            if base + sum(inst.C[i][k][j] for k in S) >= 0:
                continue
            if any(set(T) <= set(S) for T in out):
                continue
            out.append(S)
    return out


def payoff_cuts(inst: KpgInstance, lifted: LiftedModel | None = None) -> list[EquilibriumCut]:
    """``x^i_j + sum_{k in S} x^k_j <= |S|`` for every minimal set S."""
    cuts = []
    for i in range(inst.n):
        for j in range(inst.m):
            sets = minimal_negative_sets(inst, i, j)
            if sets is None:
                log.info("payoff cuts skipped player=%d item=%d reason=subset_cap", i, j)
                continue
            for S in sets:
                coeffs = {_x(lifted, i, j, inst.m): 1}
                for k in S:
                    coeffs[_x(lifted, k, j, inst.m)] = 1
                cuts.append(EquilibriumCut(i, None, make_row(coeffs, "<=", len(S), PAYOFF), PAYOFF))
    return cuts


def strategic_cuts(inst: KpgInstance, lifted: LiftedModel | None = None) -> list[EquilibriumCut]:
    return dominance_cuts(inst, lifted) + payoff_cuts(inst, lifted)


# -- bilevel knapsack reduction


@dataclass
class BkpInstance:
    a: list[int]
    b: list[int]
    A: int
    B: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.a = [as_int(v, "a") for v in self.a]
        self.b = [as_int(v, "b") for v in self.b]
        self.A, self.B = as_int(self.A, "A"), as_int(self.B, "B")
        if len(self.a) != len(self.b):
            raise InputError("a and b must have the same length")
        if min(self.a + self.b + [self.A, self.B], default=0) < 0:
            raise InputError("bilevel knapsack data must be nonnegative")

    @property
    def m(self) -> int:
        return len(self.a)

    def to_dict(self) -> dict:
        return {"type": "bkp", "a": self.a, "b": self.b, "A": self.A, "B": self.B}

    @classmethod
    def from_dict(cls, d: dict) -> "BkpInstance":
        try:
            return cls(d["a"], d["b"], d["A"], d["B"])
        except KeyError as exc:
            raise InputError(f"bilevel knapsack instance is missing field {exc}") from None


def normalize_bkp(bkp: BkpInstance) -> BkpInstance:
    """Equivalent instance with every a_j <= A: double the leader data,
    make oversized items unaffordable, and add an item with a = 1, b = B
    that the leader is forced to take."""
    if all(a <= bkp.A for a in bkp.a):
        return bkp
    A2 = 2 * bkp.A + 1
    a = [2 * v if v <= bkp.A else A2 for v in bkp.a] + [1]
    return BkpInstance(a, bkp.b + [bkp.B], A2, bkp.B, {"normalized": True})


def reduce_bkp_instance(bkp: BkpInstance) -> KpgInstance:
    if bkp.B < 1:
        raise InputError("B must be at least 1")
    bkp = normalize_bkp(bkp)
    m, B = bkp.m, bkp.B
    zeros = [0] * (m + 1)
    p = [zeros[:], bkp.b + [B - 1]]
    w = [bkp.a + [0], bkp.b + [B]]
    C = [[zeros[:], bkp.b + [1]], [[-v for v in bkp.b] + [0], zeros[:]]]
    return KpgInstance(2, m + 1, p, w, [bkp.A, B], C, name="bkp_reduction")


def reduce_bkp(bkp: BkpInstance, strategic: bool = True) -> GameInstance:
    """Two-player knapsack game that has a PNE iff ``bkp`` is a yes-instance."""
    return build_kpg(reduce_bkp_instance(bkp), strategic)


def random_bkp(rng: np.random.Generator, m: int, top: int = 8) -> BkpInstance:
    a = rng.integers(0, top + 1, size=m).tolist()
    b = rng.integers(0, top + 1, size=m).tolist()
    return BkpInstance(a, b, int(rng.integers(0, top + 1)), int(rng.integers(1, top + 1)))


# -- small named instances


def example1() -> KpgInstance:
    return KpgInstance(
        2, 2, [[6, 1], [4, 2]], [[3, 2], [3, 2]], [4, 4],
        [[[0, 0], [-4, 6]], [[-1, -1], [0, 0]]], name="example1",
    )


def example2() -> KpgInstance:
    return KpgInstance(
        2, 3, [[1, 3, 7], [9, 9, 2]], [[6, 4, 5], [4, 2, 5]], [7, 5],
        [[[0, 0, 0], [-6, 3, 2]], [[-6, 5, 7], [0, 0, 0]]], name="example2",
    )


def unbounded_price(M: int = 100) -> KpgInstance:
    """Unique PNE of welfare 5 while the optimal welfare is ``M + 1``."""
    if M < 3:
        raise InputError("M must be at least 3")
    return KpgInstance(
        2, 2, [[M, 1], [4, 1]], [[3, 2], [3, 2]], [4, 4],
        [[[0, 0], [-(M - 2), -1]], [[-1, -1], [0, 0]]], name=f"unbounded_price_M{M}",
    )
