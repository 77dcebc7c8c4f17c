"""Weighted network formation games.

Each player routes one unit of flow from its source to its sink on a
directed graph.  The cost of an edge is split among its users in
proportion to their weights (plain Shapley sharing when all weights are
equal).  Cost shares are linearized with one binary column per edge and
nonempty user set ``S``, tied to the flow columns by
``x^i = sum_{S containing i} z^S`` and ``sum_S z^S <= 1``.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..errors import InputError
from ..game import MINIMIZE, Constraint, GameInstance, PlayerProgram, VarDomain, as_fraction, as_int
from ..lifting import LinExpr, LiftedModel, ModelBuilder, make_row

MAX_PLAYERS = 4
GRID_ROWS = 5


@dataclass
class NfgInstance:
    V: int
    edges: list[tuple[int, int, int]]
    sources: list[int]
    sinks: list[int]
    weights: list[Fraction]
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.V = as_int(self.V, "V")
        self.edges = [(as_int(h, "tail"), as_int(l, "head"), as_int(c, "cost")) for h, l, c in self.edges]
        self.weights = [as_fraction(w) for w in self.weights]
        n = len(self.sources)
        if not 1 <= n <= MAX_PLAYERS:
            raise InputError(f"network games support 1 to {MAX_PLAYERS} players, got {n}")
        if len(self.sinks) != n or len(self.weights) != n:
            raise InputError("sources, sinks and weights must have one entry per player")
        for h, l, c in self.edges:
            if not (0 <= h < self.V and 0 <= l < self.V) or h == l:
                raise InputError(f"bad edge ({h}, {l})")
            if c <= 0:
                raise InputError("edge costs must be positive")
        if any(w <= 0 for w in self.weights):
            raise InputError("player weights must be positive")
        for i, (s, t) in enumerate(zip(self.sources, self.sinks)):
            if s == t:
                raise InputError(f"player {i} has identical source and sink")
            if t not in reachable(self.V, self.edges, s):
                raise InputError(f"sink of player {i} is unreachable from its source")

    @property
    def n(self) -> int:
        return len(self.sources)

    def users(self, profile, e: int) -> list[int]:
        return [k for k in range(self.n) if profile[k][e]]

    def cost(self, i: int, profile) -> Fraction:
        total = Fraction(0)
        for e, (_, _, c) in enumerate(self.edges):
            if profile[i][e]:
                total += c * self.weights[i] / sum(self.weights[k] for k in self.users(profile, e))
        return total

    def to_dict(self) -> dict:
        return {
            "type": "nfg",
            "V": self.V,
            "E": [list(e) for e in self.edges],
            "players": [
                {"s": s, "t": t, "w_num": w.numerator, "w_den": w.denominator}
                for s, t, w in zip(self.sources, self.sinks, self.weights)
            ],
        }

    @classmethod
    def from_dict(cls, d: dict, name: str = "") -> "NfgInstance":
        try:
            players = d["players"]
            return cls(
                d["V"], d["E"],
                [p["s"] for p in players], [p["t"] for p in players],
                [Fraction(as_int(p.get("w_num", 1), "w_num"), as_int(p.get("w_den", 1), "w_den")) for p in players],
                name,
            )
        except KeyError as exc:
            raise InputError(f"network game is missing field {exc}") from None


def reachable(V: int, edges, source: int) -> set[int]:
    adj = [[] for _ in range(V)]
    for h, l, _ in edges:
        adj[h].append(l)
    seen = {source}
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for u in adj[v]:
            if u not in seen:
                seen.add(u)
                queue.append(u)
    return seen


class ShareUtility:
    """Weighted cost share of one player; evaluated directly on profiles."""

    polynomial = False
    sense = MINIMIZE

    def __init__(self, inst: NfgInstance, i: int):
        self.inst = inst
        self.i = i

    def evaluate(self, profile) -> Fraction:
        return self.inst.cost(self.i, profile)


def _subsets(n: int) -> list[frozenset[int]]:
    return [frozenset(k for k in range(n) if mask >> k & 1) for mask in range(1, 2**n)]


class SubsetLift:
    """One binary column per (edge, nonempty user set)."""

    def __init__(self, inst: NfgInstance):
        self.inst = inst
        self.subsets = _subsets(inst.n)
        self.z: dict[tuple[int, frozenset[int]], int] = {}

    def share(self, i: int, S: frozenset[int]) -> Fraction:
        w = self.inst.weights
        return w[i] / sum(w[k] for k in S)

    def build(self, model: LiftedModel, b: ModelBuilder) -> dict[int, LinExpr]:
        inst = self.inst
        for e in range(len(inst.edges)):
            for S in self.subsets:
                tag = "".join(str(k + 1) for k in sorted(S))
                self.z[(e, S)] = b.add_column(
                    f"z{tag}_e{e}", 0, 1, True,
                    lambda prof, vals, e=e, S=S: Fraction(int(frozenset(inst.users(prof, e)) == S)),
                )
            for i in range(inst.n):
                coeffs = {model.x_col(i, e): 1}
                for S in self.subsets:
                    if i in S:
                        coeffs[self.z[(e, S)]] = -1
                b.add_row(make_row(coeffs, "=", 0, "link"))
            b.add_row(make_row({self.z[(e, S)]: 1 for S in self.subsets}, "<=", 1, "link"))
        out = {}
        for i in range(inst.n):
            expr = LinExpr()
            for e, (_, _, c) in enumerate(inst.edges):
                for S in self.subsets:
                    if i in S:
                        expr.add_term(self.z[(e, S)], c * self.share(i, S))
            out[i] = expr
        return out

    def indicator(self, i: int, e: int, T: frozenset[int]) -> LinExpr:
        """Linear form of [the opponents of i using edge e are exactly T]."""
        if T:
            return LinExpr({self.z[(e, T)]: Fraction(1), self.z[(e, T | {i})]: Fraction(1)})
        expr = LinExpr(const=1)
        for S in self.subsets:
            if S != frozenset({i}):
                expr.add_term(self.z[(e, S)], -1)
        return expr

    def deviation(self, model: LiftedModel, i: int, xhat, start: int):
        inst = self.inst
        opponents = [S for S in self.subsets if i not in S]
        expr = LinExpr()
        for e, (_, _, c) in enumerate(inst.edges):
            if not xhat[e]:
                continue
            for T in [frozenset()] + opponents:
                expr.iadd(self.indicator(i, e, T), c * self.share(i, T | {i}))
        return expr, None


def build_nfg(inst: NfgInstance) -> GameInstance:
    players = []
    E = len(inst.edges)
    for i in range(inst.n):
        rows = []
        for v in range(inst.V):
            coeffs = [0] * E
            for e, (h, l, _) in enumerate(inst.edges):
                if h == v:
                    coeffs[e] += 1
                if l == v:
                    coeffs[e] -= 1
            rhs = 1 if v == inst.sources[i] else -1 if v == inst.sinks[i] else 0
            if any(coeffs) or rhs:
                rows.append(Constraint(tuple(coeffs), "=", rhs))
        players.append(PlayerProgram([VarDomain.binary()] * E, rows, ShareUtility(inst, i)))
    return GameInstance(players, name=inst.name, custom_lift=SubsetLift(inst), meta={"model": "nfg", "instance": inst})


def target_edges(V: int) -> int:
    """Edge count matching the graph shapes of the published grid experiments."""
    return max(V - 1, round(2.12 * V - 7))


def generate_grid(
    v_target: int,
    seed: int = 0,
    n: int = 3,
    weights=None,
    endpoints: str = "shared",
    edges_target: int | None = None,
) -> NfgInstance:
    """Layered grid crossed from left to right.

    Nodes fill ``GRID_ROWS`` rows column by column.  Horizontal edges point
    right; vertical edges point down in even columns and up in odd ones;
    random diagonal edges between adjacent columns are added until the
    edge count reaches ``edges_target``.  Costs are uniform in [20, 100].
    With fewer nodes than one column the graph is a directed path.
    """
    if v_target < 2:
        raise InputError("a network needs at least two nodes")
    if endpoints not in ("shared", "spread"):
        raise InputError("endpoints must be 'shared' or 'spread'")
    rng = np.random.default_rng(seed)
    weights = [Fraction(1)] * n if weights is None else [as_fraction(w) for w in weights]
    V = v_target
    R = GRID_ROWS
    arcs: list[tuple[int, int]] = []
    if V <= R:
        arcs = [(v, v + 1) for v in range(V - 1)]
        sources, sinks = [0] * n, [V - 1] * n
    else:
        L = math.ceil(V / R)

        def node(c: int, r: int) -> int | None:
            k = c * R + r
            return k if 0 <= r < R and k < V else None

        for c in range(L):
            for r in range(R):
                a = node(c, r)
                if a is None:
                    continue
                right = node(c + 1, r) if c + 1 < L else None
                if right is not None:
                    arcs.append((a, right))
                below = node(c, r + 1)
                if below is not None:
                    arcs.append((a, below) if c % 2 == 0 else (below, a))
        have = set(arcs)
        candidates = [
            (node(c, r), node(c + 1, r + d))
            for c in range(L - 1)
            for r in range(R)
            for d in (-1, 1)
            if node(c, r) is not None and node(c + 1, r + d) is not None
        ]
        candidates = [a for a in candidates if a not in have]
        want = (edges_target if edges_target is not None else target_edges(V)) - len(arcs)
        if want > 0 and candidates:
            pick = rng.choice(len(candidates), size=min(want, len(candidates)), replace=False)
            arcs.extend(candidates[k] for k in sorted(pick))
        if endpoints == "shared":
            sources, sinks = [0] * n, [V - 1] * n
        else:
            last_full = V // R - 1
            sources = [node(0, (2 * i) % R) for i in range(n)]
            sinks = [node(last_full, (R - 1 - 2 * i) % R) for i in range(n)]
    costs = rng.integers(20, 101, size=len(arcs))
    edges = [(h, l, int(c)) for (h, l), c in zip(arcs, costs)]
    name = f"nfg_v{V}_e{len(edges)}_s{seed}"
    return NfgInstance(V, edges, sources, sinks, weights, name, {"seed": seed, "endpoints": endpoints})
