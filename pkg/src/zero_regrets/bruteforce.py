"""Exhaustive reference solver: every profile, every unilateral deviation.

Polynomial utilities are evaluated as exact integer tensors (one axis per
player, coefficients scaled by the lcm of their denominators), so the
best-response table of a player is a single reduction along its own axis.
Other utilities fall back to per-profile ``Fraction`` evaluation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import InputError
from .game import MAXIMIZE, GameInstance, StrategyProfile, gain, replace_strategy

DEFAULT_CAP = 10**7


class CapExceeded(InputError):
    pass


def enumerate_feasible(game: GameInstance, i: int, cap: int = DEFAULT_CAP) -> list[tuple[int, ...]]:
    """All feasible strategies of player ``i`` in lexicographic order."""
    pl = game.players[i]
    size = math.prod(d.size for d in pl.domains)
    if size > cap:
        raise CapExceeded(f"player {i} has {size} candidate strategies, cap is {cap}")
    if pl.m == 0:
        return [()]
    axes = [np.arange(d.lower, d.upper + 1, dtype=np.int64) for d in pl.domains]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, pl.m)
    keep = np.ones(len(grid), dtype=bool)
    for row in pl.constraints:
        coeffs = np.array(row.coeffs, dtype=object if _big(row.coeffs, pl.domains) else np.int64)
        lhs = grid.astype(coeffs.dtype) @ coeffs
        if row.sense == "<=":
            keep &= lhs <= row.rhs
        elif row.sense == ">=":
            keep &= lhs >= row.rhs
        else:
            keep &= lhs == row.rhs
    return [tuple(int(v) for v in r) for r in grid[keep]]


def _big(coeffs, domains) -> bool:
    bound = sum(abs(a) * max(abs(d.lower), abs(d.upper)) for a, d in zip(coeffs, domains))
    return bound >= 2**62


@dataclass
class ProfileSpace:
    strategies: list[list[tuple[int, ...]]]

    @property
    def count(self) -> int:
        return math.prod(len(s) for s in self.strategies)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.strategies)

    def profile(self, index) -> StrategyProfile:
        return tuple(self.strategies[p][k] for p, k in enumerate(index))


def profile_space(game: GameInstance, cap: int = DEFAULT_CAP) -> ProfileSpace:
    space = ProfileSpace([enumerate_feasible(game, i, cap) for i in range(game.n)])
    if space.count > cap:
        raise CapExceeded(f"{space.count} profiles exceed the cap {cap}")
    return space


def _axis_view(vec: np.ndarray, axis: int, n: int) -> np.ndarray:
    shape = [1] * n
    shape[axis] = len(vec)
    return vec.reshape(shape)


def _poly_tensor(utility, space: ProfileSpace, n: int) -> tuple[np.ndarray, int]:
    """Integer tensor of ``scale * utility`` over the profile space."""
    scale = 1
    for _, _, c in utility.linear:
        scale = math.lcm(scale, c.denominator)
    for mono in utility.quadratic:
        scale = math.lcm(scale, mono.coefficient.denominator)
    mats = [np.array(s, dtype=np.int64).reshape(len(s), -1) for s in space.strategies]
    xmax = max((int(np.abs(m).max()) if m.size else 0) for m in mats) or 1
    bound = abs(utility.constant * scale) + sum(abs(c * scale) for *_, c in utility.linear) * xmax
    bound += sum(abs(q.coefficient * scale) for q in utility.quadratic) * xmax * xmax
    dtype = np.int64 if bound < 2**62 else object
    mats = [m.astype(dtype) for m in mats]
    total = np.zeros(space.shape, dtype=dtype) + int(utility.constant * scale)
    for p, j, c in utility.linear:
        total = total + int(c * scale) * _axis_view(mats[p][:, j], p, n)
    for mono in utility.quadratic:
        (pa, ja), (pb, jb) = mono.a, mono.b
        k = int(mono.coefficient * scale)
        if pa == pb:
            total = total + k * _axis_view(mats[pa][:, ja] * mats[pa][:, jb], pa, n)
        else:
            total = total + k * _axis_view(mats[pa][:, ja], pa, n) * _axis_view(mats[pb][:, jb], pb, n)
    return np.broadcast_to(total, space.shape).copy(), scale


def _generic_tensor(fn, space: ProfileSpace) -> np.ndarray:
    out = np.empty(space.shape, dtype=object)
    for index in itertools.product(*(range(k) for k in space.shape)):
        out[index] = fn(space.profile(index))
    return out


def payoff_tensors(game: GameInstance, space: ProfileSpace) -> list[tuple[np.ndarray, int]]:
    """Per player: (tensor, scale) with ``tensor == scale * payoff`` exactly."""
    out = []
    for pl in game.players:
        u = pl.utility
        if getattr(u, "polynomial", False):
            out.append(_poly_tensor(u, space, game.n))
        else:
            out.append((_generic_tensor(u.evaluate, space), 1))
    return out


def welfare_tensor(game: GameInstance, space: ProfileSpace, tensors) -> tuple[np.ndarray, int]:
    if game.welfare_form == "sum":
        scale = 1
        for _, s in tensors:
            scale = math.lcm(scale, s)
        total = sum(t * (scale // s) for t, s in tensors)
        return total, scale
    return _poly_tensor(game.welfare_form, space, game.n)


def price_ratios(sense: str, osw: Fraction, best: Fraction, worst: Fraction) -> tuple[Fraction | None, Fraction | None]:
    """(PoS, PoA).  Numerator and denominator swap for cost games; undefined
    when the ratio would involve a nonpositive quantity."""
    if sense == MAXIMIZE:
        pos = osw / best if best > 0 and osw > 0 else None
        poa = osw / worst if worst > 0 and osw > 0 else None
    else:
        pos = best / osw if osw > 0 and best > 0 else None
        poa = worst / osw if osw > 0 and worst > 0 else None
    return pos, poa


@dataclass
class BruteForceResult:
    pnes: list[tuple[StrategyProfile, Fraction]]
    osw: Fraction
    osw_profile: StrategyProfile
    pos: Fraction | None
    poa: Fraction | None
    profile_count: int
    payoffs: dict[StrategyProfile, tuple[Fraction, ...]] = field(default_factory=dict)

    sense: str = MAXIMIZE

    @property
    def pne_set(self) -> set[StrategyProfile]:
        return {p for p, _ in self.pnes}

    @property
    def best_welfare(self) -> Fraction | None:
        if not self.pnes:
            return None
        ws = [w for _, w in self.pnes]
        return max(ws) if self.sense == MAXIMIZE else min(ws)


def _exact(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(int(v))


def all_pnes(game: GameInstance, cap: int = DEFAULT_CAP) -> BruteForceResult:
    """The exact PNE set, optimal welfare and prices of ``game``."""
    space = profile_space(game, cap)
    if space.count == 0:
        raise InputError("some player has no feasible strategy")
    tensors = payoff_tensors(game, space)
    reduce = np.max if game.sense == MAXIMIZE else np.min
    stable = np.ones(space.shape, dtype=bool)
    for i, (t, _) in enumerate(tensors):
        best = reduce(t, axis=i, keepdims=True)
        stable &= t == best
    wt, wscale = welfare_tensor(game, space, tensors)
    flat_w = wt.reshape(-1)
    k = int(np.argmax(flat_w) if game.sense == MAXIMIZE else np.argmin(flat_w))
    osw_index = np.unravel_index(k, space.shape)
    osw = _exact(wt[osw_index]) / wscale
    pnes = []
    payoffs = {}
    for index in np.argwhere(stable):
        index = tuple(int(v) for v in index)
        prof = space.profile(index)
        pnes.append((prof, _exact(wt[index]) / wscale))
        payoffs[prof] = tuple(_exact(t[index]) / s for t, s in tensors)
    pos = poa = None
    if pnes:
        ws = [w for _, w in pnes]
        best, worst = (max(ws), min(ws)) if game.sense == MAXIMIZE else (min(ws), max(ws))
        pos, poa = price_ratios(game.sense, osw, best, worst)
    return BruteForceResult(pnes, osw, space.profile(osw_index), pos, poa, space.count, payoffs, sense=game.sense)


def regrets(game: GameInstance, profile: StrategyProfile, cap: int = DEFAULT_CAP) -> list[Fraction]:
    """Exact regret of every player at ``profile``, by enumerating deviations."""
    out = []
    for i, pl in enumerate(game.players):
        current = pl.utility.evaluate(profile)
        best = max(gain(game.sense, pl.utility.evaluate(replace_strategy(profile, i, x)))
                   for x in enumerate_feasible(game, i, cap))
        out.append(best - gain(game.sense, current))
    return out


def bkp_feasible(a, b, A: int, B: int) -> bool:
    """Brute-force answer of the bilevel knapsack decision problem."""
    m = len(a)
    for x in itertools.product((0, 1), repeat=m):
        if sum(ai * xi for ai, xi in zip(a, x)) > A:
            continue
        follower = 0
        for y in itertools.product((0, 1), repeat=m):
            if sum(bi * yi for bi, yi in zip(b, y)) <= B:
                follower = max(follower, sum(bi * yi * (1 - xi) for bi, yi, xi in zip(b, y, x)))
        if follower <= B - 1:
            return True
    return False
