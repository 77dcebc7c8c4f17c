from fractions import Fraction

import pytest

from zero_regrets import bruteforce as bf
from zero_regrets.game import MAXIMIZE, GameInstance, PlayerProgram, QuadraticUtility, VarDomain
from conftest import matching_pennies, single_player


def test_example2_strategies(example2):
    want = [(0, 0, 0), (0, 0, 1), (0, 1, 0), (1, 0, 0)]
    assert bf.enumerate_feasible(example2, 0) == want
    assert bf.enumerate_feasible(example2, 1) == want


def test_unconstrained_binary():
    g = GameInstance([PlayerProgram([VarDomain.binary()], [], QuadraticUtility(MAXIMIZE, [(0, 0, 1)]))])
    assert bf.enumerate_feasible(g, 0) == [(0,), (1,)]


def test_example1_player1_strategies(example1):
    assert bf.enumerate_feasible(example1, 0) == [(0, 0), (0, 1), (1, 0)]


def test_example2_pnes(example2):
    res = bf.all_pnes(example2)
    assert len(res.pnes) == 3
    assert sorted(res.payoffs.values()) == sorted([(9, 9), (7, 9), (7, 9)])
    assert res.osw == 20


def test_example1_prices(example1):
    res = bf.all_pnes(example1)
    assert res.pne_set == {((1, 0), (1, 0))}
    assert res.pos == res.poa == Fraction(8, 5)


def test_single_player_argmax():
    res = bf.all_pnes(single_player([3, 7, 7, 1]))
    assert res.pne_set == {((0, 1, 0, 0),), ((0, 0, 1, 0),)}
    assert res.pos == 1


def test_no_equilibrium():
    res = bf.all_pnes(matching_pennies())
    assert res.pnes == [] and res.pos is None and res.poa is None


def test_regrets(example1):
    assert bf.regrets(example1, ((1, 0), (0, 1))) == [1, 1]
    assert bf.regrets(example1, ((0, 1), (0, 1))) == [0, 3]


def test_cap_is_enforced(example2):
    with pytest.raises(bf.CapExceeded):
        bf.all_pnes(example2, cap=10)


def test_deterministic_order(example2):
    assert bf.all_pnes(example2).pnes == bf.all_pnes(example2).pnes


def test_price_orientation():
    assert bf.price_ratios("maximize", Fraction(8), Fraction(5), Fraction(4)) == (Fraction(8, 5), Fraction(2))
    assert bf.price_ratios("minimize", Fraction(4), Fraction(5), Fraction(8)) == (Fraction(5, 4), Fraction(2))
    assert bf.price_ratios("maximize", Fraction(8), Fraction(0), Fraction(0)) == (None, None)


def test_bkp_answer():
    assert bf.bkp_feasible([1], [1], 1, 1)
    assert not bf.bkp_feasible([2], [1], 1, 1)
