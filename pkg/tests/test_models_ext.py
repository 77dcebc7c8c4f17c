import itertools
import random
from fractions import Fraction

import numpy as np
import pytest

from zero_regrets import bruteforce as bf
from zero_regrets.errors import InputError
from zero_regrets.lifting import build_lifted_model
from zero_regrets.master import enumerate_pnes, select_best_pne
from zero_regrets.models import cfld, qipg


def one_location(u_values, f=1, budget=1):
    n = len(u_values)
    u = [[[[v]]] for v in u_values]
    return cfld.CfldInstance(1, 1, [1], [1], u, [[[f]]] * n, [budget] * n, [1])


def test_symmetric_shares():
    inst = one_location([1, 1])
    game = cfld.build_cfld(inst)
    lifted = build_lifted_model(game)
    vals = lifted.induce(((1,), (1,)))
    shares = [vals[game.custom_lift.s[(i, 0)]] for i in range(2)]
    assert shares == [Fraction(1, 3), Fraction(1, 3)]
    assert all(r.satisfied(vals) for r in lifted.rows)


def test_budget_below_every_cost():
    inst = one_location([1, 1], f=5, budget=1)
    game = cfld.build_cfld(inst)
    assert bf.enumerate_feasible(game, 0) == [(0,)]


def test_shares_of_two_sites():
    u = [[[[2]], [[0]]], [[[0]], [[1]]]]
    inst = cfld.CfldInstance(2, 1, [1, 1], [1], u, [[[1], [9]], [[9], [1]]], [1, 1], [1])
    game = cfld.build_cfld(inst)
    prof = ((1, 0), (0, 1))
    assert [inst.share(i, prof, 0) for i in range(2)] == [Fraction(2, 4), Fraction(1, 4)]
    vals = build_lifted_model(game).induce(prof)
    assert [vals[game.custom_lift.s[(i, 0)]] for i in range(2)] == [Fraction(1, 2), Fraction(1, 4)]


def test_outside_option_required():
    with pytest.raises(InputError):
        cfld.CfldInstance(1, 1, [1], [1], [[[[1]]]], [[[1]]], [1], [0])


def test_cfld_lift_exact_and_shares_bounded():
    inst = cfld.generate_cfld(n=3, L=3, J=4, R=2, seed=5)
    game = cfld.build_cfld(inst)
    lifted = build_lifted_model(game)
    strategies = [bf.enumerate_feasible(game, i) for i in range(3)]
    rng = random.Random(5)
    for _ in range(40):
        prof = tuple(rng.choice(s) for s in strategies)
        vals = lifted.induce(prof)
        assert all(r.satisfied(vals) for r in lifted.rows)
        for j in range(inst.J):
            assert sum(vals[game.custom_lift.s[(i, j)]] for i in range(3)) <= 1
        for i in range(3):
            assert lifted.utilities[i].evaluate(vals) == inst.payoff(i, prof)


def test_cfld_deviation_extension_is_exact():
    from zero_regrets.oracle import extend_values

    inst = cfld.generate_cfld(n=2, L=3, J=3, seed=2)
    game = cfld.build_cfld(inst)
    lifted = build_lifted_model(game)
    strategies = [bf.enumerate_feasible(game, i) for i in range(2)]
    for prof in itertools.product(*strategies):
        xhat = strategies[0][-1]
        expr, ext = lifted.deviation(0, xhat, lifted.ncols)
        vals = lifted.induce(prof)
        if ext is not None:
            vals = extend_values(ext, prof, vals)
            assert all(r.satisfied(vals) for r in ext.rows)
        assert expr.evaluate(vals) == inst.payoff(0, (xhat, prof[1]))


@pytest.mark.parametrize("seed", range(4))
def test_cfld_enumeration_matches_bruteforce(seed):
    game = cfld.build_cfld(cfld.generate_cfld(n=2, L=3, J=3, seed=seed))
    truth = bf.all_pnes(game)
    assert {p for p, _ in enumerate_pnes(game).pnes} == truth.pne_set
    r = select_best_pne(game)
    assert (r.pnes[0][1] if r.pnes else None) == truth.best_welfare


def test_qipg_small_example():
    inst = qipg.QipgInstance(2, 1, [[[2]], [[2]]], [[[1]], [[1]]], [[-3], [-3]], [0], [3])
    game = qipg.build_qipg(inst)
    assert bf.all_pnes(game).pne_set == {((1,), (1,)), ((2,), (0,)), ((0,), (2,))}
    assert {p for p, _ in enumerate_pnes(game).pnes} == {((1,), (1,)), ((2,), (0,)), ((0,), (2,))}


def test_separable_convex_game():
    inst = qipg.QipgInstance(2, 1, [[[2]], [[4]]], [[[0]], [[0]]], [[-5], [-4]], [-3], [3])
    res = bf.all_pnes(qipg.build_qipg(inst))
    # argmin of x^2 - 5x over integers is 2 or 3; of 2y^2 - 4y is 1
    assert res.pne_set == {((2,), (1,)), ((3,), (1,))}


def test_qipg_payoff_matches_quadratic_form():
    inst = qipg.generate_qipg(3, 2, [-4, -4], [4, 4], convex=False, seed=9)
    game = qipg.build_qipg(inst)
    rng = np.random.default_rng(0)
    for _ in range(50):
        prof = tuple(tuple(int(v) for v in rng.integers(-4, 5, size=2)) for _ in range(3))
        for i in range(3):
            x = np.array(prof[i], dtype=object)
            others = np.array([v for k in range(3) if k != i for v in prof[k]], dtype=object)
            Q = np.array(inst.Q[i], dtype=object)
            C = np.array(inst.C[i], dtype=object)
            want = Fraction(1, 2) * x.dot(Q.dot(x)) + x.dot(C.dot(others)) + x.dot(np.array(inst.c[i], dtype=object))
            assert game.players[i].utility.evaluate(prof) == want


def test_qipg_generator():
    inst = qipg.generate_qipg(2, 3, convex=True, seed=4)
    for Q in inst.Q:
        M = np.array([[float(v) for v in row] for row in Q])
        assert np.linalg.eigvalsh(M).min() > 0
        assert np.abs(M).max() <= 25
    one = qipg.generate_qipg(1, 1, convex=True, seed=2)
    assert one.Q[0][0][0] > 0
    assert all(-1000 <= v <= 0 for row in inst.lb for v in row)
    assert all(5 <= v <= 1000 for row in inst.ub for v in row)
    assert qipg.generate_qipg(2, 2, seed=11).to_dict() == qipg.generate_qipg(2, 2, seed=11).to_dict()


def test_qipg_symmetrizes_and_validates():
    inst = qipg.QipgInstance(1, 2, [[[1, 4], [0, 1]]], [[[], []]], [[0, 0]], [0, 0], [1, 1])
    assert inst.Q[0][0][1] == inst.Q[0][1][0] == 2
    with pytest.raises(InputError):
        qipg.QipgInstance(1, 1, [[[1]]], [[[]]], [[0]], None, [1])
    with pytest.raises(InputError):
        qipg.generate_qipg(7, 1)


def test_qipg_extra_rows():
    rows = [[{"coeffs": [1, 1], "sense": "<=", "rhs": 2}]]
    inst = qipg.QipgInstance(1, 2, [[[2, 0], [0, 2]]], [[[], []]], [[-6, -6]], [0, 0], [3, 3], rows)
    res = bf.all_pnes(qipg.build_qipg(inst))
    assert res.pne_set == {((1, 1),)}
