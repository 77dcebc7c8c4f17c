from fractions import Fraction

import pytest

from zero_regrets import bruteforce as bf
from zero_regrets.errors import InputError
from zero_regrets.lifting import build_lifted_model
from zero_regrets.models import kpg, qipg
from zero_regrets.oracle import EXACT, GENERAL, NOGOOD, EquilibriumCut, Oracle, Tolerance, extend_values


def test_best_response_example1(example1):
    lifted = build_lifted_model(example1)
    oracle = Oracle(example1, lifted)
    assert oracle.best_response(1, ((0, 1), (0, 1))) == ((1, 0), 4)
    assert oracle.best_response(0, ((0, 1), (0, 1))) == ((0, 1), 7)


def test_separation_on_the_welfare_optimum(example1):
    lifted = build_lifted_model(example1)
    res = Oracle(example1, lifted).separate(((0, 1), (0, 1)))
    assert not res.is_equilibrium
    assert [c.player for c in res.cuts] == [1]
    assert res.regrets == [0, 3]
    cut = res.cuts[0]
    assert cut.provenance == GENERAL and cut.valid and cut.deviation == (1, 0)
    assert not cut.row.satisfied(lifted.induce(((0, 1), (0, 1))))
    assert cut.row.satisfied(lifted.induce(((1, 0), (1, 0))))


def test_equilibrium_is_certified(example1):
    res = Oracle(example1, build_lifted_model(example1)).separate(((1, 0), (1, 0)))
    assert res.is_equilibrium and res.cuts == [] and res.regrets == [0, 0]


def test_batch_one_emits_a_single_cut(example1):
    lifted = build_lifted_model(example1)
    res = Oracle(example1, lifted).separate(((1, 0), (0, 1)), batch="one")
    assert len(res.cuts) == 1
    assert len(Oracle(example1, lifted).separate(((1, 0), (0, 1))).cuts) == 2


def test_parallel_workers_agree(example2):
    lifted = build_lifted_model(example2)
    prof = ((0, 1, 0), (0, 1, 0))
    a = Oracle(example2, lifted).separate(prof)
    b = Oracle(example2, lifted, workers=2).separate(prof)
    assert [c.row for c in a.cuts] == [c.row for c in b.cuts]


def test_absolute_tolerance_keeps_small_regrets(example1):
    lifted = build_lifted_model(example1)
    res = Oracle(example1, lifted).separate(((1, 0), (0, 1)), tol=Tolerance("abs", Fraction(1)))
    assert res.is_equilibrium


def test_relative_tolerance_needs_nonnegative_values():
    inst = qipg.QipgInstance(1, 1, [[[2]]], [[[]]], [[-3]], [0], [3])
    game = qipg.build_qipg(inst)
    with pytest.raises(InputError):
        Oracle(game, build_lifted_model(game)).separate(((0,),), tol=Tolerance("rel", Fraction(1, 2)))


def test_tolerance_validation():
    with pytest.raises(InputError):
        Tolerance("abs", Fraction(-1))
    with pytest.raises(InputError):
        Tolerance("weird")


def test_nogood_cuts_are_flagged_invalid(example1):
    row = build_lifted_model(example1).rows[0]
    assert not EquilibriumCut(None, None, row, NOGOOD).valid


@pytest.mark.parametrize("seed", range(5))
def test_oracle_cuts_hold_at_every_equilibrium(seed):
    game = kpg.build_kpg(kpg.generate_kpg(2, 4, "C", "0.5", seed))
    lifted = build_lifted_model(game)
    oracle = Oracle(game, lifted)
    truth = bf.all_pnes(game)
    space = bf.profile_space(game)
    for x1 in space.strategies[0][:6]:
        for x2 in space.strategies[1][:6]:
            res = oracle.separate((x1, x2))
            assert res.is_equilibrium == ((x1, x2) in truth.pne_set)
            for cut in res.cuts:
                for prof, _ in truth.pnes:
                    assert cut.row.satisfied(lifted.induce(prof))


def test_extend_values_appends_in_order():
    from zero_regrets.lifting import Extension

    ext = Extension([], [lambda p, v: v[0] + 1, lambda p, v: v[1] * 2], [])
    assert extend_values(ext, None, [Fraction(1)]) == [1, 2, 4]
