import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from zero_regrets.game import MAXIMIZE, GameInstance, Monomial2, PlayerProgram, QuadraticUtility, VarDomain
from zero_regrets.lifting import binary_expand, build_lifted_model, make_row, row_from_expr, LinExpr


@given(st.integers(-50, 50), st.integers(0, 100), st.data())
def test_binary_expansion_roundtrip(lo, span, data):
    dom = VarDomain(lo, lo + span)
    enc = binary_expand(dom)
    assert 2**enc.nbits > span
    v = data.draw(st.integers(dom.lower, dom.upper))
    u = QuadraticUtility(MAXIMIZE, [(0, 0, 1)])
    game = GameInstance([PlayerProgram([dom], [], u)])
    lifted = build_lifted_model(game)
    vals = lifted.induce(((v,),))
    assert lifted.decode(vals) == ((v,),)
    assert all(r.satisfied(vals) for r in lifted.rows)


def test_cap_row_only_for_ragged_ranges():
    assert binary_expand(VarDomain(0, 3)).cap is None
    assert binary_expand(VarDomain(0, 4)).cap == 4
    assert binary_expand(VarDomain(2, 2)).nbits == 0


def test_example1_lift_matches_hand_linearization(example1):
    lifted = build_lifted_model(example1)
    # four strategy bits and one product column per shared item
    assert lifted.ncols == 6
    assert len(lifted.linking_rows()) == 6
    x11, x12 = lifted.x_col(0, 0), lifted.x_col(0, 1)
    x21, x22 = lifted.x_col(1, 0), lifted.x_col(1, 1)
    z1, z2 = lifted.z_cols[(x11, x21)], lifted.z_cols[(x12, x22)]
    assert lifted.utilities[0].coeffs == {x11: 6, x12: 1, z1: -4, z2: 6}
    assert lifted.utilities[1].coeffs == {x21: 4, x22: 2, z1: -1, z2: -1}
    assert lifted.welfare.coeffs == {x11: 6, x12: 1, x21: 4, x22: 2, z1: -5, z2: 5}


def test_products_are_shared(example1):
    lifted = build_lifted_model(example1)
    assert len(lifted.z_cols) == 2


def test_induced_point_satisfies_every_row(example2):
    lifted = build_lifted_model(example2)
    for prof in itertools.product([(0, 0, 0), (0, 0, 1), (0, 1, 0), (1, 0, 0)], repeat=2):
        vals = lifted.induce(prof)
        assert all(r.satisfied(vals) for r in lifted.rows)
        for (a, b), z in lifted.z_cols.items():
            assert vals[z] == vals[a] * vals[b]


def test_integer_quadratic_lift_is_exact():
    dom = VarDomain(-3, 5)
    u = QuadraticUtility(MAXIMIZE, [(0, 0, 2)], [Monomial2((0, 0), (0, 0), Fraction(1, 2)), Monomial2((0, 0), (1, 0), -3)])
    v = QuadraticUtility(MAXIMIZE, [(1, 0, 1)])
    game = GameInstance([PlayerProgram([dom], [], u), PlayerProgram([dom], [], v)])
    lifted = build_lifted_model(game)
    for x in range(-3, 6):
        for y in range(-3, 6):
            vals = lifted.induce(((x,), (y,)))
            assert lifted.utilities[0].evaluate(vals) == u.evaluate(((x,), (y,)))


def test_deviation_expression(example1):
    lifted = build_lifted_model(example1)
    expr, ext = lifted.deviation(1, (1, 0), lifted.ncols)
    assert ext is None
    for prof in [((0, 1), (0, 1)), ((1, 0), (0, 0))]:
        want = example1.players[1].utility.evaluate((prof[0], (1, 0)))
        assert expr.evaluate(lifted.induce(prof)) == want


def test_row_from_expr_clears_denominators():
    row = row_from_expr(LinExpr({0: Fraction(1, 2), 1: Fraction(1, 3)}, Fraction(-1, 6)), "<=")
    assert row.coeffs == ((0, 3), (1, 2)) and row.rhs == 1
    assert make_row({0: 2}, ">=", 1).satisfied([Fraction(1)])


def test_lp_text_mentions_every_column(example1):
    text = build_lifted_model(example1).to_lp_text()
    assert text.startswith("Maximize") and text.rstrip().endswith("End")
    assert text.count("<= c") >= 6


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_kpg_lift_property(seed):
    from zero_regrets.models import kpg

    inst = kpg.generate_kpg(3, 3, "C", "0.5", seed)
    game = kpg.build_kpg(inst)
    lifted = build_lifted_model(game)
    rng = random.Random(seed)
    prof = tuple(tuple(rng.randint(0, 1) for _ in range(3)) for _ in range(3))
    vals = lifted.induce(prof)
    for i in range(3):
        assert lifted.utilities[i].evaluate(vals) == game.players[i].utility.evaluate(prof)
