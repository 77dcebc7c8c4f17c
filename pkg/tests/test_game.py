from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from zero_regrets.errors import InputError, InternalError
from zero_regrets.game import (
    MAXIMIZE, MINIMIZE, Constraint, GameInstance, Monomial2, PlayerProgram, QuadraticUtility, VarDomain,
    as_fraction, check_profile, game_from_dict, game_to_dict, is_feasible, payoff, regret, welfare,
)


def test_binary_domain_bounds():
    assert VarDomain.binary().size == 2
    with pytest.raises(InputError):
        VarDomain(0, 2, "binary")


def test_domain_range_limited_to_62_bits():
    VarDomain(0, 2**62 - 1)
    with pytest.raises(InputError):
        VarDomain(-(2**62), 2**62)


def test_empty_domain_rejected():
    with pytest.raises(InputError):
        VarDomain(3, 2)


@pytest.mark.parametrize("raw, want", [(3, 3), ("5/4", Fraction(5, 4)), ([7, 2], Fraction(7, 2)), (0.5, Fraction(1, 2))])
def test_as_fraction_accepts_common_spellings(raw, want):
    assert as_fraction(raw) == want


def test_as_fraction_rejects_garbage():
    with pytest.raises(InputError):
        as_fraction("abc")
    with pytest.raises(InputError):
        as_fraction(2**70)


def test_example1_payoffs(example1):
    prof = ((1, 0), (1, 0))
    assert payoff(example1, 0, prof) == 2
    assert payoff(example1, 1, prof) == 3
    assert welfare(example1, prof) == 5
    assert welfare(example1, ((0, 1), (0, 1))) == 8


def test_feasibility(example1):
    assert is_feasible(example1, 0, (1, 0))
    assert not is_feasible(example1, 0, (1, 1))


def test_profile_shape_checked(example1):
    with pytest.raises(InputError):
        check_profile(example1, ((1, 0),))
    with pytest.raises(InputError):
        check_profile(example1, ((1, 0, 0), (1, 0)))


def test_negative_regret_is_an_internal_error(example1):
    with pytest.raises(InternalError):
        regret(example1, 0, ((1, 0), (1, 0)), Fraction(1))
    assert regret(example1, 0, ((1, 0), (1, 0)), Fraction(2)) == 0


def test_mixed_senses_rejected():
    b = [VarDomain.binary()]
    with pytest.raises(InputError):
        GameInstance([
            PlayerProgram(b, [], QuadraticUtility(MAXIMIZE, [(0, 0, 1)])),
            PlayerProgram(b, [], QuadraticUtility(MINIMIZE, [(1, 0, 1)])),
        ])


def test_unknown_variable_rejected():
    b = [VarDomain.binary()]
    with pytest.raises(InputError):
        GameInstance([PlayerProgram(b, [], QuadraticUtility(MAXIMIZE, [(0, 3, 1)]))])


def test_constraint_length_checked():
    with pytest.raises(InputError):
        PlayerProgram([VarDomain.binary()], [Constraint((1, 1), "<=", 1)], QuadraticUtility(MAXIMIZE))


def test_monomial_is_canonical():
    assert Monomial2((1, 0), (0, 2), 3) == Monomial2((0, 2), (1, 0), 3)


def test_dict_roundtrip(example2):
    g = game_from_dict(game_to_dict(example2))
    for prof in [((0, 0, 1), (0, 0, 1)), ((1, 0, 0), (0, 1, 0))]:
        assert [payoff(g, i, prof) for i in range(2)] == [payoff(example2, i, prof) for i in range(2)]


def test_malformed_dict():
    with pytest.raises(InputError):
        game_from_dict({"players": [{"domains": [{"lb": 0}]}]})


@given(st.lists(st.integers(-5, 5), min_size=2, max_size=2), st.integers(0, 3), st.integers(0, 3))
def test_polynomial_evaluation_matches_hand_arithmetic(coef, x, y):
    u = QuadraticUtility(MAXIMIZE, [(0, 0, coef[0])], [Monomial2((0, 0), (1, 0), coef[1])], 7)
    assert u.evaluate(((x,), (y,))) == 7 + coef[0] * x + coef[1] * x * y
