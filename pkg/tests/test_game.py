from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import interleaved_games, profiles
from smale_ipd.game import (
    C,
    D,
    GameSpec,
    MalformedGameError,
    classic_pd,
    example_42_game,
    mean_payoff,
    parse_profile,
    payoff_vector,
    staircase_game,
    switching_gain_violations,
    to_rational,
    validate_game,
)


def test_staircase_three_player_table():
    g = staircase_game(3)
    assert [g.p(k) for k in (1, 2, 3)] == [0, 2, 4]
    assert [g.r(k) for k in (0, 1, 2)] == [1, 3, 5]
    assert [mean_payoff(g, k) for k in range(4)] == [1, 2, 3, 4]
    assert g.cooperative_payoff == 4


def test_mean_payoff_formula_by_hand():
    g = example_42_game()
    # one cooperator gets 0, two defectors get 7 each
    assert mean_payoff(g, 1) == Fraction(14, 3)
    assert mean_payoff(g, 2) == Fraction(16, 3)
    assert mean_payoff(g, 0) == 2 and mean_payoff(g, 3) == 6


@pytest.mark.parametrize("k", [-1, 4, 1.0, True])
def test_mean_payoff_rejects_bad_count(k):
    with pytest.raises(ValueError):
        mean_payoff(staircase_game(3), k)


def test_valid_games_pass():
    for g in (staircase_game(2), staircase_game(7), example_42_game(), classic_pd(0, 1, 3, 5)):
        assert validate_game(g).passed


def test_violations_reported_with_witness():
    rep = validate_game(GameSpec(2, (0, 3), (1, 2)))
    assert not rep.passed
    assert rep.axioms_failed() == ["defection_dominates", "mean_monotone"]
    dom = next(v for v in rep.violations if v.axiom == "defection_dominates")
    assert dom.k == 2 and dom.witness == (3, 2)


def test_defector_monotone_violation():
    rep = validate_game(GameSpec(3, (0, 1, 2), (5, 4, 6)))
    assert "defector_monotone" in rep.axioms_failed()


@pytest.mark.parametrize(
    "args",
    [(1, (0,), (1,)), (3, (0, 1), (1, 2, 3)), (3, (0, 1, 2), (1, 2)), (2, (0, "x"), (1, 2))],
)
def test_malformed_games(args):
    with pytest.raises((MalformedGameError, ValueError)):
        GameSpec(*args)


def test_rationals_are_exact():
    assert to_rational("7/11") == Fraction(7, 11)
    assert to_rational(3) == 3
    with pytest.raises(TypeError):
        to_rational(0.5)


def test_profile_parsing():
    assert parse_profile("cdC") == (C, D, C)
    with pytest.raises(ValueError):
        parse_profile("cx")


def test_payoff_vector_example():
    g = example_42_game()
    assert payoff_vector(g, "ccd") == (4, 4, 8)
    assert payoff_vector(g, "ddd") == (2, 2, 2)
    with pytest.raises(ValueError):
        payoff_vector(g, "cc")


def test_printed_grouping_is_weaker_than_mean_monotonicity():
    # the printed grouping holds for every k while m_3 == m_2
    g = GameSpec(4, (5, 11, 13, 23), (7, 12, 21, 25))
    assert mean_payoff(g, 3) == mean_payoff(g, 2)
    assert switching_gain_violations(g, "printed") == []
    assert switching_gain_violations(g, "exact") == [3]


def test_groupings_agree_for_three_players():
    g = staircase_game(3)
    assert switching_gain_violations(g, "printed") == switching_gain_violations(g, "exact") == []


@given(interleaved_games())
def test_means_strictly_between_payoffs(g):
    for k in range(1, g.n):
        assert g.p(k) < mean_payoff(g, k) < g.r(k)


@given(interleaved_games(require_valid=False), st.data())
def test_payoff_vector_averages_to_mean(g, data):
    profile = data.draw(profiles(g.n))
    k = profile.count("c")
    assert sum(payoff_vector(g, profile)) / g.n == mean_payoff(g, k)


@given(interleaved_games(require_valid=False))
def test_exact_grouping_equivalent_to_mean_monotone(g):
    failing = sorted(v.k for v in validate_game(g).violations if v.axiom == "mean_monotone")
    assert switching_gain_violations(g, "exact") == failing


@given(st.integers(2, 12))
def test_staircase_always_valid(n):
    g = staircase_game(n)
    assert validate_game(g).passed
    assert g.cooperative_payoff == 2 * n - 2
