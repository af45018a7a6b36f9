import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import interleaved_games
from smale_ipd.analysis import (
    DISSENTERS_BELOW_PN,
    EXPLOITER_PRESENT,
    FULL_COOPERATION,
    INCONCLUSIVE,
    DegenerateLinesError,
    OutOfSegmentError,
    dissenter_statistics,
    harmonic_slope,
    predict_limit,
    segment_a1,
    segment_limit,
)
from smale_ipd.game import example_42_game, staircase_game
from smale_ipd.geometry import DIAGONAL, Line, affine_eval, good_line, random_separation_line
from smale_ipd.engine import run
from smale_ipd.plans import AllC, AllD, SimpleSmale


def test_harmonic_slope():
    assert harmonic_slope([1, Fraction(1, 2)]) == Fraction(2, 3)
    with pytest.raises(ValueError):
        harmonic_slope([1, 0])
    with pytest.raises(ValueError):
        harmonic_slope([])


def test_good_lines_predict_full_cooperation():
    g = staircase_game(3)
    lines = [good_line(g, s) for s in (Fraction(3, 4), Fraction(4, 5), Fraction(5, 6))]
    pred = predict_limit(g, lines)
    assert pred.point == (4, 4, 4)
    assert all(v == 0 for v in pred.residuals().values())


def test_all_diagonal_is_degenerate():
    with pytest.raises(DegenerateLinesError):
        predict_limit(staircase_game(3), [DIAGONAL] * 3)


def test_prediction_rejects_non_separating_lines():
    with pytest.raises(ValueError):
        predict_limit(staircase_game(3), [DIAGONAL, DIAGONAL, Line(Fraction(1, 2), 10)])


@given(interleaved_games(min_n=3, max_n=5), st.integers(0, 10**6))
def test_prediction_lies_on_every_line(g, seed):
    rng = random.Random(seed)
    lines = [random_separation_line(g, rng, 60) for _ in range(g.n)]
    pred = predict_limit(g, lines)
    y = sum(pred.point, Fraction(0)) / g.n
    assert y == pred.mean
    for line, x in zip(lines, pred.point):
        assert affine_eval(line, (x, y)) == 0


def test_example_42_segment():
    g = example_42_game()
    seg = segment_limit(g, 1)
    assert seg.a == Fraction(7, 11) == segment_a1(g)
    assert seg.point[-1] == Fraction(84, 11)
    assert seg.point == (Fraction(28, 11), Fraction(56, 11), Fraction(84, 11))


@pytest.mark.parametrize("n", range(3, 9))
def test_staircase_segment_closed_form(n):
    g = staircase_game(n)
    seg = segment_limit(g, 1)
    assert seg.a == Fraction(n - 2, n - 1) == segment_a1(g)
    assert seg.point[-1] == 2 * n - 2 + Fraction(n - 3, n - 1)


@pytest.mark.parametrize("n", range(3, 7))
def test_shallower_line_favours_the_defector(n):
    g = staircase_game(n)
    top = segment_limit(g, 1).point[-1]
    for lam in (Fraction(99, 100), Fraction(9, 10), Fraction(5, 6)):
        try:
            assert segment_limit(g, lam).point[-1] > top
        except OutOfSegmentError:
            pass


def test_segment_rejects_bad_slopes():
    g = staircase_game(3)
    with pytest.raises(ValueError):
        segment_limit(g, 0)
    with pytest.raises(ValueError):
        segment_limit(g, 2)
    with pytest.raises(ValueError):
        segment_limit(staircase_game(2), 1)


def test_segment_matches_simulation():
    g = example_42_game()
    traj = run(g, [AllC(), SimpleSmale(DIAGONAL), AllD()], 20000)
    err = max(abs(a - b) for a, b in zip(traj.final.average, segment_limit(g, 1).point))
    assert err < Fraction(1, 1000)


def lines_for(g, slopes):
    return [good_line(g, s) for s in slopes]


def test_full_cooperation_point():
    g = staircase_game(3)
    rep = dissenter_statistics(g, (4, 4, 4), lines_for(g, [Fraction(4, 5)]))
    assert rep.classification == FULL_COOPERATION and rep.passed


def test_dissenters_below_pn():
    # two good players; the defector keeps everyone below (4, 4)
    g = staircase_game(3)
    lines = lines_for(g, [Fraction(4, 5), Fraction(5, 6)])
    pred = predict_limit(g, lines + [Line(Fraction(9, 10), Fraction(1, 10))])
    rep = dissenter_statistics(g, pred.point, lines)
    assert rep.classification in (DISSENTERS_BELOW_PN, FULL_COOPERATION)
    assert rep.passed
    assert all(v == 0 for v in rep.identities.values())


def test_exploiter_present_with_one_good_player():
    g = staircase_game(3)
    lines = lines_for(g, [Fraction(4, 5)])
    sim = run(g, [SimpleSmale(lines[0]), AllC(), AllD()], 20000)
    rep = dissenter_statistics(g, sim.final.average, lines, 2 * sim.cauchy_residual)
    assert rep.classification == EXPLOITER_PRESENT
    assert rep.passed
    assert 2 in rep.rest_means  # the always-defect player


def test_inconclusive_when_not_converged():
    g = staircase_game(3)
    lines = lines_for(g, [Fraction(4, 5)])
    rep = dissenter_statistics(g, (3, 2, 5), lines, tolerance=Fraction(1, 10), inconclusive_above=Fraction(1, 100))
    assert rep.classification == INCONCLUSIVE


def test_dissenter_stats_reject_bad_input():
    g = staircase_game(3)
    with pytest.raises(ValueError):
        dissenter_statistics(g, (4, 4, 4), [DIAGONAL])
    with pytest.raises(ValueError):
        dissenter_statistics(g, (4, 4, 4), lines_for(g, [Fraction(4, 5)] * 3))
    with pytest.raises(ValueError):
        dissenter_statistics(g, (4, 4), lines_for(g, [Fraction(4, 5)]))


@given(interleaved_games(min_n=3, max_n=5), st.integers(0, 10**6), st.data())
def test_identities_exact_at_predicted_points(g, seed, data):
    rng = random.Random(seed)
    n = g.n
    k = data.draw(st.integers(1, n - 1))
    goods = []
    for i in range(k):
        lam = Fraction(n - 1, n) + Fraction(rng.randint(1, 99), 100 * n)
        try:
            goods.append(good_line(g, lam))
        except Exception:
            return
    others = [random_separation_line(g, rng, 60) for _ in range(n - k)]
    try:
        pred = predict_limit(g, goods + others)
    except DegenerateLinesError:
        return
    rep = dissenter_statistics(g, pred.point, goods)
    assert all(v == 0 for v in rep.identities.values())
    assert rep.passed
