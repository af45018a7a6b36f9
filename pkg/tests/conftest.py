from fractions import Fraction

from hypothesis import assume, settings
from hypothesis import strategies as st

from smale_ipd.game import GameSpec, validate_game

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@st.composite
def interleaved_games(draw, min_n=2, max_n=6, require_valid=True):
    """Games with ``p_1 < r_0 < p_2 < r_1 < ...`` drawn as increasing rationals.

    The interleaving gives payoff monotonicity and dominance of defection;
    mean monotonicity is filtered when ``require_valid``.
    """
    n = draw(st.integers(min_n, max_n))
    steps = draw(st.lists(st.fractions(min_value=Fraction(1, 4), max_value=6, max_denominator=6),
                          min_size=2 * n - 1, max_size=2 * n - 1))
    start = draw(st.fractions(min_value=-5, max_value=5, max_denominator=4))
    values = [start]
    for s in steps:
        values.append(values[-1] + s)
    spec = GameSpec(n, tuple(values[0::2]), tuple(values[1::2]))
    if require_valid:
        assume(validate_game(spec).passed)
    return spec


def profiles(n):
    return st.lists(st.sampled_from("cd"), min_size=n, max_size=n).map("".join)
