"""Planar geometry of the strategy set: vertices, lines, separation tests.

A point of the strategy set is ``(x, y)`` with ``x`` one player's average
payoff and ``y`` the population average.  All coordinates are Fractions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from smale_ipd.game import GameSpec, RationalLike, mean_payoff, to_rational


class InfeasibleLineError(ValueError):
    """A requested line is not a separation line for the given game."""


@dataclass(frozen=True)
class Line:
    """The line ``y = slope * x + intercept``."""

    slope: Fraction
    intercept: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "slope", to_rational(self.slope))
        object.__setattr__(self, "intercept", to_rational(self.intercept))

    @classmethod
    def through(cls, point: tuple, slope: RationalLike) -> "Line":
        x0, y0 = (to_rational(c) for c in point)
        lam = to_rational(slope)
        return cls(lam, y0 - lam * x0)

    @property
    def x_offset(self) -> Fraction:
        """``a`` in the form ``y = slope * (x - a)``; needs a nonzero slope."""
        if self.slope == 0:
            raise ValueError("a horizontal line has no x-offset form")
        return -self.intercept / self.slope

    def __call__(self, point: tuple) -> Fraction:
        return affine_eval(self, point)

    def __str__(self) -> str:
        return f"y = {self.slope}*x + {self.intercept}"


DIAGONAL = Line(Fraction(1), Fraction(0))


def affine_eval(line: Line, point: tuple) -> Fraction:
    """``y - slope*x - intercept``: positive strictly above the line, zero on it."""
    x, y = point
    return y - line.slope * x - line.intercept


@dataclass(frozen=True)
class StrategySet:
    """Projected vertices, split by the move of the projected player.

    ``cooperation_points[k - 1] == (p_k, m_k)`` for ``k = 1..n`` and
    ``defection_points[k] == (r_k, m_k)`` for ``k = 0..n-1``.
    """

    cooperation_points: tuple
    defection_points: tuple

    @property
    def vertices(self) -> tuple:
        return self.cooperation_points + self.defection_points

    def hull(self) -> list:
        """Extreme points in counter-clockwise order (Andrew's monotone chain)."""
        pts = sorted(set(self.vertices))
        if len(pts) <= 2:
            return pts

        def cross(o, a, b):
            return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

        lower, upper = [], []
        for pt in pts:
            while len(lower) >= 2 and cross(lower[-2], lower[-1], pt) <= 0:
                lower.pop()
            lower.append(pt)
        for pt in reversed(pts):
            while len(upper) >= 2 and cross(upper[-2], upper[-1], pt) <= 0:
                upper.pop()
            upper.append(pt)
        return lower[:-1] + upper[:-1]

    def contains(self, point: tuple) -> bool:
        """Exact membership in the convex hull (boundary included)."""
        hull = self.hull()
        x, y = point
        if len(hull) < 3:
            raise ValueError("degenerate strategy set")
        for (x0, y0), (x1, y1) in zip(hull, hull[1:] + hull[:1]):
            if (x1 - x0) * (y - y0) - (y1 - y0) * (x - x0) < 0:
                return False
        return True

    def max_affine(self, line: Line) -> Fraction:
        """Maximum of ``affine_eval(line, .)`` over the set, attained at a vertex."""
        return max(affine_eval(line, v) for v in self.vertices)

    def min_affine(self, line: Line) -> Fraction:
        return min(affine_eval(line, v) for v in self.vertices)


def strategy_vertices(spec: GameSpec) -> StrategySet:
    n = spec.n
    coop = tuple((spec.p(k), mean_payoff(spec, k)) for k in range(1, n + 1))
    defect = tuple((spec.r(k), mean_payoff(spec, k)) for k in range(n))
    return StrategySet(coop, defect)


def is_separation_line(spec: GameSpec, line: Line) -> bool:
    """Cooperation points on or above ``line`` and defection points on or below it."""
    sset = strategy_vertices(spec)
    return all(affine_eval(line, pt) >= 0 for pt in sset.cooperation_points) and all(
        affine_eval(line, pt) <= 0 for pt in sset.defection_points
    )


def separation_slope_interval(spec: GameSpec):
    """Closed interval ``(lo, hi)`` of slopes admitting a separation line, or None.

    For a fixed slope a separating intercept exists iff every cooperation
    point ``c`` and defection point ``d`` satisfy
    ``slope * (x_d - x_c) >= y_d - y_c``; each pair bounds the slope from
    one side.
    """
    sset = strategy_vertices(spec)
    lo, hi = None, None
    for xc, yc in sset.cooperation_points:
        for xd, yd in sset.defection_points:
            dx, dy = xd - xc, yd - yc
            if dx == 0:
                if dy > 0:
                    return None
                continue
            bound = dy / dx
            if dx > 0:
                lo = bound if lo is None else max(lo, bound)
            else:
                hi = bound if hi is None else min(hi, bound)
    if lo is not None and hi is not None and lo > hi:
        return None
    return lo, hi


@dataclass(frozen=True)
class SlopeBounds:
    zero_slope_allowed: bool
    max_slope: Fraction
    chord_slope: Fraction
    interval: tuple


def feasible_slope_bounds(spec: GameSpec) -> SlopeBounds:
    """Confirm that every separation line has slope in ``[0, 1]`` (and ``> 0`` when n > 2).

    ``chord_slope`` is the slope of the chord from ``(p_1, m_1)`` to
    ``(r_{n-1}, m_{n-1})``; any separation line has at least this slope,
    which is positive for n > 2 and zero for n = 2.  Raises AssertionError
    if the exact feasible interval contradicts either bound.
    """
    n = spec.n
    x0, y0 = spec.p(1), mean_payoff(spec, 1)
    x1, y1 = spec.r(n - 1), mean_payoff(spec, n - 1)
    chord = (y1 - y0) / (x1 - x0)
    interval = separation_slope_interval(spec)
    if interval is None:
        raise AssertionError("no separation line exists for this game")
    lo, hi = interval
    if lo is None or hi is None:
        raise AssertionError(f"unbounded separation slope interval {interval}")
    if lo < chord:
        raise AssertionError(f"separation slope {lo} below chord slope {chord}")
    if hi > 1:
        raise AssertionError(f"separation slope {hi} exceeds 1")
    if n > 2 and not lo > 0:
        raise AssertionError(f"n={n} but a separation line with slope {lo} exists")
    if lo < 0:
        raise AssertionError(f"negative separation slope {lo}")
    if not is_separation_line(spec, DIAGONAL) or hi != 1:
        raise AssertionError("the diagonal should be the steepest separation line")
    return SlopeBounds(
        zero_slope_allowed=(lo == 0),
        max_slope=hi,
        chord_slope=chord,
        interval=(lo, hi),
    )


def good_line(spec: GameSpec, slope: RationalLike) -> Line:
    """Line through ``(p_n, p_n)`` with slope strictly between ``(n-1)/n`` and 1.

    The slope window is necessary for a good plan but does not by itself
    guarantee separation, so the line is checked against this game.
    """
    lam = to_rational(slope)
    n = spec.n
    if not Fraction(n - 1, n) < lam < 1:
        raise ValueError(f"good-plan slope must lie in ({n - 1}/{n}, 1), got {lam}")
    pn = spec.cooperative_payoff
    line = Line(lam, (1 - lam) * pn)
    if not is_separation_line(spec, line):
        raise InfeasibleLineError(f"{line} does not separate the strategy set of this game")
    return line


def is_good_line(spec: GameSpec, line: Line) -> bool:
    n = spec.n
    pn = spec.cooperative_payoff
    return (
        Fraction(n - 1, n) < line.slope < 1
        and affine_eval(line, (pn, pn)) == 0
        and is_separation_line(spec, line)
    )


def project(payoff: Sequence, j: int) -> tuple:
    """``(payoff[j], mean(payoff))`` for the zero-based player index ``j``."""
    n = len(payoff)
    if not 0 <= j < n:
        raise IndexError(f"player index {j} out of range for {n} players")
    return (payoff[j], sum(payoff, Fraction(0)) / n)


def separation_intercept_range(spec: GameSpec, slope: RationalLike):
    """Closed interval of intercepts making ``y = slope*x + b`` a separation line, or None."""
    lam = to_rational(slope)
    sset = strategy_vertices(spec)
    lo = max(y - lam * x for x, y in sset.defection_points)
    hi = min(y - lam * x for x, y in sset.cooperation_points)
    return (lo, hi) if lo <= hi else None


def random_separation_line(spec: GameSpec, rng, grid: int = 1000) -> Line:
    """A separation line with positive slope drawn on a rational grid by ``rng``.

    The slope is drawn from the feasible slope interval (kept strictly below 1
    and strictly positive), the intercept from the feasible intercept range
    at that slope.
    """
    interval = separation_slope_interval(spec)
    if interval is None:
        raise InfeasibleLineError("this game has no separation line")
    lo, hi = interval
    lo = max(lo, Fraction(1, grid))
    hi = min(hi, 1 - Fraction(1, grid))
    lam = lo + (hi - lo) * Fraction(rng.randint(0, grid), grid)
    b_lo, b_hi = separation_intercept_range(spec, lam)
    b = b_lo + (b_hi - b_lo) * Fraction(rng.randint(0, grid), grid)
    return Line(lam, b)
