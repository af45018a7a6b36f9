"""Closed-form limit points and the checks that compare them with simulation."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from smale_ipd.game import GameSpec, RationalLike, mean_payoff, to_rational
from smale_ipd.geometry import Line, affine_eval, is_good_line, is_separation_line


class DegenerateLinesError(ValueError):
    """Every line has slope 1, so the limit point is not determined."""


class OutOfSegmentError(ValueError):
    """The line meets the segment's supporting line outside the segment."""


FULL_COOPERATION = "FullCooperation"
DISSENTERS_BELOW_PN = "DissentersBelowPn"
EXPLOITER_PRESENT = "ExploiterPresent"
INCONCLUSIVE = "Inconclusive"


def harmonic_slope(slopes: Sequence[RationalLike]) -> Fraction:
    values = [to_rational(s) for s in slopes]
    if not values:
        raise ValueError("need at least one slope")
    if any(v <= 0 for v in values):
        raise ValueError(f"slopes must be positive, got {values}")
    return len(values) / sum(1 / v for v in values)


def _mean(values) -> Fraction:
    values = list(values)
    return sum(values, Fraction(0)) / len(values)


@dataclass(frozen=True)
class LimitPrediction:
    point: tuple
    mean: Fraction
    harmonic_slope: Fraction
    mean_offset: Fraction
    lines: tuple

    def residuals(self) -> dict:
        """Signed residuals of the defining equations; all zero for an exact prediction."""
        out = {"fixed_point": self.mean - self.harmonic_slope * (self.mean - self.mean_offset)}
        for j, (line, x) in enumerate(zip(self.lines, self.point)):
            out[f"line_{j + 1}"] = affine_eval(line, (x, self.mean))
        out["mean"] = _mean(self.point) - self.mean
        return out


def predict_limit(spec: GameSpec, lines: Sequence[Line]) -> LimitPrediction:
    """Limit of the running average when player ``j`` eventually plays the simple Smale plan on ``lines[j]``.

    Writing each line as ``y = slope_j * (x - a_j)``, the population mean
    ``m`` solves ``m = h * (m - abar)`` with ``h`` the harmonic mean of the
    slopes and ``abar`` the mean offset, and then ``x_j = a_j + m / slope_j``.
    """
    lines = tuple(lines)
    if len(lines) != spec.n:
        raise ValueError(f"{len(lines)} lines for a {spec.n}-player game")
    for j, line in enumerate(lines):
        if not line.slope > 0:
            raise ValueError(f"line {j + 1} has non-positive slope {line.slope}")
        if not is_separation_line(spec, line):
            raise ValueError(f"line {j + 1} ({line}) is not a separation line")
    if all(line.slope == 1 for line in lines):
        raise DegenerateLinesError("all lines are the diagonal; the limit point is not unique")
    h = harmonic_slope([line.slope for line in lines])
    offsets = [line.x_offset for line in lines]
    abar = _mean(offsets)
    m = -h * abar / (1 - h)
    point = tuple(a + m / line.slope for a, line in zip(offsets, lines))
    return LimitPrediction(point, m, h, abar, lines)


def _slack(f: Callable, X: tuple, tol: Fraction) -> Fraction:
    """``tol`` times the l1 norm of the affine map ``f``'s coefficients at ``X``.

    If every coordinate of ``X`` is within ``tol`` of the true limit then
    ``f(X)`` is within this slack of ``f`` at the limit.
    """
    if tol == 0:
        return Fraction(0)
    base = f(X)
    total = Fraction(0)
    for j in range(len(X)):
        bumped = X[:j] + (X[j] + 1,) + X[j + 1:]
        total += abs(f(bumped) - base)
    return tol * total


@dataclass(frozen=True)
class DissenterReport:
    """Statistics of a limit point when players ``0..k-1`` use good simple Smale plans.

    ``checks`` maps each applicable inequality to whether it holds;
    ``identities`` holds signed residuals of the exact relations between the
    means and ``identity_slack`` the admissible size of each residual.  A
    coordinate-wise tolerance ``tol`` on the point becomes, for an affine
    quantity, ``tol`` times the l1 norm of its coefficients.
    """

    k: int
    good_mean: Fraction
    dissenter_mean: Fraction
    population_mean: Fraction
    harmonic_slope: Fraction
    rest_means: dict  # exploiter index -> mean of the other dissenters
    classification: str
    tolerance: Fraction
    checks: dict = field(default_factory=dict)
    identities: dict = field(default_factory=dict)
    identity_slack: dict = field(default_factory=dict)

    @property
    def identities_hold(self) -> bool:
        return all(abs(v) <= self.identity_slack[name] for name, v in self.identities.items())

    @property
    def passed(self) -> bool:
        return all(self.checks.values()) and self.identities_hold

    @property
    def rest_mean(self) -> Optional[Fraction]:
        if not self.rest_means:
            return None
        return self.rest_means[min(self.rest_means)]


def dissenter_statistics(
    spec: GameSpec,
    point: Sequence[RationalLike],
    good_lines: Sequence[Line],
    tolerance: RationalLike = 0,
    inconclusive_above: Optional[RationalLike] = None,
) -> DissenterReport:
    """Classify a limit point with ``k = len(good_lines)`` good players listed first.

    With ``tolerance = 0`` (closed-form points) every relation is tested
    exactly.  For a simulated point pass the convergence slack (twice the
    Cauchy residual); if it exceeds ``inconclusive_above`` the point is not
    classified.
    """
    n = spec.n
    k = len(good_lines)
    if not 1 <= k <= n - 1:
        raise ValueError(f"number of good players must be in 1..{n - 1}, got {k}")
    for j, line in enumerate(good_lines):
        if not is_good_line(spec, line):
            raise ValueError(f"line of player {j + 1} ({line}) is not a good-plan line")
    X = tuple(to_rational(v) for v in point)
    if len(X) != n:
        raise ValueError(f"point has {len(X)} coordinates for a {n}-player game")
    tol = to_rational(tolerance)
    pn = spec.cooperative_payoff
    h = harmonic_slope([line.slope for line in good_lines])

    def good_mean(V):
        return _mean(V[:k])

    def dissenter_mean(V):
        return _mean(V[k:])

    relations = {
        "population_mean": lambda V: _mean(V) - (k * good_mean(V) + (n - k) * dissenter_mean(V)) / n,
        "averaged_lines": lambda V: (k * (pn - good_mean(V)) + (n - k) * (pn - dissenter_mean(V))) / n
        - h * (pn - good_mean(V)),
        "dissenter_gap": lambda V: (n - k) * (pn - dissenter_mean(V)) - (n * h - k) * (pn - good_mean(V)),
        "dissenter_mean": lambda V: dissenter_mean(V)
        - (good_mean(V) + n * (1 - h) / (n - k) * (pn - good_mean(V))),
    }
    identities = {name: f(X) for name, f in relations.items()}
    identity_slack = {name: _slack(f, X, tol) for name, f in relations.items()}

    xbar, zbar, y = good_mean(X), dissenter_mean(X), _mean(X)
    if inconclusive_above is not None and tol > to_rational(inconclusive_above):
        return DissenterReport(k, xbar, zbar, y, h, {}, INCONCLUSIVE, tol, {}, identities, identity_slack)

    def below(f, strict=True):
        # f(X) < 0 (or <= 0), loosened by the propagated tolerance
        value, slack = f(X), _slack(f, X, tol)
        return value < slack if strict else value <= slack

    checks = {}
    rest_means = {}
    if max(abs(x - pn) for x in X) <= tol:
        classification = FULL_COOPERATION
        checks["at_cooperation_point"] = True
    else:
        # away from full cooperation the dissenters sit strictly between the
        # good players and p_n
        classification = DISSENTERS_BELOW_PN
        checks["good_below_dissenters"] = below(lambda V: good_mean(V) - dissenter_mean(V))
        checks["dissenters_below_pn"] = below(lambda V: dissenter_mean(V) - pn)
        if k <= n - 2:
            c = (1 - n * (1 - h)) / (n - k - 1)
            for i in range(k, n):
                if X[i] < pn:
                    continue

                def rest(V, i=i):
                    return _mean(V[j] for j in range(k, n) if j != i)

                rest_means[i] = rest(X)
                checks[f"rest_bound_{i + 1}"] = below(
                    lambda V, rest=rest: rest(V) - (good_mean(V) - c * (pn - good_mean(V))), strict=False
                )
                checks[f"rest_below_good_{i + 1}"] = below(lambda V, rest=rest: rest(V) - good_mean(V))
            if rest_means:
                classification = EXPLOITER_PRESENT
    return DissenterReport(
        k, xbar, zbar, y, h, rest_means, classification, tol, checks, identities, identity_slack
    )


@dataclass(frozen=True)
class SegmentLimit:
    """Limit when players ``1..n-2`` always cooperate, player ``n`` always defects
    and player ``n-1`` plays the simple Smale plan on ``line``.

    Every round is one of ``V0`` (player ``n-1`` defects) or ``V1`` (it
    cooperates); the limit is ``V0 + a * (V1 - V0)``.
    """

    slope: Fraction
    line: Line
    a: Fraction
    point: tuple
    V0: tuple
    V1: tuple


def segment_vertices(spec: GameSpec) -> tuple:
    n = spec.n
    if n < 3:
        raise ValueError("the segment scenario needs n >= 3")
    V0 = (spec.p(n - 2),) * (n - 2) + (spec.r(n - 2),) * 2
    V1 = (spec.p(n - 1),) * (n - 1) + (spec.r(n - 1),)
    return V0, V1


def segment_a1(spec: GameSpec) -> Fraction:
    """Closed form of the segment parameter for the diagonal line."""
    n = spec.n
    r, m, p = spec.r(n - 2), mean_payoff(spec, n - 2), spec.p(n - 1)
    return (r - m) / ((r - m) + (mean_payoff(spec, n - 1) - p))


def segment_limit(spec: GameSpec, slope: RationalLike) -> SegmentLimit:
    """Intersect the line through ``(p_n, p_n)`` with the given slope and the projected segment."""
    lam = to_rational(slope)
    n = spec.n
    if not lam > 0:
        raise ValueError(f"slope must be positive, got {lam}")
    if lam > 1:
        raise ValueError(f"slope must be at most 1, got {lam}")
    V0, V1 = segment_vertices(spec)
    pn = spec.cooperative_payoff
    m0, m1 = mean_payoff(spec, n - 2), mean_payoff(spec, n - 1)
    x0, x1 = V0[n - 2], V1[n - 2]
    # (m0 + a*(m1 - m0)) - pn == lam * ((x0 + a*(x1 - x0)) - pn)
    den = (m1 - m0) - lam * (x1 - x0)
    if den == 0:
        raise OutOfSegmentError("line is parallel to the segment")
    a = (lam * (x0 - pn) - (m0 - pn)) / den
    if not 0 <= a <= 1:
        raise OutOfSegmentError(f"intersection parameter {a} lies outside [0, 1]")
    point = tuple(v0 + a * (v1 - v0) for v0, v1 in zip(V0, V1))
    return SegmentLimit(lam, Line(lam, (1 - lam) * pn), a, point, V0, V1)
