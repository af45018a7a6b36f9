"""The symmetric n-player game: payoff tables, axiom checks and round payoffs.

Indexing follows the usual convention for this game: ``p_k`` (payoff to a
cooperator when ``k`` players cooperate) is defined for ``k = 1..n`` and
``r_k`` (payoff to a defector) for ``k = 0..n-1``.  Storage is zero-based,
so ``coop_payoffs[k - 1] == p_k`` while ``defect_payoffs[k] == r_k``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence, Union

RationalLike = Union[int, Fraction, str]


class MalformedGameError(ValueError):
    """Structural problem with a game description (as opposed to an axiom violation)."""


class Move(enum.Enum):
    C = "c"
    D = "d"

    def __str__(self) -> str:
        return self.value


C = Move.C
D = Move.D

MoveProfile = tuple  # tuple[Move, ...] of length n


def to_rational(value: RationalLike) -> Fraction:
    """Parse an exact rational from an int, a Fraction or an ``"a/b"`` string.

    Floats are refused: a binary float is almost never the number the
    caller meant, and every downstream comparison is exact.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not payoffs")
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise ValueError("empty rational literal")
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational literal: {value!r}") from exc
    raise TypeError(f"expected int, Fraction or 'a/b' string, got {type(value).__name__}")


def parse_profile(moves: Union[str, Iterable[Move]]) -> tuple:
    """``"ccd"`` -> ``(C, C, D)``; Move iterables pass through as a tuple."""
    if isinstance(moves, str):
        try:
            return tuple(Move(ch) for ch in moves.lower())
        except ValueError as exc:
            raise ValueError(f"moves must be written with 'c' and 'd': {moves!r}") from exc
    profile = tuple(moves)
    if not all(isinstance(m, Move) for m in profile):
        raise TypeError("profile entries must be Move values")
    return profile


@dataclass(frozen=True)
class GameSpec:
    n: int
    coop_payoffs: tuple = field()  # p_1..p_n
    defect_payoffs: tuple = field()  # r_0..r_{n-1}

    def __post_init__(self) -> None:
        if isinstance(self.n, bool) or not isinstance(self.n, int):
            raise MalformedGameError(f"n must be an integer, got {self.n!r}")
        if self.n < 2:
            raise MalformedGameError(f"n must be at least 2, got {self.n}")
        try:
            coop = tuple(to_rational(v) for v in self.coop_payoffs)
            defect = tuple(to_rational(v) for v in self.defect_payoffs)
        except (TypeError, ValueError) as exc:
            raise MalformedGameError(str(exc)) from exc
        if len(coop) != self.n:
            raise MalformedGameError(f"expected {self.n} cooperator payoffs, got {len(coop)}")
        if len(defect) != self.n:
            raise MalformedGameError(f"expected {self.n} defector payoffs, got {len(defect)}")
        object.__setattr__(self, "coop_payoffs", coop)
        object.__setattr__(self, "defect_payoffs", defect)

    def p(self, k: int) -> Fraction:
        """Cooperator payoff with ``k`` cooperators, ``1 <= k <= n``."""
        if not 1 <= k <= self.n:
            raise ValueError(f"p_k needs 1 <= k <= {self.n}, got {k}")
        return self.coop_payoffs[k - 1]

    def r(self, k: int) -> Fraction:
        """Defector payoff with ``k`` cooperators, ``0 <= k <= n-1``."""
        if not 0 <= k <= self.n - 1:
            raise ValueError(f"r_k needs 0 <= k <= {self.n - 1}, got {k}")
        return self.defect_payoffs[k]

    def m(self, k: int) -> Fraction:
        return mean_payoff(self, k)

    @property
    def cooperative_payoff(self) -> Fraction:
        return self.coop_payoffs[-1]

    @property
    def payoff_range(self) -> tuple:
        values = self.coop_payoffs + self.defect_payoffs
        return min(values), max(values)


@dataclass(frozen=True)
class Violation:
    axiom: str
    k: int
    witness: tuple

    def __str__(self) -> str:
        return f"{self.axiom} fails at k={self.k}: {', '.join(str(w) for w in self.witness)}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple = ()

    @property
    def passed(self) -> bool:
        return not self.violations

    def axioms_failed(self) -> list:
        seen = []
        for v in self.violations:
            if v.axiom not in seen:
                seen.append(v.axiom)
        return seen


def mean_payoff(spec: GameSpec, k: int) -> Fraction:
    """Population-average payoff of a round with ``k`` cooperators."""
    n = spec.n
    if isinstance(k, bool) or not isinstance(k, int) or not 0 <= k <= n:
        raise ValueError(f"cooperator count must be in 0..{n}, got {k!r}")
    if k == 0:
        return spec.r(0)
    if k == n:
        return spec.p(n)
    return (k * spec.p(k) + (n - k) * spec.r(k)) / n


def validate_game(spec: GameSpec) -> ValidationReport:
    """Check payoff monotonicity, dominance of defection and mean monotonicity.

    Every violated inequality is reported, ordered by axiom and then by
    ``k``, so the first entry per axiom carries its smallest witness.
    """
    n = spec.n
    out = []
    for k in range(1, n):
        if not spec.r(k - 1) < spec.r(k):
            out.append(Violation("defector_monotone", k, (spec.r(k - 1), spec.r(k))))
    for k in range(2, n + 1):
        if not spec.p(k - 1) < spec.p(k):
            out.append(Violation("cooperator_monotone", k, (spec.p(k - 1), spec.p(k))))
    for k in range(1, n + 1):
        if not spec.p(k) < spec.r(k - 1):
            out.append(Violation("defection_dominates", k, (spec.p(k), spec.r(k - 1))))
    means = [mean_payoff(spec, k) for k in range(n + 1)]
    for k in range(1, n + 1):
        if not means[k - 1] < means[k]:
            out.append(Violation("mean_monotone", k, (means[k - 1], means[k])))
    return ValidationReport(tuple(out))


def switching_gain_violations(spec: GameSpec, form: str = "printed") -> list:
    """Indices ``k`` where the aggregate-gain inequality for a switch to cooperation fails.

    When one of ``k - 1`` cooperators' partners switches from defection to
    cooperation it pays ``r_{k-1} - p_k``; the condition asks that the other
    players gain more than that in total.

    ``form="printed"`` brackets the middle range ``2 <= k <= n-1`` as::

        r_{k-1} - p_k < (k-1) * [(p_k - p_{k-1}) + (n-k) * (r_k - r_{k-1})]

    which is not equivalent to mean monotonicity once ``n >= 4``.
    ``form="exact"`` is the grouping obtained by expanding
    ``n * (m_k - m_{k-1}) > 0``::

        r_{k-1} - p_k < (k-1) * (p_k - p_{k-1}) + (n-k) * (r_k - r_{k-1})

    The endpoint cases ``k = 1`` and ``k = n`` coincide for both forms.
    """
    if form not in ("printed", "exact"):
        raise ValueError(f"form must be 'printed' or 'exact', got {form!r}")
    n = spec.n
    p, r = spec.p, spec.r
    bad = []
    if not r(0) - p(1) < (n - 1) * (r(1) - r(0)):
        bad.append(1)
    for k in range(2, n):
        if form == "printed":
            rhs = (k - 1) * ((p(k) - p(k - 1)) + (n - k) * (r(k) - r(k - 1)))
        else:
            rhs = (k - 1) * (p(k) - p(k - 1)) + (n - k) * (r(k) - r(k - 1))
        if not r(k - 1) - p(k) < rhs:
            bad.append(k)
    if not r(n - 1) - p(n) < (n - 1) * (p(n) - p(n - 1)):
        bad.append(n)
    return bad


def payoff_vector(spec: GameSpec, profile: Union[str, Sequence[Move]]) -> tuple:
    """Per-player payoffs of one round."""
    moves = parse_profile(profile)
    if len(moves) != spec.n:
        raise ValueError(f"profile has {len(moves)} moves for a {spec.n}-player game")
    k = sum(1 for m in moves if m is C)
    coop = spec.p(k) if k >= 1 else None
    defect = spec.r(k) if k <= spec.n - 1 else None
    return tuple(coop if m is C else defect for m in moves)


def staircase_game(n: int) -> GameSpec:
    """The game with ``p_k = 2k - 2`` and ``r_k = 2k + 1``, i.e. ``(p_1, r_0, p_2, r_1, ...) = (0, 1, 2, 3, ...)``."""
    if isinstance(n, bool) or not isinstance(n, int) or n < 2:
        raise ValueError(f"staircase game needs an integer n >= 2, got {n!r}")
    return GameSpec(
        n,
        tuple(Fraction(2 * k - 2) for k in range(1, n + 1)),
        tuple(Fraction(2 * k + 1) for k in range(n)),
    )


def example_42_game() -> GameSpec:
    """Three-player game ``(p_1, r_0, p_2, p_3, r_1, r_2) = (0, 2, 4, 6, 7, 8)``.

    Here ``r_1 = 7`` exceeds the cooperative payoff ``p_3 = 6``.
    """
    return GameSpec(3, (0, 4, 6), (2, 7, 8))


def classic_pd(S: RationalLike, P: RationalLike, R: RationalLike, T: RationalLike) -> GameSpec:
    """Two-player game from the familiar (S, P, R, T) table."""
    return GameSpec(2, (S, R), (P, T))
