"""Per-player plans: decision rules driven by the player's own projected average.

A plan sees the round number and the pair ``(x, y)`` = (own running
average, population running average) after the previous round, nothing
else.  Round 1 has no average; each plan carries its own opening move.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import lcm
from typing import Callable, Optional, Union

from smale_ipd.game import C, D, Move, parse_profile
from smale_ipd.geometry import Line, affine_eval


@dataclass(frozen=True)
class SimpleSmale:
    """Defect when strictly above ``line``, cooperate when on or below it."""

    line: Line
    initial: Move = C

    def __post_init__(self) -> None:
        if not self.line.slope > 0:
            raise ValueError(f"a simple Smale plan needs a positive slope, got {self.line.slope}")
        if not isinstance(self.initial, Move):
            raise TypeError("initial move must be a Move")


@dataclass(frozen=True)
class AllC:
    pass


@dataclass(frozen=True)
class AllD:
    pass


@dataclass(frozen=True)
class Scripted:
    """Play ``moves`` on rounds ``1..len(moves)``, then hand over to ``fallback``."""

    moves: tuple
    fallback: "Plan" = field(default_factory=AllC)

    def __post_init__(self) -> None:
        object.__setattr__(self, "moves", parse_profile(self.moves))


@dataclass(frozen=True)
class Eventual:
    """Follow ``pre`` on rounds before ``t0`` and ``inner`` from round ``t0`` on.

    ``initial`` overrides the opening move; by default the opening move is
    taken from whichever plan governs round 1.
    """

    inner: "Plan"
    t0: int
    pre: "Plan" = field(default_factory=AllD)
    initial: Optional[Move] = None

    def __post_init__(self) -> None:
        if isinstance(self.t0, bool) or not isinstance(self.t0, int) or self.t0 < 1:
            raise ValueError(f"activation round must be an integer >= 1, got {self.t0!r}")


Plan = Union[SimpleSmale, AllC, AllD, Scripted, Eventual]


def choose_initial(plan: Plan) -> Move:
    if isinstance(plan, AllC):
        return C
    if isinstance(plan, AllD):
        return D
    if isinstance(plan, SimpleSmale):
        return plan.initial
    if isinstance(plan, Scripted):
        return plan.moves[0] if plan.moves else choose_initial(plan.fallback)
    if isinstance(plan, Eventual):
        if plan.initial is not None:
            return plan.initial
        return choose_initial(plan.inner if plan.t0 <= 1 else plan.pre)
    raise TypeError(f"not a plan: {plan!r}")


def decide(plan: Plan, round_: int, projected: tuple) -> Move:
    """Move for round ``round_`` (>= 2) given the projection of the average after round ``round_ - 1``."""
    if isinstance(plan, SimpleSmale):
        return D if affine_eval(plan.line, projected) > 0 else C
    if isinstance(plan, AllC):
        return C
    if isinstance(plan, AllD):
        return D
    if isinstance(plan, Scripted):
        if round_ <= len(plan.moves):
            return plan.moves[round_ - 1]
        return decide(plan.fallback, round_, projected)
    if isinstance(plan, Eventual):
        return decide(plan.pre if round_ < plan.t0 else plan.inner, round_, projected)
    raise TypeError(f"not a plan: {plan!r}")


@dataclass(frozen=True)
class Tail:
    """What a plan does from round ``start`` onward: ``kind`` is 'allc', 'alld' or 'smale'."""

    kind: str
    start: int
    line: Optional[Line] = None


def tail(plan: Plan) -> Tail:
    if isinstance(plan, AllC):
        return Tail("allc", 1)
    if isinstance(plan, AllD):
        return Tail("alld", 1)
    if isinstance(plan, SimpleSmale):
        return Tail("smale", 1, plan.line)
    if isinstance(plan, Scripted):
        t = tail(plan.fallback)
        return Tail(t.kind, max(t.start, len(plan.moves) + 1), t.line)
    if isinstance(plan, Eventual):
        t = tail(plan.inner)
        return Tail(t.kind, max(t.start, plan.t0), t.line)
    raise TypeError(f"not a plan: {plan!r}")


def eventual_smale_line(plan: Plan) -> Optional[Line]:
    t = tail(plan)
    return t.line if t.kind == "smale" else None


# Integer fast path used by the engine.  Running totals are kept as integers
# in units of 1/scale, so with T rounds played the projection is
# (own / (T*scale), total / (n*T*scale)).  A compiled decider maps
# (T, own, total) to True for cooperate.

Decider = Callable[[int, int, int], bool]


def smale_coefficients(line: Line, n: int, scale: int) -> tuple:
    """Integers ``(A, B, K)`` with ``sign(A*total - B*own - K*T) == sign(L(projection))``."""
    lam, b = line.slope, line.intercept
    den = lcm(lam.denominator, b.denominator)
    lam_n = lam.numerator * (den // lam.denominator)
    b_n = b.numerator * (den // b.denominator)
    # multiply y - lam*x - b by n*T*scale*den > 0
    return den, n * lam_n, n * scale * b_n


def compile_plan(plan: Plan, n: int, scale: int) -> Decider:
    if isinstance(plan, AllC):
        return lambda T, own, total: True
    if isinstance(plan, AllD):
        return lambda T, own, total: False
    if isinstance(plan, SimpleSmale):
        A, B, K = smale_coefficients(plan.line, n, scale)
        return lambda T, own, total: A * total - B * own - K * T <= 0
    if isinstance(plan, Scripted):
        script = tuple(m is C for m in plan.moves)
        length = len(script)
        rest = compile_plan(plan.fallback, n, scale)

        def scripted(T, own, total):
            if T < length:
                return script[T]
            return rest(T, own, total)

        return scripted
    if isinstance(plan, Eventual):
        pre = compile_plan(plan.pre, n, scale)
        inner = compile_plan(plan.inner, n, scale)
        t0 = plan.t0
        return lambda T, own, total: inner(T, own, total) if T + 1 >= t0 else pre(T, own, total)
    raise TypeError(f"not a plan: {plan!r}")


def random_scripted(rng, horizon: int, style: Optional[str] = None, max_prefix: Optional[int] = None) -> Scripted:
    """Seeded adversary built from moves drawn by ``rng`` (a ``random.Random``).

    ``style`` is ``"prefix"`` (a Bernoulli stretch of up to ``max_prefix``
    rounds, default ``horizon // 100``, then always-cooperate or always-defect), ``"periodic"`` (a short
    random block repeated over the whole horizon) or ``"noise"`` (Bernoulli
    moves for the whole horizon).  Without a style one of the first two is
    drawn.  The first two styles have running averages that settle at rate
    ``1/T``; ``"noise"`` only at ``1/sqrt(T)``.
    """
    if style is None:
        style = rng.choice(("prefix", "periodic"))
    q = rng.random()
    if style == "prefix":
        if max_prefix is None:
            max_prefix = max(horizon // 100, 1)
        length = rng.randint(0, max_prefix)
        moves = tuple(C if rng.random() < q else D for _ in range(length))
        return Scripted(moves, rng.choice((AllC(), AllD())))
    if style == "periodic":
        block = tuple(C if rng.random() < q else D for _ in range(rng.randint(1, 12)))
        reps = -(-horizon // len(block))
        return Scripted((block * reps)[:horizon], AllD())
    if style == "noise":
        return Scripted(tuple(C if rng.random() < q else D for _ in range(horizon)), AllD())
    raise ValueError(f"unknown adversary style {style!r}")
