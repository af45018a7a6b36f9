"""Repeated play with exact running averages.

Internally the engine keeps integer running totals in units of ``1/scale``
(``scale`` is the common denominator of the payoff table), so a round
costs a handful of integer operations and no gcd reductions.  The
average after ``T`` rounds is ``totals / (T * scale)``; Fractions are only
materialised at snapshot rounds.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from math import lcm
from typing import Callable, Iterable, Optional, Sequence, TextIO, Union

from smale_ipd.game import C, D, GameSpec, Move, mean_payoff, parse_profile, payoff_vector
from smale_ipd.geometry import Line, affine_eval, project, strategy_vertices
from smale_ipd.plans import Plan, choose_initial, compile_plan, smale_coefficients, tail


class PlanCountError(ValueError):
    """Number of plans does not match the number of players."""


class BoundHypothesisError(ValueError):
    """The player's plan or the line does not meet the hypotheses of the decay bound."""


@dataclass(frozen=True)
class SimState:
    round: int
    average: tuple
    last_moves: tuple

    def projection(self, j: int) -> tuple:
        return project(self.average, j)


def initial_state(spec: GameSpec, moves) -> SimState:
    profile = parse_profile(moves)
    return SimState(1, payoff_vector(spec, profile), profile)


def step(spec: GameSpec, state: SimState, moves) -> SimState:
    """Advance one round: ``s' = (T*s + S) / (T + 1)``."""
    profile = parse_profile(moves)
    payoff = payoff_vector(spec, profile)
    T = state.round
    avg = tuple((T * s + x) / (T + 1) for s, x in zip(state.average, payoff))
    return SimState(T + 1, avg, profile)


def sup_distance(a: Sequence, b: Sequence) -> Fraction:
    return max(abs(Fraction(x) - Fraction(y)) for x, y in zip(a, b))


def to_decimal(value: Fraction, digits: int = 12) -> str:
    with localcontext() as ctx:
        ctx.prec = digits
        d = Decimal(value.numerator) / Decimal(value.denominator)
    text = f"{d:f}"
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    return "0" if text in ("-0", "") else text


@dataclass(frozen=True)
class Trajectory:
    snapshots: tuple  # ((round, average), ...) with strictly increasing rounds
    final: SimState

    @property
    def horizon(self) -> int:
        return self.final.round

    def average_at(self, round_: int) -> tuple:
        for T, avg in self.snapshots:
            if T == round_:
                return avg
        raise KeyError(f"round {round_} was not sampled")

    @property
    def cauchy_residual(self) -> Fraction:
        """``max |s^T - s^H|`` over sampled rounds ``T`` in ``[H//2, H]``.

        With only ``H//2`` and ``H`` sampled this is ``|s^H - s^{H//2}|``.
        Periodic play can make that two-point difference vanish while the
        error does not, so ``run`` samples several rounds across the window.
        """
        H = self.horizon
        if H < 2:
            return Fraction(0)
        final = self.final.average
        return max(sup_distance(final, avg) for T, avg in self.snapshots if T >= H // 2)

    def write_csv(self, stream: TextIO, digits: int = 12) -> None:
        n = len(self.final.average)
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["round"] + [f"s_{i}" for i in range(1, n + 1)] + ["pi_mean"])
        for T, avg in self.snapshots:
            mean = sum(avg, Fraction(0)) / n
            writer.writerow([T] + [to_decimal(v, digits) for v in avg] + [to_decimal(mean, digits)])

    def to_csv(self, digits: int = 12) -> str:
        buf = io.StringIO()
        self.write_csv(buf, digits)
        return buf.getvalue()


TAIL_SAMPLES = 16


def snapshot_rounds(
    horizon: int,
    stride: Union[None, str, int] = None,
    extra: Iterable[int] = (),
    tail_samples: int = TAIL_SAMPLES,
) -> list:
    """Rounds to sample: geometric ``1, 2, 4, ...`` by default or multiples of an integer stride.

    Round 1 and ``horizon`` are always included, plus ``tail_samples + 1``
    rounds spread over ``[horizon // 2, horizon]`` for the Cauchy residual.
    """
    rounds = {1, horizon}
    if horizon >= 2:
        half = horizon // 2
        rounds.add(half)
        for i in range(1, tail_samples):
            rounds.add(half + (horizon - half) * i // tail_samples)
    if stride is None or stride == "geometric":
        t = 1
        while t <= horizon:
            rounds.add(t)
            t *= 2
    elif isinstance(stride, int) and not isinstance(stride, bool) and stride > 0:
        rounds.update(range(stride, horizon + 1, stride))
    else:
        raise ValueError(f"snapshot stride must be 'geometric' or a positive integer, got {stride!r}")
    rounds.update(t for t in extra if 1 <= t <= horizon)
    return sorted(rounds)


class _Table:
    """Integer payoff table in units of 1/scale."""

    def __init__(self, spec: GameSpec):
        n = spec.n
        values = spec.coop_payoffs + spec.defect_payoffs
        self.n = n
        self.scale = lcm(*(v.denominator for v in values))
        s = self.scale
        self.coop = [0] + [int(spec.p(k) * s) for k in range(1, n + 1)]
        self.defect = [int(spec.r(k) * s) for k in range(n)] + [0]
        self.round_total = [int(n * mean_payoff(spec, k) * s) for k in range(n + 1)]


def payoff_scale(spec: GameSpec) -> int:
    """Common denominator of the payoff table: totals passed to round hooks are in units of ``1/scale``."""
    return _Table(spec).scale


RoundHook = Callable[[int, list, list, int], None]


def simulate(
    spec: GameSpec,
    plans: Sequence[Plan],
    horizon: int,
    on_round: Optional[RoundHook] = None,
    sample_rounds: Sequence[int] = (),
):
    """Play ``horizon`` rounds; return ``(table, samples, last_moves)``.

    ``samples`` maps each requested round to its integer totals
    ``(own totals list, population total)``.  ``on_round(T, moves, totals,
    total)`` sees the state after round ``T``; ``moves`` holds True for
    cooperate, and the lists must not be mutated.
    """
    n = spec.n
    if len(plans) != n:
        raise PlanCountError(f"{len(plans)} plans for a {n}-player game")
    if isinstance(horizon, bool) or not isinstance(horizon, int) or horizon < 1:
        raise ValueError(f"horizon must be a positive integer, got {horizon!r}")
    table = _Table(spec)
    coop, defect, round_total = table.coop, table.defect, table.round_total
    deciders = [compile_plan(p, n, table.scale) for p in plans]
    wanted = set(sample_rounds)
    samples = {}

    moves = [choose_initial(p) is C for p in plans]
    totals = [0] * n
    total = 0
    for T in range(1, horizon + 1):
        if T > 1:
            played = T - 1
            moves = [f(played, own, total) for f, own in zip(deciders, totals)]
        k = sum(moves)
        pc, pd = coop[k], defect[k]
        totals = [t + (pc if m else pd) for t, m in zip(totals, moves)]
        total += round_total[k]
        if on_round is not None:
            on_round(T, moves, totals, total)
        if T in wanted:
            samples[T] = (totals, total)
    return table, samples, tuple(C if m else D for m in moves)


def run(
    spec: GameSpec,
    plans: Sequence[Plan],
    horizon: int,
    snapshot_stride: Union[None, str, int] = None,
    extra_rounds: Iterable[int] = (),
    on_round: Optional[RoundHook] = None,
    tail_samples: int = TAIL_SAMPLES,
) -> Trajectory:
    """Play the repeated game and sample the running average."""
    rounds = snapshot_rounds(horizon, snapshot_stride, extra_rounds, tail_samples)
    table, samples, last = simulate(spec, plans, horizon, on_round, rounds)
    snaps = tuple(
        (T, tuple(Fraction(t, T * table.scale) for t in samples[T][0])) for T in rounds
    )
    return Trajectory(snaps, SimState(horizon, snaps[-1][1], last))


@dataclass(frozen=True)
class BoundCheck:
    """Outcome of checking ``side * L(projection of s^T) <= M0 / T`` for ``T >= t0``.

    ``side`` is +1 for a player who defects whenever strictly above the
    line and -1 for one who cooperates whenever strictly below it.
    ``max_violation`` is the supremum of ``side * L - M0 / T``; the bound
    holds iff it is not positive.
    """

    player: int
    line: Line
    t0: int
    side: int
    M: Fraction
    M0: Fraction
    max_violation: Fraction
    worst_round: int
    rounds_checked: int
    violations: int

    @property
    def passed(self) -> bool:
        return self.max_violation <= 0 and self.violations == 0


class BoundMonitor:
    """Per-round check of ``side * L(projection of s^T) <= M0 / T`` for one player.

    With ``side=+1`` the player must defect whenever strictly above
    ``line`` from round ``t0`` on, and every defection point must lie on or
    below the line.  ``side=-1`` is the mirror statement for a player who
    cooperates whenever strictly below it.  ``M`` is the maximum of
    ``side * L`` over the strategy vertices plus one, and ``M0 = t0 * M``.

    Pass :meth:`observe` (or several monitors via :func:`chain_hooks`) as the
    ``on_round`` hook of :func:`run` or :func:`simulate`.
    """

    def __init__(
        self,
        spec: GameSpec,
        plans: Sequence[Plan],
        player: int,
        line: Optional[Line] = None,
        t0: Optional[int] = None,
        side: int = 1,
    ):
        if side not in (1, -1):
            raise ValueError("side must be +1 or -1")
        n = spec.n
        if len(plans) != n:
            raise PlanCountError(f"{len(plans)} plans for a {n}-player game")
        if not 0 <= player < n:
            raise IndexError(f"player index {player} out of range for {n} players")
        behaviour = tail(plans[player])
        if line is None:
            if behaviour.line is None:
                raise BoundHypothesisError("no line given and the plan is not a Smale plan")
            line = behaviour.line
        ok_kind = "alld" if side == 1 else "allc"
        if behaviour.kind == "smale":
            if behaviour.line != line:
                raise BoundHypothesisError(f"player {player} uses {behaviour.line}, not {line}")
        elif behaviour.kind != ok_kind:
            raise BoundHypothesisError(
                f"player {player} eventually plays {behaviour.kind}, which does not "
                f"{'defect above' if side == 1 else 'cooperate below'} the line"
            )
        if t0 is None:
            t0 = behaviour.start
        if t0 < behaviour.start:
            raise BoundHypothesisError(f"plan only settles at round {behaviour.start}, after t0={t0}")
        sset = strategy_vertices(spec)
        guarded = sset.defection_points if side == 1 else sset.cooperation_points
        if any(side * affine_eval(line, pt) > 0 for pt in guarded):
            raise BoundHypothesisError(
                f"{line} has {'defection' if side == 1 else 'cooperation'} points on the wrong side"
            )
        self.player, self.line, self.t0, self.side = player, line, t0, side
        self.M = max(side * affine_eval(line, v) for v in sset.vertices) + 1
        self.M0 = t0 * self.M

        scale = _Table(spec).scale
        A, B, K = smale_coefficients(line, n, scale)
        # side*L - M0/T scaled by n*T*scale*A*q_den is v(T) = sA*total - sB*own - sK*T - Q
        q_den = self.M0.denominator
        self._Q = self.M0.numerator * n * scale * A
        self._coef = (side * A * q_den, side * B * q_den, side * K * q_den)
        self._unit = n * scale * A * q_den
        self._best = None
        self._best_T = t0
        self.rounds_checked = 0
        self.violations = 0

    def observe(self, T: int, moves, totals, total) -> None:
        if T < self.t0:
            return
        sA, sB, sK = self._coef
        v = sA * total - sB * totals[self.player] - sK * T - self._Q
        self.rounds_checked += 1
        if v > 0:
            self.violations += 1
        if self._best is None or v * self._best_T > self._best * T:
            self._best, self._best_T = v, T

    def result(self) -> "BoundCheck":
        if self._best is None:
            raise ValueError(f"no rounds observed at or after t0={self.t0}")
        return BoundCheck(
            player=self.player,
            line=self.line,
            t0=self.t0,
            side=self.side,
            M=self.M,
            M0=self.M0,
            max_violation=Fraction(self._best, self._unit * self._best_T),
            worst_round=self._best_T,
            rounds_checked=self.rounds_checked,
            violations=self.violations,
        )


def chain_hooks(*hooks: Optional[RoundHook]) -> Optional[RoundHook]:
    active = [h for h in hooks if h is not None]
    if not active:
        return None
    if len(active) == 1:
        return active[0]

    def hook(T, moves, totals, total):
        for h in active:
            h(T, moves, totals, total)

    return hook


def check_smale_bound(
    spec: GameSpec,
    plans: Sequence[Plan],
    player: int,
    horizon: int,
    line: Optional[Line] = None,
    t0: Optional[int] = None,
    side: int = 1,
) -> BoundCheck:
    """Run the game and check the ``M0 / T`` envelope for one player at every round ``T >= t0``."""
    monitor = BoundMonitor(spec, plans, player, line, t0, side)
    if horizon < monitor.t0:
        raise ValueError(f"horizon {horizon} ends before t0={monitor.t0}")
    simulate(spec, plans, horizon, monitor.observe)
    return monitor.result()
