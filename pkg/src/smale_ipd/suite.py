"""Built-in reproductions of the closed-form results, one function per criterion.

Every function returns a :class:`CriterionResult`; ``run_suite`` runs them in
order.  Tolerances and horizons are fixed here, not tuned per run.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from smale_ipd.analysis import (
    EXPLOITER_PRESENT,
    FULL_COOPERATION,
    DISSENTERS_BELOW_PN,
    INCONCLUSIVE,
    dissenter_statistics,
    predict_limit,
    segment_a1,
    segment_limit,
)
from smale_ipd.config import default_good_slopes
from smale_ipd.engine import BoundMonitor, chain_hooks, payoff_scale, run, simulate, sup_distance
from smale_ipd.game import C, D, classic_pd, example_42_game, mean_payoff, staircase_game
from smale_ipd.geometry import DIAGONAL, Line, good_line, is_separation_line, random_separation_line
from smale_ipd.plans import AllC, AllD, SimpleSmale, random_scripted

LIMIT_TOL = Fraction(1, 1000)
LONG_HORIZON = 10**6
DECAY_RATIO = Fraction(6, 10)
ENVELOPE_HORIZON = 5000
CEILING_HORIZON = 20000
DISSENT_HORIZON = 20000
SEEDS = 100
CEILING_SEEDS = 50
BURN_IN = 1000
INCONCLUSIVE_ABOVE = Fraction(1, 100)


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number}. {self.title}: {self.detail}"


def _f(x) -> str:
    return f"{float(x):.3g}"


def staircase_identity() -> CriterionResult:
    bad = []
    for n in range(2, 11):
        g = staircase_game(n)
        for k in range(n + 1):
            if mean_payoff(g, k) != (2 - Fraction(3, n)) * k + 1:
                bad.append((n, k))
    return CriterionResult(
        1, "staircase mean payoffs are (2 - 3/n)k + 1", not bad, "exact for n=2..10" if not bad else f"mismatch at {bad}"
    )


def full_cooperation() -> CriterionResult:
    H = LONG_HORIZON
    ok, parts = True, []
    for n in (3, 5):
        g = staircase_game(n)
        pn = g.cooperative_payoff
        # alternate opening moves so the averages start away from (p_n, ..., p_n)
        plans = [SimpleSmale(good_line(g, lam), D if i % 2 == 0 else C) for i, lam in enumerate(default_good_slopes(n))]
        traj = run(g, plans, 2 * H, extra_rounds=[H])
        e1 = sup_distance(traj.average_at(H), (pn,) * n)
        e2 = sup_distance(traj.final.average, (pn,) * n)
        good = e1 <= LIMIT_TOL and e2 <= DECAY_RATIO * e1 and e1 > 0
        ok = ok and good
        parts.append(f"n={n} err(H)={_f(e1)} err(2H)/err(H)={_f(e2 / e1) if e1 else 'n/a'}")
    return CriterionResult(2, "good lines converge to full cooperation with 1/T decay", ok, "; ".join(parts))


def heterogeneous_configs() -> list:
    """(label, game, lines) with every line separating, positive slopes, one slope < 1."""
    g3 = staircase_game(3)
    configs = [
        ("staircase3-mixed", g3, [Line(Fraction(1, 2), Fraction(3, 2)), DIAGONAL, good_line(g3, Fraction(3, 4))]),
        ("classic-pd", classic_pd(0, 1, 3, 5), [DIAGONAL, Line(Fraction(1, 2), Fraction(3, 2))]),
    ]
    for label, g, seed in (("staircase4-random", staircase_game(4), 7), ("example42-random", example_42_game(), 11)):
        rng = random.Random(seed)
        configs.append((label, g, [random_separation_line(g, rng) for _ in range(g.n)]))
    return configs


def heterogeneous_limit() -> CriterionResult:
    ok, parts = True, []
    for label, g, lines in heterogeneous_configs():
        assert all(is_separation_line(g, ln) for ln in lines)
        pred = predict_limit(g, lines)
        traj = run(g, [SimpleSmale(ln, D if j == 0 else C) for j, ln in enumerate(lines)], LONG_HORIZON)
        err = sup_distance(traj.final.average, pred.point)
        ok = ok and err <= LIMIT_TOL
        parts.append(f"{label} err={_f(err)}")
    return CriterionResult(3, "simulated limit matches the predicted point for mixed lines", ok, "; ".join(parts))


def _envelope_case(seed: int):
    rng = random.Random(seed)
    g = rng.choice([staircase_game(3), staircase_game(4), staircase_game(5), example_42_game()])
    n = g.n
    j = rng.randrange(n)
    line = random_separation_line(g, rng) if rng.random() < 0.5 else DIAGONAL
    plans = [random_scripted(rng, ENVELOPE_HORIZON, rng.choice(("prefix", "periodic", "noise"))) for _ in range(n)]
    plans[j] = SimpleSmale(line, rng.choice((C, D)))
    return g, plans, j


def envelope() -> CriterionResult:
    bad, worst = 0, None
    for seed in range(SEEDS):
        g, plans, j = _envelope_case(seed)
        above = BoundMonitor(g, plans, j, side=1)
        below = BoundMonitor(g, plans, j, side=-1)
        simulate(g, plans, ENVELOPE_HORIZON, chain_hooks(above.observe, below.observe))
        for m in (above, below):
            res = m.result()
            bad += res.violations
            if worst is None or res.max_violation > worst:
                worst = res.max_violation
    return CriterionResult(
        4,
        "L(projection) <= M0/T against seeded scripted adversaries",
        bad == 0,
        f"{SEEDS} seeds x {ENVELOPE_HORIZON} rounds, both sides; violations={bad}, max(L - M0/T)={_f(worst)}",
    )


def example_42() -> CriterionResult:
    g = example_42_game()
    seg = segment_limit(g, 1)
    a_closed = segment_a1(g)
    exact = seg.a == Fraction(7, 11) == a_closed and seg.point[2] == Fraction(84, 11)
    scale_floor = []
    floor = 7 * payoff_scale(g)

    def floor_hook(T, moves, totals, total):
        # player 3's running average stays at or above r_1 = 7
        if T >= BURN_IN and totals[2] < floor * T:
            scale_floor.append(T)

    traj = run(g, [AllC(), SimpleSmale(DIAGONAL), AllD()], LONG_HORIZON, on_round=floor_hook)
    err = sup_distance(traj.final.average, seg.point)
    ok = exact and err <= LIMIT_TOL and not scale_floor
    return CriterionResult(
        5,
        "three-player example converges to V_{7/11} with pi_3 = 84/11",
        ok,
        f"a1={seg.a} (closed form {a_closed}), pi_3={seg.point[2]}, err={_f(err)}, "
        f"rounds past burn-in with pi_3 < 7: {len(scale_floor)}",
    )


def example_43() -> CriterionResult:
    ok, parts = True, []
    for n in range(3, 9):
        g = staircase_game(n)
        seg = segment_limit(g, 1)
        formula_a = Fraction(n - 2, n - 1)
        formula_pi = 2 * n - 2 + Fraction(n - 3, n - 1)
        good = seg.a == formula_a == segment_a1(g) and seg.point[-1] == formula_pi
        # lines through (p_n, p_n) that separate, on a grid of slopes below 1
        pn = g.cooperative_payoff
        sweep = [Fraction(i, 40) for i in range(39, 0, -1)]
        sweep = [lam for lam in sweep if is_separation_line(g, Line.through((pn, pn), lam))]
        pis = [segment_limit(g, lam).point[-1] for lam in sweep]
        strict = all(pi > seg.point[-1] for pi in pis)
        monotone = all(a < b for a, b in zip(pis, pis[1:]))
        n_ok = good and strict and monotone and bool(sweep)
        ok = ok and n_ok
        parts.append(f"n={n}: a1={seg.a}, pi_n={seg.point[-1]}, {len(sweep)} slopes{'' if n_ok else ' FAIL'}")
    return CriterionResult(6, "segment formulas and slope monotonicity on the staircase family", ok, "; ".join(parts))


def closing_remark() -> CriterionResult:
    g = staircase_game(3)
    target = (Fraction(1), Fraction(5, 2), Fraction(4))
    traj = run(g, [AllC(), SimpleSmale(DIAGONAL), AllD()], LONG_HORIZON)
    err = sup_distance(traj.final.average, target)
    ok = err <= LIMIT_TOL
    worst = None
    for seed in range(CEILING_SEEDS):
        rng = random.Random(10_000 + seed)
        style = lambda: rng.choice(("prefix", "periodic", "noise"))  # noqa: E731
        plans = [
            random_scripted(rng, CEILING_HORIZON, style()),
            SimpleSmale(DIAGONAL, rng.choice((C, D))),
            random_scripted(rng, CEILING_HORIZON, style()),
        ]
        tr = run(g, plans, CEILING_HORIZON)
        excess = tr.final.average[2] - 4 - 2 * tr.cauchy_residual
        worst = excess if worst is None else max(worst, excess)
        ok = ok and excess <= 0
    return CriterionResult(
        7,
        "diagonal player caps every payoff at p_3 = 4",
        ok,
        f"limit err={_f(err)} vs (1, 2.5, 4); {CEILING_SEEDS} seeds max(x3 - 4 - 2*residual)={_f(worst)}",
    )


def _dissent_case(n: int, k: int, seed: int):
    rng = random.Random(seed * 1000 + n * 10 + k)
    g = staircase_game(n)
    slopes = [Fraction(n - 1, n) + Fraction(rng.randint(1, 99), 100 * n) for _ in range(k)]
    lines = [good_line(g, lam) for lam in slopes]
    plans = [SimpleSmale(ln, rng.choice((C, D))) for ln in lines]
    for _ in range(n - k):
        u = rng.random()
        if u < 0.3:
            plans.append(AllD())
        elif u < 0.4:
            plans.append(random_scripted(rng, DISSENT_HORIZON, "noise"))
        else:
            plans.append(random_scripted(rng, DISSENT_HORIZON, max_prefix=DISSENT_HORIZON // 1000))
    return g, plans, lines


@lru_cache(maxsize=1)
def dissent_reports() -> tuple:
    out = []
    for n in (3, 4, 5):
        for k in range(1, n):
            for seed in range(SEEDS):
                g, plans, lines = _dissent_case(n, k, seed)
                traj = run(g, plans, DISSENT_HORIZON)
                rep = dissenter_statistics(
                    g, traj.final.average, lines, 2 * traj.cauchy_residual, INCONCLUSIVE_ABOVE
                )
                out.append(((n, k, seed), rep))
    return tuple(out)


def dissent_trichotomy() -> CriterionResult:
    reports = dissent_reports()
    counts = {FULL_COOPERATION: 0, DISSENTERS_BELOW_PN: 0, EXPLOITER_PRESENT: 0, INCONCLUSIVE: 0}
    failures = []
    for key, rep in reports:
        counts[rep.classification] += 1
        if rep.classification != INCONCLUSIVE and not all(rep.checks.values()):
            failures.append(key)
    converged = len(reports) - counts[INCONCLUSIVE]
    ok = not failures and converged * 2 >= len(reports)
    return CriterionResult(
        8,
        "dissenter trichotomy with good players",
        ok,
        f"{len(reports)} runs, converged={converged}, counts={counts}, failures={failures[:5]}",
    )


def _predicted_points() -> list:
    """Exact limit points, each with the good players first: (label, game, point, good lines)."""
    out = []
    for n in (3, 4, 5, 8):
        g = staircase_game(n)
        lines = [good_line(g, lam) for lam in default_good_slopes(n)]
        pred = predict_limit(g, lines)
        for k in range(1, n):
            out.append((f"all-good n={n} k={k}", g, pred.point, lines[:k]))
        pn = g.cooperative_payoff
        for lam in (Fraction(n - 1, n) + Fraction(i, 10 * n) for i in range(1, 10)):
            if not is_separation_line(g, Line.through((pn, pn), lam)):
                continue
            seg = segment_limit(g, lam)
            X = seg.point
            # the Smale player n-1 is the only good one
            point = (X[n - 2],) + X[: n - 2] + (X[n - 1],)
            out.append((f"segment n={n} slope={lam}", g, point, [seg.line]))
    g = example_42_game()
    for lam in (Fraction(9, 10), Fraction(5, 6), Fraction(4, 5)):
        seg = segment_limit(g, lam)
        X = seg.point
        out.append((f"example42 slope={lam}", g, (X[1], X[0], X[2]), [seg.line]))
    return out


def identities() -> CriterionResult:
    exact_bad = []
    predicted = _predicted_points()
    for label, g, point, lines in predicted:
        rep = dissenter_statistics(g, point, lines)
        if any(v != 0 for v in rep.identities.values()) or not all(rep.checks.values()):
            exact_bad.append(label)
    sim_bad = []
    for key, rep in dissent_reports():
        if not rep.identities_hold:
            sim_bad.append(key)
    ok = not exact_bad and not sim_bad
    return CriterionResult(
        9,
        "mean identities exact on predicted points, within residual on simulated ones",
        ok,
        f"{len(predicted)} predicted points (bad: {exact_bad[:3]}), "
        f"{len(dissent_reports())} simulated points (bad: {sim_bad[:3]})",
    )


CRITERIA = (
    staircase_identity,
    full_cooperation,
    heterogeneous_limit,
    envelope,
    example_42,
    example_43,
    closing_remark,
    dissent_trichotomy,
    identities,
)


def run_suite(progress=None) -> list:
    results = []
    for fn in CRITERIA:
        res = fn()
        if progress is not None:
            progress(res)
        results.append(res)
    return results
