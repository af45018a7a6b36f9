"""Named experiment checks shared by the CLI and the reproduction suite.

Each check validates its hypotheses against the declared plans before any
simulation, then judges a finished trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from smale_ipd.analysis import (
    INCONCLUSIVE,
    DegenerateLinesError,
    dissenter_statistics,
    predict_limit,
    segment_limit,
)
from smale_ipd.engine import BoundHypothesisError, BoundMonitor, Trajectory, sup_distance, to_decimal
from smale_ipd.geometry import is_good_line, is_separation_line
from smale_ipd.plans import tail


@dataclass
class CheckResult:
    check: str
    status: str  # "pass", "fail" or "inconclusive"
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status != "fail"

    def record(self) -> dict:
        return {"check": self.check, "status": self.status, **{k: jsonable(v) for k, v in self.details.items()}}


def jsonable(value):
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    return value


def fmt_point(point, digits: int = 12) -> str:
    return "(" + ", ".join(to_decimal(Fraction(v), digits) for v in point) + ")"


def _smale_players(plans) -> list:
    return [j for j, p in enumerate(plans) if tail(p).kind == "smale"]


def _good_players(cfg) -> list:
    return [j for j, p in enumerate(cfg.plans) if tail(p).kind == "smale" and is_good_line(cfg.game, tail(p).line)]


def bound_monitors(cfg) -> list:
    """One monitor per side per Smale player: defect-above and cooperate-below envelopes."""
    from smale_ipd.config import CheckHypothesisError

    monitors = []
    for j in _smale_players(cfg.plans):
        for side in (1, -1):
            try:
                monitors.append(BoundMonitor(cfg.game, cfg.plans, j, side=side))
            except BoundHypothesisError as exc:
                raise CheckHypothesisError(f"prop23_bound: {exc}") from exc
    return monitors


def validate_checks(cfg) -> None:
    from smale_ipd.config import CheckHypothesisError

    game, plans, n = cfg.game, cfg.plans, cfg.game.n
    for check in cfg.checks:
        if check == "prop23_bound":
            if not _smale_players(plans):
                raise CheckHypothesisError("prop23_bound needs at least one (eventual) Smale player")
            bound_monitors(cfg)
        elif check == "cor33_limit":
            tails = [tail(p) for p in plans]
            if any(t.kind != "smale" for t in tails):
                raise CheckHypothesisError("cor33_limit needs every player to eventually play a Smale plan")
            for j, t in enumerate(tails):
                if not is_separation_line(game, t.line):
                    raise CheckHypothesisError(f"cor33_limit: line of player {j + 1} is not a separation line")
            if all(t.line.slope == 1 for t in tails):
                raise CheckHypothesisError("cor33_limit: all slopes are 1, the limit is not determined")
        elif check == "thm35_report":
            if not _good_players(cfg):
                raise CheckHypothesisError("thm35_report needs at least one player on a good line")
        elif check == "segment_limit":
            if n < 3:
                raise CheckHypothesisError("segment_limit needs n >= 3")
            tails = [tail(p) for p in plans]
            ok = (
                all(t.kind == "allc" for t in tails[: n - 2])
                and tails[n - 1].kind == "alld"
                and tails[n - 2].kind == "smale"
            )
            if not ok:
                raise CheckHypothesisError(
                    "segment_limit needs players 1..n-2 always cooperating, player n always "
                    "defecting and player n-1 on a Smale plan"
                )
            line = tails[n - 2].line
            pn = game.cooperative_payoff
            if line((pn, pn)) != 0 or line.slope > 1:
                raise CheckHypothesisError("segment_limit: player n-1's line must pass through (p_n, p_n) with slope <= 1")


def evaluate(cfg, traj: Trajectory, monitors: Optional[list] = None) -> list:
    results = []
    for check in cfg.checks:
        if check == "prop23_bound":
            results.append(_prop23(monitors or []))
        elif check == "cor33_limit":
            results.append(_cor33(cfg, traj))
        elif check == "thm35_report":
            results.append(_thm35(cfg, traj))
        elif check == "segment_limit":
            results.append(_segment(cfg, traj))
    return results


def _prop23(monitors) -> CheckResult:
    rows = []
    ok = True
    for m in monitors:
        res = m.result()
        ok = ok and res.passed
        rows.append(
            {
                "player": res.player + 1,
                "side": "defect_above" if res.side == 1 else "cooperate_below",
                "M": res.M,
                "M0": res.M0,
                "t0": res.t0,
                "max_violation": res.max_violation,
                "rounds_checked": res.rounds_checked,
                "violations": res.violations,
            }
        )
    return CheckResult("prop23_bound", "pass" if ok else "fail", {"envelopes": rows})


def _cor33(cfg, traj) -> CheckResult:
    lines = [tail(p).line for p in cfg.plans]
    try:
        pred = predict_limit(cfg.game, lines)
    except DegenerateLinesError as exc:
        return CheckResult("cor33_limit", "fail", {"error": str(exc)})
    err = sup_distance(traj.final.average, pred.point)
    exact = all(v == 0 for v in pred.residuals().values())
    ok = err <= cfg.tolerance and exact
    return CheckResult(
        "cor33_limit",
        "pass" if ok else "fail",
        {
            "predicted": list(pred.point),
            "simulated": fmt_point(traj.final.average, cfg.digits),
            "harmonic_slope": pred.harmonic_slope,
            "mean_offset": pred.mean_offset,
            "max_error": to_decimal(err, cfg.digits),
            "tolerance": cfg.tolerance,
            "cauchy_residual": to_decimal(traj.cauchy_residual, cfg.digits),
        },
    )


def _thm35(cfg, traj) -> CheckResult:
    n = cfg.game.n
    good = _good_players(cfg)
    if len(good) == n:
        good = good[: n - 1]
    order = good + [j for j in range(n) if j not in good]
    X = [traj.final.average[j] for j in order]
    lines = [tail(cfg.plans[j]).line for j in good]
    tol = 2 * traj.cauchy_residual
    rep = dissenter_statistics(cfg.game, X, lines, tol, cfg.inconclusive_above)
    if rep.classification == INCONCLUSIVE:
        status = "inconclusive"
    else:
        status = "pass" if rep.passed else "fail"
    return CheckResult(
        "thm35_report",
        status,
        {
            "good_players": [j + 1 for j in good],
            "classification": rep.classification,
            "good_mean": to_decimal(rep.good_mean, cfg.digits),
            "dissenter_mean": to_decimal(rep.dissenter_mean, cfg.digits),
            "population_mean": to_decimal(rep.population_mean, cfg.digits),
            "harmonic_slope": rep.harmonic_slope,
            "tolerance": to_decimal(rep.tolerance, cfg.digits),
            "checks": rep.checks,
            "identity_residuals": {k: to_decimal(v, cfg.digits) for k, v in rep.identities.items()},
            "identities_hold": rep.identities_hold,
        },
    )


def _segment(cfg, traj) -> CheckResult:
    n = cfg.game.n
    line = tail(cfg.plans[n - 2]).line
    seg = segment_limit(cfg.game, line.slope)
    err = sup_distance(traj.final.average, seg.point)
    floor = cfg.game.r(n - 2)
    late = [avg[n - 1] for T, avg in traj.snapshots if T >= cfg.burn_in]
    floor_ok = all(v >= floor for v in late)
    ok = err <= cfg.tolerance and floor_ok
    return CheckResult(
        "segment_limit",
        "pass" if ok else "fail",
        {
            "slope": seg.slope,
            "a": seg.a,
            "predicted": list(seg.point),
            "predicted_pi_n": seg.point[-1],
            "simulated": fmt_point(traj.final.average, cfg.digits),
            "max_error": to_decimal(err, cfg.digits),
            "tolerance": cfg.tolerance,
            "pi_n_floor": floor,
            "pi_n_above_floor_after_burn_in": floor_ok,
        },
    )
