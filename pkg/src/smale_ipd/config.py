"""Experiment configuration: YAML/JSON documents to games, plans and checks.

Rationals are written as integers or ``"a/b"`` strings so that values stay
exact end to end.  A minimal document::

    game: {staircase: 3}
    plans:
      - {kind: smale, line: {through_pn: true, slope: 3/4}, initial: d}
      - {kind: smale, line: {through_pn: true, slope: 4/5}}
      - {kind: smale, line: {through_pn: true, slope: 5/6}}
    horizon: 100000
    checks: [cor33_limit]
"""

from __future__ import annotations

import copy
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

import yaml

from smale_ipd.game import (
    C,
    D,
    GameSpec,
    MalformedGameError,
    Move,
    classic_pd,
    example_42_game,
    staircase_game,
    to_rational,
    validate_game,
)
from smale_ipd.geometry import DIAGONAL, InfeasibleLineError, Line, good_line, is_separation_line
from smale_ipd.plans import AllC, AllD, Eventual, Plan, Scripted, SimpleSmale, random_scripted

CHECKS = ("prop23_bound", "cor33_limit", "thm35_report", "segment_limit")
PRESETS = {
    "example42": example_42_game,
    "classic": lambda: classic_pd(0, 1, 3, 5),
}


class ConfigError(ValueError):
    """The document cannot be parsed into an experiment."""


class AxiomError(ValueError):
    """The game violates one of the payoff axioms."""

    def __init__(self, report):
        self.report = report
        super().__init__("; ".join(str(v) for v in report.violations))


class CheckHypothesisError(ValueError):
    """A requested check's hypotheses are not met by the declared plans."""


@dataclass
class ExperimentConfig:
    name: str
    game: GameSpec
    plans: list
    horizon: int
    snapshot_stride: Any = "geometric"
    checks: list = field(default_factory=list)
    output_dir: Optional[Path] = None
    seed: int = 0
    tolerance: Fraction = Fraction(1, 1000)
    burn_in: int = 1000
    digits: int = 12
    inconclusive_above: Fraction = Fraction(1, 100)
    raw: dict = field(default_factory=dict, repr=False)


def load_document(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML/JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path} must be a mapping at top level")
    return doc


def _rational(value, what: str) -> Fraction:
    try:
        return to_rational(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{what}: {exc}") from exc


def _int(value, what: str, minimum: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(f"{what} must be an integer >= {minimum}, got {value!r}")
    return value


def parse_game(node) -> GameSpec:
    try:
        if isinstance(node, str):
            if node not in PRESETS:
                raise ConfigError(f"unknown game preset {node!r}; known: {', '.join(PRESETS)}")
            return PRESETS[node]()
        if not isinstance(node, dict):
            raise ConfigError(f"game must be a mapping or preset name, got {node!r}")
        if "staircase" in node:
            return staircase_game(_int(node["staircase"], "game.staircase", 2))
        if "preset" in node:
            return parse_game(node["preset"])
        missing = [key for key in ("n", "coop_payoffs", "defect_payoffs") if key not in node]
        if missing:
            raise ConfigError(f"game is missing {', '.join(missing)}")
        coop = [_rational(v, "game.coop_payoffs") for v in node["coop_payoffs"]]
        defect = [_rational(v, "game.defect_payoffs") for v in node["defect_payoffs"]]
        return GameSpec(node["n"], tuple(coop), tuple(defect))
    except MalformedGameError as exc:
        raise ConfigError(f"malformed game: {exc}") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"malformed game: {exc}") from exc


def parse_line(node, game: GameSpec) -> Line:
    if node in ("diagonal", {"diagonal": True}):
        return DIAGONAL
    if not isinstance(node, dict):
        raise ConfigError(f"line must be a mapping, got {node!r}")
    if node.get("through_pn"):
        if "slope" not in node:
            raise ConfigError("line with through_pn needs a slope")
        try:
            return good_line(game, _rational(node["slope"], "line.slope"))
        except InfeasibleLineError as exc:
            raise CheckHypothesisError(str(exc)) from exc
        except ValueError as exc:
            raise ConfigError(f"line: {exc}") from exc
    if "through" in node:
        x, y = node["through"]
        return Line.through((_rational(x, "line.through"), _rational(y, "line.through")),
                            _rational(node.get("slope"), "line.slope"))
    if "slope" in node and "intercept" in node:
        return Line(_rational(node["slope"], "line.slope"), _rational(node["intercept"], "line.intercept"))
    raise ConfigError(f"cannot read line {node!r}")


def _move(value, what: str) -> Move:
    if value in ("c", "C"):
        return C
    if value in ("d", "D"):
        return D
    raise ConfigError(f"{what} must be 'c' or 'd', got {value!r}")


def parse_plan(node, game: GameSpec, rng: random.Random, horizon: int) -> Plan:
    if isinstance(node, str):
        node = {"kind": node}
    if not isinstance(node, dict) or "kind" not in node:
        raise ConfigError(f"plan must be a mapping with a kind, got {node!r}")
    kind = node["kind"]
    try:
        if kind == "allc":
            return AllC()
        if kind == "alld":
            return AllD()
        if kind in ("smale", "diagonal"):
            line = DIAGONAL if kind == "diagonal" else parse_line(node.get("line"), game)
            initial = _move(node.get("initial", "c"), "plan.initial")
            return SimpleSmale(line, initial)
        if kind == "scripted":
            fallback = parse_plan(node.get("fallback", "allc"), game, rng, horizon)
            if "random" in node:
                opts = node["random"] or {}
                if not isinstance(opts, dict):
                    opts = {}
                sub = random.Random(node["seed"]) if "seed" in node else rng
                plan = random_scripted(sub, horizon, opts.get("style"), opts.get("max_prefix"))
                return plan if "fallback" not in node else Scripted(plan.moves, fallback)
            moves = node.get("moves", "")
            if not isinstance(moves, str):
                raise ConfigError("scripted moves must be a string of 'c'/'d'")
            return Scripted(moves, fallback)
        if kind == "eventual":
            inner = parse_plan(node.get("inner"), game, rng, horizon)
            pre = parse_plan(node.get("pre", "alld"), game, rng, horizon)
            initial = node.get("initial")
            return Eventual(
                inner,
                _int(node.get("t0"), "plan.t0", 1),
                pre,
                None if initial is None else _move(initial, "plan.initial"),
            )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, (ConfigError, CheckHypothesisError)):
            raise
        raise ConfigError(f"plan {kind}: {exc}") from exc
    raise ConfigError(f"unknown plan kind {kind!r}")


def default_good_slopes(n: int) -> list:
    """``n`` distinct slopes evenly spaced strictly inside ``((n-1)/n, 1)``."""
    return [Fraction(n - 1, n) + Fraction(i, n * (n + 1)) for i in range(1, n + 1)]


def scenario_plans(node, game: GameSpec) -> list:
    """Plans for a named layout.

    ``segment``: players ``1..n-2`` always cooperate, player ``n`` always
    defects, player ``n-1`` plays Smale on the line through ``(p_n, p_n)`` with
    the given slope (1 is the diagonal).  ``all_good``: every player on a good
    line, slopes given or spread evenly.
    """
    if not isinstance(node, dict) or "kind" not in node:
        raise ConfigError("scenario must be a mapping with a kind")
    n = game.n
    kind = node["kind"]
    initial = _move(node.get("initial", "c"), "scenario.initial")
    if kind == "segment":
        if n < 3:
            raise ConfigError("segment scenario needs n >= 3")
        lam = _rational(node.get("slope", 1), "scenario.slope")
        if not 0 < lam <= 1:
            raise ConfigError(f"segment slope must lie in (0, 1], got {lam}")
        pn = game.cooperative_payoff
        line = DIAGONAL if lam == 1 else Line.through((pn, pn), lam)
        if not is_separation_line(game, line):
            raise CheckHypothesisError(f"{line} is not a separation line for this game")
        return [AllC()] * (n - 2) + [SimpleSmale(line, initial), AllD()]
    if kind == "all_good":
        slopes = node.get("slopes")
        slopes = default_good_slopes(n) if slopes is None else [_rational(s, "scenario.slopes") for s in slopes]
        if len(slopes) != n:
            raise ConfigError(f"all_good scenario needs {n} slopes, got {len(slopes)}")
        plans = []
        for lam in slopes:
            try:
                plans.append(SimpleSmale(good_line(game, lam), initial))
            except InfeasibleLineError as exc:
                raise CheckHypothesisError(str(exc)) from exc
            except ValueError as exc:
                raise ConfigError(f"scenario: {exc}") from exc
        return plans
    raise ConfigError(f"unknown scenario kind {kind!r}")


def parse_config(doc: dict, base_dir: Optional[Path] = None) -> ExperimentConfig:
    """Build and validate an experiment; raises ConfigError, AxiomError or CheckHypothesisError."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a mapping")
    raw = copy.deepcopy(doc)
    if "game" not in doc:
        raise ConfigError("config needs a game")
    game = parse_game(doc["game"])
    report = validate_game(game)
    if not report.passed:
        raise AxiomError(report)
    horizon = _int(doc.get("horizon", 100000), "horizon", 1)
    seed = _int(doc.get("seed", 0), "seed")
    rng = random.Random(seed)
    if "scenario" in doc and "plans" in doc:
        raise ConfigError("give either plans or scenario, not both")
    if "scenario" in doc:
        plans = scenario_plans(doc["scenario"], game)
    elif "plans" in doc:
        if not isinstance(doc["plans"], list):
            raise ConfigError("plans must be a list")
        plans = [parse_plan(p, game, rng, horizon) for p in doc["plans"]]
    else:
        raise ConfigError("config needs plans or a scenario")
    if len(plans) != game.n:
        raise ConfigError(f"{len(plans)} plans for a {game.n}-player game")
    checks = doc.get("checks", [])
    if isinstance(checks, str):
        checks = [checks]
    unknown = [c for c in checks if c not in CHECKS]
    if unknown:
        raise ConfigError(f"unknown checks {unknown}; known: {', '.join(CHECKS)}")
    stride = doc.get("snapshot_stride", "geometric")
    if stride != "geometric":
        _int(stride, "snapshot_stride", 1)
    out = doc.get("output_dir")
    if out is not None:
        out = Path(out)
        if base_dir is not None and not out.is_absolute():
            out = base_dir / out
    cfg = ExperimentConfig(
        name=str(doc.get("name", "experiment")),
        game=game,
        plans=plans,
        horizon=horizon,
        snapshot_stride=stride,
        checks=list(checks),
        output_dir=out,
        seed=seed,
        tolerance=_rational(doc.get("tolerance", "1/1000"), "tolerance"),
        burn_in=_int(doc.get("burn_in", 1000), "burn_in"),
        digits=_int(doc.get("digits", 12), "digits", 1),
        inconclusive_above=_rational(doc.get("inconclusive_above", "1/100"), "inconclusive_above"),
        raw=raw,
    )
    # imported here to keep config importable from checks
    from smale_ipd.checks import validate_checks

    validate_checks(cfg)
    return cfg
