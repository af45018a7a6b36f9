"""Command-line experiment runner.

    smale-ipd validate CONFIG
    smale-ipd run CONFIG [--out DIR]
    smale-ipd sweep CONFIG --axis {lambda,t0,n} --values V1,V2,... [--player J] [--out DIR]
    smale-ipd paper-suite [--out DIR]

Exit status: 0 all checks pass, 1 a check failed, 2 invalid input,
3 internal error.  The default output directory comes from
``$SMALE_IPD_OUT`` (falling back to ``./smale_ipd_out``).
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import logging
import os
import sys
import tempfile
import traceback
from fractions import Fraction
from pathlib import Path
from typing import Optional

from smale_ipd.checks import bound_monitors, evaluate, fmt_point, jsonable
from smale_ipd.config import AxiomError, CheckHypothesisError, ConfigError, ExperimentConfig, load_document, parse_config
from smale_ipd.engine import chain_hooks, run, to_decimal
from smale_ipd.game import validate_game

log = logging.getLogger("smale_ipd")

EXIT_PASS, EXIT_FAIL, EXIT_INVALID, EXIT_INTERNAL = 0, 1, 2, 3
OUT_ENV = "SMALE_IPD_OUT"


def default_out_dir() -> Path:
    return Path(os.environ.get(OUT_ENV, "smale_ipd_out"))


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def describe_invalid(exc: Exception) -> str:
    if isinstance(exc, AxiomError):
        return f"game axioms violated: {exc}"
    if isinstance(exc, CheckHypothesisError):
        return f"infeasible plan/check combination: {exc}"
    return f"invalid config: {exc}"


def render_report(cfg: ExperimentConfig, traj, results: list) -> str:
    lines = [
        f"experiment: {cfg.name}",
        f"game: n={cfg.game.n} p={[str(v) for v in cfg.game.coop_payoffs]} r={[str(v) for v in cfg.game.defect_payoffs]}",
        f"horizon: {cfg.horizon}",
        f"simulated limit: {fmt_point(traj.final.average, cfg.digits)}",
        f"cauchy residual: {to_decimal(traj.cauchy_residual, cfg.digits)}",
    ]
    for res in results:
        lines.append(f"[{res.status.upper()}] {res.check}")
        for key, value in res.details.items():
            lines.append(f"    {key}: {json.dumps(jsonable(value))}")
    return "\n".join(lines) + "\n"


def execute(cfg: ExperimentConfig):
    """Run one validated experiment: returns (trajectory, check results)."""
    monitors = bound_monitors(cfg) if "prop23_bound" in cfg.checks else []
    hook = chain_hooks(*(m.observe for m in monitors))
    traj = run(cfg.game, cfg.plans, cfg.horizon, cfg.snapshot_stride, on_round=hook)
    return traj, evaluate(cfg, traj, monitors)


def write_artifacts(cfg: ExperimentConfig, traj, results: list, out_dir: Path) -> None:
    write_atomic(out_dir / "trajectory.csv", traj.to_csv(cfg.digits))
    write_atomic(out_dir / "report.txt", render_report(cfg, traj, results))
    summary = {
        "experiment": cfg.name,
        "horizon": cfg.horizon,
        "passed": all(r.passed for r in results),
        "checks": [r.record() for r in results],
    }
    write_atomic(out_dir / "summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")


def run_experiment(cfg: ExperimentConfig, out_dir: Optional[Path] = None) -> int:
    traj, results = execute(cfg)
    out = out_dir or cfg.output_dir or default_out_dir()
    write_artifacts(cfg, traj, results, out)
    for res in results:
        print(f"[{res.status.upper()}] {res.check}")
    print(f"artifacts written to {out}")
    return EXIT_PASS if all(r.passed for r in results) else EXIT_FAIL


def _load(path: str) -> ExperimentConfig:
    doc = load_document(path)
    return parse_config(doc, Path(path).resolve().parent)


def cmd_validate(args) -> int:
    cfg = _load(args.config)
    report = validate_game(cfg.game)
    print(f"{cfg.name}: n={cfg.game.n}, {len(cfg.plans)} plans, axioms {'ok' if report.passed else 'violated'}")
    print(f"checks: {', '.join(cfg.checks) if cfg.checks else '(none)'}")
    return EXIT_PASS


def cmd_run(args) -> int:
    cfg = _load(args.config)
    return run_experiment(cfg, Path(args.out) if args.out else None)


def apply_axis(doc: dict, axis: str, value, player: Optional[int] = None) -> dict:
    """Copy of ``doc`` with one grid value substituted along ``axis``."""
    doc = copy.deepcopy(doc)
    if axis == "n":
        game = doc.get("game")
        if not isinstance(game, dict) or "staircase" not in game:
            raise ConfigError("an n sweep needs a staircase game")
        if "scenario" not in doc:
            raise ConfigError("an n sweep needs a scenario so plans can follow n")
        game["staircase"] = int(value)
        return doc
    if axis == "lambda":
        if "scenario" in doc:
            scen = doc["scenario"]
            if scen.get("kind") == "segment":
                scen["slope"] = value
            else:
                raise ConfigError("lambda sweep over a scenario needs kind: segment")
            return doc
        hits = 0
        for j, plan in enumerate(doc.get("plans", [])):
            if player is not None and j != player - 1:
                continue
            line = plan.get("line") if isinstance(plan, dict) else None
            if isinstance(line, dict) and line.get("through_pn"):
                line["slope"] = value
                hits += 1
        if not hits:
            raise ConfigError("lambda sweep found no plan with a through_pn line")
        return doc
    if axis == "t0":
        hits = 0
        for j, plan in enumerate(doc.get("plans", [])):
            if player is not None and j != player - 1:
                continue
            if isinstance(plan, dict) and plan.get("kind") == "eventual":
                plan["t0"] = int(value)
                hits += 1
        if not hits:
            raise ConfigError("t0 sweep found no eventual plan")
        return doc
    raise ConfigError(f"unknown sweep axis {axis!r}")


SWEEP_COLUMNS = [
    "axis",
    "value",
    "status",
    "predicted",
    "predicted_pi_n",
    "simulated",
    "simulated_pi_n",
    "a",
    "max_error",
    "cauchy_residual",
    "checks",
    "message",
]


def _sweep_row(doc, axis, value, player, base_dir, out_dir, index):
    row = dict.fromkeys(SWEEP_COLUMNS, "")
    row.update(axis=axis, value=value)
    try:
        cfg = parse_config(apply_axis(doc, axis, value, player), base_dir)
    except (ConfigError, AxiomError, CheckHypothesisError) as exc:
        row.update(status="error", message=describe_invalid(exc))
        return row, EXIT_INVALID
    traj, results = execute(cfg)
    if out_dir is not None:
        write_artifacts(cfg, traj, results, out_dir / f"{axis}_{index:03d}")
    predicted = next((r.details["predicted"] for r in results if "predicted" in r.details), None)
    seg = next((r.details for r in results if r.check == "segment_limit"), {})
    err = next((r.details["max_error"] for r in results if "max_error" in r.details), "")
    digits = cfg.digits
    row.update(
        status="pass" if all(r.passed for r in results) else "fail",
        simulated=" ".join(to_decimal(v, digits) for v in traj.final.average),
        simulated_pi_n=to_decimal(traj.final.average[-1], digits),
        cauchy_residual=to_decimal(traj.cauchy_residual, digits),
        checks=" ".join(f"{r.check}={r.status}" for r in results),
        a=str(seg["a"]) if "a" in seg else "",
        max_error=err,
    )
    if predicted is not None:
        row.update(
            predicted=" ".join(str(Fraction(v)) for v in predicted),
            predicted_pi_n=str(Fraction(predicted[-1])),
        )
    return row, EXIT_PASS if row["status"] == "pass" else EXIT_FAIL


def sweep(doc: dict, axis: str, values: list, player=None, base_dir=None, out_dir=None):
    """One row per grid value; invalid grid points are marked and skipped."""
    rows, worst = [], EXIT_PASS
    for i, value in enumerate(values):
        row, code = _sweep_row(doc, axis, value, player, base_dir, out_dir, i)
        rows.append(row)
        worst = max(worst, code)
    return rows, worst


def rows_to_csv(rows: list) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, SWEEP_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def cmd_sweep(args) -> int:
    doc = load_document(args.config)
    base_dir = Path(args.config).resolve().parent
    values = [v.strip() for v in args.values.split(",") if v.strip()] if args.values else []
    out = Path(args.out) if args.out else default_out_dir()
    # the base document must be valid before any artifact is written
    parse_config(doc, base_dir)
    rows, code = sweep(doc, args.axis, values, args.player, base_dir, out)
    write_atomic(out / "sweep.csv", rows_to_csv(rows))
    print(rows_to_csv(rows), end="")
    return code


def cmd_paper_suite(args) -> int:
    from smale_ipd.suite import run_suite

    results = run_suite(progress=lambda r: print(r.line(), flush=True))
    out = Path(args.out) if args.out else default_out_dir()
    write_atomic(out / "suite_results.txt", "".join(r.line() + "\n" for r in results))
    records = [{"criterion": r.number, "title": r.title, "passed": r.passed, "detail": r.detail} for r in results]
    write_atomic(out / "suite_results.json", json.dumps(records, indent=2) + "\n")
    return EXIT_PASS if all(r.passed for r in results) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="smale-ipd", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse a config and check the game axioms")
    p.add_argument("config")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="run one experiment")
    p.add_argument("config")
    p.add_argument("--out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run an experiment over a parameter grid")
    p.add_argument("config")
    p.add_argument("--axis", required=True, choices=("lambda", "t0", "n"))
    p.add_argument("--values", default="", help="comma-separated grid values, e.g. 1,9/10,5/6")
    p.add_argument("--player", type=int, help="1-based player whose line or t0 is swept")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("paper-suite", help="run the built-in reproductions")
    p.add_argument("--out")
    p.set_defaults(func=cmd_paper_suite)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, AxiomError, CheckHypothesisError) as exc:
        print(f"error: {describe_invalid(exc)}", file=sys.stderr)
        return EXIT_INVALID
    except Exception:  # noqa: BLE001
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
