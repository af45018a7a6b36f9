import csv
import io
import json
from fractions import Fraction
from pathlib import Path

import pytest
import yaml

from smale_ipd import cli
from smale_ipd.config import AxiomError, CheckHypothesisError, ConfigError, parse_config
from smale_ipd.plans import Eventual, Scripted, SimpleSmale

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def write(tmp_path, doc, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(doc))
    return str(path)


GOOD3 = {
    "name": "good3",
    "game": {"staircase": 3},
    "plans": [
        {"kind": "smale", "line": {"through_pn": True, "slope": "3/4"}, "initial": "d"},
        {"kind": "smale", "line": {"through_pn": True, "slope": "4/5"}},
        {"kind": "smale", "line": {"through_pn": True, "slope": "5/6"}},
    ],
    "horizon": 100000,
    "checks": ["cor33_limit"],
}


def test_parse_forms():
    cfg = parse_config(
        {
            "game": "example42",
            "plans": [
                "allc",
                {"kind": "eventual", "t0": 5, "inner": {"kind": "diagonal"}},
                {"kind": "scripted", "random": {"style": "periodic"}, "seed": 3},
            ],
            "horizon": 50,
        }
    )
    assert isinstance(cfg.plans[1], Eventual) and isinstance(cfg.plans[1].inner, SimpleSmale)
    assert isinstance(cfg.plans[2], Scripted)
    assert cfg.game.cooperative_payoff == 6


@pytest.mark.parametrize(
    "doc, exc",
    [
        ({"plans": ["allc"]}, ConfigError),
        ({"game": {"staircase": 3}, "plans": ["allc", "alld"]}, ConfigError),
        ({"game": {"staircase": 3}, "plans": ["allc"] * 3, "horizon": 0}, ConfigError),
        ({"game": {"staircase": 3}, "plans": ["allc", "alld", "tit"]}, ConfigError),
        ({"game": {"staircase": 3}, "plans": ["allc"] * 3, "checks": ["nope"]}, ConfigError),
        ({"game": {"n": 2, "coop_payoffs": [0, 3], "defect_payoffs": [1, 2]}, "plans": ["allc"] * 2}, AxiomError),
        ({"game": {"staircase": 3}, "plans": ["allc"] * 3, "checks": ["cor33_limit"]}, CheckHypothesisError),
        ({"game": {"staircase": 3}, "plans": ["diagonal"] * 3, "checks": ["cor33_limit"]}, CheckHypothesisError),
        ({"game": {"staircase": 3}, "plans": ["allc"] * 3, "checks": ["segment_limit"]}, CheckHypothesisError),
        ({"game": {"staircase": 3}, "plans": ["allc", "alld", "allc"], "checks": ["thm35_report"]}, CheckHypothesisError),
    ],
)
def test_invalid_configs(doc, exc):
    with pytest.raises(exc):
        parse_config(doc)


def test_run_writes_artifacts(tmp_path):
    out = tmp_path / "out"
    code = cli.main(["run", write(tmp_path, GOOD3), "--out", str(out)])
    assert code == 0
    assert {p.name for p in out.iterdir()} == {"trajectory.csv", "report.txt", "summary.json"}
    summary = json.loads((out / "summary.json").read_text())
    assert summary["passed"] and summary["checks"][0]["check"] == "cor33_limit"
    assert summary["checks"][0]["predicted"] == ["4", "4", "4"]
    header = (out / "trajectory.csv").read_text().splitlines()[0]
    assert header == "round,s_1,s_2,s_3,pi_mean"


def test_env_default_out(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "envout"))
    assert cli.main(["run", write(tmp_path, GOOD3)]) == 0
    assert (tmp_path / "envout" / "summary.json").exists()


def test_failing_check_exits_one(tmp_path):
    doc = dict(GOOD3, horizon=10)
    assert cli.main(["run", write(tmp_path, doc), "--out", str(tmp_path / "o")]) == 1


def test_plan_count_mismatch_writes_nothing(tmp_path, capsys):
    doc = dict(GOOD3, plans=GOOD3["plans"][:2])
    out = tmp_path / "o"
    assert cli.main(["run", write(tmp_path, doc), "--out", str(out)]) == 2
    assert not out.exists()
    assert "invalid config" in capsys.readouterr().err


def test_distinct_messages(tmp_path, capsys):
    bad_game = {"game": {"n": 2, "coop_payoffs": [0, 3], "defect_payoffs": [1, 2]}, "plans": ["allc"] * 2}
    assert cli.main(["validate", write(tmp_path, bad_game)]) == 2
    assert "game axioms violated" in capsys.readouterr().err
    bad_check = {"game": {"staircase": 3}, "plans": ["allc"] * 3, "checks": ["cor33_limit"]}
    assert cli.main(["validate", write(tmp_path, bad_check)]) == 2
    assert "infeasible plan/check combination" in capsys.readouterr().err
    (tmp_path / "junk.yaml").write_text("game: [unclosed")
    assert cli.main(["validate", str(tmp_path / "junk.yaml")]) == 2
    assert "invalid config" in capsys.readouterr().err


def test_internal_error_exit_three(tmp_path, monkeypatch):
    def boom(cfg):
        raise RuntimeError("boom")

    monkeypatch.setattr(cli, "execute", boom)
    assert cli.main(["run", write(tmp_path, GOOD3), "--out", str(tmp_path / "o")]) == 3


def read_sweep(out):
    return list(csv.DictReader(io.StringIO((out / "sweep.csv").read_text())))


def test_lambda_sweep_example_42(tmp_path):
    out = tmp_path / "s"
    code = cli.main(
        ["sweep", str(CONFIGS / "example42_segment.yaml"), "--axis", "lambda", "--values", "1,9/10,5/6,4/5", "--out", str(out)]
    )
    assert code == 0
    rows = read_sweep(out)
    pis = [Fraction(r["predicted_pi_n"]) for r in rows]
    assert pis[0] == Fraction(84, 11)
    # pi_n grows as the line gets shallower
    assert all(a < b for a, b in zip(pis, pis[1:]))
    assert all(r["status"] == "pass" for r in rows)


def test_n_sweep_staircase(tmp_path):
    out = tmp_path / "s"
    values = ",".join(str(n) for n in range(3, 9))
    assert cli.main(["sweep", str(CONFIGS / "staircase_segment.yaml"), "--axis", "n", "--values", values, "--out", str(out)]) == 0
    for row in read_sweep(out):
        n = int(row["value"])
        assert Fraction(row["predicted_pi_n"]) == 2 * n - 2 + Fraction(n - 3, n - 1)
        assert Fraction(row["a"]) == Fraction(n - 2, n - 1)


def test_empty_grid(tmp_path):
    out = tmp_path / "s"
    assert cli.main(["sweep", str(CONFIGS / "staircase_segment.yaml"), "--axis", "n", "--values", "", "--out", str(out)]) == 0
    assert read_sweep(out) == []


def test_errored_rows_do_not_stop_sweep(tmp_path):
    out = tmp_path / "s"
    code = cli.main(["sweep", str(CONFIGS / "example42_segment.yaml"), "--axis", "lambda", "--values", "0,1", "--out", str(out)])
    rows = read_sweep(out)
    assert [r["status"] for r in rows] == ["error", "pass"]
    assert rows[0]["message"]
    assert code == 2


def test_t0_sweep(tmp_path):
    doc = {
        "game": {"staircase": 3},
        "plans": [
            {"kind": "eventual", "t0": 1, "inner": {"kind": "smale", "line": {"through_pn": True, "slope": "4/5"}}},
            "allc",
            "alld",
        ],
        "horizon": 2000,
        "checks": ["prop23_bound"],
    }
    out = tmp_path / "s"
    assert cli.main(["sweep", write(tmp_path, doc), "--axis", "t0", "--values", "1,10,100", "--out", str(out)]) == 0
    assert [r["status"] for r in read_sweep(out)] == ["pass"] * 3


def test_n_sweep_needs_scenario(tmp_path):
    doc = dict(GOOD3)
    assert cli.main(["sweep", write(tmp_path, doc), "--axis", "n", "--values", "3", "--out", str(tmp_path / "s")]) == 2


def test_runs_are_deterministic(tmp_path):
    doc = {
        "game": {"staircase": 4},
        "plans": [
            {"kind": "smale", "line": {"through_pn": True, "slope": "9/10"}},
            {"kind": "scripted", "random": {"style": "prefix"}, "seed": 11},
            {"kind": "scripted", "random": {"style": "noise"}},
            {"kind": "scripted", "random": {}},
        ],
        "seed": 7,
        "horizon": 3000,
        "checks": ["thm35_report"],
    }
    path = write(tmp_path, doc)
    cli.main(["run", path, "--out", str(tmp_path / "a")])
    cli.main(["run", path, "--out", str(tmp_path / "b")])
    for name in ("trajectory.csv", "summary.json", "report.txt"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_paper_suite_verb(tmp_path, monkeypatch):
    from smale_ipd import suite

    monkeypatch.setattr(suite, "CRITERIA", (suite.staircase_identity, suite.example_43))
    assert cli.main(["paper-suite", "--out", str(tmp_path)]) == 0
    records = json.loads((tmp_path / "suite_results.json").read_text())
    assert [r["criterion"] for r in records] == [1, 6]
    assert (tmp_path / "suite_results.txt").read_text().startswith("[PASS] 1.")


@pytest.mark.parametrize("name", ["staircase3_good.yaml", "example42_segment.yaml", "staircase_segment.yaml"])
def test_shipped_configs_validate(name):
    assert cli.main(["validate", str(CONFIGS / name)]) == 0
