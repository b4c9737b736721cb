import csv
import json
import math
import os
import subprocess
import sys

import pytest

HEADER = "experiment_id,quantity,value,lower,upper,params,runtime_ms"


def run_cli(config, tmp_path, *extra, env=None, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(config))
    full_env = dict(os.environ)
    if env:
        full_env.update(env)
    return subprocess.run(
        ["ergode", "run", str(path), "--out", str(tmp_path), *extra],
        capture_output=True, text=True, env=full_env,
    )


def read_rows(tmp_path, eid):
    text = (tmp_path / f"{eid}.csv").read_text()
    comments = [l for l in text.splitlines() if l.startswith("#")]
    data = [l for l in text.splitlines() if not l.startswith("#")]
    assert data[0] == HEADER
    return comments, list(csv.DictReader(data))


def entropy_config(eid="ent", method="both"):
    return {
        "command": "entropy",
        "experiment_id": eid,
        "system": {"kind": "full-shift", "k": 2},
        "subset": {"kind": "whole"},
        "method": method,
    }


def test_entropy_command_reports_both_routes(tmp_path):
    res = run_cli(entropy_config(), tmp_path)
    assert res.returncode == 0, res.stderr
    comments, rows = read_rows(tmp_path, "ent")
    assert any(c.startswith("# seed=") for c in comments)
    assert any(c.startswith("# config_sha256=") for c in comments)
    quantities = [r["quantity"] for r in rows]
    assert "caratheodory_entropy" in quantities or "bowen_entropy" in quantities
    assert "spanning_entropy" in quantities
    for r in rows:
        assert abs(float(r["value"]) - math.log(2)) < 0.02


def test_every_row_bracket_contains_its_value(tmp_path):
    cfg = {
        "command": "verify-thm-a",
        "experiment_id": "thma",
        "system": {"kind": "suspension", "base": {"kind": "full-shift", "k": 2},
                   "roof": {"constant": 1.0}},
        "subset": {"kind": "whole"},
    }
    res = run_cli(cfg, tmp_path)
    assert res.returncode == 0, res.stderr
    _, rows = read_rows(tmp_path, "thma")
    assert len(rows) >= 4
    for r in rows:
        assert float(r["lower"]) <= float(r["value"]) <= float(r["upper"])


def test_missing_config_exits_2(tmp_path):
    res = subprocess.run(
        ["ergode", "run", str(tmp_path / "absent.json")],
        capture_output=True, text=True,
    )
    assert res.returncode == 2
    assert res.stderr.strip()


def test_malformed_config_exits_2(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"command": "entropy"')
    res = subprocess.run(["ergode", "run", str(path)], capture_output=True, text=True)
    assert res.returncode == 2


def test_unknown_command_exits_2(tmp_path):
    res = run_cli(
        {"command": "prove", "experiment_id": "x",
         "system": {"kind": "full-shift", "k": 2}},
        tmp_path,
    )
    assert res.returncode == 2
    assert "command" in res.stderr


def test_budget_exhaustion_exits_3_and_marks_csv(tmp_path):
    cfg = {
        "command": "classify",
        "experiment_id": "too-deep",
        "system": {"kind": "suspension", "base": {"kind": "full-shift", "k": 2},
                   "roof": {"depth": 1, "table": [1.0, 2.0], "k": 2}},
        "point": {"kind": "seeded-iid", "seed": 1, "probs": [0.5, 0.5], "fiber": 0.0},
        "measure": {"kind": "bernoulli", "probs": [0.5, 0.5]},
        "family_depth": 14,
        "mode": "generic",
    }
    res = run_cli(cfg, tmp_path)
    assert res.returncode == 3
    comments, _ = read_rows(tmp_path, "too-deep")
    assert "# incomplete=true" in comments


def test_env_seed_overrides_and_reproduces(tmp_path):
    cfg = {
        "command": "birkhoff",
        "experiment_id": "birk",
        "system": {"kind": "full-shift", "k": 2},
        "point": {"kind": "random"},
        "observable": {"kind": "symbol-frequency", "symbol": 1},
        "schedule": {"kind": "explicit", "checkpoints": [64, 128]},
        "seed": 1,
    }
    first = []
    for sub in ("a", "b"):
        d = tmp_path / sub
        d.mkdir()
        res = run_cli(cfg, d, env={"ERGODE_SEED": "99"})
        assert res.returncode == 0, res.stderr
        comments, rows = read_rows(d, "birk")
        assert "# seed=99" in comments
        first.append(tuple(r["value"] for r in rows))
    assert first[0] == first[1]

    d = tmp_path / "c"
    d.mkdir()
    run_cli(cfg, d, env={"ERGODE_SEED": "100"})
    _, rows = read_rows(d, "birk")
    assert tuple(r["value"] for r in rows) != first[0]


def test_classify_reports_verdict(tmp_path):
    cfg = {
        "command": "classify",
        "experiment_id": "cls",
        "system": {"kind": "full-shift", "k": 2},
        "point": {"kind": "seeded-iid", "seed": 5, "probs": [0.5, 0.5]},
        "measure": {"kind": "bernoulli", "probs": [0.5, 0.5]},
        "mode": "generic",
    }
    res = run_cli(cfg, tmp_path)
    assert res.returncode == 0, res.stderr
    _, rows = read_rows(tmp_path, "cls")
    verdicts = [r for r in rows if r["quantity"] == "classification"]
    assert len(verdicts) == 1
    assert json.loads(verdicts[0]["params"])["label"] == "Generic"


def test_construct_writes_replayable_point(tmp_path):
    cfg = {
        "command": "construct",
        "experiment_id": "con",
        "system": {"kind": "full-shift", "k": 2},
        "construction": "generic-point",
        "construction_kind": "deterministic-blocks",
        "measure": {"kind": "bernoulli", "probs": [0.3, 0.7]},
    }
    res = run_cli(cfg, tmp_path)
    assert res.returncode == 0, res.stderr
    spec = json.loads((tmp_path / "con.point.json").read_text())

    replay = {
        "command": "classify",
        "experiment_id": "replay",
        "system": {"kind": "full-shift", "k": 2},
        "point": spec,
        "measure": {"kind": "bernoulli", "probs": [0.3, 0.7]},
        "mode": "generic",
        "schedule": {"kind": "explicit", "checkpoints": [200000, 400000, 800000]},
    }
    res = run_cli(replay, tmp_path, name="replay.json")
    assert res.returncode == 0, res.stderr
    _, rows = read_rows(tmp_path, "replay")
    verdict = next(r for r in rows if r["quantity"] == "classification")
    assert json.loads(verdict["params"])["label"] == "Generic"


def test_diagnostics_flag_adds_rows(tmp_path):
    plain = run_cli(entropy_config("diag"), tmp_path)
    assert plain.returncode == 0
    _, base_rows = read_rows(tmp_path, "diag")
    extra = run_cli(entropy_config("diag"), tmp_path, "--diagnostics")
    assert extra.returncode == 0
    _, diag_rows = read_rows(tmp_path, "diag")
    assert len(diag_rows) > len(base_rows)
    assert any(r["quantity"] == "alpha_at_depth" for r in diag_rows)


def test_threads_flag_gives_identical_rows(tmp_path):
    cfg = {
        "command": "verify-thm-a",
        "experiment_id": "par",
        "system": {"kind": "suspension", "base": {"kind": "full-shift", "k": 2},
                   "roof": {"constant": 1.0}},
        "subset": {"kind": "whole"},
    }
    for sub, flags in (("one", ()), ("four", ("--threads", "4"))):
        d = tmp_path / sub
        d.mkdir()
        res = run_cli(cfg, d, *flags)
        assert res.returncode == 0, res.stderr
    _, seq = read_rows(tmp_path / "one", "par")
    _, par = read_rows(tmp_path / "four", "par")
    strip = lambda rows: [(r["quantity"], r["value"], r["params"]) for r in rows]
    assert strip(seq) == strip(par)


def test_verify_thm_b_gap_is_small(tmp_path):
    cfg = {
        "command": "verify-thm-b",
        "experiment_id": "thmb",
        "system": {"kind": "full-shift", "k": 2},
        "measure": {"kind": "bernoulli", "probs": [0.3, 0.7]},
        "depths": [500, 1000, 2000],
    }
    res = run_cli(cfg, tmp_path)
    assert res.returncode == 0, res.stderr
    _, rows = read_rows(tmp_path, "thmb")
    gap = next(r for r in rows if r["quantity"] == "entropy_vs_metric_gap")
    assert abs(float(gap["value"])) < 0.02


def test_verify_irregular_reports_entropy_fraction(tmp_path):
    cfg = {
        "command": "verify-irregular",
        "experiment_id": "irr",
        "system": {"kind": "full-shift", "k": 2},
        "symbol": 0,
        "lo": 0.3,
        "hi": 0.7,
        "block_ratio": 4,
        "depths": [2000],
    }
    res = run_cli(cfg, tmp_path)
    assert res.returncode == 0, res.stderr
    _, rows = read_rows(tmp_path, "irr")
    frac = next(r for r in rows if r["quantity"] == "entropy_fraction_of_max")
    assert float(frac["value"]) >= 0.95
    gap = next(r for r in rows if r["quantity"] == "oscillation_gap")
    assert float(gap["value"]) >= 0.18


def test_verify_inclusions_on_a_map_screens_samples(tmp_path):
    cfg = {
        "command": "verify-inclusions",
        "experiment_id": "incl",
        "system": {"kind": "full-shift", "k": 2},
        "measure": {"kind": "bernoulli", "probs": [0.5, 0.5]},
        "sample_count": 6,
    }
    res = run_cli(cfg, tmp_path)
    assert res.returncode == 0, res.stderr
    _, rows = read_rows(tmp_path, "incl")
    by_q = {r["quantity"]: float(r["value"]) for r in rows}
    assert by_q["mu_sample_generic"] == 6
    assert by_q["mu_sample_notgeneric"] == 0
    assert by_q["foreign_rejected_count"] == 6


def test_verify_inclusions_on_a_suspension_checks_both_dynamics(tmp_path):
    cfg = {
        "command": "verify-inclusions",
        "experiment_id": "incl-flow",
        "system": {"kind": "suspension", "base": {"kind": "full-shift", "k": 2},
                   "roof": {"constant": 1.0}},
        "measure": {"kind": "bernoulli", "probs": [0.5, 0.5]},
        "sample_count": 8,
    }
    res = run_cli(cfg, tmp_path)
    assert res.returncode == 0, res.stderr
    _, rows = read_rows(tmp_path, "incl-flow")
    by_q = {r["quantity"]: float(r["value"]) for r in rows}
    assert by_q["suite_size"] >= 8
    assert by_q["generic_inclusion_breaks"] == 0
    assert by_q["irregular_inclusion_breaks"] == 0
