import csv
import hashlib
import json
import os
import subprocess
import sys

import numpy as np
import pytest

import lazydyn as lz
from lazydyn import cli
from lazydyn.cli import SpecError, resolve_spec


def invoke(*args, env=None):
    full_env = dict(os.environ)
    if env:
        full_env.update(env)
    return subprocess.run(
        [sys.executable, "-m", "lazydyn", *args],
        capture_output=True,
        text=True,
        env=full_env,
    )


def write_spec(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def sha(path):
    with open(path, "rb") as handle:
        return hashlib.sha256(handle.read()).hexdigest()


def run_spec(tmp_path, **overrides):
    doc = {
        "graph": {"generator": "complete_bipartite", "n_left": 2, "n_right": 2},
        "game": {"builder": "symmetric_coordination"},
        "schedule": {"variant": "max_degree", "alpha": 0.5},
        "init": {"kind": "random", "seed": 5},
        "trials": 30,
        "max_steps": 10**5,
        "master_seed": 17,
    }
    doc.update(overrides)
    return doc


def read_rows(path):
    with open(path, newline="") as handle:
        return list(csv.DictReader(handle))


# ---------------------------------------------------------------- run


def test_run_emits_trials_and_summary(tmp_path):
    spec = write_spec(tmp_path, "spec.json", run_spec(tmp_path))
    out = tmp_path / "out"
    result = invoke("run", "--spec", spec, "--out", str(out), "--workers", "1")
    assert result.returncode == 0, result.stderr
    rows = read_rows(out / "trials.csv")
    assert len(rows) == 30
    assert all(row["converged"] == "1" for row in rows)
    assert [row["trial"] for row in rows] == [str(i) for i in range(30)]
    summary = json.loads((out / "summary.json").read_text())
    assert summary["convergence_rate"] == 1.0
    assert summary["bound_kind"] == "max_degree"
    assert summary["mean_steps"] <= summary["bound"]


def test_run_reported_seeds_replay(tmp_path):
    spec_doc = run_spec(tmp_path, trials=5)
    spec = write_spec(tmp_path, "spec.json", spec_doc)
    out = tmp_path / "out"
    assert invoke("run", "--spec", spec, "--out", str(out), "--workers", "1").returncode == 0
    inst = lz.instance_from_spec(
        {"graph": spec_doc["graph"], **spec_doc["game"]}
    )
    init = np.asarray(
        [0, 1, 0, 0]
    )  # random init with seed 5 over 4 nodes, regenerate instead:
    rng = np.random.default_rng(5)
    init = lz.random_configuration(inst, rng)
    for row in read_rows(out / "trials.csv"):
        assert int(row["seed"]) == lz.derive_trial_seed(17, int(row["trial"]))
        res = lz.run(inst, init, lz.MaxDegree(0.5), seed=int(row["seed"]))
        assert res.steps == int(row["steps"])


def test_run_deterministic_across_workers(tmp_path):
    spec = write_spec(tmp_path, "spec.json", run_spec(tmp_path, trials=24))
    outs = {}
    for name, workers in [("a", "1"), ("b", "4"), ("c", "1")]:
        out = tmp_path / name
        result = invoke("run", "--spec", spec, "--out", str(out), "--workers", workers)
        assert result.returncode == 0, result.stderr
        outs[name] = sha(out / "trials.csv")
    assert outs["a"] == outs["b"] == outs["c"]


def test_run_trace_flag_emits_traces(tmp_path):
    spec = write_spec(tmp_path, "spec.json", run_spec(tmp_path, trials=3))
    out = tmp_path / "out"
    result = invoke("run", "--spec", spec, "--out", str(out), "--workers", "1", "--trace")
    assert result.returncode == 0, result.stderr
    traces = read_rows(out / "traces.csv")
    trials = read_rows(out / "trials.csv")
    # one trace row per step plus the initial potential, per trial
    for row in trials:
        per = [t for t in traces if t["trial"] == row["trial"]]
        assert len(per) == int(row["steps"]) + 1
        assert per[0]["potential"] == row["M0"]


def test_run_seed_changes_output(tmp_path):
    spec = write_spec(tmp_path, "spec.json", run_spec(tmp_path))
    a = tmp_path / "a"
    b = tmp_path / "b"
    invoke("run", "--spec", spec, "--out", str(a), "--workers", "1")
    invoke("run", "--spec", spec, "--out", str(b), "--workers", "1", "--seed", "99")
    assert sha(a / "trials.csv") != sha(b / "trials.csv")


def test_env_overrides_and_flag_precedence(tmp_path):
    spec = write_spec(tmp_path, "spec.json", run_spec(tmp_path, trials=30))
    out = tmp_path / "env"
    result = invoke(
        "run", "--spec", spec, "--out", str(out), "--workers", "1",
        env={"LAZYDYN_TRIALS": "7"},
    )
    assert result.returncode == 0
    assert len(read_rows(out / "trials.csv")) == 7
    out2 = tmp_path / "flag"
    result = invoke(
        "run", "--spec", spec, "--out", str(out2), "--workers", "1", "--trials", "3",
        env={"LAZYDYN_TRIALS": "7"},
    )
    assert result.returncode == 0
    assert len(read_rows(out2 / "trials.csv")) == 3


def test_spec_errors_exit_one(tmp_path):
    missing = write_spec(tmp_path, "bad.json", {"master_seed": 1})
    assert invoke("run", "--spec", missing).returncode == 1
    noseed = write_spec(tmp_path, "noseed.json", {k: v for k, v in run_spec(tmp_path).items() if k != "master_seed"})
    assert invoke("run", "--spec", noseed).returncode == 1
    assert invoke("run", "--spec", str(tmp_path / "absent.json")).returncode == 1
    clash = write_spec(tmp_path, "clash.json", run_spec(tmp_path, command="sweep"))
    assert invoke("run", "--spec", clash).returncode == 1


# ---------------------------------------------------------------- sweep


def test_sweep_one_row_per_value(tmp_path):
    doc = run_spec(
        tmp_path,
        trials=10,
        sweep={"field": "schedule.alpha", "values": [0.2, 0.4, 0.8]},
    )
    spec = write_spec(tmp_path, "sweep.json", doc)
    out = tmp_path / "out"
    result = invoke("sweep", "--spec", spec, "--out", str(out), "--workers", "1")
    assert result.returncode == 0, result.stderr
    rows = read_rows(out / "sweep.csv")
    assert [row["value"] for row in rows] == ["0.2", "0.4", "0.8"]
    assert all(row["trials"] == "10" for row in rows)


# ---------------------------------------------------------------- drift-check


def test_drift_check_in_window_passes(tmp_path):
    doc = {
        "graph": {"generator": "tightness", "r": 4},
        "game": {"builder": "symmetric_coordination"},
        "schedule": {"variant": "neighborhood_max", "alpha_low": 0.2, "alpha_high": 0.5},
        "master_seed": 1,
    }
    spec = write_spec(tmp_path, "drift.json", doc)
    out = tmp_path / "out"
    result = invoke("drift-check", "--spec", spec, "--out", str(out))
    assert result.returncode == 0, result.stderr
    summary = json.loads((out / "drift_summary.json").read_text())
    assert summary["violations"] == 0
    assert summary["configs_checked"] == 510  # 2^9 configs minus 2 equilibria


def test_drift_check_mc_fallback_above_cap(tmp_path):
    doc = {
        "graph": {"generator": "complete_bipartite", "n_left": 3, "n_right": 3},
        "game": {"builder": "symmetric_coordination"},
        "schedule": {"variant": "max_degree", "alpha": 0.2, "window": [0.2, 0.5]},
        "drift": {"cap": 3, "mc_samples": 4000},
        "master_seed": 11,
    }
    spec = write_spec(tmp_path, "drift.json", doc)
    out = tmp_path / "out"
    result = invoke("drift-check", "--spec", spec, "--out", str(out))
    assert result.returncode == 0, result.stderr
    summary = json.loads((out / "drift_summary.json").read_text())
    assert summary["sampled"] > 0
    assert summary["violations"] == 0


def test_drift_check_violation_exits_two(tmp_path):
    doc = {
        "graph": {"generator": "complete_bipartite", "n_left": 2, "n_right": 2},
        "game": {"builder": "symmetric_coordination"},
        "schedule": {"variant": "max_degree", "alpha": 2.0, "window": [0.2, 0.2]},
        "master_seed": 1,
    }
    spec = write_spec(tmp_path, "bad.json", doc)
    result = invoke("drift-check", "--spec", spec, "--out", str(tmp_path / "out"))
    assert result.returncode == 2
    assert "drift" in result.stderr


# ---------------------------------------------------------------- oracle


def test_oracle_command(tmp_path):
    doc = {
        "graph": {"generator": "path", "n": 2},
        "game": {"builder": "symmetric_coordination"},
        "schedule": {"variant": "constant", "p": 0.5},
        "init": {"kind": "file", "path": "init.json"},
        "master_seed": 1,
    }
    (tmp_path / "init.json").write_text("[0, 1]")
    spec = write_spec(tmp_path, "oracle.json", doc)
    out = tmp_path / "out"
    result = invoke("oracle", "--spec", spec, "--out", str(out))
    assert result.returncode == 0, result.stderr
    summary = json.loads((out / "hitting_summary.json").read_text())
    assert summary["state_count"] == 4
    assert summary["equilibria"] == 2
    assert summary["init_expected_steps"] == pytest.approx(2.0)
    rows = {row["config"]: row for row in read_rows(out / "hitting.csv")}
    assert float(rows["01"]["expected_steps"]) == pytest.approx(2.0)
    assert float(rows["00"]["expected_steps"]) == 0.0


# ---------------------------------------------------------------- lowerbound


def test_lowerbound_command(tmp_path):
    doc = {
        "lowerbound": {"n": 50, "p": 0.5},
        "trials": 5,
        "max_steps": 500,
        "master_seed": 3,
    }
    spec = write_spec(tmp_path, "lb.json", doc)
    out = tmp_path / "out"
    result = invoke("lowerbound", "--spec", spec, "--out", str(out))
    assert result.returncode == 0, result.stderr
    rows = read_rows(out / "lowerbound.csv")
    assert len(rows) == 5
    summary = json.loads((out / "lowerbound_summary.json").read_text())
    assert summary["alpha"] == pytest.approx(2 / 3)
    # summary aggregates must agree with the per-trial rows
    assert summary["converged"] == sum(1 for r in rows if r["converged_at"])
    assert summary["full_survival"] == sum(1 for r in rows if r["cycle_held"] == "1")


# ---------------------------------------------------------------- frontier-check


def test_lowerbound_full_scale_never_converges(tmp_path):
    doc = {
        "lowerbound": {"n": 500, "p": 0.5},
        "trials": 10,
        "max_steps": 10**4,
        "master_seed": 5,
    }
    spec = write_spec(tmp_path, "lb.json", doc)
    out = tmp_path / "out"
    result = invoke("lowerbound", "--spec", spec, "--out", str(out))
    assert result.returncode == 0, result.stderr
    summary = json.loads((out / "lowerbound_summary.json").read_text())
    assert summary["converged"] == 0


def test_run_from_instance_file(tmp_path):
    inst = lz.minority(lz.cycle(5))
    lz.save_instance(inst, str(tmp_path / "inst.json"))
    doc = {
        "game": {"instance_file": "inst.json"},
        "schedule": {"variant": "max_degree", "alpha": 0.5},
        "init": {"kind": "random", "seed": 1},
        "trials": 5,
        "master_seed": 2,
    }
    spec = write_spec(tmp_path, "spec.json", doc)
    out = tmp_path / "out"
    result = invoke("run", "--spec", spec, "--out", str(out), "--workers", "1")
    assert result.returncode == 0, result.stderr
    rows = read_rows(out / "trials.csv")
    assert len(rows) == 5
    assert all(row["converged"] == "1" for row in rows)


def test_frontier_check_command(tmp_path):
    spec = write_spec(tmp_path, "f.json", {"frontier": {"r": 6}, "master_seed": 0})
    out = tmp_path / "out"
    result = invoke("frontier-check", "--spec", spec, "--out", str(out))
    assert result.returncode == 0, result.stderr
    report = json.loads((out / "frontier.json").read_text())
    assert report["completion_order"] == [1, 2, 3, 4]
    assert report["max_unstable"] <= 2


def test_frontier_check_rejects_wrong_graph(tmp_path):
    (tmp_path / "init.json").write_text(json.dumps([1] * 6))
    (tmp_path / "labels.json").write_text(json.dumps([0] * 6))
    doc = {
        "frontier": {
            "graph": {"generator": "path", "n": 6},
            "init_file": "init.json",
            "labels_file": "labels.json",
        },
        "master_seed": 0,
    }
    spec = write_spec(tmp_path, "f.json", doc)
    result = invoke("frontier-check", "--spec", spec, "--out", str(tmp_path / "out"))
    assert result.returncode == 2


# ---------------------------------------------------------------- gen-graph


def test_gen_graph_roundtrip(tmp_path):
    doc = {"graph": {"generator": "erdos_renyi", "n": 12, "p": 0.4, "seed": 7}, "master_seed": 0}
    spec = write_spec(tmp_path, "g.json", doc)
    out = tmp_path / "out"
    result = invoke("gen-graph", "--spec", spec, "--out", str(out))
    assert result.returncode == 0, result.stderr
    text = (out / "graph.edgelist").read_text()
    reloaded = lz.from_edge_list(text)
    original = lz.erdos_renyi(12, 0.4, seed=7)
    assert list(reloaded.edges()) == list(original.edges())


# ---------------------------------------------------------------- resolution unit checks


def test_resolve_spec_requires_master_seed():
    with pytest.raises(SpecError):
        resolve_spec({"trials": 3})


def test_resolve_spec_defaults():
    merged = resolve_spec({"master_seed": 4})
    assert merged["trials"] == 1
    assert merged["max_steps"] == 10**6
    assert merged["trace"] is False


def test_build_init_variants(tmp_path):
    spec = {
        "graph": {"generator": "complete_bipartite", "n_left": 3, "n_right": 3},
        "game": {"builder": "symmetric_coordination"},
        "master_seed": 0,
    }
    inst = cli.build_instance(spec)
    mono = cli.build_init({**spec, "init": {"kind": "monochromatic", "strategy": 1}}, inst)
    assert np.all(mono == 1)
    bal = cli.build_init({**spec, "init": {"kind": "balanced_bipartite", "p": 0.5}}, inst)
    assert (bal[:3] == 1).sum() == 2
    with pytest.raises(SpecError):
        cli.build_init({**spec, "init": {"kind": "nosuch"}}, inst)
    tight = {
        "graph": {"generator": "tightness", "r": 4},
        "game": {"builder": "symmetric_coordination"},
        "init": {"kind": "tightness_default"},
    }
    init = cli.build_init(tight, cli.build_instance(tight))
    assert init.tolist() == [0, 0, 0, 0, 1, 1, 1, 1, 1]
