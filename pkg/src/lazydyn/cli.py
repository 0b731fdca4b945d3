"""Batch experiment runner: JSON experiment specs in, CSV and JSON summaries out.

One spec document describes an experiment (graph, game, schedule, init,
trials, seeds, outputs); CLI flags override spec fields, and environment
variables prefixed LAZYDYN_ override defaults. All outputs are byte-stable
for a fixed master seed: per-trial seeds are stable hashes of
(master_seed, trial index) and no file contains wall-clock data.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import analysis, dynamics
from . import game as games
from . import graph as graphs

__all__ = ["main", "execute", "SpecError", "CheckFailure"]


class SpecError(ValueError):
    """The experiment spec is malformed or inconsistent."""


class CheckFailure(RuntimeError):
    """A verification command found a contract violation (exit code 2)."""


_ENV_PREFIX = "LAZYDYN_"
_COMMANDS = ("run", "sweep", "drift-check", "oracle", "lowerbound", "frontier-check", "gen-graph")

RUN_COLUMNS = ["trial", "seed", "converged", "steps", "m0", "M0", "final_potential"]
SWEEP_COLUMNS = [
    "value",
    "trials",
    "converged",
    "convergence_rate",
    "mean_steps",
    "median_steps",
    "m0",
    "M0",
    "bound_kind",
    "bound",
]
DRIFT_COLUMNS = ["config", "unstable", "drift", "bound", "s1", "s2", "c1", "c2", "ok"]
ORACLE_COLUMNS = ["config", "potential", "expected_steps"]
TRACE_COLUMNS = ["trial", "step", "potential"]
LOWERBOUND_COLUMNS = [
    "trial",
    "seed",
    "first_cycle_failure",
    "converged_at",
    "steps_observed",
    "cycle_held",
]


# ----------------------------------------------------------------------
# Spec resolution
# ----------------------------------------------------------------------


def _env(name, cast):
    raw = os.environ.get(_ENV_PREFIX + name)
    if raw is None:
        return None
    try:
        return cast(raw)
    except ValueError:
        raise SpecError(f"bad value for {_ENV_PREFIX}{name}: {raw!r}") from None


def _as_bool(raw: str) -> bool:
    if raw.lower() in ("1", "true", "yes", "on"):
        return True
    if raw.lower() in ("0", "false", "no", "off"):
        return False
    raise ValueError(raw)


def resolve_spec(spec: dict, args=None) -> dict:
    """Merge defaults, spec fields, environment overrides, and CLI flags."""
    out = copy.deepcopy(spec)
    merged = {
        "trials": 1,
        "max_steps": 10**6,
        "trace": False,
        "workers": os.cpu_count() or 1,
        "out": ".",
    }
    merged.update({k: v for k, v in out.items() if v is not None})
    for name, key, cast in (
        ("SEED", "master_seed", int),
        ("TRIALS", "trials", int),
        ("MAX_STEPS", "max_steps", int),
        ("OUT", "out", str),
        ("WORKERS", "workers", int),
        ("TRACE", "trace", _as_bool),
    ):
        value = _env(name, cast)
        if value is not None:
            merged[key] = value
    if args is not None:
        for key in ("trials", "max_steps", "out", "workers"):
            value = getattr(args, key.replace("-", "_"), None)
            if value is not None:
                merged[key] = value
        if getattr(args, "seed", None) is not None:
            merged["master_seed"] = args.seed
        if getattr(args, "trace", False):
            merged["trace"] = True
    if "master_seed" not in merged:
        raise SpecError("master_seed is required (spec field, LAZYDYN_SEED, or --seed)")
    if merged["trials"] < 1:
        raise SpecError("trials must be >= 1")
    if merged["max_steps"] < 0:
        raise SpecError("max_steps must be >= 0")
    return merged


def _load_spec(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            spec = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError(f"cannot read spec {path}: {exc}") from None
    if not isinstance(spec, dict):
        raise SpecError("spec document must be a JSON object")
    spec["_base_dir"] = os.path.dirname(os.path.abspath(path))
    return spec


def build_instance(spec: dict) -> games.GameInstance:
    if "game" not in spec:
        raise SpecError("spec needs a 'game' section")
    base = spec.get("_base_dir", ".")
    game_spec = dict(spec["game"])
    if "graph" not in game_spec and "instance_file" not in game_spec:
        if "graph" not in spec:
            raise SpecError("spec needs a 'graph' section (or game.instance_file)")
        game_spec["graph"] = spec["graph"]
    try:
        return games.instance_from_spec(game_spec, base_dir=base)
    except (games.GameError, graphs.GraphError, KeyError) as exc:
        raise SpecError(f"bad game/graph spec: {exc}") from None


_SCHEDULES = {
    "constant": lambda d: dynamics.Constant(d["p"]),
    "max_degree": lambda d: dynamics.MaxDegree(d["alpha"], _window(d)),
    "neighborhood_max": lambda d: dynamics.NeighborhoodMax(d["alpha_low"], d["alpha_high"]),
    "local_degree": lambda d: dynamics.LocalDegree(d["alpha"], _window(d)),
    "adaptive": lambda d: dynamics.Adaptive(d["alpha"], _window(d)),
    "potential_weighted": lambda d: dynamics.PotentialWeighted(d["alpha"], _window(d)),
}


def _window(d):
    w = d.get("window")
    return tuple(w) if w is not None else None


def build_schedule(spec: dict) -> dynamics.ActivationSchedule:
    sched = spec.get("schedule")
    if not isinstance(sched, dict) or "variant" not in sched:
        raise SpecError("spec needs schedule: {variant, ...}")
    variant = sched["variant"]
    if variant not in _SCHEDULES:
        raise SpecError(f"unknown schedule variant {variant!r}")
    try:
        return _SCHEDULES[variant](sched)
    except KeyError as exc:
        raise SpecError(f"schedule {variant} is missing field {exc}") from None


def build_init(spec: dict, instance: games.GameInstance) -> np.ndarray:
    init = spec.get("init", {"kind": "monochromatic"})
    kind = init.get("kind")
    base = spec.get("_base_dir", ".")
    if kind == "monochromatic":
        return games.monochromatic(instance, init.get("strategy", 0))
    if kind == "random":
        rng = np.random.default_rng(init.get("seed", spec.get("master_seed")))
        return games.random_configuration(instance, rng)
    if kind == "balanced_bipartite":
        gspec = spec.get("graph", {})
        if gspec.get("generator") != "complete_bipartite" or gspec.get("n_left") != gspec.get("n_right"):
            raise SpecError("balanced_bipartite init needs a complete_bipartite graph with equal sides")
        return analysis.balanced_bipartite_config(
            gspec["n_left"], init["p"], init.get("orientation", "left_white")
        )
    if kind == "tightness_default":
        gspec = spec.get("graph", {})
        if gspec.get("generator") != "tightness":
            raise SpecError("tightness_default init needs the tightness generator")
        return graphs.tightness_network(gspec["r"])[1]
    if kind == "file":
        with open(os.path.join(base, init["path"]), "r", encoding="utf-8") as handle:
            return np.asarray(json.load(handle), dtype=np.int64)
    raise SpecError(f"unknown init kind {kind!r}")


def _summary_bound(schedule, instance, m0, potential0):
    """Matched convergence-time bound for the summary, or (None, None)."""
    window = schedule.theorem_window()
    kind_map = {
        "max_degree": "max_degree",
        "neighborhood_max": "max_degree",
        "adaptive": "adaptive",
        "local_degree": "degree",
        "potential_weighted": "general",
    }
    try:
        if schedule.kind == "constant":
            return "constant", analysis.theorem_bound("constant", instance, m0, schedule.p)
        kind = kind_map.get(schedule.kind)
        if kind is None or window is None:
            return None, None
        initial = potential0 if kind == "general" else m0
        if initial is None:
            return None, None
        return kind, analysis.theorem_bound(kind, instance, initial, *window)
    except ValueError:
        return None, None


# ----------------------------------------------------------------------
# Output helpers
# ----------------------------------------------------------------------


def _write_csv(path, columns, rows):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(columns)
        for row in rows:
            writer.writerow(["" if v is None else v for v in row])


def _write_json(path, doc):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(doc, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _config_str(config) -> str:
    values = [str(int(v)) for v in config]
    return "".join(values) if all(len(v) == 1 for v in values) else "-".join(values)


# ----------------------------------------------------------------------
# Commands
# ----------------------------------------------------------------------

_POOL: dict = {}


def _pool_init(payload: str) -> None:
    spec = json.loads(payload)
    _POOL["spec"] = spec
    _POOL["instance"] = build_instance(spec)
    _POOL["schedule"] = build_schedule(spec)
    _POOL["init"] = build_init(spec, _POOL["instance"])


def _pool_trial(trial: int):
    spec = _POOL["spec"]
    return _one_trial(
        _POOL["instance"], _POOL["schedule"], _POOL["init"],
        spec["master_seed"], trial, spec["max_steps"], spec["trace"],
    )


def _one_trial(instance, schedule, init, master_seed, trial, max_steps, trace):
    seed = dynamics.derive_trial_seed(master_seed, trial)
    result = dynamics.run(instance, init, schedule, seed=seed, max_steps=max_steps, trace=trace)
    final_pot = games.total_potential(instance, result.final_config)
    row = [
        trial,
        seed,
        int(result.converged),
        result.steps,
        result.initial_conflicts,
        result.initial_potential,
        final_pot,
    ]
    return (row, result.potential_trace) if trace else (row, None)


def _run_trials(spec, instance, schedule, init):
    trials = spec["trials"]
    workers = min(spec["workers"], trials)
    if workers > 1 and trials >= 4:
        payload = json.dumps({k: v for k, v in spec.items()})
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_pool_init, initargs=(payload,)
        ) as pool:
            outcomes = list(pool.map(_pool_trial, range(trials), chunksize=max(1, trials // (4 * workers))))
    else:
        outcomes = [
            _one_trial(instance, schedule, init, spec["master_seed"], t, spec["max_steps"], spec["trace"])
            for t in range(trials)
        ]
    rows = [row for row, _ in outcomes]
    traces = [trace for _, trace in outcomes]
    return rows, traces


def _summarize_rows(rows, instance, schedule):
    steps_conv = [r[3] for r in rows if r[2]]
    m0 = rows[0][4]
    pot0 = rows[0][5]
    kind, bound = _summary_bound(schedule, instance, m0, pot0)
    return {
        "trials": len(rows),
        "converged": len(steps_conv),
        "convergence_rate": len(steps_conv) / len(rows),
        "mean_steps": float(np.mean(steps_conv)) if steps_conv else None,
        "median_steps": float(np.median(steps_conv)) if steps_conv else None,
        "m0": m0,
        "M0": pot0,
        "bound_kind": kind,
        "bound": bound,
    }


def _cmd_run(spec) -> int:
    instance = build_instance(spec)
    schedule = build_schedule(spec)
    init = build_init(spec, instance)
    for warning in schedule.validate_window(instance):
        print(f"warning: {warning}", file=sys.stderr)
    rows, traces = _run_trials(spec, instance, schedule, init)
    out = spec["out"]
    _write_csv(os.path.join(out, "trials.csv"), RUN_COLUMNS, rows)
    if spec["trace"]:
        trace_rows = [
            [trial, step, value]
            for trial, trace in enumerate(traces)
            for step, value in enumerate(trace)
        ]
        _write_csv(os.path.join(out, "traces.csv"), TRACE_COLUMNS, trace_rows)
    summary = _summarize_rows(rows, instance, schedule)
    summary["master_seed"] = spec["master_seed"]
    _write_json(os.path.join(out, "summary.json"), summary)
    return 0


def _set_by_path(doc: dict, dotted: str, value) -> None:
    keys = dotted.split(".")
    node = doc
    for key in keys[:-1]:
        if key not in node or not isinstance(node[key], dict):
            node[key] = {}
        node = node[key]
    node[keys[-1]] = value


def _cmd_sweep(spec) -> int:
    sweep = spec.get("sweep")
    if not isinstance(sweep, dict) or "field" not in sweep or "values" not in sweep:
        raise SpecError("sweep command needs sweep: {field, values}")
    rows = []
    for value in sweep["values"]:
        sub = copy.deepcopy(spec)
        _set_by_path(sub, sweep["field"], value)
        instance = build_instance(sub)
        schedule = build_schedule(sub)
        init = build_init(sub, instance)
        trial_rows, _ = _run_trials(sub, instance, schedule, init)
        summary = _summarize_rows(trial_rows, instance, schedule)
        rows.append([value] + [summary[c] for c in SWEEP_COLUMNS[1:]])
    _write_csv(os.path.join(spec["out"], "sweep.csv"), SWEEP_COLUMNS, rows)
    return 0


def _enumerate_configs(instance, max_states):
    total = 1
    for k in instance.strategy_counts.tolist():
        total *= int(k)
        if total > max_states:
            raise SpecError(f"configuration space exceeds {max_states} states")
    import itertools

    for state in itertools.product(*(range(int(k)) for k in instance.strategy_counts)):
        yield np.asarray(state, dtype=np.int64)


def _cmd_drift_check(spec) -> int:
    instance = build_instance(spec)
    schedule = build_schedule(spec)
    opts = spec.get("drift", {})
    cap = opts.get("cap", 20)
    tol = opts.get("tolerance", 1e-12)
    samples = opts.get("mc_samples", 20000)
    rows = []
    violations = 0
    skipped = 0
    sampled = 0
    for index, config in enumerate(_enumerate_configs(instance, opts.get("max_states", 2**16))):
        try:
            report = analysis.exact_drift(instance, config, schedule, cap=cap)
        except analysis.TooManyUnstable:
            rng = np.random.default_rng(dynamics.derive_trial_seed(spec["master_seed"], index))
            report = analysis.mc_drift(instance, config, schedule, samples, rng)
            sampled += 1
        if report.equilibrium:
            continue
        if report.bound is None:
            skipped += 1
            ok = ""
        elif report.exact:
            ok = int(report.drift <= report.bound + tol)
        else:
            # sampled estimate: flag only significant violations
            ok = int(report.drift - 3 * (report.std_error or 0.0) <= report.bound)
        if ok == 0:
            violations += 1
        cls = report.edge_classes
        rows.append(
            [
                _config_str(config),
                report.unstable_count,
                report.drift,
                report.bound,
                cls["s1"],
                cls["s2"],
                cls["c1"],
                cls["c2"],
                ok,
            ]
        )
    out = spec["out"]
    _write_csv(os.path.join(out, "drift.csv"), DRIFT_COLUMNS, rows)
    _write_json(
        os.path.join(out, "drift_summary.json"),
        {
            "configs_checked": len(rows),
            "violations": violations,
            "no_bound": skipped,
            "sampled": sampled,
            "schedule": schedule.kind,
        },
    )
    if violations:
        raise CheckFailure(f"{violations} configurations violate the drift bound")
    return 0


def _cmd_oracle(spec) -> int:
    instance = build_instance(spec)
    schedule = build_schedule(spec)
    opts = spec.get("oracle", {})
    result = analysis.exact_hitting_time(
        instance, schedule, state_cap=opts.get("state_cap", 2**20)
    )
    rows = []
    for idx, config in enumerate(_enumerate_configs(instance, opts.get("state_cap", 2**20))):
        rows.append(
            [
                _config_str(config),
                games.total_potential(instance, config),
                float(result.expected_steps[idx]),
            ]
        )
    out = spec["out"]
    _write_csv(os.path.join(out, "hitting.csv"), ORACLE_COLUMNS, rows)
    summary = {
        "state_count": result.state_count,
        "equilibria": len(result.equilibria),
        "max_expected_steps": float(result.expected_steps.max()),
    }
    if "init" in spec:
        init = build_init(spec, instance)
        summary["init_expected_steps"] = result.expected(init)
    _write_json(os.path.join(out, "hitting_summary.json"), summary)
    return 0


def _cmd_lowerbound(spec) -> int:
    opts = spec.get("lowerbound")
    if not isinstance(opts, dict) or "n" not in opts or "p" not in opts:
        raise SpecError("lowerbound command needs lowerbound: {n, p}")
    result = analysis.lower_bound_experiment(
        opts["n"],
        opts["p"],
        spec["max_steps"],
        spec["trials"],
        spec["master_seed"],
        activation=opts.get("activation"),
    )
    rows = [
        [
            i,
            t.seed,
            t.first_cycle_failure,
            t.converged_at,
            t.steps_observed,
            int(t.cycle_held_throughout),
        ]
        for i, t in enumerate(result.trials)
    ]
    out = spec["out"]
    _write_csv(os.path.join(out, "lowerbound.csv"), LOWERBOUND_COLUMNS, rows)
    _write_json(
        os.path.join(out, "lowerbound_summary.json"),
        {
            "n": result.n,
            "p": result.p,
            "activation": result.activation,
            "alpha": result.params.alpha,
            "per_step_failure_bound": result.params.fail_bound,
            "trials": len(result.trials),
            "converged": result.converged_count,
            "full_survival": result.full_survival_count,
            "mean_survival": result.mean_survival,
        },
    )
    return 0


def _cmd_frontier_check(spec) -> int:
    opts = spec.get("frontier")
    if not isinstance(opts, dict):
        raise SpecError("frontier-check command needs a frontier section")
    base = spec.get("_base_dir", ".")
    if "r" in opts:
        graph, init, labels = graphs.tightness_network(opts["r"])
    else:
        graph = graphs.from_spec(opts["graph"], base_dir=base)
        with open(os.path.join(base, opts["init_file"]), "r", encoding="utf-8") as handle:
            init = np.asarray(json.load(handle), dtype=np.int64)
        with open(os.path.join(base, opts["labels_file"]), "r", encoding="utf-8") as handle:
            labels = np.asarray(json.load(handle), dtype=np.int64)
    try:
        report = analysis.frontier_check(
            graph, init, labels, seed=spec["master_seed"]
        )
    except analysis.FrontierViolation as exc:
        raise CheckFailure(f"frontier contract violated: {exc}") from None
    _write_json(
        os.path.join(spec["out"], "frontier.json"),
        {
            "initial_unstable": list(report.initial_unstable),
            "total_flips": report.total_flips,
            "max_unstable": report.max_unstable,
            "completion_order": report.completion_order,
            "orders_checked": report.orders_checked,
        },
    )
    return 0


def _cmd_gen_graph(spec) -> int:
    if "graph" not in spec:
        raise SpecError("gen-graph needs a 'graph' section")
    graph = graphs.from_spec(spec["graph"], base_dir=spec.get("_base_dir", "."))
    out = spec["out"]
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, "graph.edgelist")
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(f"# node_count={graph.node_count} edge_count={graph.edge_count}\n")
        for u, v in graph.edges():
            handle.write(f"{u} {v}\n")
    return 0


_HANDLERS = {
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "drift-check": _cmd_drift_check,
    "oracle": _cmd_oracle,
    "lowerbound": _cmd_lowerbound,
    "frontier-check": _cmd_frontier_check,
    "gen-graph": _cmd_gen_graph,
}


def execute(spec: dict, command: str = None) -> int:
    """Run a resolved spec; returns the process exit code (0 ok, 2 check failed)."""
    command = command or spec.get("command")
    if command not in _HANDLERS:
        raise SpecError(f"unknown command {command!r}")
    declared = spec.get("command")
    if declared is not None and declared != command:
        raise SpecError(f"spec declares command {declared!r} but {command!r} was invoked")
    return _HANDLERS[command](spec)


_EPILOG = """\
output columns (deterministic order):
  run:         trials.csv      %(run)s
  sweep:       sweep.csv       %(sweep)s
  drift-check: drift.csv       %(drift)s
  oracle:      hitting.csv     %(oracle)s
  lowerbound:  lowerbound.csv  %(lower)s
mean/median steps are over converged trials only. Environment overrides:
LAZYDYN_SEED, LAZYDYN_TRIALS, LAZYDYN_MAX_STEPS, LAZYDYN_OUT, LAZYDYN_WORKERS,
LAZYDYN_TRACE (flags beat environment, environment beats spec fields).
""" % {
    "run": ",".join(RUN_COLUMNS),
    "sweep": ",".join(SWEEP_COLUMNS),
    "drift": ",".join(DRIFT_COLUMNS),
    "oracle": ",".join(ORACLE_COLUMNS),
    "lower": ",".join(LOWERBOUND_COLUMNS),
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="lazydyn",
        description="Experiment runner for independent better-response dynamics",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        cmd = sub.add_parser(name, help=f"{name} experiment")
        cmd.add_argument("--spec", required=True, help="path to the JSON experiment spec")
        cmd.add_argument("--seed", type=int, help="override master_seed")
        cmd.add_argument("--out", help="override output directory")
        cmd.add_argument("--trials", type=int, help="override trial count")
        cmd.add_argument("--max-steps", type=int, dest="max_steps", help="override step cap")
        cmd.add_argument("--workers", type=int, help="worker pool size (default: cpu count)")
        cmd.add_argument("--trace", action="store_true", help="record potential traces")
    args = parser.parse_args(argv)
    try:
        spec = resolve_spec(_load_spec(args.spec), args)
        return execute(spec, args.command)
    except CheckFailure as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 2
    except (
        SpecError,
        graphs.GraphError,
        games.GameError,
        dynamics.ScheduleError,
        analysis.AnalysisError,
        ValueError,
        OSError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
