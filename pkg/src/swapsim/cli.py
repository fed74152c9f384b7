"""Command-line interface.

Subcommands: ``plan`` (run a strategy, print the plan document),
``oracle`` (exhaustive optimum), ``simulate`` (execute a plan), ``trace``
(dump the protocol event trace), and ``experiment`` (run a sweep and
write CSV + manifest).

Standard output carries data; diagnostics and the effective seed go to
standard error.  Exit codes: 0 ok, 1 timeout, 2 input error, 3 capability
refusal, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields as dataclass_fields
from pathlib import Path

from .errors import ConfigError, OracleBoundError, ParameterError, PlanStructureError, SwapError
from .model import (
    InterferenceProfile,
    PathSpec,
    dumps_document,
    node_cost,
    plan_from_document,
    plan_to_document,
)
from .planners import STRATEGIES, plan_with, report_to_document
from .simulator import (
    MODEL_DETERMINISTIC,
    SimConfig,
    run_simulation,
    trace_line,
)
from .experiments import (
    KINDS,
    ExperimentSpec,
    manifest_text,
    rows_to_csv,
    run_experiment,
)

EXIT_OK = 0
EXIT_TIMEOUT = 1
EXIT_INPUT = 2
EXIT_REFUSED = 3
EXIT_IO = 4


def _parse_costs(text: str) -> list[float]:
    try:
        costs = [float(part) for part in text.split(",") if part.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"bad --costs value: {exc}") from None
    if not costs:
        raise ConfigError("--costs needs at least one repeater cost")
    return costs


def _load_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: {exc.msg}") from None


def _check_keys(payload: dict, allowed, where: str) -> None:
    unknown = sorted(set(payload) - set(allowed))
    if unknown:
        raise ConfigError(f"{where}: unknown keys {unknown} (allowed: {sorted(allowed)})")


def _path_from_args(args) -> PathSpec:
    if getattr(args, "costs", None) and getattr(args, "profiles", None):
        raise ConfigError("give either --costs or --profiles, not both")
    if getattr(args, "profiles", None):
        payload = _load_json(args.profiles)
        _check_keys(payload, {"profiles"}, args.profiles)
        costs = []
        for i, entry in enumerate(payload.get("profiles", [])):
            _check_keys(entry, {"dpzr", "dpsr", "qlir", "qln"}, f"profiles[{i}]")
            costs.append(node_cost(InterferenceProfile(**entry)))
        if not costs:
            raise ConfigError(f"{args.profiles}: no profiles given")
        return PathSpec.from_costs(costs)
    if getattr(args, "costs", None):
        return PathSpec.from_costs(_parse_costs(args.costs))
    raise ConfigError("one of --costs or --profiles is required")


def _write_or_print(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {out}: {exc}") from None


def cmd_plan(args) -> int:
    path = _path_from_args(args)
    report = plan_with(args.strategy, path, oracle_bound=args.oracle_bound)
    _write_or_print(dumps_document(report_to_document(report)), args.out)
    return EXIT_OK


def cmd_oracle(args) -> int:
    path = _path_from_args(args)
    report = plan_with("optimal", path, oracle_bound=args.oracle_bound)
    _write_or_print(dumps_document(report_to_document(report)), args.out)
    return EXIT_OK


SIM_CONFIG_KEYS = {f.name for f in dataclass_fields(SimConfig)}


def _sim_config_from_args(args) -> SimConfig:
    settings = {}
    if getattr(args, "config", None):
        payload = _load_json(args.config)
        _check_keys(payload, SIM_CONFIG_KEYS | {"trials"}, args.config)
        settings.update({k: v for k, v in payload.items() if k != "trials"})
        if "trials" in payload and args.trials is None:
            args.trials = int(payload["trials"])
    for name, value in (
        ("attempt_latency", args.attempt_latency),
        ("classical_latency", args.classical_latency),
        ("prep_latency", args.prep_latency),
        ("policy", args.policy),
        ("seed", args.seed),
        ("max_sim_time", args.max_sim_time),
    ):
        if value is not None:
            settings[name] = value
    if getattr(args, "deterministic", False):
        settings["attempt_model"] = MODEL_DETERMINISTIC
    return SimConfig(**settings)


def _plan_for_sim(args):
    if args.plan_file:
        doc = _load_json(args.plan_file)
        return plan_from_document(doc)
    if not args.strategy:
        raise ConfigError("give --plan-file or --strategy with --costs/--profiles")
    path = _path_from_args(args)
    return plan_with(args.strategy, path, oracle_bound=args.oracle_bound).plan


def _metrics_dict(m) -> dict:
    return {
        "completion_time": m.completion_time,
        "pairs_prepared": m.pairs_prepared,
        "attempts": m.attempts,
        "retransmissions": m.retransmissions,
        "per_layer_times": list(m.per_layer_times),
        "timed_out": m.timed_out,
        "policy": m.policy,
        "attempt_model": m.attempt_model,
        "seed": m.seed,
        "rng": m.rng_name,
    }


def cmd_simulate(args) -> int:
    plan = _plan_for_sim(args)
    base = _sim_config_from_args(args)
    trials = args.trials if args.trials is not None else 1
    if trials < 1:
        raise ConfigError("--trials must be >= 1")
    print(f"seed: {base.seed}", file=sys.stderr)
    results = []
    from dataclasses import replace

    for t in range(trials):
        cfg = replace(base, seed=base.seed + t)
        results.append(run_simulation(plan, cfg))
    payload = {
        "trials": [_metrics_dict(m) for m in results],
        "mean": {
            "completion_time": sum(m.completion_time for m in results) / trials,
            "pairs_prepared": sum(m.pairs_prepared for m in results) / trials,
            "attempts": sum(m.attempts for m in results) / trials,
            "retransmissions": sum(m.retransmissions for m in results) / trials,
        },
    }
    _write_or_print(json.dumps(payload, indent=2) + "\n", args.out)
    if any(m.timed_out for m in results):
        print("warning: at least one trial hit max_sim_time; output is partial", file=sys.stderr)
        return EXIT_TIMEOUT
    return EXIT_OK


def cmd_trace(args) -> int:
    plan = _plan_for_sim(args)
    cfg = _sim_config_from_args(args)
    print(f"seed: {cfg.seed}", file=sys.stderr)
    rows: list = []
    run_simulation(plan, cfg, trace=rows)
    text = "time,kind,src,dst,layer,segment,node\n" + "".join(
        trace_line(row) + "\n" for row in rows
    )
    _write_or_print(text, args.out)
    return EXIT_OK


EXPERIMENT_KEYS = {
    "kind", "hops", "cost_mean", "cost_std", "std_grid", "instances",
    "trials_per_instance", "strategies", "retrans_strategy", "seed",
    "sim", "oracle_bound",
}


def _experiment_spec(args) -> ExperimentSpec:
    settings: dict = {}
    if args.config:
        payload = _load_json(args.config)
        _check_keys(payload, EXPERIMENT_KEYS, args.config)
        settings.update(payload)
    if args.kind:
        settings["kind"] = args.kind
    if "kind" not in settings:
        raise ConfigError("--kind (or a config file with one) is required")
    for name in ("instances", "trials_per_instance", "seed"):
        value = getattr(args, name)
        if value is not None:
            settings[name] = value
    if args.hops:
        settings["hops"] = [int(h) for h in args.hops.split(",")]
    for key in ("hops", "std_grid", "strategies"):
        if key in settings:
            settings[key] = tuple(settings[key])
    if "sim" in settings:
        _check_keys(settings["sim"], SIM_CONFIG_KEYS, "sim")
        settings["sim"] = SimConfig(**settings["sim"])
    return ExperimentSpec(**settings)


def cmd_experiment(args) -> int:
    spec = _experiment_spec(args)
    print(f"seed: {spec.seed}", file=sys.stderr)
    out_dir = Path(args.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        probe = out_dir / ".write-probe"
        probe.write_text("", encoding="utf-8")
        probe.unlink()
    except OSError as exc:
        print(f"error: out dir not writable: {exc}", file=sys.stderr)
        return EXIT_IO
    rows = run_experiment(spec)
    name = spec.kind.replace("-", "_")
    (out_dir / f"{name}.csv").write_text(rows_to_csv(rows), encoding="utf-8")
    (out_dir / f"{name}.manifest.json").write_text(manifest_text(spec), encoding="utf-8")
    aggregates = [r for r in rows if r.instance is None]
    print(f"wrote {out_dir / (name + '.csv')} ({len(rows)} rows)")
    for row in aggregates:
        print(f"{row.strategy:>24} hops={row.hops} std={row.cost_std} {row.metric}={row.value:.4f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swapsim",
        description="Swap-scheduling planners and protocol simulator for repeater chains",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_path_args(p):
        p.add_argument("--costs", help="comma-separated repeater costs, e.g. 50,30,45,100")
        p.add_argument("--profiles", help="JSON file with per-repeater interference profiles")
        p.add_argument("--oracle-bound", type=int, default=8,
                       help="largest repeater count the exhaustive planner accepts")

    p_plan = sub.add_parser("plan", help="run a strategy and print the plan document")
    p_plan.add_argument("--strategy", required=True, choices=STRATEGIES)
    add_path_args(p_plan)
    p_plan.add_argument("--out", help="also write the document to this file")
    p_plan.set_defaults(func=cmd_plan)

    p_oracle = sub.add_parser("oracle", help="exhaustive minimum-cost plan (small paths)")
    add_path_args(p_oracle)
    p_oracle.add_argument("--out")
    p_oracle.set_defaults(func=cmd_oracle)

    def add_sim_args(p):
        p.add_argument("--plan-file", help="plan document produced by `plan --out`")
        p.add_argument("--strategy", choices=STRATEGIES)
        add_path_args(p)
        p.add_argument("--policy", choices=["on-demand", "full-path"])
        p.add_argument("--seed", type=int)
        p.add_argument("--deterministic", action="store_true",
                       help="deterministic attempt model (no failures)")
        p.add_argument("--attempt-latency", type=float)
        p.add_argument("--classical-latency", type=float)
        p.add_argument("--prep-latency", type=float)
        p.add_argument("--max-sim-time", type=float)
        p.add_argument("--config", help="JSON file with SimConfig fields")
        p.add_argument("--out")

    p_sim = sub.add_parser("simulate", help="execute a plan under the controller protocol")
    add_sim_args(p_sim)
    p_sim.add_argument("--trials", type=int)
    p_sim.set_defaults(func=cmd_simulate)

    p_trace = sub.add_parser("trace", help="dump one run's protocol message trace")
    add_sim_args(p_trace)
    p_trace.set_defaults(func=cmd_trace)

    p_exp = sub.add_parser("experiment", help="run an experiment, write CSV and manifest")
    p_exp.add_argument("--kind", choices=KINDS)
    p_exp.add_argument("--config", help="JSON experiment spec")
    p_exp.add_argument("--out-dir", required=True)
    p_exp.add_argument("--instances", type=int)
    p_exp.add_argument("--trials-per-instance", dest="trials_per_instance", type=int)
    p_exp.add_argument("--seed", type=int)
    p_exp.add_argument("--hops", help="comma-separated hop counts")
    p_exp.set_defaults(func=cmd_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OracleBoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except (ConfigError, ParameterError, PlanStructureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SwapError as exc:  # any remaining domain error is an input problem
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
