"""Experiment pipelines: instance generation, sweeps, and CSV output.

Four experiment kinds cover the comparative questions the planners and
the simulator raise:

* ``hops-sweep``       mean simulated swap time per strategy as the path
                       grows, plus the layer/segment-greedy difference
                       series between the composite and single-parent
                       variants.
* ``std-sweep``        the same comparison as node-cost diversity grows,
                       at fixed hops.
* ``retrans-compare``  on-demand versus full-path retransmission on
                       matched instances and seeds.
* ``planner-bench``    wall-clock planning time per strategy.

Every run is reproducible from the master seed: instance costs and trial
seeds derive from (seed, experiment tag, hops/std index, instance, trial)
via numpy SeedSequence, and all strategies and policies see identical
cost vectors and attempt outcomes per (instance, trial).
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__ as _version
from .errors import OracleBoundError, ParameterError
from .model import PathSpec
from .planners import (
    HEURISTICS,
    IBT_LAYER_GREEDY,
    IBT_SEGMENT_GREEDY,
    PSES_LAYER_GREEDY,
    PSES_SEGMENT_GREEDY,
    plan_with,
)
from .rng import RNG_NAME
from .simulator import (
    MODEL_DETERMINISTIC,
    POLICY_FULL_PATH,
    POLICY_ON_DEMAND,
    Metrics,
    SimConfig,
    kernel_available,
    lower_plan,
    run_simulation,
)

CSV_HEADER = "experiment,strategy,hops,cost_std,instance,trial,metric,value,seed"

KINDS = ("hops-sweep", "std-sweep", "retrans-compare", "planner-bench")

#: cost-diversity grid for the std sweep; the top value is where composite
#: parents fire often enough to separate the greedy variants measurably
DEFAULT_STD_GRID = (0.0, 0.1, 0.2, 0.4, 0.8, 1.2)

#: pure swap-time measurement for the hops sweep: re-preparation is counted
#: in pairs_prepared but does not stall the clock
SWEEP_SIM = SimConfig(attempt_latency=1.0, classical_latency=0.0, prep_latency=0.0)

#: the std sweep isolates scheduling quality, so it executes plans in the
#: deterministic attempt model (simulated time equals scheduled time);
#: retry noise is the hops sweep's subject, not this one's
STD_SWEEP_SIM = SimConfig(
    attempt_latency=1.0, classical_latency=0.0, prep_latency=0.0,
    attempt_model=MODEL_DETERMINISTIC,
)

#: retransmission comparison includes preparation delay, which is the point
RETRANS_SIM = SimConfig(attempt_latency=1.0, classical_latency=0.0, prep_latency=1.0)


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    hops: tuple[int, ...] = (6, 7, 8, 9, 10)
    cost_mean: float = 1.4
    cost_std: float = 0.1
    std_grid: tuple[float, ...] = DEFAULT_STD_GRID
    instances: int = 200
    trials_per_instance: int = 25
    strategies: tuple[str, ...] = HEURISTICS
    retrans_strategy: str = PSES_LAYER_GREEDY
    seed: int = 20240501
    sim: SimConfig = field(default=None)  # type: ignore[assignment]
    oracle_bound: int = 8

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError("kind", f"unknown experiment kind {self.kind!r} (known: {KINDS})")
        if self.instances < 1:
            raise ParameterError("instances", "need at least one instance")
        if self.trials_per_instance < 1:
            raise ParameterError("trials_per_instance", "need at least one trial")
        if not (self.cost_mean >= 1.0):
            raise ParameterError("cost_mean", f"must be >= 1, got {self.cost_mean!r}")
        if any(s < 0 for s in self.std_grid):
            raise ParameterError("std_grid", "standard deviations must be >= 0")
        if any(not 2 <= h <= 16 for h in self.hops):
            raise ParameterError("hops", "hop counts must lie in [2, 16]")
        if self.sim is None:
            default = {
                "retrans-compare": RETRANS_SIM,
                "std-sweep": STD_SWEEP_SIM,
            }.get(self.kind, SWEEP_SIM)
            object.__setattr__(self, "sim", default)


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    strategy: str
    hops: int
    cost_std: float
    instance: int | None
    trial: int | None
    metric: str
    value: float
    seed: int

    def csv(self) -> str:
        inst = "" if self.instance is None else str(self.instance)
        trial = "" if self.trial is None else str(self.trial)
        return (
            f"{self.experiment},{self.strategy},{self.hops},{self.cost_std!r},"
            f"{inst},{trial},{self.metric},{self.value!r},{self.seed}"
        )


def sample_node_costs(n: int, mean: float, std: float, rng) -> list[float]:
    """n draws from normal(mean, std) truncated below at 1 by resampling."""
    if not mean >= 1.0:
        raise ParameterError("mean", f"must be >= 1, got {mean!r}")
    if std < 0.0:
        raise ParameterError("std", f"must be >= 0, got {std!r}")
    if std == 0.0:
        return [float(mean)] * n
    out: list[float] = []
    while len(out) < n:
        draw = rng.normal(mean, std, size=n - len(out))
        out.extend(float(c) for c in draw if c >= 1.0)
    return out


def _instance_rng(spec: ExperimentSpec, *tags: int):
    return np.random.default_rng(np.random.SeedSequence(spec.seed, spawn_key=tuple(tags)))


def _trial_seed(spec: ExperimentSpec, *tags: int) -> int:
    seq = np.random.SeedSequence(spec.seed, spawn_key=tuple(tags))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def simulate_trials(plan, base: SimConfig, seeds) -> list[Metrics]:
    """Run one plan across many seeds, lowering and validating once."""
    lower_plan(plan)  # raises on invalid plans before the batch starts
    return [run_simulation(plan, replace(base, seed=s)) for s in seeds]


def _mean(values) -> float:
    return float(np.mean(values))


def run_hops_sweep(spec: ExperimentSpec) -> list[ResultRow]:
    rows: list[ResultRow] = []
    means: dict[tuple[str, int], float] = {}
    for hi, hops in enumerate(spec.hops):
        per_strategy: dict[str, list[float]] = {s: [] for s in spec.strategies}
        for inst in range(spec.instances):
            costs = sample_node_costs(
                hops - 1, spec.cost_mean, spec.cost_std, _instance_rng(spec, 0, hi, inst)
            )
            path = PathSpec.from_costs(costs)
            seeds = [
                _trial_seed(spec, 1, hi, inst, t) for t in range(spec.trials_per_instance)
            ]
            for strategy in spec.strategies:
                try:
                    plan = plan_with(strategy, path, oracle_bound=spec.oracle_bound).plan
                except OracleBoundError:
                    continue  # row skipped; the oracle refused the size
                for t, metrics in enumerate(simulate_trials(plan, spec.sim, seeds)):
                    rows.append(
                        ResultRow(
                            spec.kind, strategy, hops, spec.cost_std, inst, t,
                            "completion_time", metrics.completion_time, spec.seed,
                        )
                    )
                    per_strategy[strategy].append(metrics.completion_time)
        for strategy, values in per_strategy.items():
            if not values:
                continue
            means[(strategy, hops)] = _mean(values)
            rows.append(
                ResultRow(
                    spec.kind, strategy, hops, spec.cost_std, None, None,
                    "mean_completion_time", means[(strategy, hops)], spec.seed,
                )
            )
        for label, better, worse in (
            ("diff-layer-greedy", PSES_LAYER_GREEDY, IBT_LAYER_GREEDY),
            ("diff-segment-greedy", PSES_SEGMENT_GREEDY, IBT_SEGMENT_GREEDY),
        ):
            if (better, hops) in means and (worse, hops) in means:
                rows.append(
                    ResultRow(
                        spec.kind, label, hops, spec.cost_std, None, None,
                        "mean_completion_time_diff",
                        means[(worse, hops)] - means[(better, hops)], spec.seed,
                    )
                )
    return rows


def run_std_sweep(spec: ExperimentSpec) -> list[ResultRow]:
    hops = spec.hops[0] if len(spec.hops) == 1 else 6
    rows: list[ResultRow] = []
    for si, std in enumerate(spec.std_grid):
        per_strategy: dict[str, list[float]] = {s: [] for s in spec.strategies}
        for inst in range(spec.instances):
            costs = sample_node_costs(
                hops - 1, spec.cost_mean, std, _instance_rng(spec, 2, si, inst)
            )
            path = PathSpec.from_costs(costs)
            seeds = [
                _trial_seed(spec, 3, si, inst, t) for t in range(spec.trials_per_instance)
            ]
            for strategy in spec.strategies:
                plan = plan_with(strategy, path, oracle_bound=spec.oracle_bound).plan
                for t, metrics in enumerate(simulate_trials(plan, spec.sim, seeds)):
                    rows.append(
                        ResultRow(
                            spec.kind, strategy, hops, std, inst, t,
                            "completion_time", metrics.completion_time, spec.seed,
                        )
                    )
                    per_strategy[strategy].append(metrics.completion_time)
        means = {}
        for strategy, values in per_strategy.items():
            means[strategy] = _mean(values)
            rows.append(
                ResultRow(
                    spec.kind, strategy, hops, std, None, None,
                    "mean_completion_time", means[strategy], spec.seed,
                )
            )
        for label, better, worse in (
            ("diff-layer-greedy", PSES_LAYER_GREEDY, IBT_LAYER_GREEDY),
            ("diff-segment-greedy", PSES_SEGMENT_GREEDY, IBT_SEGMENT_GREEDY),
        ):
            if better in means and worse in means:
                rows.append(
                    ResultRow(
                        spec.kind, label, hops, std, None, None,
                        "mean_completion_time_diff", means[worse] - means[better], spec.seed,
                    )
                )
    return rows


def run_retrans_compare(spec: ExperimentSpec) -> list[ResultRow]:
    hops = spec.hops[0] if len(spec.hops) == 1 else 5
    rows: list[ResultRow] = []
    sums: dict[tuple[str, str], list[float]] = {}
    for inst in range(spec.instances):
        costs = sample_node_costs(
            hops - 1, spec.cost_mean, spec.cost_std, _instance_rng(spec, 4, inst)
        )
        path = PathSpec.from_costs(costs)
        plan = plan_with(spec.retrans_strategy, path, oracle_bound=spec.oracle_bound).plan
        seeds = [_trial_seed(spec, 5, inst, t) for t in range(spec.trials_per_instance)]
        for policy in (POLICY_ON_DEMAND, POLICY_FULL_PATH):
            base = replace(spec.sim, policy=policy)
            for t, metrics in enumerate(simulate_trials(plan, base, seeds)):
                for metric, value in (
                    ("completion_time", metrics.completion_time),
                    ("pairs_prepared", float(metrics.pairs_prepared)),
                    ("retransmissions", float(metrics.retransmissions)),
                    ("timed_out", float(metrics.timed_out)),
                ):
                    rows.append(
                        ResultRow(
                            spec.kind, policy, hops, spec.cost_std, inst, t,
                            metric, value, spec.seed,
                        )
                    )
                    sums.setdefault((policy, metric), []).append(value)
    for (policy, metric), values in sorted(sums.items()):
        if metric == "timed_out":
            continue
        rows.append(
            ResultRow(
                spec.kind, policy, hops, spec.cost_std, None, None,
                f"mean_{metric}", _mean(values), spec.seed,
            )
        )
    return rows


def run_planner_bench(spec: ExperimentSpec, warmup: int = 5, reps: int = 11) -> list[ResultRow]:
    rows: list[ResultRow] = []
    for hi, hops in enumerate(spec.hops):
        for inst in range(spec.instances):
            costs = sample_node_costs(
                hops - 1, spec.cost_mean, spec.cost_std, _instance_rng(spec, 6, hi, inst)
            )
            path = PathSpec.from_costs(costs)
            for strategy in spec.strategies:
                if strategy == "optimal" and hops - 1 > spec.oracle_bound:
                    continue
                try:
                    for _ in range(warmup):
                        plan_with(strategy, path, oracle_bound=spec.oracle_bound)
                    samples = []
                    for _ in range(reps):
                        t0 = time.perf_counter_ns()
                        plan_with(strategy, path, oracle_bound=spec.oracle_bound)
                        samples.append((time.perf_counter_ns() - t0) / 1000.0)
                except OracleBoundError:
                    continue
                rows.append(
                    ResultRow(
                        spec.kind, strategy, hops, spec.cost_std, inst, None,
                        "plan_wall_time_us", float(np.median(samples)), spec.seed,
                    )
                )
    return rows


_RUNNERS = {
    "hops-sweep": run_hops_sweep,
    "std-sweep": run_std_sweep,
    "retrans-compare": run_retrans_compare,
    "planner-bench": run_planner_bench,
}


def run_experiment(spec: ExperimentSpec) -> list[ResultRow]:
    return _RUNNERS[spec.kind](spec)


def rows_to_csv(rows) -> str:
    return "\n".join([CSV_HEADER] + [row.csv() for row in rows]) + "\n"


def manifest_text(spec: ExperimentSpec) -> str:
    payload = {
        "kind": spec.kind,
        "hops": list(spec.hops),
        "cost_mean": spec.cost_mean,
        "cost_std": spec.cost_std,
        "std_grid": list(spec.std_grid),
        "instances": spec.instances,
        "trials_per_instance": spec.trials_per_instance,
        "strategies": list(spec.strategies),
        "retrans_strategy": spec.retrans_strategy,
        "seed": spec.seed,
        "sim": {
            "attempt_latency": spec.sim.attempt_latency,
            "classical_latency": spec.sim.classical_latency,
            "prep_latency": spec.sim.prep_latency,
            "policy": spec.sim.policy,
            "attempt_model": spec.sim.attempt_model,
            "max_sim_time": spec.sim.max_sim_time,
        },
        "oracle_bound": spec.oracle_bound,
        "generator": {"experiments": "numpy-pcg64", "simulator": RNG_NAME},
        "kernel": kernel_available(),
        "version": _version,
    }
    return json.dumps(payload, indent=2) + "\n"


def bootstrap_mean_ci(values, n_boot: int = 2000, alpha: float = 0.05, seed: int = 0):
    """Percentile bootstrap CI for the mean of ``values``."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ParameterError("values", "cannot bootstrap an empty sample")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, arr.size, size=(n_boot, arr.size))
    means = arr[idx].mean(axis=1)
    return float(np.quantile(means, alpha / 2)), float(np.quantile(means, 1 - alpha / 2))
