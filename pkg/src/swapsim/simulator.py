"""Simulation front end: configuration, metrics, and implementation dispatch.

``run_simulation`` executes a plan on the event engine or, when available
and applicable (no trace requested, zero classical latency), on the
compiled kernel.  Both implementations follow one dynamics contract and
return identical metrics; the test suite asserts this bit-for-bit.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import lru_cache

from .engine import LoweredPlan, run_engine
from .errors import ParameterError, PlanStructureError
from .model import SwapPlan, validate_plan
from .rng import RNG_NAME, NodeStreams

POLICY_ON_DEMAND = "on-demand"
POLICY_FULL_PATH = "full-path"
POLICIES = (POLICY_ON_DEMAND, POLICY_FULL_PATH)

MODEL_STOCHASTIC = "stochastic"
MODEL_DETERMINISTIC = "deterministic"

try:  # optional compiled fast path
    from . import _kernel
except ImportError:  # pragma: no cover - depends on the build environment
    _kernel = None


def kernel_available() -> bool:
    return _kernel is not None and not os.environ.get("SWAPSIM_NO_KERNEL")


def normalize_policy(name: str) -> str:
    canon = name.replace("_", "-").lower()
    if canon not in POLICIES:
        raise ParameterError("policy", f"unknown policy {name!r} (known: {POLICIES})")
    return canon


@dataclass(frozen=True)
class SimConfig:
    attempt_latency: float = 1.0
    classical_latency: float = 0.0
    prep_latency: float = 1.0
    policy: str = POLICY_ON_DEMAND
    attempt_model: str = MODEL_STOCHASTIC
    seed: int = 0
    max_sim_time: float = 1e7

    def __post_init__(self):
        for field in ("attempt_latency", "classical_latency", "prep_latency"):
            value = getattr(self, field)
            if not (math.isfinite(value) and value >= 0.0):
                raise ParameterError(field, f"must be a finite value >= 0, got {value!r}")
        if not self.max_sim_time > 0.0:
            raise ParameterError("max_sim_time", f"must be > 0, got {self.max_sim_time!r}")
        object.__setattr__(self, "policy", normalize_policy(self.policy))
        if self.attempt_model not in (MODEL_STOCHASTIC, MODEL_DETERMINISTIC):
            raise ParameterError("attempt_model", f"unknown model {self.attempt_model!r}")
        if not (0 <= int(self.seed) < 2**64):
            raise ParameterError("seed", "must fit in 64 unsigned bits")


@dataclass(frozen=True)
class Metrics:
    completion_time: float
    pairs_prepared: int
    attempts: int
    retransmissions: int
    per_layer_times: tuple[float, ...]
    timed_out: bool
    policy: str
    attempt_model: str
    seed: int
    rng_name: str = RNG_NAME


def sample_attempts(nc: float, rng=None, model: str = MODEL_STOCHASTIC):
    """Attempts needed for one successful swap at a node of cost ``nc``.

    Stochastic: a geometric draw with per-attempt success probability
    1/nc (support >= 1, mean nc).  Deterministic: the cost itself, used
    as a duration multiplier.
    """
    if not (math.isfinite(nc) and nc >= 1.0):
        raise ParameterError("nc", f"must be >= 1, got {nc!r}")
    if model == MODEL_DETERMINISTIC:
        return float(nc)
    p = 1.0 / nc
    if p >= 1.0:
        rng.uniform()  # consume a draw either way, keeping streams aligned
        return 1
    u = rng.uniform()
    return 1 + int(math.log(1.0 - u) / math.log(1.0 - p))


@lru_cache(maxsize=4096)
def lower_plan(plan: SwapPlan) -> LoweredPlan:
    report = validate_plan(plan)
    if not report.ok:
        raise PlanStructureError("; ".join(report.violations))
    path = plan.original_path
    index = {nid: i for i, nid in enumerate(path.ids)}
    layers = [
        [[index[p] for p in seg.parents] for seg in layer.segments]
        for layer in plan.layers
    ]
    return LoweredPlan(path.ids, list(path.costs), layers)


def _kernel_arrays(lowered: LoweredPlan):
    import numpy as np

    arrays = getattr(lowered, "_kernel_arrays", None)
    if arrays is None:
        members = []
        seg_start = [0]
        layer_start = [0]
        for layer in lowered.layers:
            for seg in layer:
                members.extend(seg)
                seg_start.append(len(members))
            layer_start.append(len(seg_start) - 1)
        arrays = (
            np.asarray(members, dtype=np.int32),
            np.asarray(seg_start, dtype=np.int32),
            np.asarray(layer_start, dtype=np.int32),
            np.asarray(lowered.costs, dtype=np.float64),
            np.asarray(lowered.p, dtype=np.float64),
        )
        lowered._kernel_arrays = arrays
    return arrays


def _run_kernel(lowered: LoweredPlan, config: SimConfig):
    members, seg_start, layer_start, costs, p = _kernel_arrays(lowered)
    ok, completion, pairs, attempts, retrans, per_layer = _kernel.run_kernel(
        members,
        seg_start,
        layer_start,
        costs,
        p,
        lowered.hops,
        config.attempt_latency,
        config.prep_latency,
        config.attempt_model == MODEL_DETERMINISTIC,
        config.policy == POLICY_FULL_PATH,
        int(config.seed),
        config.max_sim_time,
    )
    if not ok:
        return None  # would cross max_sim_time; engine owns timeout semantics
    return {
        "completion_time": completion,
        "pairs_prepared": int(pairs),
        "attempts": int(attempts),
        "retransmissions": int(retrans),
        "per_layer_times": tuple(float(x) for x in per_layer),
        "timed_out": False,
    }


def run_simulation(
    plan: SwapPlan,
    config: SimConfig,
    trace: list | None = None,
    impl: str = "auto",
) -> Metrics:
    """Run a plan to end-to-end entanglement (or the safety cutoff).

    Identical (plan, config) pairs produce identical metrics regardless
    of the implementation chosen.  ``trace``, when given a list, receives
    one row per protocol message: (time, kind, src, dst, layer, segment,
    node), sorted by time.
    """
    lowered = lower_plan(plan)
    raw = None
    if impl not in ("auto", "engine", "kernel"):
        raise ParameterError("impl", f"unknown implementation {impl!r}")
    want_kernel = impl == "kernel"
    may_kernel = impl in ("auto", "kernel")
    usable = (
        kernel_available()
        and trace is None
        and config.classical_latency == 0.0
        and lowered.layers
    )
    if may_kernel and usable:
        raw = _run_kernel(lowered, config)
    elif want_kernel:
        raise ParameterError(
            "impl", "kernel requires classical_latency == 0, no trace, and a built extension"
        )
    if raw is None:
        raw = run_engine(lowered, config, NodeStreams(config.seed), trace)
        if trace is not None:
            trace.sort(key=lambda row: row[0])
    return Metrics(
        completion_time=raw["completion_time"],
        pairs_prepared=raw["pairs_prepared"],
        attempts=raw["attempts"],
        retransmissions=raw["retransmissions"],
        per_layer_times=raw["per_layer_times"],
        timed_out=raw["timed_out"],
        policy=config.policy,
        attempt_model=config.attempt_model,
        seed=int(config.seed),
    )


def trace_line(row) -> str:
    t, kind, src, dst, layer, segment, node = row
    return f"{t},{kind},{src},{dst},{layer},{segment},{node}"


__all__ = [
    "SimConfig",
    "Metrics",
    "run_simulation",
    "sample_attempts",
    "kernel_available",
    "lower_plan",
    "trace_line",
    "POLICY_ON_DEMAND",
    "POLICY_FULL_PATH",
    "MODEL_STOCHASTIC",
    "MODEL_DETERMINISTIC",
]
