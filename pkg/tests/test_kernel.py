"""The compiled kernel must be indistinguishable from the event engine."""

import numpy as np
import pytest

from swapsim.model import PathSpec
from swapsim.planners import plan_with
from swapsim.rng import stream_seed, uniform_at
from swapsim.simulator import SimConfig, kernel_available, run_simulation

pytestmark = pytest.mark.skipif(
    not kernel_available(), reason="compiled kernel not built"
)


def test_uniform_streams_bit_identical():
    from swapsim import _kernel

    for seed in (0, 1, 42, 2**63, 2**64 - 1):
        for node in (0, 1, 7, 250):
            for counter in (1, 2, 3, 10_000):
                py = uniform_at(stream_seed(seed, node), counter)
                cy = _kernel.uniform_probe(seed, node, counter)
                assert py == cy


def test_metrics_identical_across_implementations():
    rng = np.random.default_rng(31)
    strategies = ("sequential", "bbt", "pses-layer-greedy",
                  "ibt-segment-greedy", "pses-segment-greedy")
    checked = 0
    for trial in range(120):
        n = int(rng.integers(1, 9))
        costs = [float(x) for x in np.clip(rng.normal(1.6, 0.7, n), 1.0, None)]
        plan = plan_with(strategies[trial % len(strategies)], PathSpec.from_costs(costs)).plan
        for policy in ("on-demand", "full-path"):
            for model in ("stochastic", "deterministic"):
                cfg = SimConfig(
                    policy=policy,
                    attempt_model=model,
                    seed=trial * 31 + 7,
                    attempt_latency=float(rng.choice([1.0, 0.5])),
                    prep_latency=float(rng.choice([0.0, 1.0, 2.5])),
                )
                engine = run_simulation(plan, cfg, impl="engine")
                kernel = run_simulation(plan, cfg, impl="kernel")
                assert engine == kernel
                checked += 1
    assert checked == 480


def test_auto_prefers_kernel_and_falls_back_for_traces(monkeypatch):
    plan = plan_with("bbt", PathSpec.from_costs([1.4, 1.3])).plan
    cfg = SimConfig(seed=5)
    trace: list = []
    with_trace = run_simulation(plan, cfg, trace=trace)  # engine path
    without = run_simulation(plan, cfg)  # kernel path
    assert with_trace == without
    assert trace, "engine path should have produced a trace"

    monkeypatch.setenv("SWAPSIM_NO_KERNEL", "1")
    forced = run_simulation(plan, cfg)
    assert forced == without


def test_kernel_refuses_classical_latency():
    from swapsim.errors import ParameterError

    plan = plan_with("bbt", PathSpec.from_costs([1.4, 1.3])).plan
    cfg = SimConfig(seed=5, classical_latency=0.5)
    with pytest.raises(ParameterError):
        run_simulation(plan, cfg, impl="kernel")
    # auto mode silently uses the engine instead
    run_simulation(plan, cfg)


def test_timeout_runs_route_to_engine():
    plan = plan_with("sequential", PathSpec.from_costs([5.0, 5.0, 5.0, 5.0])).plan
    cfg = SimConfig(seed=9, max_sim_time=3.0)
    kernelish = run_simulation(plan, cfg)  # auto: kernel bails, engine decides
    engine = run_simulation(plan, cfg, impl="engine")
    assert kernelish == engine
    assert engine.timed_out
