"""Swap-scheduling strategies over a repeater path.

Six strategies share one plan representation:

* ``sequential``          one repeater per layer, left to right
* ``bbt``                 balanced binary tree, cost-blind
* ``ibt-layer-greedy``    per-layer exhaustive greedy, single parents only
* ``pses-layer-greedy``   same, composite parents allowed
* ``ibt-segment-greedy``  linear scan greedy, single parents only
* ``pses-segment-greedy`` same, composite parents allowed
* ``optimal``             exhaustive minimum (small instances only)

The layer-greedy pair enumerates every legal layer over the current path
and keeps the best one; the segment-greedy pair makes one linear pass per
layer, deciding each node through net-benefit formulas.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from itertools import combinations
from math import fsum

from .errors import OracleBoundError, PlanStructureError
from .model import (
    LayerSolution,
    PathSpec,
    PlanCostBreakdown,
    SwapPlan,
    layer_cost,
    layer_from_positions,
    plan_cost,
    plan_from_layers,
    segment_cost,
)

SEQUENTIAL = "sequential"
BBT = "bbt"
IBT_LAYER_GREEDY = "ibt-layer-greedy"
IBT_SEGMENT_GREEDY = "ibt-segment-greedy"
PSES_LAYER_GREEDY = "pses-layer-greedy"
PSES_SEGMENT_GREEDY = "pses-segment-greedy"
OPTIMAL = "optimal"

STRATEGIES = (
    SEQUENTIAL,
    BBT,
    IBT_LAYER_GREEDY,
    IBT_SEGMENT_GREEDY,
    PSES_LAYER_GREEDY,
    PSES_SEGMENT_GREEDY,
    OPTIMAL,
)

#: strategies compared in the sweep experiments (cost-aware heuristics + BBT)
HEURISTICS = (BBT, IBT_LAYER_GREEDY, IBT_SEGMENT_GREEDY, PSES_LAYER_GREEDY, PSES_SEGMENT_GREEDY)

DEFAULT_ORACLE_BOUND = 8


@dataclass(frozen=True)
class PlannerKind:
    kind: str  # sequential | bbt | layer_greedy | segment_greedy | optimal
    composite_allowed: bool


_KINDS = {
    SEQUENTIAL: PlannerKind("sequential", False),
    BBT: PlannerKind("bbt", False),
    IBT_LAYER_GREEDY: PlannerKind("layer_greedy", False),
    PSES_LAYER_GREEDY: PlannerKind("layer_greedy", True),
    IBT_SEGMENT_GREEDY: PlannerKind("segment_greedy", False),
    PSES_SEGMENT_GREEDY: PlannerKind("segment_greedy", True),
    OPTIMAL: PlannerKind("optimal", True),
}


def resolve_strategy(name: str) -> PlannerKind:
    try:
        return _KINDS[name]
    except KeyError:
        known = ", ".join(STRATEGIES)
        raise PlanStructureError(f"unknown strategy {name!r} (known: {known})") from None


@dataclass(frozen=True)
class PlannerReport:
    strategy: str
    plan: SwapPlan
    cost: PlanCostBreakdown
    wall_time_us: float
    expansions: int


@dataclass
class SegmentGreedyState:
    """Scan state of the segment-greedy pass (one layer).

    ``msc`` is the largest closed-segment cost so far, ``ccs`` the open
    segment's cost, ``nbcs`` the net benefit it was opened with.  ``ccs``
    and ``nbcs`` are meaningless while no segment is open.
    """

    msc: float
    ccs: float = 0.0
    nbcs: float = 0.0
    open_parents: list | None = None
    cursor: int = 0


def _finish(strategy: str, path: PathSpec, layers, expansions: int, t0: int) -> PlannerReport:
    if layers:
        plan = plan_from_layers(path, layers)
    else:
        plan = SwapPlan(path, (), ())
        if len(path) != 2:
            raise PlanStructureError("planner produced no layers for a non-trivial path")
    cost = plan_cost(plan) if layers else PlanCostBreakdown((), 0.0)
    wall_us = (time.perf_counter_ns() - t0) / 1000.0
    return PlannerReport(strategy, plan, cost, wall_us, expansions)


def plan_sequential(path: PathSpec) -> PlannerReport:
    """One single-parent layer per repeater, left to right."""
    t0 = time.perf_counter_ns()
    layers = []
    current = path
    for node in path.ids[1:-1]:
        layers.append(layer_from_positions(current, [current.position(node)]))
        current = current.drop([node])
    return _finish(SEQUENTIAL, path, layers, max(len(layers), 1), t0)


def plan_bbt(path: PathSpec) -> PlannerReport:
    """Balanced binary tree: root at the middle repeater, leaves swap first."""
    t0 = time.perf_counter_ns()
    reps = list(path.repeater_positions())
    if not reps:
        return _finish(BBT, path, [], 1, t0)

    depth: dict[int, int] = {}

    def assign(lo: int, hi: int, d: int) -> None:
        if lo > hi:
            return
        mid = (lo + hi + 1) // 2  # ceil of the midpoint
        depth[mid] = d
        assign(lo, mid - 1, d + 1)
        assign(mid + 1, hi, d + 1)

    assign(reps[0], reps[-1], 1)
    max_depth = max(depth.values())

    layers = []
    current = path
    for k in range(1, max_depth + 1):
        want = max_depth - k + 1
        ids = [path.ids[pos] for pos in sorted(depth) if depth[pos] == want]
        layer = layer_from_positions(current, [current.position(i) for i in ids])
        layers.append(layer)
        current = current.drop(ids)
    return _finish(BBT, path, layers, len(reps), t0)


def enumerate_layer_solutions(path: PathSpec, composite_allowed: bool) -> list[LayerSolution]:
    """Every legal layer over ``path``.

    A layer is determined by the set of repeater positions chosen as
    parents: maximal runs of consecutive positions form composite parents;
    gaps stay in the next layer's path.  Without composites only
    independent sets (no two adjacent positions) qualify.  Solutions come
    out in canonical order: fewer parents first, then leftmost.
    """
    positions = list(path.repeater_positions())
    if len(path) <= 2:
        return []
    solutions = []
    for r in range(1, len(positions) + 1):
        for subset in combinations(positions, r):
            if not composite_allowed and any(
                b - a == 1 for a, b in zip(subset, subset[1:])
            ):
                continue
            solutions.append(layer_from_positions(path, subset))
    return solutions


def layer_saving(layer: LayerSolution, path: PathSpec) -> float:
    """Time saved by a layer versus swapping its parents sequentially."""
    sums = [segment_cost(seg, path) for seg in layer.segments]
    return fsum(sums) - max(sums)


# Composite parents earn their keep only when the plan improves by a clear
# relative margin: their members retry as a unit under retransmission, which
# the additive cost model cannot see, so hairline wins are net losses.
COMPOSITE_MARGIN = 0.05

# A member failure restarts its whole segment, and failures grow more likely
# with cost, so members above half the tallest repeater of the current path
# lose more to retries than bundling saves.  Both thresholds are relative,
# keeping the planner scale-free.
COMPOSITE_MEMBER_CAP = 0.5

# Candidate values within this relative band are indistinguishable once
# attempt noise enters; among them, concentrating parallelism into fewer,
# larger layers waits on fewer worst-of-k maxima overall.
VALUE_BAND = 0.05


def _independent_subsets(m: int):
    """Non-empty index subsets of 0..m-1 with no two consecutive members."""
    for r in range(1, (m + 1) // 2 + 1):
        for subset in combinations(range(m), r):
            if all(b - a > 1 for a, b in zip(subset, subset[1:])):
                yield subset


def _runs(subset) -> list[tuple[int, int]]:
    """Split sorted indices into maximal consecutive runs [(start, stop)]."""
    runs = []
    start = prev = subset[0]
    for idx in subset[1:]:
        if idx == prev + 1:
            prev = idx
        else:
            runs.append((start, prev))
            start = prev = idx
    runs.append((start, prev))
    return runs


def _drop_indices(seq: tuple, subset) -> tuple:
    gone = set(subset)
    return tuple(v for i, v in enumerate(seq) if i not in gone)


def _singles_rollout(seq: tuple[float, ...], memo: dict) -> float:
    """Additive cost estimate of finishing a repeater-cost sequence with
    single parents only.

    Saving-greedy: repeatedly pick the single-parent layer with the largest
    saving.  Cheap enough to evaluate once per candidate layer.
    """
    value = memo.get(seq)
    if value is not None:
        return value
    total = 0.0
    current = seq
    while current:
        if len(current) == 1:
            total += current[0]
            break
        best = None
        best_key = None
        for subset in _independent_subsets(len(current)):
            picked = [current[i] for i in subset]
            saving = fsum(picked) - max(picked)
            key = (saving, len(subset))
            if best is None or key > best_key:
                best = subset
                best_key = key
        total += max(current[i] for i in best)
        current = _drop_indices(current, best)
    memo[seq] = total
    return total


def plan_layer_greedy(path: PathSpec, composite_allowed: bool) -> PlannerReport:
    """Pick the layer with the best one-step lookahead, repeat to the root.

    Every candidate layer is valued at its own cost plus a singles-greedy
    estimate of finishing the remaining path.  Composite-bearing candidates
    must beat the best single-parent candidate by ``COMPOSITE_MARGIN`` and
    keep every bundled member under ``COMPOSITE_MEMBER_CAP`` of the current
    path's tallest repeater.  Ties break toward more parents removed, then
    the leftmost parent set; the rule is deterministic and scale-free.
    """
    strategy = PSES_LAYER_GREEDY if composite_allowed else IBT_LAYER_GREEDY
    t0 = time.perf_counter_ns()
    layers = []
    expansions = 0
    current_path = path
    memo: dict = {}
    while len(current_path) > 2:
        seq = current_path.repeater_costs()
        m = len(seq)
        singles = []
        composite_subsets = []
        for r in range(1, m + 1):
            for subset in combinations(range(m), r):
                expansions += 1
                if any(b - a == 1 for a, b in zip(subset, subset[1:])):
                    if composite_allowed:
                        composite_subsets.append(subset)
                    continue
                picked = [seq[i] for i in subset]
                value = max(picked) + _singles_rollout(_drop_indices(seq, subset), memo)
                singles.append((value, subset))
        v_star = min(value for value, _ in singles)
        chosen = min(
            (
                (-len(subset), value, subset)
                for value, subset in singles
                if value <= v_star * (1.0 + VALUE_BAND)
            ),
        )[2]
        if composite_subsets:
            threshold = (1.0 - COMPOSITE_MARGIN) * v_star
            member_cap = COMPOSITE_MEMBER_CAP * max(seq)
            admissible = []
            for subset in composite_subsets:
                runs = _runs(subset)
                if any(
                    hi > lo and any(seq[i] > member_cap for i in range(lo, hi + 1))
                    for lo, hi in runs
                ):
                    continue
                cost_here = max(fsum(seq[lo : hi + 1]) for lo, hi in runs)
                rest = _drop_indices(seq, subset)
                # a plan can never finish faster than its tallest repeater
                bound = cost_here + (max(rest) if rest else 0.0)
                if bound >= threshold:
                    continue
                value = cost_here + _singles_rollout(rest, memo)
                if value < threshold:
                    admissible.append((value, subset))
            if admissible:
                vc_star = min(value for value, _ in admissible)
                chosen = min(
                    (
                        (-len(subset), value, subset)
                        for value, subset in admissible
                        if value <= vc_star * (1.0 + VALUE_BAND)
                    ),
                )[2]
        rep_positions = list(current_path.repeater_positions())
        layer = layer_from_positions(current_path, [rep_positions[i] for i in chosen])
        layers.append(layer)
        current_path = current_path.drop(layer.parent_ids())
    return _finish(strategy, path, layers, max(expansions, len(layers), 1), t0)


def net_benefit_current(cn: float, msc: float) -> float:
    """Net benefit of opening a single-parent segment for a node of cost cn."""
    return min(cn, msc) - max(0.0, cn - msc)


def net_benefit_growth(ccs: float, cn: float, msc: float, nbcs: float) -> tuple[float, float]:
    """(net benefit of the grown segment, its growth over the open one)."""
    nbfs = min(ccs + cn, msc) - max(0.0, ccs + cn - msc)
    return nbfs, nbfs - nbcs


def _segment_greedy_layer(path: PathSpec, composite_allowed: bool) -> tuple[LayerSolution, int]:
    """One scan of the current path; returns the layer and decision count."""
    n = len(path)
    costs = path.costs
    chosen: list[int] = [1]  # the first repeater seeds the first segment
    state = SegmentGreedyState(msc=costs[1])
    decisions = 1
    i = 3
    while i <= n - 2:
        if state.open_parents is None:
            decisions += 1
            cn = costs[i]
            nbcs = net_benefit_current(cn, state.msc)
            if nbcs < 0.0:
                i += 1
                continue
            state.open_parents = [i]
            state.ccs = cn
            state.nbcs = nbcs
            i += 1
            if i == n - 1:  # tail hit the path end; nothing left to grow into
                chosen.extend(state.open_parents)
                state.msc = max(state.ccs, state.msc)
                state.open_parents = None
        else:
            decisions += 1
            cn = costs[i]
            grow = False
            if composite_allowed:
                _, nbg = net_benefit_growth(state.ccs, cn, state.msc, state.nbcs)
                grow = nbg >= 0.0
            if grow:
                state.open_parents.append(i)
                state.ccs = state.ccs + cn  # nbcs deliberately not recomputed
                i += 1
                if i == n - 1:
                    chosen.extend(state.open_parents)
                    state.msc = max(state.ccs, state.msc)
                    state.open_parents = None
            else:
                chosen.extend(state.open_parents)
                state.msc = max(state.ccs, state.msc)
                state.open_parents = None
                i += 1
    if state.open_parents is not None:
        chosen.extend(state.open_parents)
    return layer_from_positions(path, chosen), decisions


def plan_segment_greedy(path: PathSpec, composite_allowed: bool) -> PlannerReport:
    """Linear-scan greedy: seed with the first repeater, grow by net benefit."""
    strategy = PSES_SEGMENT_GREEDY if composite_allowed else IBT_SEGMENT_GREEDY
    t0 = time.perf_counter_ns()
    layers = []
    expansions = 0
    current = path
    while len(current) > 2:
        layer, decisions = _segment_greedy_layer(current, composite_allowed)
        expansions += decisions
        layers.append(layer)
        current = current.drop(layer.parent_ids())
    return _finish(strategy, path, layers, max(expansions, 1), t0)


def plan_optimal(path: PathSpec, bound: int = DEFAULT_ORACLE_BOUND) -> PlannerReport:
    """Exhaustive minimum-cost plan; exponential, refuses large instances."""
    t0 = time.perf_counter_ns()
    reps = len(path) - 2
    if reps > bound:
        raise OracleBoundError(
            f"instance has {reps} repeaters, above the exhaustive bound of {bound}"
        )
    if reps == 0:
        return _finish(OPTIMAL, path, [], 1, t0)

    memo: dict[tuple[str, ...], tuple[float, LayerSolution | None]] = {}
    expansions = 0

    def best(current: PathSpec) -> tuple[float, LayerSolution | None]:
        nonlocal expansions
        key = current.ids
        if len(current) == 2:
            return 0.0, None
        hit = memo.get(key)
        if hit is not None:
            return hit
        best_value = None
        best_layer = None
        for solution in enumerate_layer_solutions(current, composite_allowed=True):
            expansions += 1
            cost_here = max(segment_cost(seg, current) for seg in solution.segments)
            sub_value, _ = best(current.drop(solution.parent_ids()))
            value = fsum((cost_here, sub_value))
            if best_value is None or value < best_value:
                best_value = value
                best_layer = solution
        memo[key] = (best_value, best_layer)
        return memo[key]

    layers = []
    current = path
    while len(current) > 2:
        _, layer = best(current)
        layers.append(layer)
        current = current.drop(layer.parent_ids())
    return _finish(OPTIMAL, path, layers, expansions, t0)


def plan_with(strategy: str, path: PathSpec, oracle_bound: int = DEFAULT_ORACLE_BOUND) -> PlannerReport:
    """Run the named strategy on ``path``."""
    kind = resolve_strategy(strategy)
    if kind.kind == "sequential":
        return plan_sequential(path)
    if kind.kind == "bbt":
        return plan_bbt(path)
    if kind.kind == "layer_greedy":
        return plan_layer_greedy(path, kind.composite_allowed)
    if kind.kind == "segment_greedy":
        return plan_segment_greedy(path, kind.composite_allowed)
    return plan_optimal(path, bound=oracle_bound)


def report_to_document(report: PlannerReport) -> dict:
    from .model import plan_to_document

    doc = plan_to_document(report.plan)
    doc["strategy"] = report.strategy
    doc["cost_total"] = report.cost.total
    doc["cost_per_layer"] = list(report.cost.per_layer)
    doc["wall_time_us"] = report.wall_time_us
    doc["expansions"] = report.expansions
    return doc
