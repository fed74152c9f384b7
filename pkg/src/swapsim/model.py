"""Cost model and layered swap-plan structures for repeater chains.

A path is an ordered chain of nodes: two end users and interior repeaters,
each repeater carrying a time cost expressed in expected swap attempts.
A plan reduces the path to its two endpoints through ordered layers; each
layer is a set of disjoint segments whose parent nodes swap in parallel
between segments and sequentially inside a segment.  Layer cost is the
maximum segment cost, segment cost is the sum of its parents' costs, and
plan cost is the sum of layer costs over the successively shorter paths.

Everything here is immutable and purely functional.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import fsum, isfinite

from .errors import ParameterError, PlanStructureError, UnreachableNodeError

ROLE_USER = "user"
ROLE_REPEATER = "repeater"

# A 100 km channel loses all entanglement at 0.2 dB/km, which bounds the
# loss-noise parameter and normalizes it inside channel_quality().
MAX_CHANNEL_NOISE = 0.2


def channel_quality(qlir: float, qln: float) -> float:
    """Success probability of entanglement distribution over a channel.

    ``qlir`` is the loss-init rate in [0, 1]; ``qln`` the loss noise in
    dB/km, valid up to 0.2 for the assumed 100 km channel.
    """
    if not (isfinite(qlir) and 0.0 <= qlir <= 1.0):
        raise ParameterError("qlir", f"must be in [0, 1], got {qlir!r}")
    if not (isfinite(qln) and 0.0 <= qln <= MAX_CHANNEL_NOISE):
        raise ParameterError("qln", f"must be in [0, {MAX_CHANNEL_NOISE}], got {qln!r}")
    return 1.0 - (qlir + qln / MAX_CHANNEL_NOISE) / 2.0


@dataclass(frozen=True)
class InterferenceProfile:
    """Per-repeater noise parameters from which the node cost derives."""

    dpzr: float  # depolarizing rate, [0, 1)
    dpsr: float  # dephasing rate, [0, 1)
    qlir: float  # channel loss init rate, [0, 1]
    qln: float  # channel loss noise, dB/km, [0, 0.2]

    def __post_init__(self):
        for field in ("dpzr", "dpsr"):
            value = getattr(self, field)
            if not (isfinite(value) and 0.0 <= value < 1.0):
                raise ParameterError(field, f"must be in [0, 1), got {value!r}")
        # channel_quality validates qlir/qln and names the offending field
        channel_quality(self.qlir, self.qln)

    @property
    def channel_quality(self) -> float:
        return channel_quality(self.qlir, self.qln)


def node_cost(profile: InterferenceProfile) -> float:
    """Expected swap attempts for one success at a repeater.

    The success probability of a single attempt is the product of the
    storage, operation, and distribution success probabilities; its
    reciprocal is the expected attempt count.  Equals 1.0 only for a
    noiseless node.
    """
    cq = profile.channel_quality
    denom = (1.0 - profile.dpzr) * (1.0 - profile.dpsr) * cq
    if denom <= 0.0:
        raise UnreachableNodeError(
            f"attempt success probability is zero (channel quality {cq})"
        )
    return 1.0 / denom


def profile_for_cost(cost: float) -> InterferenceProfile:
    """A canonical profile whose node_cost equals ``cost`` (display only)."""
    if not (isfinite(cost) and cost >= 1.0):
        raise ParameterError("cost", f"must be >= 1, got {cost!r}")
    target = 1.0 / cost
    if target >= 0.5:
        # achievable through channel loss alone
        return InterferenceProfile(0.0, 0.0, 2.0 * (1.0 - target), 0.0)
    # floor the channel at quality 0.5, put the rest into depolarization
    return InterferenceProfile(1.0 - 2.0 * target, 0.0, 1.0, 0.0)


@dataclass(frozen=True)
class PathSpec:
    """An ordered chain: user, repeaters..., user, with per-node costs.

    Users carry cost 0 and never swap; every repeater cost is finite and
    at least 1 (one attempt is the best case).
    """

    ids: tuple[str, ...]
    costs: tuple[float, ...]

    def __post_init__(self):
        if len(self.ids) < 2:
            raise ParameterError("ids", "path needs at least the two end users")
        if len(self.ids) != len(self.costs):
            raise ParameterError("costs", "one cost per node required")
        if len(set(self.ids)) != len(self.ids):
            raise ParameterError("ids", "node identifiers must be unique")
        for pos, cost in enumerate(self.costs):
            if pos in (0, len(self.ids) - 1):
                if cost != 0.0:
                    raise ParameterError("costs", f"user node {self.ids[pos]} must have cost 0")
            elif not (isfinite(cost) and cost >= 1.0):
                raise ParameterError(
                    "costs", f"repeater {self.ids[pos]} needs a finite cost >= 1, got {cost!r}"
                )

    @classmethod
    def from_costs(cls, costs, prefix: str = "x") -> "PathSpec":
        """Build a path from repeater costs alone; ids become x0..xN."""
        costs = tuple(float(c) for c in costs)
        ids = tuple(f"{prefix}{i}" for i in range(len(costs) + 2))
        return cls(ids, (0.0,) + costs + (0.0,))

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def hops(self) -> int:
        return len(self.ids) - 1

    @property
    def roles(self) -> tuple[str, ...]:
        last = len(self.ids) - 1
        return tuple(
            ROLE_USER if pos in (0, last) else ROLE_REPEATER for pos in range(len(self.ids))
        )

    def repeater_positions(self) -> range:
        return range(1, len(self.ids) - 1)

    def repeater_costs(self) -> tuple[float, ...]:
        return self.costs[1:-1]

    def position(self, node_id: str) -> int:
        try:
            return self.ids.index(node_id)
        except ValueError:
            raise PlanStructureError(f"node {node_id!r} is not on the path") from None

    def cost_of(self, node_id: str) -> float:
        return self.costs[self.position(node_id)]

    def drop(self, node_ids) -> "PathSpec":
        """Path with the given nodes removed, order preserved."""
        gone = set(node_ids)
        keep = [pos for pos, nid in enumerate(self.ids) if nid not in gone]
        return PathSpec(
            tuple(self.ids[pos] for pos in keep),
            tuple(self.costs[pos] for pos in keep),
        )


@dataclass(frozen=True)
class Segment:
    """A contiguous sub-path <head, parents..., tail>.

    Executing the parents' swaps (sequentially, left to right) entangles
    head with tail.  More than one parent forms a composite parent.
    """

    head: str
    parents: tuple[str, ...]
    tail: str

    def __post_init__(self):
        if not self.parents:
            raise PlanStructureError("segment needs at least one parent node")


@dataclass(frozen=True)
class LayerSolution:
    """One layer: segments executed in parallel over the current path."""

    segments: tuple[Segment, ...]

    def __post_init__(self):
        if not self.segments:
            raise PlanStructureError("layer needs at least one segment")

    def parent_ids(self) -> tuple[str, ...]:
        return tuple(p for seg in self.segments for p in seg.parents)


@dataclass(frozen=True)
class SwapPlan:
    """Ordered layers reducing a path to its two end users.

    ``remaining_paths[k]`` is the path after executing layers 1..k+1, so
    layer k+1 is defined over ``remaining_paths[k-1]`` (the original path
    for k = 0).
    """

    original_path: PathSpec
    layers: tuple[LayerSolution, ...]
    remaining_paths: tuple[PathSpec, ...]


@dataclass(frozen=True)
class PlanCostBreakdown:
    per_layer: tuple[float, ...]
    total: float


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[str, ...]


def _segment_positions(segment: Segment, path: PathSpec) -> tuple[int, int]:
    """Validate contiguity/roles of a segment; return (head_pos, tail_pos)."""
    positions = [path.position(segment.head)]
    positions += [path.position(p) for p in segment.parents]
    positions.append(path.position(segment.tail))
    for before, after in zip(positions, positions[1:]):
        if after != before + 1:
            raise PlanStructureError(
                f"segment {segment.head}..{segment.tail} is not contiguous on the path"
            )
    last = len(path.ids) - 1
    for parent_pos in positions[1:-1]:
        if parent_pos in (0, last):
            raise PlanStructureError(
                f"user node {path.ids[parent_pos]} cannot be a parent"
            )
    return positions[0], positions[-1]


def _validate_layer(layer: LayerSolution, path: PathSpec) -> list[tuple[int, int]]:
    """Validate a whole layer over ``path``; return segment position spans."""
    spans = []
    prev_tail = None
    prev_last_parent = None
    for segment in layer.segments:
        head_pos, tail_pos = _segment_positions(segment, path)
        if prev_tail is not None:
            if head_pos < prev_tail:
                raise PlanStructureError(
                    f"segments overlap beyond a shared boundary near {segment.head!r}"
                )
            if head_pos + 1 - prev_last_parent < 2:
                # only possible when segments share no separating leaf
                raise PlanStructureError(
                    "parents of adjacent segments are adjacent on the path"
                )
        prev_tail = tail_pos
        prev_last_parent = tail_pos - 1
        spans.append((head_pos, tail_pos))
    return spans


def segment_cost(segment: Segment, path: PathSpec) -> float:
    """Sum of the segment's parent costs (sequential swaps add up)."""
    _segment_positions(segment, path)
    return fsum(path.cost_of(p) for p in segment.parents)


def layer_cost(layer: LayerSolution, path: PathSpec) -> float:
    """Max segment cost: parallel segments wait for the slowest one."""
    _validate_layer(layer, path)
    return max(segment_cost(seg, path) for seg in layer.segments)


def apply_layer(path: PathSpec, layer: LayerSolution) -> PathSpec:
    """Path after executing a layer: all parent nodes drop out."""
    _validate_layer(layer, path)
    return path.drop(layer.parent_ids())


def _walk(plan: SwapPlan):
    """Yield (layer_index, current_path, layer) validating progressively."""
    current = plan.original_path
    for idx, layer in enumerate(plan.layers):
        yield idx, current, layer
        current = apply_layer(current, layer)
        if idx < len(plan.remaining_paths):
            stored = plan.remaining_paths[idx]
            if stored.ids != current.ids:
                raise PlanStructureError(
                    f"layer {idx + 1}: stored remaining path {stored.ids} "
                    f"!= recomputed {current.ids}"
                )
        else:
            raise PlanStructureError(f"layer {idx + 1}: missing remaining path")
    if len(plan.remaining_paths) != len(plan.layers):
        raise PlanStructureError("one remaining path per layer required")
    if len(current) != 2:
        raise PlanStructureError(
            f"incomplete plan: final path still has {len(current)} nodes"
        )


def plan_cost(plan: SwapPlan) -> PlanCostBreakdown:
    """Per-layer costs over each layer's own remaining path, plus total."""
    per_layer = []
    for idx, current, layer in _walk(plan):
        try:
            per_layer.append(layer_cost(layer, current))
        except PlanStructureError as exc:
            raise PlanStructureError(f"layer {idx + 1}: {exc}") from None
    return PlanCostBreakdown(tuple(per_layer), fsum(per_layer))


def validate_plan(plan: SwapPlan) -> ValidationReport:
    """Non-raising check of every plan invariant."""
    violations = []
    try:
        seen: set[str] = set()
        for idx, current, layer in _walk(plan):
            _validate_layer(layer, current)
            parents = layer.parent_ids()
            if len(parents) == 0:
                violations.append(f"layer {idx + 1}: removes no repeater")
            dup = seen.intersection(parents)
            if dup:
                violations.append(f"layer {idx + 1}: reuses removed parents {sorted(dup)}")
            seen.update(parents)
    except PlanStructureError as exc:
        violations.append(str(exc))
    return ValidationReport(not violations, tuple(violations))


def plan_from_layers(path: PathSpec, layers) -> SwapPlan:
    """Assemble a SwapPlan, computing the per-layer remaining paths."""
    remaining = []
    current = path
    for layer in layers:
        current = apply_layer(current, layer)
        remaining.append(current)
    plan = SwapPlan(path, tuple(layers), tuple(remaining))
    if len(current) != 2:
        raise PlanStructureError(
            f"incomplete plan: final path still has {len(current)} nodes"
        )
    return plan


def layer_from_positions(path: PathSpec, parent_positions) -> LayerSolution:
    """Build a layer from chosen parent positions on ``path``.

    Maximal runs of consecutive positions become composite parents; the
    nodes flanking each run are the segment's head and tail.
    """
    chosen = sorted(set(parent_positions))
    if not chosen:
        raise PlanStructureError("layer needs at least one parent position")
    segments = []
    run = [chosen[0]]
    for pos in chosen[1:]:
        if pos == run[-1] + 1:
            run.append(pos)
        else:
            segments.append(run)
            run = [pos]
    segments.append(run)
    return LayerSolution(
        tuple(
            Segment(
                head=path.ids[run[0] - 1],
                parents=tuple(path.ids[p] for p in run),
                tail=path.ids[run[-1] + 1],
            )
            for run in segments
        )
    )


# --- plan document (de)serialization -----------------------------------

DOCUMENT_FORMAT = "swap-plan/1"


def plan_to_document(plan: SwapPlan) -> dict:
    path = plan.original_path
    return {
        "format": DOCUMENT_FORMAT,
        "path": {
            "ids": list(path.ids),
            "roles": list(path.roles),
            "costs": list(path.costs),
        },
        "layers": [
            [
                {"head": seg.head, "parents": list(seg.parents), "tail": seg.tail}
                for seg in layer.segments
            ]
            for layer in plan.layers
        ],
    }


def plan_from_document(doc: dict) -> SwapPlan:
    try:
        if doc.get("format") != DOCUMENT_FORMAT:
            raise PlanStructureError(f"unsupported plan format {doc.get('format')!r}")
        path = PathSpec(tuple(doc["path"]["ids"]), tuple(float(c) for c in doc["path"]["costs"]))
        layers = [
            LayerSolution(
                tuple(
                    Segment(seg["head"], tuple(seg["parents"]), seg["tail"])
                    for seg in layer
                )
            )
            for layer in doc["layers"]
        ]
    except (KeyError, TypeError) as exc:
        raise PlanStructureError(f"malformed plan document: {exc}") from None
    return plan_from_layers(path, layers)


def dumps_document(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"
