"""Swap-scheduling planners and a controller-protocol simulator for repeater chains."""

from .errors import (
    ConfigError,
    OracleBoundError,
    ParameterError,
    PlanStructureError,
    SwapError,
    UnreachableNodeError,
)
from .model import (
    InterferenceProfile,
    LayerSolution,
    PathSpec,
    PlanCostBreakdown,
    Segment,
    SwapPlan,
    apply_layer,
    channel_quality,
    layer_cost,
    node_cost,
    plan_cost,
    plan_from_document,
    plan_from_layers,
    plan_to_document,
    validate_plan,
)
from .planners import (
    BBT,
    HEURISTICS,
    IBT_LAYER_GREEDY,
    IBT_SEGMENT_GREEDY,
    OPTIMAL,
    PSES_LAYER_GREEDY,
    PSES_SEGMENT_GREEDY,
    SEQUENTIAL,
    STRATEGIES,
    PlannerReport,
    enumerate_layer_solutions,
    layer_saving,
    plan_bbt,
    plan_layer_greedy,
    plan_optimal,
    plan_segment_greedy,
    plan_sequential,
    plan_with,
)

__version__ = "0.1.0"
