"""Event-driven reference implementation of the controller protocol.

One run executes a lowered swap plan under a central controller: the
controller dispatches a layer's segments in parallel, each composite
parent swaps sequentially, and a barrier separates layers.  A failed
attempt sends FAILED to the controller, which triggers re-preparation of
the pairs the failed segment spans (on-demand policy) or of the whole
path plus a restart from the first layer (full-path policy).

Events at equal timestamps are ordered by (layer, segment, node, kind),
so runs are deterministic.  Per-attempt randomness comes from counter
based per-node streams, which keeps outcomes independent of event
interleaving; the compiled kernel mirrors these dynamics and must return
bit-identical metrics (asserted in the tests).
"""

from __future__ import annotations

import heapq
from enum import IntEnum
from itertools import count

from .rng import NodeStreams

CONTROLLER = "controller"
DOMAIN_CONTROLLER = "ldc"


class MessageKind(IntEnum):
    """Protocol messages; the integer value is the equal-time tiebreak."""

    ACK_STARTED = 0
    ACK_DONE = 1
    FAILED = 2
    RETRY = 3
    ENT_READY = 4
    START_ES = 5


_RESOLVE = 6  # internal: an attempt finishes and its outcome materializes


class LoweredPlan:
    """Plan flattened for execution: member node indices per segment."""

    def __init__(self, node_ids, costs, layers):
        self.node_ids = node_ids  # original path node id per index
        self.costs = costs  # cost per node index
        self.p = [0.0 if c == 0.0 else 1.0 / c for c in costs]
        self.layers = layers  # [[ [member node index, ...], ... ], ...]
        self.spans = [[len(members) + 1 for members in layer] for layer in layers]
        self.hops = len(node_ids) - 1


def run_engine(lowered: LoweredPlan, config, streams: NodeStreams | None = None, trace=None):
    """Execute one run; returns a metrics dict (see simulator.Metrics)."""
    A = config.attempt_latency
    C = config.classical_latency
    P = config.prep_latency
    deterministic = config.attempt_model == "deterministic"
    full_path = config.policy == "full-path"
    tmax = config.max_sim_time
    if streams is None:
        streams = NodeStreams(config.seed)

    layers = lowered.layers
    n_layers = len(layers)
    costs = lowered.costs
    p = lowered.p
    ids = lowered.node_ids

    pairs = lowered.hops
    attempts = 0
    retrans = 0
    clears: list[float] = []
    pass_start = 0.0
    completion = None
    timed_out = False

    if n_layers == 0:
        return {
            "completion_time": 0.0,
            "pairs_prepared": pairs,
            "attempts": 0,
            "retransmissions": 0,
            "per_layer_times": (),
            "timed_out": False,
        }

    heap: list = []
    seq = count()
    epoch = 0
    pending = 0

    def emit(t, kind, src, dst, lay, s, node):
        if trace is not None:
            trace.append((t, kind.name, src, dst, lay + 1, s, node))

    def push(t, lay, s, node_pos, kind, member):
        heapq.heappush(heap, (t, lay, s, node_pos, int(kind), next(seq), epoch, member))

    def begin_attempt(t, lay, s, member):
        node = layers[lay][s][member]
        emit(t + C, MessageKind.ACK_STARTED, ids[node], CONTROLLER, lay, s, ids[node])
        duration = costs[node] * A if deterministic else A
        push(t + duration, lay, s, node, _RESOLVE, member)

    def dispatch(lay, t):
        nonlocal pending
        pending = len(layers[lay])
        for s in range(len(layers[lay])):
            push(t + C, lay, s, layers[lay][s][0], MessageKind.START_ES, 0)

    dispatch(0, 0.0)

    while heap:
        t, lay, s, node_pos, kind, _, ev_epoch, member = heapq.heappop(heap)
        if t > tmax:
            timed_out = True
            completion = tmax
            break
        if full_path and ev_epoch != epoch:
            continue  # cancelled by a restart
        if kind == MessageKind.START_ES:
            emit(t, MessageKind.START_ES, CONTROLLER, ids[node_pos], lay, s, ids[node_pos])
            begin_attempt(t, lay, s, member)
        elif kind == _RESOLVE:
            attempts += 1
            if deterministic:
                ok = True
            else:
                ok = streams.next_uniform(node_pos) < p[node_pos]
            next_kind = MessageKind.ACK_DONE if ok else MessageKind.FAILED
            push(t + C, lay, s, node_pos, next_kind, member)
        elif kind == MessageKind.ACK_DONE:
            emit(t, MessageKind.ACK_DONE, ids[node_pos], CONTROLLER, lay, s, ids[node_pos])
            members = layers[lay][s]
            if member + 1 < len(members):
                push(t + C, lay, s, members[member + 1], MessageKind.START_ES, member + 1)
            else:
                pending -= 1
                if pending == 0:
                    clears.append(t)
                    if lay + 1 == n_layers:
                        completion = t
                        break
                    dispatch(lay + 1, t)
        elif kind == MessageKind.FAILED:
            emit(t, MessageKind.FAILED, ids[node_pos], CONTROLLER, lay, s, ids[node_pos])
            retrans += 1
            if full_path:
                epoch += 1
                pairs += lowered.hops
            else:
                pairs += lowered.spans[lay][s]
            push(t + C, lay, s, node_pos, MessageKind.RETRY, member)
        elif kind == MessageKind.RETRY:
            emit(t, MessageKind.RETRY, CONTROLLER, DOMAIN_CONTROLLER, lay, s, ids[node_pos])
            # the domain controller prepares the spanned pairs one at a time
            if full_path:
                push(t + lowered.hops * P, lay, s, node_pos, MessageKind.ENT_READY, member)
            else:
                push(t + lowered.spans[lay][s] * P + C, lay, s, node_pos, MessageKind.ENT_READY, member)
        elif kind == MessageKind.ENT_READY:
            if full_path:
                emit(t, MessageKind.ENT_READY, DOMAIN_CONTROLLER, CONTROLLER, lay, s, ids[node_pos])
                clears.clear()
                pass_start = t
                dispatch(0, t)
            else:
                first = layers[lay][s][0]
                emit(t, MessageKind.ENT_READY, DOMAIN_CONTROLLER, ids[first], lay, s, ids[first])
                begin_attempt(t, lay, s, 0)

    if completion is None and not timed_out:
        timed_out = True
        completion = tmax

    per_layer = []
    prev = pass_start
    for t_clear in clears:
        per_layer.append(t_clear - prev)
        prev = t_clear
    return {
        "completion_time": completion,
        "pairs_prepared": pairs,
        "attempts": attempts,
        "retransmissions": retrans,
        "per_layer_times": tuple(per_layer),
        "timed_out": timed_out,
    }
