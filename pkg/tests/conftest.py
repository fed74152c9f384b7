"""Shared helpers: scripted random streams and protocol-trace assertions."""

from collections import defaultdict


class ScriptedStreams:
    """Predetermined per-node uniforms for exact failure scenarios."""

    def __init__(self, script: dict[int, list[float]]):
        self.script = {node: list(vals) for node, vals in script.items()}

    def next_uniform(self, node: int) -> float:
        values = self.script.get(node)
        if not values:
            raise AssertionError(f"scripted stream for node {node} exhausted")
        return values.pop(0)


def check_trace(rows, plan):
    """Assert barrier safety and in-segment sequentiality on a message trace.

    Expects rows from a zero-classical-latency run: (time, kind, src, dst,
    layer, segment, node).  Returns (barrier_violations, overlap_violations)
    as counts, asserting both are zero.
    """
    layer_parents = {
        k + 1: {p for seg in layer.segments for p in seg.parents}
        for k, layer in enumerate(plan.layers)
    }
    done: dict[int, set] = defaultdict(set)
    barrier_violations = 0
    open_attempt: dict[tuple[int, int], tuple[str, float]] = {}
    intervals: dict[tuple[int, int], list[tuple[float, float, str]]] = defaultdict(list)

    for time, kind, src, dst, layer, segment, node in rows:
        key = (layer, segment)
        if kind == "ACK_STARTED":
            if layer > 1 and done[layer - 1] != layer_parents[layer - 1]:
                barrier_violations += 1
            for start_node, start_t in [open_attempt.get(key, (None, None))]:
                if start_node is not None and start_node != node:
                    raise AssertionError(
                        f"segment {key} started {node} while {start_node} was mid-swap"
                    )
            open_attempt[key] = (node, time)
        elif kind in ("ACK_DONE", "FAILED"):
            started = open_attempt.pop(key, None)
            if started is not None:
                intervals[key].append((started[1], time, node))
        if kind == "ACK_DONE":
            done[layer].add(node)
        if kind == "ENT_READY" and dst == "controller":
            # full-path restart: all progress is discarded
            for k in list(done):
                done[k] = set()

    overlap_violations = 0
    for key, spans in intervals.items():
        spans.sort()
        for (s1, e1, n1), (s2, e2, n2) in zip(spans, spans[1:]):
            if n1 != n2 and s2 < e1:
                overlap_violations += 1

    assert barrier_violations == 0, f"{barrier_violations} barrier violations"
    assert overlap_violations == 0, f"{overlap_violations} overlapping attempts"
    return barrier_violations, overlap_violations
