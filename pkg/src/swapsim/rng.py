"""Portable deterministic random streams for the simulator.

The simulator draws per-attempt uniforms from counter-based splitmix64
streams: stream ``n`` (one per path node) is seeded from the run seed, and
its ``j``-th value is a pure function of ``(seed, n, j)``.  This makes draw
order irrelevant, so the compiled kernel and the event-driven engine see
bit-identical randomness, and matched-seed runs pair attempt outcomes by
node across strategies and policies.

The compiled kernel re-implements the same arithmetic in C; bit equality
is asserted in the test suite.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

RNG_NAME = "splitmix64-counter"


def mix64(z: int) -> int:
    """splitmix64 finalizer (Steele, Lea & Flood constants)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def stream_seed(run_seed: int, node: int) -> int:
    """Sub-stream seed for path node index ``node``."""
    return mix64((run_seed + (node + 1) * GOLDEN) & MASK64)


def uniform_at(sub_seed: int, counter: int) -> float:
    """The ``counter``-th uniform in [0, 1) of a sub-stream (counter >= 1)."""
    bits = mix64((sub_seed + counter * GOLDEN) & MASK64)
    return (bits >> 11) * 2.0**-53


class NodeStreams:
    """Per-node attempt streams for one simulation run."""

    def __init__(self, run_seed: int):
        self.run_seed = int(run_seed) & MASK64
        self._seeds: dict[int, int] = {}
        self._counters: dict[int, int] = {}

    def next_uniform(self, node: int) -> float:
        sub = self._seeds.get(node)
        if sub is None:
            sub = self._seeds[node] = stream_seed(self.run_seed, node)
        counter = self._counters.get(node, 0) + 1
        self._counters[node] = counter
        return uniform_at(sub, counter)


class SplitMix64Stream:
    """A single sequential uniform stream (used outside the simulator)."""

    def __init__(self, seed: int):
        self._seed = mix64(int(seed) & MASK64)
        self._counter = 0

    def uniform(self) -> float:
        self._counter += 1
        return uniform_at(self._seed, self._counter)
