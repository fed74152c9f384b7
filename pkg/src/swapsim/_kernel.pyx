# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled fast path for untraced simulation runs.

Mirrors engine.run_engine exactly for classical_latency == 0: same
per-node counter-based splitmix64 streams, same float operation order,
same equal-time processing order (segments ascending).  Returns ok=0
when the run would cross max_sim_time, in which case the caller re-runs
on the event engine for exact timeout semantics.
"""

from libc.stdint cimport int32_t, int64_t, uint64_t

import numpy as np

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15U
cdef double INV53 = 1.0 / 9007199254740992.0


cdef inline uint64_t mix64(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9U
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBU
    return z ^ (z >> 31)


cdef inline double uniform_at(uint64_t sub_seed, int64_t counter) nogil:
    cdef uint64_t bits = mix64(sub_seed + (<uint64_t> counter) * GOLDEN)
    return <double> (bits >> 11) * INV53


def uniform_probe(unsigned long long seed, int node, long counter):
    """Expose the stream for bit-equality tests against the Python twin."""
    cdef uint64_t sub = mix64(<uint64_t> seed + (<uint64_t> (node + 1)) * GOLDEN)
    return uniform_at(sub, counter)


def run_kernel(
    int32_t[::1] members,
    int32_t[::1] seg_start,
    int32_t[::1] layer_start,
    double[::1] costs,
    double[::1] p,
    int hops,
    double attempt_latency,
    double prep_latency,
    bint deterministic,
    bint full_path,
    unsigned long long seed,
    double tmax,
):
    cdef int n_layers = layer_start.shape[0] - 1
    cdef int n_nodes = costs.shape[0]
    cdef double A = attempt_latency
    cdef double P = prep_latency

    cdef uint64_t[::1] sub_seed = np.empty(n_nodes, dtype=np.uint64)
    cdef int64_t[::1] counter = np.zeros(n_nodes, dtype=np.int64)
    cdef int i
    for i in range(n_nodes):
        sub_seed[i] = mix64(<uint64_t> seed + (<uint64_t> (i + 1)) * GOLDEN)

    per_layer = np.zeros(n_layers, dtype=np.float64)
    cdef double[::1] per_layer_v = per_layer

    cdef int64_t pairs = hops
    cdef int64_t attempts = 0
    cdef int64_t retrans = 0

    cdef int lay, s, s0, s1, node, m, k, n_done, failed
    cdef double t, worst, layer_begin, round_t, pass_start, completion
    cdef double u
    cdef int span

    # deterministic runs never fail, so both policies coincide
    if deterministic or not full_path:
        completion = 0.0
        for lay in range(n_layers):
            layer_begin = completion
            worst = layer_begin
            s0 = layer_start[lay]
            s1 = layer_start[lay + 1]
            for s in range(s0, s1):
                t = layer_begin
                k = seg_start[s + 1] - seg_start[s]
                span = k + 1
                m = 0
                if deterministic:
                    while m < k:
                        node = members[seg_start[s] + m]
                        t = t + costs[node] * A
                        attempts += 1
                        m += 1
                else:
                    while m < k:
                        node = members[seg_start[s] + m]
                        t = t + A
                        if t > tmax:
                            return (0, 0.0, 0, 0, 0, per_layer)
                        attempts += 1
                        counter[node] += 1
                        u = uniform_at(sub_seed[node], counter[node])
                        if u < p[node]:
                            m += 1
                        else:
                            pairs += span
                            retrans += 1
                            t = t + span * P
                            m = 0
                if t > worst:
                    worst = t
            if worst > tmax:
                return (0, 0.0, 0, 0, 0, per_layer)
            per_layer_v[lay] = worst - layer_begin
            completion = worst
        return (1, completion, pairs, attempts, retrans, per_layer)

    # stochastic full path: any failure restarts the pass from layer 1;
    # within a pass all active segments resolve on a common round grid
    cdef int max_segs = 0
    for lay in range(n_layers):
        if layer_start[lay + 1] - layer_start[lay] > max_segs:
            max_segs = layer_start[lay + 1] - layer_start[lay]
    seg_m_arr = np.zeros(max_segs, dtype=np.int32)
    cdef int32_t[::1] seg_m = seg_m_arr

    pass_start = 0.0
    while True:
        completion = pass_start
        failed = 0
        for lay in range(n_layers):
            layer_begin = completion
            s0 = layer_start[lay]
            s1 = layer_start[lay + 1]
            n_done = 0
            for s in range(s1 - s0):
                seg_m[s] = 0
            round_t = layer_begin
            while n_done < s1 - s0:
                round_t = round_t + A
                if round_t > tmax:
                    return (0, 0.0, 0, 0, 0, per_layer)
                for s in range(s1 - s0):
                    k = seg_start[s0 + s + 1] - seg_start[s0 + s]
                    if seg_m[s] >= k:
                        continue
                    node = members[seg_start[s0 + s] + seg_m[s]]
                    attempts += 1
                    counter[node] += 1
                    u = uniform_at(sub_seed[node], counter[node])
                    if u < p[node]:
                        seg_m[s] += 1
                        if seg_m[s] == k:
                            n_done += 1
                    else:
                        retrans += 1
                        pairs += hops
                        failed = 1
                        break
                if failed:
                    break
            if failed:
                pass_start = round_t + hops * P
                break
            per_layer_v[lay] = round_t - layer_begin
            completion = round_t
        if not failed:
            return (1, completion, pairs, attempts, retrans, per_layer)
