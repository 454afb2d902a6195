# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled implementation of the hot per-edge kernels.

Mirrors ``_kernels_py`` operation for operation, in the same order, so
labels and counters are bit-identical between backends. See that module
for the shared conventions.
"""

import numpy as np

cimport numpy as cnp

BACKEND_NAME = "compiled"

OP_BFS = 0
OP_SSSP = 1
OP_CC = 2
OP_PULL_ADD = 3

ctypedef cnp.int64_t i64
ctypedef cnp.int32_t i32
ctypedef cnp.float64_t f64

_depth_cache = {}


def probe_depths(n):
    """Probe count of the endpoint binary search, per result segment."""
    cached = _depth_cache.get(n)
    if cached is not None:
        return cached
    depths_arr = np.zeros(n, dtype=np.int64)
    cdef i64[:] depths = depths_arr
    cdef list stack = [(0, n - 1, 0)]
    cdef i64 lo, hi, d, mid
    while stack:
        lo, hi, d = stack.pop()
        if lo == hi:
            depths[lo] = d
        else:
            mid = (lo + hi) // 2
            stack.append((lo, mid, d + 1))
            stack.append((mid + 1, hi, d + 1))
    _depth_cache[n] = depths_arr
    return depths_arr


cdef inline void _apply_edge(int opcode, i64 row, i64 eidx, i32[:] targets,
                             f64[:] weights, f64[:] values, f64[:] out,
                             f64[:] aux) noexcept nogil:
    cdef i64 dst
    cdef f64 prop
    if opcode == OP_PULL_ADD:
        out[row] += aux[targets[eidx]]
        return
    dst = targets[eidx]
    if opcode == OP_BFS:
        prop = values[row] + 1.0
    elif opcode == OP_SSSP:
        prop = values[row] + weights[eidx]
    else:
        prop = values[row]
    if prop < out[dst]:
        out[dst] = prop


cdef inline i64 _search_owner(i64[:] cumulative, i64 g, i64* probes) noexcept nogil:
    cdef i64 lo = 0, hi = cumulative.shape[0] - 1, mid, n = 0
    while lo < hi:
        mid = (lo + hi) // 2
        n += 1
        if g < cumulative[mid]:
            hi = mid
        else:
            lo = mid + 1
    probes[0] = n
    return lo


def vertex_kernel(i64[:] offsets, i32[:] targets, f64[:] weights, i64[:] frontier,
                  f64[:] values, f64[:] out, f64[:] aux, int opcode,
                  int num_ctas, int threads_per_cta, i64[:] per_cta_edges):
    cdef i64 total_threads = num_ctas * threads_per_cta
    cdef i64 i, v, cta, e, start, end
    for i in range(frontier.shape[0]):
        v = frontier[i]
        cta = (i % total_threads) // threads_per_cta
        start = offsets[v]
        end = offsets[v + 1]
        per_cta_edges[cta] += end - start
        for e in range(start, end):
            _apply_edge(opcode, v, e, targets, weights, values, out, aux)


def edge_kernel(i64[:] offsets, i32[:] targets, f64[:] weights, i64[:] frontier,
                f64[:] values, f64[:] out, f64[:] aux, int opcode,
                int num_ctas, int threads_per_cta, i64[:] per_cta_edges):
    cdef i64 total_threads = num_ctas * threads_per_cta
    cdef i64 m = 0
    cdef i64 i, v, e, start, end, chunk, j
    for i in range(frontier.shape[0]):
        v = frontier[i]
        m += offsets[v + 1] - offsets[v]
    if m == 0:
        return
    chunk = (m + total_threads - 1) // total_threads
    j = 0
    for i in range(frontier.shape[0]):
        v = frontier[i]
        start = offsets[v]
        end = offsets[v + 1]
        for e in range(start, end):
            per_cta_edges[(j // chunk) // threads_per_cta] += 1
            _apply_edge(opcode, v, e, targets, weights, values, out, aux)
            j += 1


def twc_kernel(i64[:] offsets, i32[:] targets, f64[:] weights, i64[:] small,
               i64[:] medium, i64[:] large, f64[:] values, f64[:] out, f64[:] aux,
               int opcode, int num_ctas, int threads_per_cta, int warp_size,
               i64[:] per_cta_edges):
    cdef i64 total_threads = num_ctas * threads_per_cta
    cdef i64 num_warps = total_threads // warp_size
    cdef i64 warps_per_cta = threads_per_cta // warp_size
    cdef i64 i, v, cta, e, start, end
    for i in range(small.shape[0]):
        v = small[i]
        cta = (i % total_threads) // threads_per_cta
        start = offsets[v]
        end = offsets[v + 1]
        per_cta_edges[cta] += end - start
        for e in range(start, end):
            _apply_edge(opcode, v, e, targets, weights, values, out, aux)
    for i in range(medium.shape[0]):
        v = medium[i]
        cta = (i % num_warps) // warps_per_cta
        start = offsets[v]
        end = offsets[v + 1]
        per_cta_edges[cta] += end - start
        for e in range(start, end):
            _apply_edge(opcode, v, e, targets, weights, values, out, aux)
    for i in range(large.shape[0]):
        v = large[i]
        cta = i % num_ctas
        start = offsets[v]
        end = offsets[v + 1]
        per_cta_edges[cta] += end - start
        for e in range(start, end):
            _apply_edge(opcode, v, e, targets, weights, values, out, aux)


def lb_kernel(i64[:] offsets, i32[:] targets, f64[:] weights, i64[:] huge,
              i64[:] cumulative, f64[:] values, f64[:] out, f64[:] aux,
              int opcode, int blocked, int num_ctas, int threads_per_cta,
              int warp_size, i64[:] per_cta_edges, i64[:] per_warp_paths):
    cdef i64 total_edges = cumulative[cumulative.shape[0] - 1]
    cdef i64 total_threads = num_ctas * threads_per_cta
    cdef i64 num_warps = total_threads // warp_size
    cdef i64 chunk = (total_edges + total_threads - 1) // total_threads
    cdef i64 passes = chunk  # cyclic stride count equals the blocked chunk
    cdef i64 accesses = 0
    cdef i64 p, w, lane, tid, g, owner, prev_owner, distinct, base, eidx, row
    cdef i64 probes = 0
    for p in range(passes):
        for w in range(num_warps):
            prev_owner = -1
            distinct = 0
            for lane in range(warp_size):
                tid = w * warp_size + lane
                if blocked:
                    g = tid * chunk + p
                else:
                    g = p * total_threads + tid
                if g >= total_edges:
                    break  # g grows with lane in both distributions
                owner = _search_owner(cumulative, g, &probes)
                base = cumulative[owner - 1] if owner > 0 else 0
                row = huge[owner]
                eidx = offsets[row] + (g - base)
                _apply_edge(opcode, row, eidx, targets, weights, values, out, aux)
                per_cta_edges[tid // threads_per_cta] += 1
                if owner != prev_owner:
                    distinct += 1
                    accesses += probes
                    prev_owner = owner
            if distinct > per_warp_paths[w]:
                per_warp_paths[w] = distinct
    return accesses
