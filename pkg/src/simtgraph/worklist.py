"""Active-vertex frontiers and degree prefix sums for edge distribution."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import RangeError
from .graph import Graph


class Worklist:
    """Frontier of active vertices.

    Two interconvertible representations: dense (per-vertex flag vector)
    and sparse (id list). The sparse list preserves insertion order and
    deduplicates; the dense view yields ids in ascending order.
    """

    def __init__(self, num_vertices: int, dense: bool = False):
        self.num_vertices = num_vertices
        self.dense = dense
        if dense:
            self._flags = np.zeros(num_vertices, dtype=bool)
        else:
            self._ids = []
            self._members = set()

    @classmethod
    def from_ids(cls, num_vertices: int, ids, dense: bool = False) -> "Worklist":
        wl = cls(num_vertices, dense=dense)
        for v in ids:
            wl.push(int(v))
        return wl

    def push(self, v: int):
        if not 0 <= v < self.num_vertices:
            raise RangeError(f"vertex {v} outside 0..{self.num_vertices - 1}")
        if self.dense:
            self._flags[v] = True
        elif v not in self._members:
            self._members.add(v)
            self._ids.append(v)

    def __len__(self) -> int:
        return int(self._flags.sum()) if self.dense else len(self._ids)

    def __contains__(self, v) -> bool:
        return bool(self._flags[v]) if self.dense else v in self._members

    def ids(self) -> np.ndarray:
        """Active ids: insertion order when sparse, ascending when dense."""
        if self.dense:
            return np.flatnonzero(self._flags).astype(np.int64)
        return np.asarray(self._ids, dtype=np.int64)

    def to_dense(self) -> "Worklist":
        wl = Worklist(self.num_vertices, dense=True)
        wl._flags[self.ids()] = True
        return wl

    def to_sparse(self) -> "Worklist":
        return Worklist.from_ids(self.num_vertices, self.ids())


@dataclass
class PrefixWork:
    """Inclusive prefix sums over the degrees of a vertex list.

    ``cumulative[i]`` is the degree sum of ``huge_vertices[0..i]`` with an
    implicit leading zero, so vertex i owns the global edge index range
    ``[cumulative[i-1], cumulative[i])``.
    """

    huge_vertices: np.ndarray
    cumulative: np.ndarray

    @property
    def total_edges(self) -> int:
        return int(self.cumulative[-1]) if len(self.cumulative) else 0

    def __len__(self) -> int:
        return len(self.huge_vertices)


def compute_prefix(work, graph: Graph, direction: str = "push") -> PrefixWork:
    """Prefix-sum the out- (push) or in- (pull) degrees of ``work`` in order."""
    ids = work.ids() if isinstance(work, Worklist) else np.asarray(work, dtype=np.int64)
    offsets = graph.out_offsets if direction == "push" else graph.csc()[0]
    degrees = offsets[ids + 1] - offsets[ids]
    return PrefixWork(ids, np.cumsum(degrees, dtype=np.int64))


def find_owner(prefix: PrefixWork, global_edge: int):
    """Map a global edge index to (owner vertex, local edge offset, probes).

    Binary search over the inclusive prefix for the first entry exceeding
    ``global_edge``. The probe sequence (the indices inspected, in order)
    is returned for search-cost accounting; queries landing in the same
    segment take identical probe sequences, which is what makes warp-level
    coalescing of converged lanes well defined.
    """
    total = prefix.total_edges
    if not 0 <= global_edge < total:
        raise RangeError(f"edge index {global_edge} outside 0..{total - 1}")
    cum = prefix.cumulative
    lo, hi = 0, len(cum) - 1
    probes = []
    while lo < hi:
        mid = (lo + hi) // 2
        probes.append(mid)
        if global_edge < cum[mid]:
            hi = mid
        else:
            lo = mid + 1
    base = int(cum[lo - 1]) if lo else 0
    return int(prefix.huge_vertices[lo]), int(global_edge - base), probes


def remap_threshold(threshold: int) -> int:
    """Degree thresholds below 1 cannot hold (zero-degree vertices would
    break prefix monotonicity); remap to 1 with a warning."""
    if threshold < 1:
        warnings.warn("threshold < 1 remapped to 1", stacklevel=2)
        return 1
    return threshold
