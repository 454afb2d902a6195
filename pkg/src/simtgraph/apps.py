"""Benchmark applications expressed as per-edge operators.

Every app is a BSP state machine the engine drives: per round it exposes a
read-only label snapshot plus an output buffer (min-reduction target for
push apps, additive accumulator for pull apps), and folds the merged
result back at round end. Updates are commutative monotone reductions, so
final labels are independent of which scheduler distributed the edges.

bfs / sssp  push, hop / weighted distance, min
cc          push on the symmetrized view, min component id
pr          pull, damped rank iteration with residual-style stopping
kcore       pull on the symmetrized view, surviving-neighbor counts
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .graph import Graph
from .kernels import OP_BFS, OP_CC, OP_PULL_ADD, OP_SSSP

INF = np.inf
APP_NAMES = ("bfs", "sssp", "cc", "pr", "kcore")


class AppBase:
    """Shared round plumbing; subclasses set the operator specifics."""

    name: str
    direction: str  # push | pull
    opcode: int
    merge: str  # min | add
    needs_symmetrized = False
    needs_weights = False

    def __init__(self):
        self.graph = None
        self.values = None
        self._empty = np.empty(0, dtype=np.float64)

    def setup(self, graph: Graph):
        """Bind to the traversal graph (already symmetrized if required)."""
        self.graph = graph

    def initial_frontier(self) -> np.ndarray:
        raise NotImplementedError

    def round_aux(self) -> np.ndarray:
        """Pull input values; empty for push operators."""
        return self._empty

    def make_out(self) -> np.ndarray:
        """Fresh per-device output buffer for one round."""
        if self.merge == "min":
            return self.values.copy()
        return np.zeros(len(self.values), dtype=np.float64)

    def end_round(self, merged: np.ndarray, active: np.ndarray):
        """Fold the merged round output; return (next_frontier, done)."""
        raise NotImplementedError

    def labels(self) -> np.ndarray:
        return self.values


class _PushMinApp(AppBase):
    merge = "min"
    direction = "push"

    def end_round(self, merged, active):
        changed = np.flatnonzero(merged < self.values)
        self.values = merged
        return changed, len(changed) == 0


class BfsApp(_PushMinApp):
    """Hop distances from a source; unreachable stays +inf."""

    name = "bfs"
    opcode = OP_BFS

    def __init__(self, source: int):
        super().__init__()
        self.source = source

    def setup(self, graph):
        super().setup(graph)
        if not 0 <= self.source < graph.num_vertices:
            raise ConfigError(f"source {self.source} outside graph")
        self.values = np.full(graph.num_vertices, INF)
        self.values[self.source] = 0.0

    def initial_frontier(self):
        return np.array([self.source], dtype=np.int64)


class SsspApp(BfsApp):
    """Weighted shortest distances; weights must be non-negative.

    An unweighted graph runs with unit weights.
    """

    name = "sssp"
    opcode = OP_SSSP
    needs_weights = True

    def setup(self, graph):
        if graph.edge_weights is not None and graph.num_edges and graph.edge_weights.min() < 0:
            raise ConfigError("sssp requires non-negative weights")
        super().setup(graph)


class CcApp(_PushMinApp):
    """Connected components by min-id label propagation over the
    symmetrized view; component label = smallest member id."""

    name = "cc"
    opcode = OP_CC
    needs_symmetrized = True

    def setup(self, graph):
        super().setup(graph)
        self.values = np.arange(graph.num_vertices, dtype=np.float64)

    def initial_frontier(self):
        return np.arange(self.graph.num_vertices, dtype=np.int64)


class PrApp(AppBase):
    """Damped rank iteration, pull direction, dense rounds.

    Iterates rank <- (1-d) + d * sum(rank[u]/outdeg[u]) over in-neighbors
    until the largest per-vertex change guarantees the per-vertex
    fixed-point residual is within ``tol``. All vertices stay active until
    that global criterion holds: freezing vertices individually is unsound
    when their in-neighbors are still moving.
    """

    name = "pr"
    direction = "pull"
    opcode = OP_PULL_ADD
    merge = "add"

    def __init__(self, damping: float = 0.85, tol: float = 1e-6):
        super().__init__()
        if not 0.0 < damping < 1.0:
            raise ConfigError("damping must be in (0, 1)")
        if tol <= 0.0:
            raise ConfigError("tolerance must be positive")
        self.damping = damping
        self.tol = tol
        self.converged = False

    def setup(self, graph):
        super().setup(graph)
        n = graph.num_vertices
        outdeg = graph.out_degrees()
        self.inv_outdeg = np.zeros(n, dtype=np.float64)
        nz = outdeg > 0
        self.inv_outdeg[nz] = 1.0 / outdeg[nz]
        self.values = np.full(n, 1.0 - self.damping)
        # Stop when max |delta| is small enough that the residual
        # d * sum(delta/outdeg) over any in-neighborhood is within tol.
        if graph.num_edges:
            src = np.repeat(np.arange(n), outdeg)
            gain = np.bincount(graph.out_targets, weights=self.inv_outdeg[src], minlength=n)
            worst_gain = self.damping * gain.max()
        else:
            worst_gain = 0.0
        self.eps_stop = self.tol / max(1.0, worst_gain)

    def initial_frontier(self):
        return np.arange(self.graph.num_vertices, dtype=np.int64)

    def round_aux(self):
        return self.values * self.inv_outdeg

    def end_round(self, merged, active):
        new = (1.0 - self.damping) + self.damping * merged
        delta = np.abs(new - self.values).max() if len(new) else 0.0
        self.values = new
        self.converged = delta <= self.eps_stop
        if self.converged:
            return np.empty(0, dtype=np.int64), True
        return np.arange(self.graph.num_vertices, dtype=np.int64), False


class KcoreApp(AppBase):
    """Fixed-k core membership by iterative removal.

    Labels are 1.0 while a vertex survives. Each round, active vertices
    recount surviving neighbors over the symmetrized view (pull); vertices
    dropping below k die and re-activate their surviving neighbors.
    Multi-edges and self-loops count with their multiplicity.
    """

    name = "kcore"
    direction = "pull"
    opcode = OP_PULL_ADD
    merge = "add"
    needs_symmetrized = True

    def __init__(self, k: int):
        super().__init__()
        if k < 1:
            raise ConfigError("k must be >= 1")
        self.k = k

    def setup(self, graph):
        super().setup(graph)
        self.values = np.ones(graph.num_vertices, dtype=np.float64)

    def initial_frontier(self):
        return np.arange(self.graph.num_vertices, dtype=np.int64)

    def round_aux(self):
        return self.values

    def end_round(self, merged, active):
        counts = merged[active]
        dying = active[counts < self.k]
        if len(dying) == 0:
            return np.empty(0, dtype=np.int64), True
        self.values[dying] = 0.0
        offsets, targets = self.graph.out_offsets, self.graph.out_targets
        neighbor_parts = [
            targets[offsets[v]:offsets[v + 1]] for v in dying.tolist()
        ]
        neighbors = np.unique(np.concatenate(neighbor_parts)) if neighbor_parts else dying[:0]
        alive = neighbors[self.values[neighbors] > 0.0]
        return alive.astype(np.int64), len(alive) == 0


def make_app(name: str, source: int = 0, k: int = 2, damping: float = 0.85,
             tol: float = 1e-6) -> AppBase:
    if name == "bfs":
        return BfsApp(source)
    if name == "sssp":
        return SsspApp(source)
    if name == "cc":
        return CcApp()
    if name == "pr":
        return PrApp(damping, tol)
    if name == "kcore":
        return KcoreApp(k)
    raise ConfigError(f"unknown app {name!r}")
