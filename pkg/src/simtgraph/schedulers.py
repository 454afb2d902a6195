"""The five work-distribution policies.

vertex   round-robin whole vertices over threads
edge     equal contiguous edge shares per thread, O(1) endpoint lookup via
         a lazily materialized COO source array (space-for-search tradeoff)
twc      degree bins processed at thread / warp / CTA granularity
lb       every round, prefix-sum ALL active degrees and spread the edges
         blocked over all threads, recovering owners by binary search
alb      per-round inspection splits the frontier at a degree threshold:
         vertices at or above it have their edges spread over all threads
         (cyclic by default), the rest fall back to the degree bins

Schedulers are stateless policy values; all mutable state lives in the
label buffers and metrics owned by the engine.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from . import kernels
from .errors import ConfigError
from .graph import Graph
from .simt import KernelConfig, RoundMetrics
from .worklist import PrefixWork, Worklist, remap_threshold

SCHEDULER_KINDS = ("vertex", "edge", "twc", "lb", "alb")
AUTO_THRESHOLD = None


@dataclass(frozen=True)
class Scheduler:
    """A work-distribution policy selection.

    ``distribution`` applies to the edge-range kernels: alb defaults to
    cyclic, lb to blocked (the Gunrock-style configuration). ``threshold``
    of None means "number of launched threads".
    """

    kind: str
    distribution: Optional[str] = None
    threshold: Optional[int] = None

    def __post_init__(self):
        if self.kind not in SCHEDULER_KINDS:
            raise ConfigError(f"unknown scheduler kind {self.kind!r}")
        if self.distribution not in (None, "cyclic", "blocked"):
            raise ConfigError(f"unknown distribution {self.distribution!r}")

    def resolved_distribution(self) -> str:
        if self.distribution is not None:
            return self.distribution
        return "blocked" if self.kind == "lb" else "cyclic"

    def resolved_threshold(self, config: KernelConfig) -> int:
        t = self.threshold if self.threshold is not None else config.total_threads
        return remap_threshold(t)

    def describe(self) -> str:
        parts = [self.kind]
        if self.kind in ("lb", "alb"):
            parts.append(self.resolved_distribution())
            if self.kind == "alb" and self.threshold is not None:
                parts.append(f"t{self.threshold}")
        return "-".join(parts)


@dataclass
class TwcBins:
    """Degree bins for thread/warp/CTA granularity processing."""

    small: np.ndarray  # degree < small_max
    medium: np.ndarray  # small_max <= degree < medium_max
    large: np.ndarray  # degree >= medium_max
    small_max: int
    medium_max: int

    def __len__(self) -> int:
        return len(self.small) + len(self.medium) + len(self.large)


class TraversalView:
    """Direction-resolved adjacency of the graph a round traverses.

    Push operators walk CSR rows of active vertices; pull operators walk
    CSC rows. Weights are float64 copies for the kernels (unit weights are
    substituted when the graph is unweighted).
    """

    def __init__(self, offsets, targets, weights, direction: str):
        self.offsets = offsets
        self.targets = targets
        self.weights = weights if weights is not None else np.empty(0, dtype=np.float64)
        self.direction = direction
        self._coo_src = None

    @classmethod
    def from_graph(cls, graph: Graph, direction: str, unit_weights: bool = False):
        if direction == "push":
            offsets, targets, w = graph.out_offsets, graph.out_targets, graph.edge_weights
        elif direction == "pull":
            offsets, targets, w = graph.csc()
        else:
            raise ConfigError(f"unknown direction {direction!r}")
        weights = None
        if w is not None:
            weights = w.astype(np.float64)
        elif unit_weights:
            weights = np.ones(len(targets), dtype=np.float64)
        return cls(offsets, targets, weights, direction)

    @property
    def num_rows(self) -> int:
        return len(self.offsets) - 1

    @property
    def num_edges(self) -> int:
        return len(self.targets)

    def degrees(self, ids: np.ndarray) -> np.ndarray:
        return self.offsets[ids + 1] - self.offsets[ids]

    def ensure_coo(self) -> int:
        """Materialize the per-edge source array; returns its byte size."""
        if self._coo_src is None:
            self._coo_src = np.repeat(
                np.arange(self.num_rows, dtype=np.int32), np.diff(self.offsets)
            )
        return self._coo_src.nbytes

    @property
    def coo_bytes(self) -> int:
        return 0 if self._coo_src is None else self._coo_src.nbytes


# ----------------------------------------------------------------------
# inspection
# ----------------------------------------------------------------------


def split_frontier(frontier, degrees, threshold, config: KernelConfig):
    """Split active vertices into (huge, TwcBins), preserving order.

    ``threshold`` of None disables the huge bin (plain degree binning).
    """
    if threshold is not None:
        huge_mask = degrees >= threshold
        huge = frontier[huge_mask]
        rest = frontier[~huge_mask]
        rest_deg = degrees[~huge_mask]
    else:
        huge = frontier[:0]
        rest, rest_deg = frontier, degrees
    small_mask = rest_deg < config.warp_size
    medium_mask = (~small_mask) & (rest_deg < config.threads_per_cta)
    large_mask = rest_deg >= config.threads_per_cta
    bins = TwcBins(
        small=rest[small_mask],
        medium=rest[medium_mask],
        large=rest[large_mask],
        small_max=config.warp_size,
        medium_max=config.threads_per_cta,
    )
    return huge, bins


def inspect(wl, graph: Graph, threshold, direction: str = "push",
            config: KernelConfig = KernelConfig()):
    """Inspection phase: split the frontier at the degree threshold.

    Returns (huge vertex ids, TwcBins) in deterministic frontier order.
    """
    ids = wl.ids() if isinstance(wl, Worklist) else np.asarray(wl, dtype=np.int64)
    offsets = graph.out_offsets if direction == "push" else graph.csc()[0]
    degrees = offsets[ids + 1] - offsets[ids]
    if threshold is not None and threshold != np.inf:
        threshold = remap_threshold(int(threshold))
    else:
        threshold = None
    return split_frontier(ids, degrees, threshold, config)


# ----------------------------------------------------------------------
# edge index assignment (reference formulas; the kernels inline these)
# ----------------------------------------------------------------------


def assign_cyclic(total_edges: int, config: KernelConfig, tid: int) -> Iterator[int]:
    """Strided edge indices tid, tid+T, tid+2T, ... below total_edges."""
    return iter(range(tid, total_edges, config.total_threads))


def assign_blocked(total_edges: int, config: KernelConfig, tid: int) -> Iterator[int]:
    """Contiguous chunk of ceil(e/T) edges starting at tid*ceil(e/T)."""
    chunk = -(-total_edges // config.total_threads)
    start = tid * chunk
    return iter(range(start, min(start + chunk, total_edges)))


# ----------------------------------------------------------------------
# kernel execution
# ----------------------------------------------------------------------


def _changed_worklist(before, after, num_vertices) -> Worklist:
    return Worklist.from_ids(num_vertices, np.flatnonzero(after != before))


def execute_lb_kernel(view: TraversalView, prefix: PrefixWork, distribution: str,
                      config: KernelConfig, state, metrics: RoundMetrics) -> Worklist:
    """Run the edge-range kernel over the prefix-summed vertex list.

    Every edge of every listed vertex is applied exactly once; owners are
    recovered by binary search, charged with warp-level coalescing per
    pass. Returns the vertices whose working labels changed.
    """
    if prefix.total_edges <= 0:
        raise ConfigError("lb kernel requires a non-empty prefix")
    before = state.out.copy()
    metrics.log_launch("lb")
    accesses = kernels.backend.lb_kernel(
        view.offsets, view.targets, view.weights,
        prefix.huge_vertices, prefix.cumulative,
        state.values, state.out, state.aux, state.opcode,
        int(distribution == "blocked"),
        config.num_ctas, config.threads_per_cta, config.warp_size,
        metrics.per_cta_edges, metrics.per_warp_search_paths,
    )
    metrics.search_memory_accesses += int(accesses)
    return _changed_worklist(before, state.out, len(state.out))


def execute_twc_kernel(view: TraversalView, bins: TwcBins, config: KernelConfig,
                       state, metrics: RoundMetrics) -> Worklist:
    """Run the degree-binned kernel; each vertex's edges are attributed to
    one thread, one warp, or one CTA according to its bin."""
    before = state.out.copy()
    metrics.log_launch("twc")
    kernels.backend.twc_kernel(
        view.offsets, view.targets, view.weights,
        bins.small, bins.medium, bins.large,
        state.values, state.out, state.aux, state.opcode,
        config.num_ctas, config.threads_per_cta, config.warp_size,
        metrics.per_cta_edges,
    )
    return _changed_worklist(before, state.out, len(state.out))


def run_round(scheduler: Scheduler, view: TraversalView, frontier: np.ndarray,
              state, config: KernelConfig, metrics: RoundMetrics) -> None:
    """Execute one scheduler round over ``frontier`` (device-local)."""
    if len(frontier) == 0:
        return
    kind = scheduler.kind
    if kind == "vertex":
        metrics.log_launch("vertex")
        kernels.backend.vertex_kernel(
            view.offsets, view.targets, view.weights, frontier,
            state.values, state.out, state.aux, state.opcode,
            config.num_ctas, config.threads_per_cta, metrics.per_cta_edges,
        )
    elif kind == "edge":
        view.ensure_coo()
        metrics.log_launch("edge")
        kernels.backend.edge_kernel(
            view.offsets, view.targets, view.weights, frontier,
            state.values, state.out, state.aux, state.opcode,
            config.num_ctas, config.threads_per_cta, metrics.per_cta_edges,
        )
    elif kind == "twc":
        degrees = view.degrees(frontier)
        metrics.log_launch("inspect")
        metrics.inspect_degree_reads += len(frontier)
        _, bins = split_frontier(frontier, degrees, None, config)
        execute_twc_kernel(view, bins, config, state, metrics)
    elif kind == "lb":
        degrees = view.degrees(frontier)
        cumulative = np.cumsum(degrees, dtype=np.int64)
        prefix = PrefixWork(frontier, cumulative)
        if prefix.total_edges > 0:
            execute_lb_kernel(view, prefix, scheduler.resolved_distribution(),
                              config, state, metrics)
    elif kind == "alb":
        threshold = scheduler.resolved_threshold(config)
        degrees = view.degrees(frontier)
        metrics.log_launch("inspect")
        metrics.inspect_degree_reads += len(frontier)
        huge, bins = split_frontier(frontier, degrees, threshold, config)
        if len(huge):
            prefix = PrefixWork(huge, np.cumsum(view.degrees(huge), dtype=np.int64))
            execute_lb_kernel(view, prefix, scheduler.resolved_distribution(),
                              config, state, metrics)
        execute_twc_kernel(view, bins, config, state, metrics)
    else:  # pragma: no cover - guarded in __post_init__
        raise ConfigError(f"unknown scheduler kind {kind!r}")


def run_scheduler(scheduler: Scheduler, wl, view: TraversalView, state,
                  config: KernelConfig, metrics: RoundMetrics) -> Worklist:
    """Public one-round entry point; returns vertices whose labels changed."""
    ids = wl.ids() if isinstance(wl, Worklist) else np.asarray(wl, dtype=np.int64)
    before = state.out.copy()
    run_round(scheduler, view, ids, state, config, metrics)
    return _changed_worklist(before, state.out, len(state.out))
