"""Simulated GPU launch geometry and execution accounting.

Nothing here measures time. Cost is counted in operator applications
(per-CTA edge counters) and in modeled memory accesses for endpoint
searches, which is the granularity the load-balancing claims are stated
at. Warp lockstep is modeled only where it matters for those counters:
lanes of a warp that take identical search paths within one distribution
pass are coalesced and charged once.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, SimulationError

DEFAULT_NUM_CTAS = 84
DEFAULT_THREADS_PER_CTA = 256
DEFAULT_WARP_SIZE = 32


@dataclass(frozen=True)
class KernelConfig:
    """Simulated launch geometry: CTAs x threads, partitioned into warps."""

    num_ctas: int = DEFAULT_NUM_CTAS
    threads_per_cta: int = DEFAULT_THREADS_PER_CTA
    warp_size: int = DEFAULT_WARP_SIZE

    def __post_init__(self):
        if self.num_ctas < 1 or self.threads_per_cta < 1 or self.warp_size < 1:
            raise ConfigError("launch geometry values must be positive")
        if self.threads_per_cta % self.warp_size:
            raise ConfigError("threads_per_cta must be a multiple of warp_size")

    @property
    def total_threads(self) -> int:
        return self.num_ctas * self.threads_per_cta

    @property
    def num_warps(self) -> int:
        return self.total_threads // self.warp_size

    def cta_of_thread(self, tid: int) -> int:
        return tid // self.threads_per_cta

    def warp_of_thread(self, tid: int) -> int:
        return tid // self.warp_size


@dataclass(frozen=True)
class ThreadCoord:
    """Position of one simulated thread in the launch hierarchy."""

    global_id: int
    cta_id: int
    warp_id: int
    lane_id: int

    @classmethod
    def from_global(cls, gid: int, config: KernelConfig) -> "ThreadCoord":
        return cls(
            global_id=gid,
            cta_id=gid // config.threads_per_cta,
            warp_id=gid // config.warp_size,
            lane_id=gid % config.warp_size,
        )


class RoundMetrics:
    """Counters accumulated over the kernels of one BSP round on one device.

    per_cta_edges[c]        operator applications attributed to CTA c
    per_warp_search_paths[w] largest number of distinct binary-search
                            root-to-leaf paths warp w took within any single
                            distribution pass (a cyclic stride or blocked
                            step); coalescing never spans passes
    search_memory_accesses  total modeled accesses charged for searches
    kernel_launches         launches per kernel kind
    inspect_degree_reads    one per active vertex whose degree was inspected
    """

    def __init__(self, config: KernelConfig):
        self.config = config
        self.per_cta_edges = np.zeros(config.num_ctas, dtype=np.int64)
        self.per_warp_search_paths = np.zeros(config.num_warps, dtype=np.int64)
        self.search_memory_accesses = 0
        self.kernel_launches = Counter()
        self.launch_sequence = []
        self.inspect_degree_reads = 0
        self._pass_paths = None  # warp id -> set of path signatures, current pass

    # -- kernel / pass context -------------------------------------------

    def log_launch(self, kind: str):
        self.kernel_launches[kind] += 1
        self.launch_sequence.append(kind)
        self._pass_paths = None

    def begin_pass(self):
        """Start a new distribution pass; search coalescing resets here."""
        self._pass_paths = {}

    def charge_search(self, warp_id: int, path_signature):
        """Charge one binary search by a lane of ``warp_id``.

        A path already taken by another lane of the same warp in the same
        pass is coalesced: it is recorded but adds no memory accesses.
        """
        if self._pass_paths is None:
            self._pass_paths = {}
        seen = self._pass_paths.setdefault(warp_id, set())
        sig = tuple(path_signature)
        if sig not in seen:
            seen.add(sig)
            self.search_memory_accesses += len(sig)
            if len(seen) > self.per_warp_search_paths[warp_id]:
                self.per_warp_search_paths[warp_id] = len(seen)

    def add_edges(self, cta_id: int, count: int = 1):
        self.per_cta_edges[cta_id] += count

    # -- aggregation -------------------------------------------------------

    def total_edges(self) -> int:
        return int(self.per_cta_edges.sum())

    def as_dict(self) -> dict:
        return {
            "per_cta_edges": self.per_cta_edges.tolist(),
            "per_warp_search_paths": self.per_warp_search_paths.tolist(),
            "search_memory_accesses": int(self.search_memory_accesses),
            "kernel_launches": dict(sorted(self.kernel_launches.items())),
            "inspect_degree_reads": int(self.inspect_degree_reads),
        }


def for_each_thread(config: KernelConfig, body, metrics: RoundMetrics = None, kind: str = "kernel"):
    """Simulate one kernel launch: invoke ``body`` once per thread.

    Threads run in ascending global id order; the observable contract is
    sequential-deterministic, so bodies must restrict shared writes to
    commutative reductions. A body exception aborts the launch and is
    re-raised as SimulationError carrying the thread coordinate.
    """
    if metrics is not None:
        metrics.log_launch(kind)
    for gid in range(config.total_threads):
        coord = ThreadCoord.from_global(gid, config)
        try:
            body(coord)
        except Exception as exc:
            raise SimulationError(f"thread body failed: {exc}", coord=coord) from exc


def charge_search(metrics: RoundMetrics, warp_id: int, path_signature):
    """Module-level alias for RoundMetrics.charge_search."""
    metrics.charge_search(warp_id, path_signature)
