"""BSP round driver, simplified multi-device execution, and reports.

Each round reads the round-start label snapshot and folds updates through
commutative reductions, so a round's outcome is independent of how any
scheduler orders the edges; frontiers are canonicalized to ascending id
order between rounds. With multiple devices, the traversal view is
partitioned into contiguous row blocks balanced by edge count; devices
compute on local frontiers against local label copies and a
reduce-then-broadcast synchronization makes labels consistent, counting
the values a real substrate would have transmitted.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .apps import AppBase, make_app
from .errors import ConfigError, ConvergenceError
from .graph import Graph
from .kernels import BACKEND_NAME
from .schedulers import Scheduler, TraversalView, run_round
from .simt import KernelConfig, RoundMetrics


@dataclass
class RoundState:
    """Buffers one scheduler round operates on (one device)."""

    opcode: int
    values: np.ndarray
    out: np.ndarray
    aux: np.ndarray


@dataclass
class Partition:
    """Contiguous row-block partition of a traversal view.

    Masters partition the vertex set; every view edge lives with its row,
    so each active vertex's round work runs wholly on its owning device.
    Mirrors are the vertices a device touches as edge targets without
    owning them.
    """

    num_vertices: int
    ranges: list
    mirrors: list
    owner: np.ndarray
    mirror_count: np.ndarray

    @property
    def num_devices(self) -> int:
        return len(self.ranges)


def make_partition(view: TraversalView, devices: int) -> Partition:
    if devices < 1:
        raise ConfigError("device count must be >= 1")
    offsets = view.offsets
    num_vertices = view.num_rows
    total = int(offsets[-1])
    cuts = [0]
    for k in range(1, devices):
        cut = int(np.searchsorted(offsets, round(k * total / devices), side="left"))
        cuts.append(max(cut, cuts[-1]))
    cuts.append(num_vertices)
    ranges = [(cuts[d], cuts[d + 1]) for d in range(devices)]
    mirrors = []
    mirror_count = np.zeros(num_vertices, dtype=np.int64)
    owner = np.zeros(num_vertices, dtype=np.int64)
    for d, (start, end) in enumerate(ranges):
        owner[start:end] = d
        t = view.targets[offsets[start]:offsets[end]]
        m = np.unique(t[(t < start) | (t >= end)]).astype(np.int64)
        mirrors.append(m)
        mirror_count[m] += 1
    return Partition(num_vertices, ranges, mirrors, owner, mirror_count)


def sync_labels(partition: Partition, local_labels, reduction: str, baseline=None):
    """Reduce per-device label copies and broadcast the result back.

    ``reduction`` is 'min' (relaxation labels) or 'add' (partial
    accumulators). Every local array is overwritten with the merged
    values. Returns (merged, sent) where ``sent`` counts mirror entries
    that differed from ``baseline`` and so would have been transmitted to
    their master (0 when no baseline is given).
    """
    if reduction not in ("min", "add"):
        raise ConfigError(f"unknown reduction {reduction!r}")
    merged = local_labels[0].copy()
    for arr in local_labels[1:]:
        if reduction == "min":
            np.minimum(merged, arr, out=merged)
        else:
            merged += arr
    sent = 0
    if baseline is not None:
        for d, arr in enumerate(local_labels):
            changed = arr != baseline
            changed &= partition.owner != d
            sent += int(changed.sum())
    for arr in local_labels:
        arr[:] = merged
    return merged, sent


@dataclass
class RoundRecord:
    """Everything measured in one BSP round."""

    index: int
    frontier_size: int
    metrics: list
    comm_sent: int = 0
    comm_broadcast: int = 0

    def all_cta_edges(self) -> np.ndarray:
        return np.concatenate([m.per_cta_edges for m in self.metrics])

    def active_edges(self) -> int:
        return int(sum(m.per_cta_edges.sum() for m in self.metrics))

    def device_loads(self) -> np.ndarray:
        """Per-device completion proxy: the bottleneck CTA's edge count."""
        return np.array(
            [int(m.per_cta_edges.max()) if len(m.per_cta_edges) else 0 for m in self.metrics],
            dtype=np.int64,
        )

    def straggler_ratio(self) -> float:
        loads = self.device_loads()
        mean = loads.mean()
        return float(loads.max() / mean) if mean > 0 else 0.0

    def cta_stats(self):
        """(coefficient of variation, max/mean) across all devices' CTAs."""
        edges = self.all_cta_edges()
        mean = edges.mean()
        if mean == 0:
            return 0.0, 0.0
        return float(edges.std() / mean), float(edges.max() / mean)

    def search_accesses(self) -> int:
        return int(sum(m.search_memory_accesses for m in self.metrics))

    def inspect_reads(self) -> int:
        return int(sum(m.inspect_degree_reads for m in self.metrics))

    def launches(self) -> dict:
        total = {}
        for m in self.metrics:
            for kind, n in m.kernel_launches.items():
                total[kind] = total.get(kind, 0) + n
        return total


@dataclass
class RunResult:
    labels: np.ndarray
    records: list
    app_name: str
    scheduler: Scheduler
    config: KernelConfig
    devices: int
    num_vertices: int
    num_edges: int
    coo_bytes: int = 0
    spec: Optional[dict] = None

    @property
    def rounds(self) -> int:
        return len(self.records)


def _local_frontier(frontier: np.ndarray, start: int, end: int) -> np.ndarray:
    lo = np.searchsorted(frontier, start, side="left")
    hi = np.searchsorted(frontier, end, side="left")
    return frontier[lo:hi]


def run(graph: Graph, app: AppBase, scheduler: Scheduler = Scheduler("alb"),
        config: KernelConfig = KernelConfig(), devices: int = 1,
        max_rounds: Optional[int] = None) -> RunResult:
    """Drive ``app`` to convergence under ``scheduler``; returns labels
    plus the per-round metrics log."""
    run_graph = graph.symmetrized() if app.needs_symmetrized else graph
    app.setup(run_graph)
    view = TraversalView.from_graph(run_graph, app.direction, unit_weights=app.needs_weights)
    partition = make_partition(view, devices)
    if max_rounds is None:
        # 10 rounds per vertex guards monotone-operator bugs; the flat
        # floor accommodates damped-iteration apps on tiny graphs.
        max_rounds = 10 * max(graph.num_vertices, 1) + 256
    frontier = app.initial_frontier()
    records = []
    while len(frontier):
        if len(records) >= max_rounds:
            raise ConvergenceError(
                f"{app.name} did not converge within {max_rounds} rounds",
                metrics_log=records,
            )
        values = app.values
        aux = app.round_aux()
        outs = []
        metrics_list = []
        for d, (start, end) in enumerate(partition.ranges):
            metrics = RoundMetrics(config)
            out = app.make_out()
            local = _local_frontier(frontier, start, end)
            if len(local):
                run_round(scheduler, view, local,
                          RoundState(app.opcode, values, out, aux), config, metrics)
            outs.append(out)
            metrics_list.append(metrics)
        record = RoundRecord(len(records), len(frontier), metrics_list)
        if devices > 1:
            merged, sent = sync_labels(partition, outs, app.merge, baseline=_sync_baseline(app, values))
            record.comm_sent = sent
        else:
            merged = outs[0]
        before = app.values.copy()
        frontier, _done = app.end_round(merged, frontier)
        if devices > 1:
            changed = app.values != before
            record.comm_broadcast = int(partition.mirror_count[changed].sum())
        records.append(record)
    return RunResult(
        labels=app.labels(),
        records=records,
        app_name=app.name,
        scheduler=scheduler,
        config=config,
        devices=devices,
        num_vertices=graph.num_vertices,
        num_edges=graph.num_edges,
        coo_bytes=view.coo_bytes,
    )


def _sync_baseline(app: AppBase, values: np.ndarray):
    # min-reductions start from the label snapshot, additive accumulators
    # from zero; "changed" for comm accounting is relative to that start.
    if app.merge == "min":
        return values
    return np.zeros_like(values)


def run_app(graph: Graph, app_name: str, scheduler: Scheduler = Scheduler("alb"),
            config: KernelConfig = KernelConfig(), devices: int = 1,
            max_rounds: Optional[int] = None, **params) -> RunResult:
    app = make_app(app_name, **params)
    return run(graph, app, scheduler, config, devices, max_rounds)


# ----------------------------------------------------------------------
# reporting
# ----------------------------------------------------------------------


def report(result: RunResult) -> dict:
    """Imbalance summary over the metrics log."""
    launches = {}
    for rec in result.records:
        for kind, n in rec.launches().items():
            launches[kind] = launches.get(kind, 0) + n
    cvs = [rec.cta_stats()[0] for rec in result.records]
    ratios = [rec.cta_stats()[1] for rec in result.records]
    stragglers = [rec.straggler_ratio() for rec in result.records]
    return {
        "schema_version": 1,
        "app": result.app_name,
        "scheduler": result.scheduler.describe(),
        "devices": result.devices,
        "backend": BACKEND_NAME,
        "config": {
            "num_ctas": result.config.num_ctas,
            "threads_per_cta": result.config.threads_per_cta,
            "warp_size": result.config.warp_size,
            "total_threads": result.config.total_threads,
        },
        "graph": {"num_vertices": result.num_vertices, "num_edges": result.num_edges},
        "rounds": result.rounds,
        "totals": {
            "edges_processed": sum(rec.active_edges() for rec in result.records),
            "search_memory_accesses": sum(rec.search_accesses() for rec in result.records),
            "inspect_degree_reads": sum(rec.inspect_reads() for rec in result.records),
            "comm_sent": sum(rec.comm_sent for rec in result.records),
            "comm_broadcast": sum(rec.comm_broadcast for rec in result.records),
            "kernel_launches": dict(sorted(launches.items())),
        },
        "load": {
            "worst_cta_cv": max(cvs, default=0.0),
            "worst_cta_max_mean": max(ratios, default=0.0),
            "worst_straggler_ratio": max(stragglers, default=0.0),
        },
        "coo_bytes": result.coo_bytes,
        "labels_sha256": hashlib.sha256(np.ascontiguousarray(result.labels).tobytes()).hexdigest(),
        "spec": result.spec,
    }


_LAUNCH_KINDS = ("inspect", "twc", "lb", "vertex", "edge")


def write_reports(result: RunResult, out_dir, name: str) -> dict:
    """Write <name>.cta.csv, <name>.round.csv, <name>.summary.json."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "cta": out_dir / f"{name}.cta.csv",
        "round": out_dir / f"{name}.round.csv",
        "summary": out_dir / f"{name}.summary.json",
    }
    with open(paths["cta"], "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["round", "device", "cta", "edges"])
        for rec in result.records:
            for d, metrics in enumerate(rec.metrics):
                for c, e in enumerate(metrics.per_cta_edges.tolist()):
                    writer.writerow([rec.index, d, c, e])
    with open(paths["round"], "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["round", "frontier", "edges", "cta_cv", "cta_max_mean",
             "search_accesses", "inspect_reads"]
            + [f"launches_{k}" for k in _LAUNCH_KINDS]
            + ["comm_sent", "comm_broadcast", "straggler_ratio"]
        )
        for rec in result.records:
            cv, ratio = rec.cta_stats()
            launches = rec.launches()
            writer.writerow(
                [rec.index, rec.frontier_size, rec.active_edges(), cv, ratio,
                 rec.search_accesses(), rec.inspect_reads()]
                + [launches.get(k, 0) for k in _LAUNCH_KINDS]
                + [rec.comm_sent, rec.comm_broadcast, rec.straggler_ratio()]
            )
    with open(paths["summary"], "w") as fh:
        json.dump(report(result), fh, indent=2)
        fh.write("\n")
    return paths
