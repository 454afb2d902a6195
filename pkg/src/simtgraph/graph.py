"""Immutable CSR/CSC graph storage, loaders, and a power-law generator.

Vertex ids are dense ``0..num_vertices-1``; duplicate edges and self-loops
are kept as-is. The CSC mirror is built lazily and cached. All arrays are
little-endian numpy arrays: ``int64`` offsets, ``int32`` targets, ``int64``
weights.
"""

from __future__ import annotations

import io
import re
import struct
from typing import BinaryIO, Optional

import numpy as np

from .errors import ConfigError, ParseError, RangeError

MAX_VERTEX_ID = np.iinfo(np.int32).max

_MAGIC = b"SGB1"
_FORMAT_VERSION = 1

# Default skewed quadrant probabilities for the synthetic power-law generator.
RMAT_SKEWED = (0.57, 0.19, 0.19, 0.05)


class Graph:
    """Directed multigraph in CSR form with an on-demand CSC mirror."""

    def __init__(self, out_offsets, out_targets, edge_weights=None, num_vertices=None):
        self.out_offsets = np.ascontiguousarray(out_offsets, dtype=np.int64)
        self.out_targets = np.ascontiguousarray(out_targets, dtype=np.int32)
        self.edge_weights = (
            None if edge_weights is None else np.ascontiguousarray(edge_weights, dtype=np.int64)
        )
        self.num_vertices = len(self.out_offsets) - 1 if num_vertices is None else num_vertices
        self.num_edges = len(self.out_targets)
        self._csc = None  # (in_offsets, in_targets, in_weights)
        self._sym = None
        self._validate()

    def _validate(self):
        offs = self.out_offsets
        if len(offs) != self.num_vertices + 1 or (len(offs) and offs[0] != 0):
            raise ConfigError("offsets must have num_vertices+1 entries starting at 0")
        if len(offs) and offs[-1] != self.num_edges:
            raise ConfigError("offsets must end at num_edges")
        if np.any(np.diff(offs) < 0):
            raise ConfigError("offsets must be non-decreasing")
        if self.num_edges and (
            self.out_targets.min() < 0 or self.out_targets.max() >= self.num_vertices
        ):
            raise RangeError("edge target outside 0..num_vertices-1")
        if self.edge_weights is not None and len(self.edge_weights) != self.num_edges:
            raise ConfigError("weights must align with targets")

    # ------------------------------------------------------------------
    # construction helpers
    # ------------------------------------------------------------------

    @classmethod
    def from_edges(cls, src, dst, weights=None, num_vertices=None) -> "Graph":
        """Build CSR from parallel src/dst arrays via stable counting sort."""
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        if num_vertices is None:
            num_vertices = int(max(src.max(), dst.max())) + 1 if len(src) else 0
        counts = np.bincount(src, minlength=num_vertices)
        offsets = np.zeros(num_vertices + 1, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])
        order = np.argsort(src, kind="stable")
        targets = dst[order].astype(np.int32)
        w = None if weights is None else np.asarray(weights, dtype=np.int64)[order]
        return cls(offsets, targets, w, num_vertices)

    # ------------------------------------------------------------------
    # degrees and views
    # ------------------------------------------------------------------

    def out_degrees(self) -> np.ndarray:
        return np.diff(self.out_offsets)

    def in_degrees(self) -> np.ndarray:
        return np.diff(self.csc()[0])

    def out_degree(self, v: int) -> int:
        return int(self.out_offsets[v + 1] - self.out_offsets[v])

    def in_degree(self, v: int) -> int:
        offs = self.csc()[0]
        return int(offs[v + 1] - offs[v])

    def csc(self):
        """Return (in_offsets, in_targets, in_weights), building them once.

        The transpose is a stable counting sort by target, so the CSC edge
        multiset is exactly the CSR one and in_targets within a row keep
        the CSR source order.
        """
        if self._csc is None:
            counts = np.bincount(self.out_targets, minlength=self.num_vertices)
            in_offsets = np.zeros(self.num_vertices + 1, dtype=np.int64)
            np.cumsum(counts, out=in_offsets[1:])
            order = np.argsort(self.out_targets, kind="stable")
            src_per_edge = np.repeat(
                np.arange(self.num_vertices, dtype=np.int32), self.out_degrees()
            )
            in_targets = src_per_edge[order]
            in_weights = None if self.edge_weights is None else self.edge_weights[order]
            self._csc = (in_offsets, np.ascontiguousarray(in_targets), in_weights)
        return self._csc

    def symmetrized(self) -> "Graph":
        """Union of the edge multiset with its reverse, cached."""
        if self._sym is None:
            src_per_edge = np.repeat(
                np.arange(self.num_vertices, dtype=np.int64), self.out_degrees()
            )
            dst = self.out_targets.astype(np.int64)
            s = np.concatenate([src_per_edge, dst])
            d = np.concatenate([dst, src_per_edge])
            w = None
            if self.edge_weights is not None:
                w = np.concatenate([self.edge_weights, self.edge_weights])
            self._sym = Graph.from_edges(s, d, w, self.num_vertices)
        return self._sym

    def edge_pairs(self) -> np.ndarray:
        """(num_edges, 2) array of (src, dst); mostly for tests and tools."""
        src = np.repeat(np.arange(self.num_vertices, dtype=np.int64), self.out_degrees())
        return np.stack([src, self.out_targets.astype(np.int64)], axis=1)

    # ------------------------------------------------------------------
    # binary round-trip
    # ------------------------------------------------------------------
    # Layout (all little-endian):
    #   magic "SGB1" | u32 version | u8 weighted | 3 pad bytes
    #   u64 num_vertices | u64 num_edges
    #   int64 offsets[num_vertices+1] | int32 targets[num_edges]
    #   int64 weights[num_edges]            (only if weighted)

    def save_binary(self, path_or_stream):
        stream, close = _as_stream(path_or_stream, "wb")
        try:
            weighted = self.edge_weights is not None
            stream.write(_MAGIC)
            stream.write(struct.pack("<IB3x", _FORMAT_VERSION, int(weighted)))
            stream.write(struct.pack("<QQ", self.num_vertices, self.num_edges))
            stream.write(self.out_offsets.astype("<i8").tobytes())
            stream.write(self.out_targets.astype("<i4").tobytes())
            if weighted:
                stream.write(self.edge_weights.astype("<i8").tobytes())
        finally:
            if close:
                stream.close()

    @classmethod
    def load_binary(cls, path_or_stream) -> "Graph":
        stream, close = _as_stream(path_or_stream, "rb")
        try:
            if stream.read(4) != _MAGIC:
                raise ParseError("bad magic; not a simtgraph binary graph")
            version, weighted = struct.unpack("<IB3x", stream.read(8))
            if version != _FORMAT_VERSION:
                raise ParseError(f"unsupported binary version {version}")
            nv, ne = struct.unpack("<QQ", stream.read(16))
            offsets = np.frombuffer(stream.read(8 * (nv + 1)), dtype="<i8")
            targets = np.frombuffer(stream.read(4 * ne), dtype="<i4")
            weights = None
            if weighted:
                weights = np.frombuffer(stream.read(8 * ne), dtype="<i8")
            return cls(offsets.copy(), targets.copy(), None if weights is None else weights.copy())
        finally:
            if close:
                stream.close()


def _as_stream(path_or_stream, mode):
    if hasattr(path_or_stream, "read") or hasattr(path_or_stream, "write"):
        return path_or_stream, False
    return open(path_or_stream, mode), True


# ----------------------------------------------------------------------
# text loaders
# ----------------------------------------------------------------------

_HEADER_RE = re.compile(r"#\s*(?:vertices|nodes)[:=\s]\s*(\d+)")


def load_edge_list(source, weighted: bool = False, num_vertices: Optional[int] = None) -> Graph:
    """Parse whitespace-separated ``src dst [weight]`` lines into a Graph.

    ``source`` may be a path, a text stream, or a string/bytes payload.
    Lines starting with ``#`` are comments; a ``# vertices N`` comment
    overrides the max-id-plus-one vertex count. Duplicate edges are kept.
    """
    text = _read_text(source)
    srcs, dsts, ws = [], [], []
    declared = num_vertices
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = _HEADER_RE.match(line)
            if m and declared is None:
                declared = int(m.group(1))
            continue
        parts = line.split()
        want = 3 if weighted else 2
        if len(parts) < want:
            raise ParseError(f"expected {want} fields, got {len(parts)}", line=lineno)
        try:
            s, d = int(parts[0]), int(parts[1])
            w = int(parts[2]) if weighted else None
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from None
        if s < 0 or d < 0:
            raise ParseError("vertex ids must be non-negative", line=lineno)
        if s > MAX_VERTEX_ID or d > MAX_VERTEX_ID:
            raise RangeError(f"vertex id exceeds {MAX_VERTEX_ID} at line {lineno}")
        if weighted and w < 0:
            raise ConfigError(f"negative edge weight at line {lineno}")
        srcs.append(s)
        dsts.append(d)
        if weighted:
            ws.append(w)
    if not srcs:
        nv = declared or 0
        offsets = np.zeros(nv + 1, dtype=np.int64)
        return Graph(offsets, np.empty(0, dtype=np.int32), None, nv)
    nv = max(max(srcs), max(dsts)) + 1
    if declared is not None:
        if declared < nv:
            raise RangeError(f"declared vertex count {declared} smaller than max id + 1 ({nv})")
        nv = declared
    return Graph.from_edges(srcs, dsts, ws if weighted else None, nv)


def _read_text(source) -> str:
    if isinstance(source, bytes):
        return source.decode()
    if isinstance(source, str) and ("\n" in source or " " in source or not source):
        return source
    if hasattr(source, "read"):
        data = source.read()
        return data.decode() if isinstance(data, bytes) else data
    with open(source, "r") as fh:
        return fh.read()


def load_graph(path, fmt: Optional[str] = None) -> Graph:
    """Load a graph by format: el (edge list), wel (weighted), bin."""
    path = str(path)
    if fmt is None:
        fmt = path.rsplit(".", 1)[-1]
    if fmt == "el":
        return load_edge_list(open(path), weighted=False)
    if fmt == "wel":
        return load_edge_list(open(path), weighted=True)
    if fmt == "bin":
        return Graph.load_binary(path)
    raise ConfigError(f"unknown graph format {fmt!r}")


# ----------------------------------------------------------------------
# synthetic power-law generator
# ----------------------------------------------------------------------


def generate_rmat(scale, edge_factor, seed, probabilities=RMAT_SKEWED) -> Graph:
    """Recursive-matrix random graph: 2**scale vertices, edge_factor*2**scale edges.

    Each edge picks one quadrant per bit level with probabilities
    ``(a, b, c, d)``; the skewed default concentrates edges on low ids and
    produces a heavy-tailed out-degree distribution. Deterministic for a
    fixed seed. No per-level noise is applied, for reproducibility.
    """
    if scale < 1:
        raise ConfigError("scale must be >= 1")
    probs = np.asarray(probabilities, dtype=np.float64)
    if probs.shape != (4,) or np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-9:
        raise ConfigError("probabilities must be 4 non-negative values summing to 1")
    num_vertices = 1 << scale
    num_edges = edge_factor * num_vertices
    rng = np.random.default_rng(np.random.PCG64(seed))
    cuts = np.cumsum(probs)[:3]
    src = np.zeros(num_edges, dtype=np.int64)
    dst = np.zeros(num_edges, dtype=np.int64)
    for _ in range(scale):
        u = rng.random(num_edges)
        quadrant = np.searchsorted(cuts, u, side="right")
        src = (src << 1) | (quadrant >> 1)
        dst = (dst << 1) | (quadrant & 1)
    return Graph.from_edges(src, dst, None, num_vertices)


def attach_random_weights(graph: Graph, seed, low=1, high=64) -> Graph:
    """Return a copy of ``graph`` with deterministic integer weights in [low, high]."""
    rng = np.random.default_rng(np.random.PCG64(seed))
    weights = rng.integers(low, high + 1, size=graph.num_edges, dtype=np.int64)
    return Graph(graph.out_offsets, graph.out_targets, weights, graph.num_vertices)
