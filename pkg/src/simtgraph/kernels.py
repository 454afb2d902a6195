"""Kernel backend selection.

The compiled extension is preferred when importable; the numpy fallback is
semantically identical (bit-for-bit, see tests/test_backends.py) but
slower. ``SIMTGRAPH_KERNELS=python|compiled`` forces a choice at import.
"""

from __future__ import annotations

import importlib
import os

from . import _kernels_py


def get_backend(name: str):
    """Return a kernel backend module by name ('python' or 'compiled')."""
    if name == "python":
        return _kernels_py
    if name == "compiled":
        return importlib.import_module("simtgraph._kernels")
    raise ValueError(f"unknown kernel backend {name!r}")


def _select():
    forced = os.environ.get("SIMTGRAPH_KERNELS")
    if forced:
        return get_backend(forced)
    try:
        return get_backend("compiled")
    except ImportError:
        return _kernels_py


backend = _select()

BACKEND_NAME = backend.BACKEND_NAME
OP_BFS = backend.OP_BFS
OP_SSSP = backend.OP_SSSP
OP_CC = backend.OP_CC
OP_PULL_ADD = backend.OP_PULL_ADD
