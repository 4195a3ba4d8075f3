"""Seeded random streams.

A ``RandomStream`` is a ``numpy.random.Generator``. Independent substreams are
keyed by integer indices through ``SeedSequence.spawn_key``, so the stream a
task sees depends only on (seed, indices) and never on scheduling order.
"""
from __future__ import annotations

import numpy as np

RandomStream = np.random.Generator


def stream(seed: int) -> RandomStream:
    return np.random.default_rng(np.random.SeedSequence(seed))


def substream(seed: int, *indices: int) -> RandomStream:
    """Counter-based child stream for ``(seed, *indices)``."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(i) for i in indices))
    return np.random.default_rng(ss)
