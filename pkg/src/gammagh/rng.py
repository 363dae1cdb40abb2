"""Deterministic random streams keyed by (master seed, stream index)."""

from __future__ import annotations

import numpy as np

RngStream = np.random.Generator

_MASK64 = (1 << 64) - 1


def make_stream(seed: int, *index: int) -> RngStream:
    """Return an independent generator for ``(seed, *index)``.

    The same key always reproduces the same draw sequence, whatever the
    process or thread that builds it. Distinct keys give statistically
    independent streams (``SeedSequence`` spawn keys).
    """
    key = tuple(int(i) & _MASK64 for i in index)
    ss = np.random.SeedSequence(int(seed) & _MASK64, spawn_key=key)
    return np.random.Generator(np.random.PCG64(ss))
