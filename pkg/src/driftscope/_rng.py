"""Counter-style random streams keyed by (seed, path).

Every random draw in the toolkit goes through :func:`child_rng` so that a
stream depends only on the master seed and a structural path (year, stage
name, resample index, ...), never on evaluation order or thread schedule.
"""

from __future__ import annotations

import zlib

import numpy as np


def _path_key(part) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    if isinstance(part, (bool, np.bool_)):
        return int(part)
    if isinstance(part, (int, np.integer)):
        part = int(part)
        if part < 0:
            # spawn keys must be non-negative; fold sign into an offset
            return 2 ** 33 - part
        return part
    raise TypeError(f"unsupported rng path component: {part!r}")


def child_rng(seed: int, *path) -> np.random.Generator:
    """Return a generator for `(seed, *path)`, independent of call order."""
    key = tuple(_path_key(p) for p in path)
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=key)
    return np.random.Generator(np.random.PCG64(ss))
