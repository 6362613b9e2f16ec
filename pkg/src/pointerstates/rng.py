"""Counter-based random streams.

A stream is addressed by ``(seed, tag, index)``.  Streams with different
addresses are statistically independent, and a given address always yields the
same numbers, no matter which other streams were drawn before it or in which
worker process.
"""

from __future__ import annotations

import zlib

import numpy as np


def stream(seed: int, tag: str, index: int = 0) -> np.random.Generator:
    key = (zlib.crc32(tag.encode("utf-8")), int(index))
    ss = np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))
