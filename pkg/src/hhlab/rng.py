"""Seeded random streams.

Every stream is a Philox (counter-based) generator keyed by a
``SeedSequence`` built from the root seed, a stream label and an index,
so instance ``i`` of stream ``"hh"`` draws the same numbers no matter
how many other instances or streams were drawn before it.
"""
import zlib

import numpy as np


def stream_key(label: str) -> int:
    return zlib.crc32(label.encode("utf-8"))


def stream(seed: int, label: str, index: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, stream_key(label), int(index)])
    return np.random.Generator(np.random.Philox(ss))
