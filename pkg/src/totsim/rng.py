"""Counter-based random streams for reproducible simulations.

Every stochastic component draws from a Philox 4x64-10 bit generator,
a keyed counter-based PRNG, keyed by (seed, stream index).  Streams
with distinct keys are statistically
independent, so an encounter's draws do not depend on how many draws
earlier encounters consumed.  That makes campaign results identical
across runs, shard orderings, and process counts.
"""

from __future__ import annotations

import numpy as np

__all__ = ["stream"]

_MASK64 = (1 << 64) - 1


def stream(seed: int, index: int = 0) -> np.random.Generator:
    """Return the generator for sub-stream `index` of `seed`.

    Same (seed, index) always yields the same draw sequence; seed and
    index are taken modulo 2**64.
    """
    key = np.array([seed & _MASK64, index & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
