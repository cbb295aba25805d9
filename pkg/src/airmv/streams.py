"""Counter-based random substreams for order-independent reproducibility.

Every stochastic component draws from a generator keyed by the master
seed plus a small integer tuple (stream id, block or round index, ...).
Blocks can therefore run in any order, on any number of workers, and
still produce bit-identical aggregates.
"""

from __future__ import annotations

import numpy as np

__all__ = ["substream", "block_sizes"]

# Stream ids; keep distinct so experiments never share draws.
CER_STREAM = 1
PMEPR_STREAM = 2
LEMMA_STREAM = 3
UAV_SENSOR_STREAM = 4
UAV_CHANNEL_STREAM = 5

_SEED_MASK = (1 << 64) - 1


def substream(master_seed: int, *key: int) -> np.random.Generator:
    """Independent generator for (master_seed, key...).

    Backed by SFC64: substream independence comes from the seeding, and
    SFC64 has the highest bulk Gaussian throughput of the numpy bit
    generators, which dominates the fading-channel experiments.
    """
    ss = np.random.SeedSequence(
        entropy=int(master_seed) & _SEED_MASK,
        spawn_key=tuple(int(k) for k in key),
    )
    return np.random.Generator(np.random.SFC64(ss))


def block_sizes(total: int, block: int) -> list[int]:
    """Split ``total`` trials into fixed-size blocks (last one partial).

    The split depends only on the arguments, never on worker count.
    """
    if total < 0 or block < 1:
        raise ValueError("need total >= 0 and block >= 1")
    full, rem = divmod(total, block)
    out = [block] * full
    if rem:
        out.append(rem)
    return out
