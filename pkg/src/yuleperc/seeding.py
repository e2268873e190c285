"""Per-replica random streams.

Every replica draws from its own Philox stream.  The Philox key is derived
from the master seed through :class:`numpy.random.SeedSequence`; the replica
index and a stream tag are written into the two high words of the 256-bit
counter, ``counter = [0, 0, stream, replica]``.  Streams are therefore
disjoint for any realistic draw count (2**128 blocks apart) and a replica can
be replayed bit-exactly from ``(seed, stream, replica)`` alone, independent of
how replicas are scheduled over workers.
"""
from __future__ import annotations

import numpy as np

# Stream tags keep the independent samplers of a single run decorrelated.
TREE = 1
BRANCH = 2
ANCESTRAL = 3
GERM = 4


def philox_key(seed: int) -> np.ndarray:
    return np.random.SeedSequence(int(seed)).generate_state(2, np.uint64)


def replica_rng(seed: int, replica: int, stream: int = 0) -> np.random.Generator:
    """Generator for ``replica`` under master ``seed`` and ``stream`` tag."""
    if replica < 0 or stream < 0:
        raise ValueError("replica and stream must be non-negative")
    counter = np.array([0, 0, stream, replica], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=philox_key(seed), counter=counter))


def replica_rngs(seed: int, replicas, stream: int = 0):
    key = philox_key(seed)
    for r in replicas:
        counter = np.array([0, 0, stream, r], dtype=np.uint64)
        yield r, np.random.Generator(np.random.Philox(key=key, counter=counter))


def map_replicas(fn, reps: int, seed: int, stream: int, threads: int = 1) -> list:
    """Apply ``fn(rng)`` to every replica index in ``range(reps)``.

    Results come back in replica order whatever ``threads`` is; the numba
    kernels release the GIL so a thread pool gives real parallelism.
    """
    if reps < 0:
        raise ValueError("reps must be non-negative")
    if threads <= 1 or reps < 2:
        return [fn(rng) for _, rng in replica_rngs(seed, range(reps), stream)]

    from concurrent.futures import ThreadPoolExecutor

    chunks = [c for c in np.array_split(np.arange(reps), threads * 4) if len(c)]

    def work(chunk):
        return [fn(rng) for _, rng in replica_rngs(seed, chunk.tolist(), stream)]

    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(work, chunks))
    return [item for part in parts for item in part]
