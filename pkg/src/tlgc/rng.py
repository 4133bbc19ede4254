"""Seeded random streams.

Every random draw in the package comes from numpy's PCG64 bit generator
seeded through a ``SeedSequence`` whose spawn key is
``(stream id, *sub keys)``. The same (seed, stream, sub keys) therefore
always reproduces the same numbers, and different streams never share
state.
"""

import numpy as np

SPLIT = 1
NOISE = 2
SOLVER = 3
SYNTH = 4
TRIAL = 5


def stream(seed, stream_id, *keys):
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream_id), *map(int, keys)))
    return np.random.Generator(np.random.PCG64(seq))


def derive_seed(seed, stream_id, *keys):
    """64-bit child seed, e.g. the split seed of trial ``t``."""
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream_id), *map(int, keys)))
    return int(seq.generate_state(1, dtype=np.uint64)[0])
