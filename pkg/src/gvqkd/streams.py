"""Named deterministic random sub-streams derived from one session seed.

Every source of randomness in a session draws from its own generator keyed
by (role, run index, seed), so changing one ingredient (say, switching the
attack on) never perturbs the others: the bit sequence, emission times and
detector noise of run k are identical across scenarios that share a seed.
"""

import numpy as np

_STREAM_IDS = {
    "source": 1,
    "herald": 2,
    "bits": 3,
    "detector": 4,
    "attack": 5,
    "sift": 6,
    "dark": 7,
    "fringe": 8,
}


def stream(seed: int, name: str, run_index: int = 0) -> np.random.Generator:
    """Independent generator for one named randomness role of one run."""
    try:
        stream_id = _STREAM_IDS[name]
    except KeyError:
        raise ValueError(f"unknown stream name {name!r}") from None
    return np.random.default_rng([stream_id, run_index, seed])


class SessionStreams:
    """Bundle of all per-role generators for a single session run."""

    def __init__(self, seed: int, run_index: int = 0):
        self.seed = seed
        self.run_index = run_index
        self.source = stream(seed, "source", run_index)
        self.herald = stream(seed, "herald", run_index)
        self.bits = stream(seed, "bits", run_index)
        self.detector = stream(seed, "detector", run_index)
        self.attack = stream(seed, "attack", run_index)
        self.sift = stream(seed, "sift", run_index)
        self.dark = stream(seed, "dark", run_index)
