"""Per-trial random streams.

Trial ``i`` of stream ``s`` under base seed ``b`` always draws from the same
generator, independent of how many trials run or in which order, so trial
counts can grow without reshuffling earlier trials and parallel workers
reproduce serial results.
"""
import numpy as np


def trial_rng(base_seed: int, trial_index: int, stream: int = 0) -> np.random.Generator:
    seq = np.random.SeedSequence(int(base_seed), spawn_key=(int(stream), int(trial_index)))
    return np.random.default_rng(seq)
