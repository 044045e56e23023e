from dataclasses import dataclass

import numpy as np

STREAM_NAMES = ("action", "minibatch", "environment", "init")


@dataclass(frozen=True)
class RngStreams:
    """Independent generators for each source of randomness in one agent (or the environment)."""

    action: np.random.Generator
    minibatch: np.random.Generator
    environment: np.random.Generator
    init: np.random.Generator

    @classmethod
    def from_seed(cls, seed: int, *key: int) -> "RngStreams":
        children = np.random.SeedSequence(entropy=seed, spawn_key=key).spawn(len(STREAM_NAMES))
        return cls(*(np.random.Generator(np.random.PCG64(child)) for child in children))
