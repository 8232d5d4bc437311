#src/Controller/deps.py

import hashlib
from typing import Generator

import numpy as np


def stage_key(stage: str) -> int:
    """Stable 64-bit key of a stage name (independent of PYTHONHASHSEED)."""
    return int.from_bytes(hashlib.md5(stage.encode("utf-8")).digest()[:8], "little")


def get_rng(seed: int, stage: str) -> np.random.Generator:
    """
    Independent generator for one stage of a run.

    The master seed is split with SeedSequence([seed, stage_key(stage)]), so
    changing how one stage draws never shifts another stage's stream.
    """
    return np.random.default_rng(np.random.SeedSequence([int(seed), stage_key(stage)]))


def iter_repeat_rngs(seed: int, stage: str, repeats: int) -> Generator[np.random.Generator, None, None]:
    """One generator per repeat, all children of the same stage."""
    parent = np.random.SeedSequence([int(seed), stage_key(stage)])
    for child in parent.spawn(repeats):
        yield np.random.default_rng(child)
