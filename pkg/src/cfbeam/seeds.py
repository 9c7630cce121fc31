"""Deterministic RNG substreams.

Every random draw in the package flows through one master seed; independent
purposes (geometry, channels, weights, ...) get their own numpy Generator so
that adding draws to one stage never perturbs another.
"""

from __future__ import annotations

import zlib

import numpy as np


def substream(seed: int, purpose: str) -> np.random.Generator:
    """Generator for a named substream of the master seed.

    The purpose label is folded in through crc32, which is stable across
    processes (unlike the builtin hash).
    """
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    key = zlib.crc32(purpose.encode("ascii"))
    return np.random.default_rng(np.random.SeedSequence([int(seed), key]))


def trial_seed(master_seed: int, point_index: int, trial: int) -> int:
    """Per-trial integer seed, recorded in result CSVs for replay."""
    ss = np.random.SeedSequence([int(master_seed), int(point_index), int(trial)])
    return int(ss.generate_state(1, dtype=np.uint32)[0])
