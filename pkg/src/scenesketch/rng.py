"""Seed-stream policy: every component draws from its own derived stream.

A single root seed fans out into named, collision-free child seeds via
``numpy.random.SeedSequence``, so changing how many draws one component
makes can never perturb another component's randomness.
"""

from __future__ import annotations

import numpy as np

__all__ = ["STREAMS", "derived_seed", "make_rng", "child_seed"]

STREAMS = {
    "corpus": 0,
    "stroke-corpus": 1,
    "composer-init": 2,
    "composer-train": 3,
    "sketcher-init": 4,
    "sketcher-train": 5,
    "sampling": 6,
    "eval": 7,
    "service": 8,
}


def derived_seed(root_seed: int, stream: str) -> int:
    """Deterministic child seed for a named stream of a root seed."""
    if stream not in STREAMS:
        raise KeyError(f"unknown seed stream {stream!r}; known: {sorted(STREAMS)}")
    seq = np.random.SeedSequence([int(root_seed), STREAMS[stream]])
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def make_rng(root_seed: int, stream: str) -> np.random.Generator:
    return np.random.default_rng(derived_seed(root_seed, stream))


def child_seed(seed: int, index: int) -> int:
    """Deterministic child seed for the index-th item under a parent seed."""
    seq = np.random.SeedSequence([int(seed), int(index)])
    return int(seq.generate_state(1, dtype=np.uint64)[0])
