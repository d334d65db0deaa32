"""Deterministic seed derivation.

All randomness flows through numpy Generators (PCG64).  Derived seeds are
mixed with ``numpy.random.SeedSequence``, whose hashing is specified and
stable across platforms, so every run is reproducible from integer seeds
alone regardless of thread or process scheduling.
"""

from __future__ import annotations

import numpy as np

# per-trial sub-stream indices
SIGNAL_STREAM = 0
ENSEMBLE_STREAM = 1
SPECTRAL_STREAM = 2
SOLVER_STREAM = 3


def derive_seed(*parts: int) -> int:
    """Mix integer parts into one 64-bit seed (stable across platforms)."""
    ss = np.random.SeedSequence([int(p) for p in parts])
    return int(ss.generate_state(1, dtype=np.uint64)[0])
