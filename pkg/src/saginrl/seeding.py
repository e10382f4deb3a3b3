"""Deterministic seed derivation for decorrelated per-component streams."""

from __future__ import annotations

import numpy as np


def derive_seed(*parts: int) -> int:
    """Stable 31-bit seed from a tuple of integers."""
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0] % (2 ** 31))
