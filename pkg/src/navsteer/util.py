"""Small numeric helpers shared across modules."""

from __future__ import annotations

import math
import struct

import numpy as np

_U64 = (1 << 64) - 1


def round_half_up(x: float) -> int:
    """Round to the nearest integer with ties going up (0.5 -> 1, 1.5 -> 2).

    Python's built-in round() breaks ties to even, which is the wrong rule
    for converting fractional budgets and set sizes here.
    """
    return int(math.floor(x + 0.5))


def _component_entropy(value) -> int:
    if isinstance(value, (bool,)):
        return int(value)
    if isinstance(value, (int, np.integer)):
        return int(value) & _U64
    if isinstance(value, (float, np.floating)):
        # IEEE-754 bit pattern: stable across platforms, distinguishes
        # values that stringify identically.
        return struct.unpack("<Q", struct.pack("<d", float(value)))[0]
    if isinstance(value, str):
        return int.from_bytes(value.encode("utf-8"), "little")
    raise TypeError(f"cannot derive entropy from {type(value).__name__}")


def derive_seed(*components) -> int:
    """Collapse (master seed, domain tag, parameters...) into a 64-bit seed.

    The same component tuple always yields the same seed, which is what
    makes serial and parallel sweep execution produce identical streams.
    """
    entropy = [_component_entropy(c) for c in components]
    state = np.random.SeedSequence(entropy).generate_state(2, np.uint32)
    return int(state[0]) | (int(state[1]) << 32)
