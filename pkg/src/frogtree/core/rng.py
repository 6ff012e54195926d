"""Counter-based random streams.

Every random quantity in a run is addressed by a key built from the
master seed and a tuple of non-negative integers (trial index, stream
tag, vertex code, ...).  Keys are folded together with the SplitMix64
finalizer.  The stream under a key is the SplitMix64 sequence seeded by
it: draw i is ``mix(key + (i+1) * GOLDEN) >> 11`` scaled by 2**-53, a
uniform in [0, 1).  The same arithmetic is used by the compiled kernels,
so both routes see identical numbers.

Because draws are pure functions of (key, index), the order in which a
simulator asks for them can never change what a given frog or vertex
sees.
"""

from __future__ import annotations

from enum import IntEnum
from typing import Callable

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_TWO53 = 2.0 ** -53


class Tag(IntEnum):
    """Stream families; folded into keys so families never share draws."""

    TRIAL = 1
    SCHEDULER = 2
    FROG = 3
    STACK_UP = 4
    STACK_DOWN = 5
    POLICY = 6
    FOLLOWER = 7


def mix64(x: int) -> int:
    """SplitMix64 finalizer of ``x + GOLDEN`` (mod 2**64)."""
    z = (x + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def derive_key(*parts: int) -> int:
    """Fold non-negative integers of any size into a 64-bit key.

    Integers wider than 64 bits are consumed in 64-bit limbs, low limb
    first, followed by the limb count so that parts of different widths
    cannot alias.
    """
    h = 0
    for part in parts:
        if part < 0:
            raise ValueError(f"key parts must be non-negative, got {part}")
        limbs = 0
        while True:
            h = mix64(h ^ (part & MASK64))
            limbs += 1
            part >>= 64
            if not part:
                break
        if limbs > 1:
            h = mix64(h ^ (limbs * GOLDEN & MASK64))
    return h


def stream(key: int) -> Callable[[], float]:
    """Zero-argument callable returning the SplitMix64 sequence seeded by ``key``.

    Call number i (0-based) returns ``counter_uniform(key, i)``.
    """
    state = key & MASK64

    def draw() -> float:
        nonlocal state
        state = (state + GOLDEN) & MASK64
        z = ((state ^ (state >> 30)) * _M1) & MASK64
        z = ((z ^ (z >> 27)) * _M2) & MASK64
        return ((z ^ (z >> 31)) >> 11) * _TWO53

    return draw


def counter_uniform(key: int, index: int) -> float:
    """Uniform number ``index`` (0-based) of the SplitMix64 sequence seeded by ``key``.

    Cheaper to start than ``stream``; used for the many short per-vertex
    sequences.
    """
    z = (key + (index + 1) * GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return ((z ^ (z >> 31)) >> 11) * _TWO53


def hash_uniform(*parts: int) -> float:
    """A single uniform addressed by ``parts`` (no stream state)."""
    return (mix64(derive_key(*parts)) >> 11) * _TWO53


def trial_seed(master_seed: int, trial: int) -> int:
    return derive_key(master_seed, Tag.TRIAL, trial)


class Stream:
    """Object wrapper with the small part of the ``random.Random`` API we use."""

    __slots__ = ("_next",)

    def __init__(self, key: int):
        self._next = stream(key)

    def random(self) -> float:
        return self._next()

    def randrange(self, n: int) -> int:
        if n <= 0:
            raise ValueError("randrange needs n >= 1")
        return min(int(self._next() * n), n - 1)
