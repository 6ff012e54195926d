"""Activation order of awake frogs."""

from __future__ import annotations

from collections import deque
from enum import Enum
from typing import Callable, Hashable, Iterable, Iterator, Sequence


class Policy(str, Enum):
    UNIFORM_RANDOM = "uniform"
    FIFO = "fifo"


def schedule_next(awake: Sequence[Hashable], policy: Policy, rng) -> Hashable:
    """Pick the next frog to move from ``awake`` (insertion-ordered)."""
    if not awake:
        raise ValueError("no awake frogs to schedule")
    policy = Policy(policy)
    if policy is Policy.FIFO:
        return next(iter(awake))
    items = list(awake)
    return items[min(int(rng.random() * len(items)), len(items) - 1)]


class Scheduler:
    """Pool of awake frogs with O(1) selection and removal.

    ``next()`` returns the frog that moves on this tick.  The caller then
    either leaves it in the pool or calls ``drop()``; frogs added while a
    tick is in progress never disturb that bookkeeping.  Under FIFO the
    moving frog rejoins the queue behind any frog woken during its step.
    """

    __slots__ = ("policy", "_rnd", "_items", "_i", "_held", "_cur")

    def __init__(self, policy: Policy, rnd: Callable[[], float], items: Iterable = ()):
        self.policy = Policy(policy)
        self._rnd = rnd
        self._i = -1
        self._held = False
        self._cur = None
        if self.policy is Policy.FIFO:
            self._items = deque(items)
        else:
            self._items = list(items)

    def __len__(self) -> int:
        return len(self._items) + self._held

    def __bool__(self) -> bool:
        return bool(self._items) or self._held

    def __iter__(self) -> Iterator:
        if self._held:
            yield self._cur
        yield from self._items

    def add(self, item) -> None:
        self._items.append(item)

    def next(self):
        items = self._items
        if self.policy is Policy.FIFO:
            if self._held:
                items.append(self._cur)
            self._cur = item = items.popleft()
            self._held = True
            return item
        i = int(self._rnd() * len(items))
        self._i = i
        return items[i]

    def drop(self) -> None:
        if self.policy is Policy.FIFO:
            self._held = False
            self._cur = None
            return
        items = self._items
        last = items.pop()
        if self._i < len(items):
            items[self._i] = last
