"""Exact sampler for one frog's p-biased walk, split into skeleton and loops.

A p-biased walk from a non-root vertex u (p < 1/2) either eventually
reaches parent(u), with probability rho, or escapes down for good.  The
sampler draws that decision first and then generates the path from the
conditioned laws:

* reaching the parent: a geometric number of returning excursions below
  u, each continuing with probability (1-p) rho, then the step to the
  parent;
* escaping: a geometric number of returning excursions, again continuing
  with probability (1-p) rho, then a step to a uniform child that is never
  undone, after which the same rule is applied at that child.

Conditioned on either outcome, a round at u is an up-step (p/rho or 0),
an excursion ((1-p) rho in both cases) or a final down-step.

An excursion is a step to a uniform child followed by the walk
conditioned to come back, which is the walk with up-probability p/rho
and child-probability (1-p)rho/d each.  At the root every excursion
returns with probability rho, the last one being the escape.  For
p >= 1/2 (rho = 1) everything returns and the escape never happens.

The stitched path has exactly the law of the plain walk.  Its use is the
labelling: ``UP`` and ``ESCAPE`` steps form the loop-erased skeleton,
which is what an RFM frog follows, and ``LOOP_DOWN``/``LOOP_UP`` steps
belong to loops that close, which FM' treats as silent.
"""

from __future__ import annotations

from typing import Callable, Iterator

import numpy as np

UP, ESCAPE, LOOP_DOWN, LOOP_UP = 0, 1, 2, 3
MOVE_NAMES = ("UP", "ESCAPE", "LOOP_DOWN", "LOOP_UP")

Event = tuple[int, int, int]


def frog_walk(code: int, depth: int, d: int, p: float, rho: float,
              rnd: Callable[[], float]) -> Iterator[Event]:
    """Yield ``(code, depth, kind)`` for each step of the walk, forever."""
    q_exc = (1.0 - p) * rho
    up_h = p / rho if rho > 0.0 else 0.0
    down_h = 1.0 - up_h
    free = True
    while True:
        if free and depth and rnd() < rho:
            q = q_exc
        else:
            free = False
            q = q_exc if depth else rho
        while rnd() < q:
            base = depth
            code = code * d + 1 + int(rnd() * d)
            depth += 1
            yield code, depth, LOOP_DOWN
            while depth > base:
                u = rnd()
                if u < up_h:
                    code = (code - 1) // d
                    depth -= 1
                    yield code, depth, LOOP_UP
                else:
                    k = int((u - up_h) / down_h * d)
                    code = code * d + 1 + (k if k < d else d - 1)
                    depth += 1
                    yield code, depth, LOOP_DOWN
        if free:
            code = (code - 1) // d
            depth -= 1
            yield code, depth, UP
        else:
            code = code * d + 1 + int(rnd() * d)
            depth += 1
            yield code, depth, ESCAPE


def return_frequency(p: float, trials: int, seed: int,
                     miss_tolerance: float = 1e-9) -> tuple[float, float]:
    """Monte Carlo frequency that the p-biased walk one level below a vertex hits it.

    Only the depth relative to the target matters: below the target a
    step goes up with probability p and down otherwise.  Walks are run in
    parallel and declared escaped on reaching a relative depth D with
    rho**D <= ``miss_tolerance`` (the exact hitting probability from
    there), so the bias is below that tolerance.  Returns the frequency
    and its binomial standard error.
    """
    if not 0.0 < p < 0.5:
        raise ValueError("return_frequency needs 0 < p < 1/2")
    rho = p / (1.0 - p)
    horizon = max(2, int(np.ceil(np.log(miss_tolerance) / np.log(rho))))
    rng = np.random.default_rng(seed)
    level = np.ones(trials, dtype=np.int64)
    alive = np.arange(trials)
    hits = 0
    while alive.size:
        steps = np.where(rng.random(alive.size) < p, -1, 1)
        level[alive] += steps
        lv = level[alive]
        hits += int(np.count_nonzero(lv == 0))
        alive = alive[(lv > 0) & (lv < horizon)]
    freq = hits / trials
    return freq, float(np.sqrt(freq * (1.0 - freq) / trials))
