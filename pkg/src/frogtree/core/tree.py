"""Vertices of the rooted d-ary tree and the model parameters.

A vertex is a tuple of child indices in 1..d; ``()`` is the root.  The
simulators work with an integer heap code instead: the root is 0 and
child k of the vertex with code c has code ``c*d + k``.  The code is a
bijection between paths and non-negative integers for a fixed d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Protocol

Vertex = tuple[int, ...]
ROOT: Vertex = ()


class DomainError(ValueError):
    """A parameter lies outside the domain of an operation."""


def _check_probability(x: float, name: str) -> None:
    if not (isinstance(x, (int, float)) and 0.0 <= x <= 1.0) or math.isnan(x):
        raise DomainError(f"{name} must lie in [0, 1], got {x!r}")


def rho_of_p(p: float) -> float:
    """Probability that a p-biased walk one level below a vertex ever hits it."""
    _check_probability(p, "p")
    if p < 0.5:
        return p / (1.0 - p)
    return 1.0


def p_of_rho(rho: float) -> float:
    _check_probability(rho, "rho")
    return rho / (1.0 + rho)


@dataclass(frozen=True)
class ModelParams:
    d: int
    p: float
    rho: float = field(init=False)

    def __post_init__(self):
        if not isinstance(self.d, int) or self.d < 1:
            raise DomainError(f"d must be a positive integer, got {self.d!r}")
        _check_probability(self.p, "p")
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "rho", rho_of_p(self.p))


def depth(v: Vertex) -> int:
    return len(v)


def parent(v: Vertex) -> Vertex:
    if not v:
        raise DomainError("the root has no parent")
    return v[:-1]


def child(v: Vertex, k: int) -> Vertex:
    return v + (k,)


def check_vertex(v: Vertex, d: int) -> None:
    for k in v:
        if not (isinstance(k, int) and 1 <= k <= d):
            raise DomainError(f"child index {k!r} outside 1..{d}")


def encode(v: Vertex, d: int) -> int:
    check_vertex(v, d)
    code = 0
    for k in v:
        code = code * d + k
    return code


def decode(code: int, d: int) -> Vertex:
    if code < 0:
        raise DomainError("vertex codes are non-negative")
    out = []
    while code:
        k = (code - 1) % d + 1
        out.append(k)
        code = (code - k) // d
    return tuple(reversed(out))


def code_depth(code: int, d: int) -> int:
    n = 0
    while code:
        code = (code - 1) // d
        n += 1
    return n


def parent_code(code: int, d: int) -> int:
    return (code - 1) // d


def is_ancestor_code(a: int, b: int, d: int) -> bool:
    """True when the vertex coded ``a`` is ``b`` or lies on its root path."""
    while b > a:
        b = (b - 1) // d
    return a == b


class RandomSource(Protocol):
    def random(self) -> float: ...


def sample_fm_step(v: Vertex, params: ModelParams, rng: RandomSource) -> Vertex:
    """One step of the p-biased walk: the root always steps to a uniform child."""
    d, p = params.d, params.p
    u = rng.random()
    if v and u < p:
        return v[:-1]
    if v:
        u = (u - p) / (1.0 - p)
    return v + (min(int(u * d), d - 1) + 1,)
