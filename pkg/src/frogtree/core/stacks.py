"""Per-vertex instruction stacks for RFM.

Each vertex v carries two infinite i.i.d. sequences, read lazily:

* U(v): 0 (step to the parent) w.p. rho, otherwise child k w.p. (1-rho)/d;
* D(v): a uniform child index in 1..d.

Entry i of a stack is ``counter_uniform(derive_key(kind_key, code), i)``
mapped to an instruction, where kind_key = derive_key(seed, tag) and
code is the vertex's heap code.  Its value does not depend on when or by
whom it is consumed.
"""

from __future__ import annotations

from .rng import GOLDEN, MASK64, Tag, counter_uniform, derive_key, mix64
from .tree import ModelParams, Vertex, encode

_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_TWO53 = 2.0 ** -53


def _up_value(u: float, d: int, rho: float) -> int:
    if u < rho:
        return 0
    return min(int((u - rho) / (1.0 - rho) * d), d - 1) + 1


def _down_value(u: float, d: int) -> int:
    return min(int(u * d), d - 1) + 1


class InstructionStacks:
    def __init__(self, params: ModelParams, seed: int):
        self.params = params
        self.seed = seed
        self._up: dict[int, list] = {}
        self._down: dict[int, list] = {}
        self._up_key = derive_key(seed, Tag.STACK_UP)
        self._down_key = derive_key(seed, Tag.STACK_DOWN)
        # derive_key(k, code) == mix64(mix64(k) ^ code) for one-limb codes
        self._up_pre = mix64(self._up_key)
        self._down_pre = mix64(self._down_key)

    def vertex_key(self, code: int, kind: str) -> int:
        return derive_key(self._up_key if kind == "up" else self._down_key, code)

    def _draw(self, table, pre, base, code) -> float:
        s = table.get(code)
        if s is None:
            h = mix64(pre ^ code) if code <= MASK64 else derive_key(base, code)
            s = table[code] = [h, 0]
        s[1] += 1
        z = (s[0] + s[1] * GOLDEN) & MASK64
        z = ((z ^ (z >> 30)) * _M1) & MASK64
        z = ((z ^ (z >> 27)) * _M2) & MASK64
        return ((z ^ (z >> 31)) >> 11) * _TWO53

    def up(self, code: int) -> int:
        u = self._draw(self._up, self._up_pre, self._up_key, code)
        rho = self.params.rho
        if u < rho:
            return 0
        d = self.params.d
        return min(int((u - rho) / (1.0 - rho) * d), d - 1) + 1

    def down(self, code: int) -> int:
        u = self._draw(self._down, self._down_pre, self._down_key, code)
        d = self.params.d
        return min(int(u * d), d - 1) + 1

    def peek(self, code: int, kind: str, index: int) -> int:
        """Entry ``index`` (0-based) of a stack, without consuming anything."""
        u = counter_uniform(self.vertex_key(code, kind), index)
        if kind == "up":
            return _up_value(u, self.params.d, self.params.rho)
        return _down_value(u, self.params.d)

    def consumed(self, code: int, kind: str) -> int:
        table = self._up if kind == "up" else self._down
        s = table.get(code)
        return 0 if s is None else s[1]

    def consumption(self) -> dict[tuple[int, str], int]:
        out = {(c, "up"): s[1] for c, s in self._up.items()}
        out.update({(c, "down"): s[1] for c, s in self._down.items()})
        return out


def next_up_instruction(v: Vertex, stacks: InstructionStacks) -> int:
    return stacks.up(encode(v, stacks.params.d))


def next_down_instruction(v: Vertex, stacks: InstructionStacks) -> int:
    return stacks.down(encode(v, stacks.params.d))
