"""Independent exact answers used by the tests.

Nothing here imports the simulators.  The RFM enumerator walks the full
outcome tree of a small instance, moving one frog at a time until it is
removed (the law of the final counts does not depend on the order), and
returns the exact distribution of root visits.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache


def rfm_root_visit_law(d: int, rho, t: int, root_frog: str = "fresh") -> dict[int, object]:
    """Exact law of the RFM root-visit count with sleepers at depths 1..t.

    ``rho`` may be a Fraction for exact arithmetic.  The initially awake
    frog first steps to a uniform child c of the root; "fresh" makes it
    climb from c like a newly woken frog, "descend" sends it downward.
    """
    one = Fraction(1) if isinstance(rho, Fraction) else 1.0
    pc = one / d
    pturn = (one - rho) / d

    def land_down(v, visited, frogs):
        """A descending frog steps onto v; returns the successor states."""
        if v in visited or len(v) > t:
            return visited, frogs
        visited = visited | {v}
        return visited, frogs + ((v, "up"), (v, "down"))

    @lru_cache(maxsize=None)
    def law(visited: frozenset, frogs: tuple) -> tuple:
        if not frogs:
            return ((0, one),)
        (v, stage), rest = frogs[-1], frogs[:-1]
        out: dict[int, object] = {}

        def add(weight, sub):
            for n, q in sub:
                out[n] = out.get(n, 0) + weight * q

        if stage == "up":
            par = v[:-1]
            if par == ():
                add(rho, [(n + 1, q) for n, q in law(visited, rest)])
            else:
                add(rho, law(visited, rest + ((par, "up"),)))
            for k in range(1, d + 1):
                add(pturn, law(*land_down(v + (k,), visited, rest)))
        else:
            for k in range(1, d + 1):
                add(pc, law(*land_down(v + (k,), visited, rest)))
        return tuple(sorted(out.items()))

    start: dict[int, object] = {}
    for k in range(1, d + 1):
        c = (k,)
        visited = frozenset({(), c})
        frogs: tuple = ((c, "up"),) if t >= 1 else ()
        if root_frog == "fresh":
            frogs = frogs + ((c, "up"),)
        elif root_frog == "descend":
            if t >= 1:
                frogs = frogs + ((c, "down"),)
        else:
            raise ValueError(root_frog)
        for n, q in law(visited, frogs):
            start[n] = start.get(n, 0) + pc * q
    return dict(sorted(start.items()))


def law_mean(law: dict[int, object]):
    return sum(n * q for n, q in law.items())


def law_variance(law: dict[int, object]):
    m = law_mean(law)
    return sum((n - m) ** 2 * q for n, q in law.items())


def ruin_hit_probability(p: float, start: int, horizon: int) -> float:
    """P(a walk stepping -1 w.p. p, +1 otherwise, hits 0 before ``horizon``).

    Solved as the linear system h(0)=1, h(N)=0, h(i) = p h(i-1) + (1-p) h(i+1)
    by forward elimination (Thomas algorithm), not by the closed form.
    """
    n = horizon
    # unknowns h(1..n-1): -p h(i-1) + h(i) - (1-p) h(i+1) = 0
    a = [-p] * (n - 1)
    b = [1.0] * (n - 1)
    c = [-(1.0 - p)] * (n - 1)
    rhs = [0.0] * (n - 1)
    rhs[0] = p
    for i in range(1, n - 1):
        w = a[i] / b[i - 1]
        b[i] -= w * c[i - 1]
        rhs[i] -= w * rhs[i - 1]
    h = [0.0] * (n - 1)
    h[-1] = rhs[-1] / b[-1]
    for i in range(n - 3, -1, -1):
        h[i] = (rhs[i] - c[i] * h[i + 1]) / b[i]
    return h[start - 1]


def pa_product(t: int, rho: float) -> float:
    """1 - prod_{i=0}^{t-1} (1 - rho^i (1-rho)/2), term by term with Fractions."""
    r = Fraction(rho)
    prod = Fraction(1)
    for i in range(t):
        prod *= 1 - r ** i * (1 - r) / 2
    return float(1 - prod)


def brw_growth_bruteforce(p: float, lo: float = -20.0, hi: float = 20.0, n: int = 200001) -> float:
    """min over a theta grid of p e^theta + 2(1-p) e^-theta, then golden-section refinement."""
    import math

    f = lambda th: p * math.exp(th) + 2 * (1 - p) * math.exp(-th)
    step = (hi - lo) / (n - 1)
    best = min(range(n), key=lambda i: f(lo + i * step))
    a, b = lo + (best - 1) * step, lo + (best + 1) * step
    g = (math.sqrt(5) - 1) / 2
    for _ in range(200):
        c1, c2 = b - g * (b - a), a + g * (b - a)
        if f(c1) < f(c2):
            b = c2
        else:
            a = c1
    return f((a + b) / 2)
