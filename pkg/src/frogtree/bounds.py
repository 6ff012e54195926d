"""Rigorous numerics for the truncated RFM visit counts V_t.

All quantities are plain float recursions; nothing here simulates except
``pz_empirical_check`` and the surrogate sampler ``sample_rde``.

Notation: V_{t+1} = X + 1{A} Y with X ~ Bin(V^x + 1, rho) and
Y ~ Bin(V^y, rho), where V^x, V^y are independent copies of V_t and A is
the event that the sibling subtree is entered.  ``pa_lower_bound`` bounds
P(A) from below; the moment bounds below substitute it (and lower bounds
on E V_t) wherever the exact expression is monotone in the right
direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .core.tree import DomainError, p_of_rho


class Base(str, Enum):
    ZERO = "zero"
    BERNOULLI = "bernoulli"


def pa_lower_bound(t: int, rho: float) -> float:
    """1 - prod_{i<t} (1 - rho^i (1-rho)/2); zero for t = 0."""
    if t < 0:
        raise DomainError("t must be non-negative")
    if not 0.0 <= rho <= 1.0:
        raise DomainError("rho must lie in [0, 1]")
    prod = 1.0
    ri = 1.0
    half = (1.0 - rho) / 2.0
    for _ in range(t):
        prod *= 1.0 - ri * half
        ri *= rho
    return 1.0 - prod


def pa_limit(rho: float, eps: float = 1e-17) -> float:
    """The t -> infinity limit of ``pa_lower_bound``."""
    if not 0.0 <= rho < 1.0:
        raise DomainError("pa_limit needs 0 <= rho < 1")
    prod = 1.0
    term = (1.0 - rho) / 2.0
    while term > eps:
        prod *= 1.0 - term
        term *= rho
    return 1.0 - prod


def _pa_grid(t: int, rhos: np.ndarray) -> np.ndarray:
    i = np.arange(t, dtype=float)
    factors = 1.0 - np.power.outer(rhos, i) * ((1.0 - rhos) / 2.0)[:, None]
    return 1.0 - np.prod(factors, axis=1)


def threshold_gap(T: int, rho: float) -> float:
    """rho (1 + pa_lb(T, rho)) - 1; positive above the threshold."""
    return rho * (1.0 + pa_lower_bound(T, rho)) - 1.0


@dataclass
class ThresholdResult:
    T: int
    tol: float
    rho_star: Optional[float]
    p_star: Optional[float]
    bracket: Optional[tuple[float, float]]
    crossings: list[tuple[float, float]] = field(default_factory=list)

    @property
    def found(self) -> bool:
        return self.rho_star is not None

    def as_dict(self) -> dict:
        return {
            "T": self.T,
            "tol": self.tol,
            "rho_star": self.rho_star,
            "p_star": self.p_star,
            "bracket": list(self.bracket) if self.bracket else None,
            "crossings": [list(c) for c in self.crossings],
        }


def critical_rho(T: int, tol: float = 1e-5, grid: float = 1e-3) -> ThresholdResult:
    """Threshold above which rho (1 + pa_lb(T, rho)) > 1.

    The map is scanned on a grid over (0, 1) and every sign change is
    recorded.  The reported threshold is the last upward crossing, refined
    by bisection; ``rho_star`` is the upper bisection end, so the gap is
    positive there.  No upward crossing means no threshold in (0, 1).
    """
    if T < 1:
        raise DomainError("T must be at least 1")
    if tol <= 0:
        raise DomainError("tol must be positive")
    n = int(round(1.0 / grid))
    rhos = np.arange(1, n) * grid
    gaps = rhos * (1.0 + _pa_grid(T, rhos)) - 1.0
    pos = gaps > 0
    crossings = [(float(rhos[i]), float(rhos[i + 1]))
                 for i in range(len(rhos) - 1) if pos[i] != pos[i + 1]]
    ups = [c for c in crossings if threshold_gap(T, c[1]) > 0 >= threshold_gap(T, c[0])]
    if not ups:
        return ThresholdResult(T, tol, None, None, None, crossings)
    lo, hi = ups[-1]
    bracket = (lo, hi)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if threshold_gap(T, mid) > 0:
            hi = mid
        else:
            lo = mid
    return ThresholdResult(T, tol, hi, p_of_rho(hi), bracket, crossings)


def q_star() -> float:
    return (2.0 - math.sqrt(2.0)) / 4.0


def brw_min_growth(p: float) -> float:
    """min over theta of p e^theta + 2(1-p) e^-theta."""
    if not 0.0 < p < 1.0:
        raise DomainError("brw_min_growth needs 0 < p < 1")
    return 2.0 * math.sqrt(2.0 * p * (1.0 - p))


@dataclass
class MomentSequences:
    rho: float
    base: Base
    pa_lb: list[float]
    ev_lo: list[float]
    ev_hi: list[float]
    ev2_hi: list[float]
    x_hi: list[Optional[float]]
    pz_lb: list[Optional[float]]

    @property
    def T(self) -> int:
        return len(self.ev_lo) - 1

    def rows(self):
        for t in range(len(self.ev_lo)):
            yield (t, self.pa_lb[t], self.ev_lo[t], self.ev_hi[t],
                   self.ev2_hi[t], self.x_hi[t], self.pz_lb[t])


MOMENT_COLUMNS = ("t", "pa_lb", "ev_lo", "ev_hi", "ev2_hi", "x_hi", "pz_lb")


def _second_moment_terms(rho: float, m: float, s: float):
    ex2 = rho * (1.0 - rho) * (m + 1.0) + rho * rho * (s + 2.0 * m + 1.0)
    ey2 = rho * (1.0 - rho) * m + rho * rho * s
    exey = rho * rho * (m * m + m)
    return ex2, ey2, exey


def compute_moment_sequences(rho: float, T: int, base: Base | str = Base.BERNOULLI) -> MomentSequences:
    """Bounds on the moments of V_t for t = 0..T.

    ev_lo uses pa_lb in place of P(A); ev_hi uses P(A) <= 1.  ev2_hi
    bounds E V^2 <= E X^2 + E Y^2 + 2 E X E Y evaluated at the upper
    moment bounds.  For the ratio x_t = E V_t^2 / (E V_t)^2,

        x_{t+1} <= x_t/(1+a) + 2/(1+a)^2 + L/(rho (1+a) m)^2,
        L = rho(1-rho)(m+1) + rho^2(2m+1) + a rho(1-rho) m + 2 rho^2 m,

    with a = P(A) and m = E V_t.  Every term decreases in a and in m, so
    a = pa_lb and m = ev_lo keep it an upper bound.  x starts at the first
    t with ev_lo > 0 as ev2_hi/ev_lo^2 and is ``None`` before that.
    """
    if not 0.0 < rho < 1.0:
        raise DomainError("compute_moment_sequences needs 0 < rho < 1")
    if T < 1:
        raise DomainError("T must be at least 1")
    base = Base(base)
    if base is Base.ZERO:
        lo = hi = sq = 0.0
    else:
        lo = hi = sq = rho
    pa = [0.0]
    ev_lo, ev_hi, ev2_hi = [lo], [hi], [sq]
    x: Optional[float] = sq / (lo * lo) if lo > 0 else None
    x_hi: list[Optional[float]] = [x]
    r2 = rho * rho
    prod, ri, half = 1.0, 1.0, (1.0 - rho) / 2.0
    for t in range(T):
        prod *= 1.0 - ri * half
        ri *= rho
        a = 1.0 - prod
        ex2, ey2, exey = _second_moment_terms(rho, hi, sq)
        if x is not None:
            m = lo
            L = (rho * (1.0 - rho) * (m + 1.0) + r2 * (2.0 * m + 1.0)
                 + a * rho * (1.0 - rho) * m + 2.0 * r2 * m)
            x = x / (1.0 + a) + 2.0 / (1.0 + a) ** 2 + L / (rho * (1.0 + a) * m) ** 2
        lo = rho * (1.0 + a) * lo + rho
        hi = 2.0 * rho * hi + rho
        sq = ex2 + ey2 + 2.0 * exey
        if x is None and lo > 0:
            x = sq / (lo * lo)
        pa.append(a)
        ev_lo.append(lo)
        ev_hi.append(hi)
        ev2_hi.append(sq)
        x_hi.append(x)
    pz = [None if v is None else 1.0 / (4.0 * v) for v in x_hi]
    return MomentSequences(rho, base, pa, ev_lo, ev_hi, ev2_hi, x_hi, pz)


def ev_fixed_point(rho: float) -> float:
    """Limit of ev_lo when rho (1 + pa_limit) < 1."""
    g = rho * (1.0 + pa_limit(rho))
    if g >= 1.0:
        raise DomainError("ev_lo diverges for this rho")
    return rho / (1.0 - g)


def sample_rde(t: int, rho: float, size: int, seed: int, base: Base | str = Base.BERNOULLI) -> np.ndarray:
    """Population-dynamics samples of the lower-bound surrogate recursion.

    V_{s} = Bin(V^x + 1, rho) + B * Bin(V^y, rho) with B ~ Bernoulli(pa_lb(s))
    independent of everything and V^x, V^y drawn from the pool of
    level s-1.  The pool approximates independent copies; this is a
    surrogate bounding the true law from below in mean, not the law of V_t.
    """
    if size < 1:
        raise DomainError("size must be positive")
    rng = np.random.default_rng(seed)
    if Base(base) is Base.ZERO:
        pool = np.zeros(size, dtype=np.int64)
    else:
        pool = (rng.random(size) < rho).astype(np.int64)
    for s in range(1, t + 1):
        a = pa_lower_bound(s, rho)
        vx = pool[rng.integers(0, size, size)]
        vy = pool[rng.integers(0, size, size)]
        bern = rng.random(size) < a
        pool = rng.binomial(vx + 1, rho) + np.where(bern, rng.binomial(vy, rho), 0)
    return pool


@dataclass
class PZReport:
    t: int
    rho: float
    trials: int
    mean: float
    frequency: float
    sigma: float
    pz_lb: float
    passed: bool


def pz_empirical_check(t: int, rho: float, trials: int, seed: int,
                       root_frog: str = "fresh", d: int = 2) -> PZReport:
    """Compare P(V_t > mean/2) from simulation with the bound 1/(4 x_hi(t))."""
    from .batch import vt_samples
    from .core.tree import ModelParams

    params = ModelParams(d, p_of_rho(rho))
    vs, _ = vt_samples(t, params, trials, seed, root_frog=root_frog)
    mean = float(vs.mean())
    freq = float(np.mean(vs > mean / 2.0))
    sigma = math.sqrt(max(freq * (1.0 - freq), 1e-300) / trials)
    base = Base.BERNOULLI if root_frog == "fresh" else Base.ZERO
    seq = compute_moment_sequences(rho, max(t, 1), base)
    lb = seq.pz_lb[t]
    if lb is None:
        lb = 0.0
    return PZReport(t, rho, trials, mean, freq, sigma, lb, freq >= lb - 3.0 * sigma)
