"""Sweeps of truncated root visits over drift and depth cap.

A finite run cannot decide recurrence.  The sweep only reports whether the
mean number of root visits keeps growing as the depth cap increases, and
labels the outcome as a heuristic.  Trials at different caps reuse the
same trial seeds, so increments between caps are estimated from paired
differences.

Growth flag: with depth caps D_1 < ... < D_m and means M_j, the last
increment M_m - M_{m-1} must be positive at 3 paired standard errors,
and, when m >= 3, must not be smaller than the previous increment.  Means
that level off fail the second test even while still creeping upward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .core.tree import ModelParams
from .fm import ConfigError, SimConfig
from .runner import run_model_trials

GROWING = "growing: consistent with recurrence (heuristic)"
SATURATING = "saturating: consistent with transience (heuristic)"


@dataclass
class SweepCell:
    p: float
    depth_cap: int
    trials: int
    mean: float
    variance: float
    sem: float


@dataclass
class GrowthDiagnostic:
    p: float
    increments: list[float]
    last_z: float
    growing: bool

    @property
    def label(self) -> str:
        return GROWING if self.growing else SATURATING


@dataclass
class SweepReport:
    d: int
    model: str
    p_grid: list[float]
    depth_grid: list[int]
    trials: int
    master_seed: int
    cells: list[SweepCell]
    diagnostics: list[GrowthDiagnostic]
    z_threshold: float = 3.0

    def flags(self) -> list[bool]:
        return [g.growing for g in self.diagnostics]

    def flags_monotone(self) -> bool:
        """Whether the growth flag never switches off as p increases."""
        f = [g.growing for g in sorted(self.diagnostics, key=lambda g: g.p)]
        return all(not a or b for a, b in zip(f, f[1:]))

    def rows(self):
        diag = {g.p: g for g in self.diagnostics}
        for c in self.cells:
            g = diag[c.p]
            yield [self.d, c.p, c.depth_cap, c.trials, c.mean, c.variance, c.sem,
                   int(g.growing), g.label]

    def as_dict(self) -> dict:
        return {
            "d": self.d, "model": self.model, "p_grid": self.p_grid,
            "depth_grid": self.depth_grid, "trials": self.trials, "seed": self.master_seed,
            "cells": [vars(c) for c in self.cells],
            "diagnostics": [{"p": g.p, "increments": g.increments, "last_z": g.last_z,
                             "growing": g.growing, "label": g.label} for g in self.diagnostics],
            "monotone_in_p": self.flags_monotone(),
        }


SWEEP_COLUMNS = ("d", "p", "depth_cap", "trials", "mean", "variance", "sem", "growing", "diagnostic")


def _mean_var(xs: Sequence[float]) -> tuple[float, float]:
    n = len(xs)
    m = sum(xs) / n
    v = sum((x - m) ** 2 for x in xs) / (n - 1) if n > 1 else 0.0
    return m, v


def growth_diagnostic(p: float, samples: Sequence[Sequence[int]],
                      z_threshold: float = 3.0) -> GrowthDiagnostic:
    """Growth flag from per-trial samples at increasing depth caps (paired by trial)."""
    if len(samples) < 2:
        raise ConfigError("need at least two depth caps")
    increments = []
    for a, b in zip(samples, samples[1:]):
        increments.append(_mean_var(b)[0] - _mean_var(a)[0])
    diffs = [y - x for x, y in zip(samples[-2], samples[-1])]
    m, v = _mean_var(diffs)
    se = math.sqrt(v / len(diffs))
    if se > 0:
        z = m / se
    else:
        z = math.inf if m > 0 else 0.0
    growing = z >= z_threshold
    if growing and len(increments) >= 2:
        growing = increments[-1] >= increments[-2]
    return GrowthDiagnostic(p, increments, z, growing)


def sweep(d: int, p_grid: Sequence[float], depth_grid: Sequence[int], trials: int,
          master_seed: int, *, model: str = "fm", step_cap: int = 10**7,
          workers: Optional[int] = None, z_threshold: float = 3.0) -> SweepReport:
    depth_grid = sorted(set(int(x) for x in depth_grid))
    if len(depth_grid) < 2:
        raise ConfigError("depth grid needs at least two values")
    if trials < 2:
        raise ConfigError("a sweep needs at least two trials per cell")
    cells: list[SweepCell] = []
    diags: list[GrowthDiagnostic] = []
    for p in p_grid:
        params = ModelParams(d, float(p))
        samples = []
        for depth in depth_grid:
            config = SimConfig(params, depth, step_cap)
            xs = [o.root_visits for o in run_model_trials(model, config, trials, master_seed, workers)]
            m, v = _mean_var(xs)
            cells.append(SweepCell(float(p), depth, trials, m, v, math.sqrt(v / trials)))
            samples.append(xs)
        diags.append(growth_diagnostic(float(p), samples, z_threshold))
    return SweepReport(d, model, [float(p) for p in p_grid], depth_grid, trials, master_seed,
                       cells, diags, z_threshold)
