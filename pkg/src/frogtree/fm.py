"""FM(d,p) and its silent-loop variant FM'(d,p) on a depth-truncated tree.

Frogs move by ``frog_walk``; each frog's walk is a pure function of
(trial seed, birth site), so FM and FM' driven by the same seed see
exactly the same frog paths.  FM' differs only in which arrivals wake
sleepers: a step that opens a loop below the current vertex opens a
frame, arrivals inside the frame are parked as pending wakes, and the
frame is discarded when the loop closes.  Frames still open when their
frog is removed at the cap, or when the run stops, are committed.

An ESCAPE step is a down-step that provably never returns, so it opens
no frame and its arrivals wake immediately; this changes only the timing
of wakes relative to the generic frame rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .core.rng import Tag, derive_key, stream, trial_seed
from .core.sched import Policy, Scheduler
from .core.tree import ModelParams, Vertex, decode
from .core.walks import LOOP_DOWN, LOOP_UP, frog_walk


class ConfigError(ValueError):
    pass


class Truncation(str, Enum):
    STEP_CAP = "STEP_CAP"
    DEPTH_EXTINCT = "DEPTH_EXTINCT"
    ALL_REMOVED = "ALL_REMOVED"


@dataclass(frozen=True)
class SimConfig:
    params: ModelParams
    depth_cap: int
    step_cap: int = 10**7
    policy: Policy = Policy.UNIFORM_RANDOM
    sleeper_depth: Optional[int] = None

    def __post_init__(self):
        if not isinstance(self.depth_cap, int) or self.depth_cap < 0:
            raise ConfigError(f"depth_cap must be a non-negative integer, got {self.depth_cap!r}")
        if not isinstance(self.step_cap, int) or self.step_cap < 1:
            raise ConfigError(f"step_cap must be a positive integer, got {self.step_cap!r}")
        if self.sleeper_depth is not None:
            if self.sleeper_depth < 0:
                raise ConfigError("sleeper_depth must be non-negative")
            if self.sleeper_depth > self.depth_cap:
                raise ConfigError("sleeper_depth may not exceed depth_cap")
        object.__setattr__(self, "policy", Policy(self.policy))

    @property
    def sleepers(self) -> int:
        """Depth of the deepest sleeper."""
        return self.depth_cap if self.sleeper_depth is None else self.sleeper_depth

    def initial_sleepers(self) -> int:
        d = self.params.d
        return sum(d ** i for i in range(1, self.sleepers + 1))


@dataclass
class TrialOutcome:
    root_visits: int
    frogs_woken: int
    steps_used: int
    truncation: Truncation
    per_site_visits: Optional[dict[Vertex, int]] = None
    kills: Optional[dict[str, int]] = None
    a_event: Optional[bool] = None
    entered_depth2: Optional[list] = field(default=None, repr=False)
    paths: Optional[list] = field(default=None, repr=False)

    def key(self) -> tuple:
        """Everything except the site map, for equality checks in tests."""
        return (self.root_visits, self.frogs_woken, self.steps_used, self.truncation,
                None if self.kills is None else tuple(sorted(self.kills.items())), self.a_event)


def _commit(frames, woken, wake):
    for pending in frames:
        for code, depth in pending:
            if code not in woken:
                wake(code, depth)
    frames.clear()


def _run(config: SimConfig, seed: int, silent: bool, track_sites: bool) -> TrialOutcome:
    prm = config.params
    d, p, rho = prm.d, prm.p, prm.rho
    cap, tmax, step_cap = config.depth_cap, config.sleepers, config.step_cap
    frog_key = derive_key(seed, Tag.FROG)
    sched = Scheduler(config.policy, stream(derive_key(seed, Tag.SCHEDULER)))
    woken: set[int] = set()
    visits: dict[int, int] = {}

    def wake(code, depth):
        woken.add(code)
        walk = frog_walk(code, depth, d, p, rho, stream(derive_key(frog_key, code)))
        sched.add((walk.__next__, []))

    sched.add((frog_walk(0, 0, d, p, rho, stream(derive_key(frog_key, 0))).__next__, []))
    root_visits = steps = lost = 0
    truncation = None
    nxt, drop = sched.next, sched.drop
    while sched:
        if steps >= step_cap:
            truncation = Truncation.STEP_CAP
            break
        frog = nxt()
        code, depth, kind = frog[0]()
        steps += 1
        if depth > cap:
            drop()
            lost += 1
            if silent and frog[1]:
                _commit(frog[1], woken, wake)
            continue
        if track_sites:
            visits[code] = visits.get(code, 0) + 1
        if silent:
            if kind == LOOP_DOWN:
                frog[1].append([])
            elif kind == LOOP_UP:
                frog[1].pop()
        if depth == 0:
            root_visits += 1
        elif depth <= tmax and code not in woken:
            if silent and frog[1]:
                frog[1][-1].append((code, depth))
            else:
                wake(code, depth)
    if silent:
        for frog in list(sched):
            _commit(frog[1], woken, wake)
    if truncation is None:
        truncation = Truncation.DEPTH_EXTINCT if lost else Truncation.ALL_REMOVED
    sites = None
    if track_sites:
        sites = {decode(c, d): n for c, n in visits.items()}
    return TrialOutcome(root_visits, len(woken), steps, truncation, sites)


def run_fm(config: SimConfig, seed: int, track_sites: bool = False) -> TrialOutcome:
    return _run(config, seed, False, track_sites)


def run_fm_prime(config: SimConfig, seed: int, track_sites: bool = False) -> TrialOutcome:
    return _run(config, seed, True, track_sites)


@dataclass
class RootVisitSummary:
    trials: int
    mean: float
    variance: float
    sem: float
    ecdf: list[tuple[int, float]]
    outcomes: list[TrialOutcome] = field(repr=False, default_factory=list)


def summarize(outcomes: list[TrialOutcome]) -> RootVisitSummary:
    n = len(outcomes)
    if n == 0:
        raise ValueError("no outcomes to summarize")
    xs = [o.root_visits for o in outcomes]
    mean = sum(xs) / n
    var = sum((x - mean) ** 2 for x in xs) / (n - 1) if n > 1 else 0.0
    counts: dict[int, int] = {}
    for x in xs:
        counts[x] = counts.get(x, 0) + 1
    acc = 0
    ecdf = []
    for x in sorted(counts):
        acc += counts[x]
        ecdf.append((x, acc / n))
    return RootVisitSummary(n, mean, var, math.sqrt(var / n), ecdf, outcomes)


def estimate_root_visits(config: SimConfig, trials: int, master_seed: int,
                         model: str = "fm", workers: int = 1) -> RootVisitSummary:
    from .runner import run_model_trials

    if trials < 1:
        raise ConfigError("trials must be positive")
    return summarize(run_model_trials(model, config, trials, master_seed, workers))


__all__ = [
    "ConfigError", "Truncation", "SimConfig", "TrialOutcome", "run_fm", "run_fm_prime",
    "RootVisitSummary", "summarize", "estimate_root_visits", "trial_seed",
]
