"""Lock-step couplings between frog models on trees of different degree.

fm-kd: FM(d,p) drives a modified FM(kd,p).  A frog at x_1..x_n in T_d is
paired with one at x'_1..x'_n in T_kd with x'_i in G(x_i).  Up-moves are
copied, a down-move to child x is copied by a uniform child of the block
G(x), and the follower wakes a frog exactly when the leader does.

rfm-plus1: RFM(d,p) drives RFM'(d+1,p).  Up-moves are copied; when the
leader wakes a child, the follower moves to a uniform sleeping child and
the two new frogs and vertices are paired; removals are copied.  When the
leader dies on a visited site the follower's own uniform step is resolved
as well, so its early removals can be told apart from ordinary kills:
with probability 1/(d+1) the follower would have hit a sleeper, which is
exactly the extra removal that turns RFM(d+1,p) into RFM'(d+1,p).

Both couplings are checked while they run.  Every engine exists twice,
in plain Python and as a compiled kernel; the two agree draw for draw.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field
from typing import Iterator, NamedTuple, Optional, Sequence

from . import _kernels as K
from .core.rng import Tag, derive_key, stream, trial_seed
from .core.sched import Policy, Scheduler
from .core.stacks import InstructionStacks
from .core.tree import DomainError, ModelParams, Vertex, decode
from .core.walks import frog_walk
from .fm import ConfigError, SimConfig, TrialOutcome, Truncation

FM_KD = "fm-kd"
RFM_PLUS1 = "rfm-plus1"
KINDS = (FM_KD, RFM_PLUS1)


class Embedding:
    """The block embedding of T_d into T_kd."""

    def __init__(self, d: int, k: int):
        if d < 1 or k < 1:
            raise DomainError("need d >= 1 and k >= 1")
        self.d = d
        self.k = k

    def G(self, i: int) -> range:
        if not 1 <= i <= self.d:
            raise DomainError(f"block index {i} outside 1..{self.d}")
        return range(self.k * (i - 1) + 1, self.k * i + 1)

    def block_of(self, j: int) -> int:
        """The i with j in G(i)."""
        if not 1 <= j <= self.k * self.d:
            raise DomainError(f"child index {j} outside 1..{self.k * self.d}")
        return (j - 1) // self.k + 1

    def project(self, w: Vertex) -> Vertex:
        return tuple(self.block_of(j) for j in w)

    def leaves(self, v: Vertex) -> Iterator[Vertex]:
        """Vertices of T_k(L_v) at depth |v|."""
        return itertools.product(*(self.G(x) for x in v))

    def path_tree(self, v: Vertex) -> set[Vertex]:
        """T_k(L_v) as an explicit vertex set (the root included)."""
        out: set[Vertex] = {()}
        for i in range(1, len(v) + 1):
            out.update(self.leaves(v[:i]))
        return out

    def contains(self, v: Vertex, w: Vertex) -> bool:
        """Whether w lies in T_k(L_v)."""
        return len(w) <= len(v) and self.project(w) == tuple(v[:len(w)])


def common_prefix(v: Vertex, w: Vertex) -> Vertex:
    n = 0
    for a, b in zip(v, w):
        if a != b:
            break
        n += 1
    return tuple(v[:n])


def effective_extra_kill(d: int, s_prime: int) -> float:
    """Marginal extra-removal probability of an RFM'(d+1,p) down-step with S' sleeping children."""
    if d < 1:
        raise DomainError("d must be positive")
    if not 1 <= s_prime <= d + 1:
        raise DomainError(f"S' must lie in 1..{d + 1}, got {s_prime}")
    return (d + 1 - s_prime) / (d * (d + 1))


@dataclass
class Violation:
    tick: int
    invariant: str
    frog: int
    expected: object
    actual: object


@dataclass
class InvariantLog:
    """Checks performed, violations found, and the follower's down-step tally.

    ``down_steps[s]`` counts follower steps away from the root taken with
    s sleeping children below, ``early[s]`` the early removals among them.
    """

    kind: str
    seed: int
    checks: int = 0
    ticks: int = 0
    violations: list[Violation] = field(default_factory=list)
    down_steps: dict[int, int] = field(default_factory=dict)
    early: dict[int, int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def first_violation(self) -> Optional[Violation]:
        return self.violations[0] if self.violations else None

    def record(self, tick: int, invariant: str, frog: int, expected, actual) -> None:
        self.violations.append(Violation(tick, invariant, frog, expected, actual))

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "seed": self.seed,
            "checks": self.checks,
            "ticks": self.ticks,
            "violations": [asdict(v) for v in self.violations],
            "down_steps": {str(s): n for s, n in sorted(self.down_steps.items())},
            "early": {str(s): n for s, n in sorted(self.early.items())},
        }


class CoupledRun(NamedTuple):
    small: TrialOutcome
    large: TrialOutcome
    log: InvariantLog


def _pick_engine(engine: str, fits: bool) -> str:
    if engine not in ("auto", "python", "kernel"):
        raise ConfigError(f"unknown engine {engine!r}")
    if engine == "auto":
        return "kernel" if fits else "python"
    if engine == "kernel" and not fits:
        raise ConfigError("configuration too large for the compiled kernel")
    return engine


# ---------------------------------------------------------------- fm-kd

def _fm_kd_python(config: SimConfig, k: int, seed: int, check: bool, fault: int) -> CoupledRun:
    prm = config.params
    d, p, rho = prm.d, prm.p, prm.rho
    kd = k * d
    cap, tmax, step_cap = config.depth_cap, config.sleepers, config.step_cap
    frog_key = derive_key(seed, Tag.FROG)
    fol_key = derive_key(seed, Tag.FOLLOWER)
    sched = Scheduler(config.policy, stream(derive_key(seed, Tag.SCHEDULER)))
    log = InvariantLog(FM_KD, seed)
    woken: set[int] = set()
    lwoken: set[int] = set()
    lvisited: set[int] = set()
    svisited: set[int] = set()
    proj: dict[int, int] = {}
    # frog record: walk, leader depth, follower code, follower depth, follower stream, id
    frogs: list[list] = []

    def add_frog(code, depth, fcode):
        rec = [frog_walk(code, depth, d, p, rho, stream(derive_key(frog_key, code))).__next__,
               depth, fcode, depth, stream(derive_key(fol_key, code)), len(frogs)]
        frogs.append(rec)
        sched.add(rec)

    add_frog(0, 0, 0)
    root_visits = steps = lost = f_root = f_woken = 0
    truncation = None
    nxt, drop = sched.next, sched.drop
    while sched:
        if steps >= step_cap:
            truncation = Truncation.STEP_CAP
            break
        f = nxt()
        code, depth, _ = f[0]()
        old_depth = f[1]
        f[1] = depth
        steps += 1
        if depth > cap:
            drop()
            lost += 1
            continue
        if depth < old_depth:
            if not (fault == K.FAULT_SKIP_ROOT_UP and depth == 0):
                f[2] = (f[2] - 1) // kd
                f[3] -= 1
            if f[3] == 0:
                f_root += 1
        else:
            x = (code - 1) % d + 1
            u = f[4]()
            if fault == K.FAULT_IGNORE_BLOCK:
                digit = min(int(u * kd), kd - 1) + 1
            else:
                digit = k * (x - 1) + min(int(u * k), k - 1) + 1
            f[2] = f[2] * kd + digit
            f[3] += 1
            if check:
                log.checks += 1
                if (digit - 1) // k + 1 != x:
                    log.record(steps, "block_projection", f[5], x, (digit - 1) // k + 1)
                    break
        if check:
            log.checks += 1
            if f[3] != depth:
                log.record(steps, "equal_displacement", f[5], depth, f[3])
                break
            if k == 1 and f[2] != code:
                log.record(steps, "identity_embedding", f[5], code, f[2])
                break
            if 0 < depth <= tmax:
                fc = f[2]
                if fc not in lvisited:
                    lvisited.add(fc)
                    was_leaf = proj.get(code, 0) > 0
                    proj[code] = proj.get(code, 0) + 1
                else:
                    was_leaf = True
                if was_leaf != (code in svisited):
                    log.record(steps, "first_leaf_visit", f[5], code in svisited, was_leaf)
                    break
                svisited.add(code)
        if depth == 0:
            root_visits += 1
            if check:
                log.checks += 1
                if f_root != root_visits:
                    log.record(steps, "root_visits", f[5], root_visits, f_root)
                    break
        elif depth <= tmax and code not in woken:
            woken.add(code)
            fc = f[2]
            if check:
                log.checks += 2
                emb = Embedding(d, k)
                small_v = decode(code, d)
                large_v = decode(fc, kd)
                if emb.project(large_v) != small_v:
                    log.record(steps, "block_projection", f[5], small_v, emb.project(large_v))
                    break
                if fc in lwoken:
                    log.record(steps, "wake_availability", f[5], "sleeper", "already woken")
                    break
            lwoken.add(fc)
            f_woken += 1
            add_frog(code, depth, fc)
    log.ticks = steps
    if truncation is None:
        truncation = Truncation.DEPTH_EXTINCT if lost else Truncation.ALL_REMOVED
    small = TrialOutcome(root_visits, len(woken), steps, truncation)
    large = TrialOutcome(f_root, f_woken, steps, truncation)
    return CoupledRun(small, large, log)


def _fm_kd_kernel(batch, seed: int) -> CoupledRun:
    from .batch import _TRUNC

    r, v = batch.run_raw(seed)
    tr = _TRUNC[int(r[3])]
    log = InvariantLog(FM_KD, seed, checks=int(r[6]), ticks=int(r[2]))
    if r[7]:
        log.record(int(v[0]), K.VIOLATION_NAMES[int(v[1])], int(v[2]), int(v[3]), int(v[4]))
    return CoupledRun(TrialOutcome(int(r[0]), int(r[1]), int(r[2]), tr),
                      TrialOutcome(int(r[4]), int(r[5]), int(r[2]), tr), log)


def fm_kd_config(d: int, p: float, depth_cap: int, step_cap: int = 10**7,
                 policy: Policy = Policy.UNIFORM_RANDOM) -> SimConfig:
    return SimConfig(ModelParams(d, p), depth_cap, step_cap, policy)


def run_coupled_fm(d: int, k: int, p: float, depth_cap: int, step_cap: int = 10**7,
                   seed: int = 0, *, check: bool = True, policy: Policy = Policy.UNIFORM_RANDOM,
                   engine: str = "auto", fault: int = K.FAULT_NONE) -> CoupledRun:
    """FM(d,p) and the coupled modified FM(kd,p), one trial.

    The leader is exactly ``run_fm`` for the same seed.  The run stops at
    the first violated invariant, which is recorded in the log.
    """
    if d < 2 or k < 1:
        raise ConfigError("need d >= 2 and k >= 1")
    config = fm_kd_config(d, p, depth_cap, step_cap, policy)
    from .batch import FMBatch, fm_fits

    if _pick_engine(engine, fm_fits(config, k)) == "python":
        return _fm_kd_python(config, k, seed, check, fault)
    return _fm_kd_kernel(FMBatch(config, k=k, check=check, fault=fault), seed)


# ---------------------------------------------------------------- rfm-plus1

_ST_ROOT, _ST_UP, _ST_DOWN = 0, 1, 2


def _rfm_plus1_python(config: SimConfig, seed: int, root_frog: str, check: bool,
                      fault: int) -> CoupledRun:
    prm = config.params
    d = prm.d
    D = d + 1
    alpha = 1.0 / D
    cap, t, step_cap = config.depth_cap, config.sleepers, config.step_cap
    stacks = InstructionStacks(prm, seed)
    up, down = stacks.up, stacks.down
    fol_key = derive_key(seed, Tag.FOLLOWER)
    sched = Scheduler(config.policy, stream(derive_key(seed, Tag.SCHEDULER)))
    nxt, drop = sched.next, sched.drop
    fresh = root_frog == "fresh"
    log = InvariantLog(RFM_PLUS1, seed)

    visited = {0}
    vch: dict[int, int] = {}
    fvis = {0}
    fvch: dict[int, int] = {}
    vpair = {0: 0}
    kills = dict.fromkeys(("hit_root", "hit_visited", "early", "cap"), 0)
    fkills = dict.fromkeys(("hit_root", "hit_visited", "early", "cap"), 0)
    root_visits = woken = steps = f_root = f_woken = 0
    x2 = None
    a_event = False
    truncation = None
    failed = False
    nid = 1

    # frog: code, depth, stage, follower code, follower depth, follower stream, id
    sched.add([0, 0, _ST_ROOT, 0, 0, stream(derive_key(fol_key, 0)), 0])

    while sched:
        if steps >= step_cap:
            truncation = Truncation.STEP_CAP
            break
        f = nxt()
        code, depth, stage = f[0], f[1], f[2]
        fid = f[6]
        steps += 1
        dropped = False
        if stage == _ST_UP:
            kk = up(code)
            if kk == 0:
                nc = (code - 1) // d
                f[3] = (f[3] - 1) // D
                f[4] -= 1
                if check:
                    log.checks += 2
                    if f[4] != depth - 1:
                        log.record(steps, "equal_displacement", fid, depth - 1, f[4])
                        failed = True
                        break
                    if vpair[nc] != f[3]:
                        log.record(steps, "paired_vertex", fid, vpair[nc], f[3])
                        failed = True
                        break
                if nc == 0:
                    root_visits += 1
                    kills["hit_root"] += 1
                    f_root += 1
                    fkills["hit_root"] += 1
                    drop()
                else:
                    f[0] = nc
                    f[1] = depth - 1
                    if check:
                        log.checks += 2
                continue
            f[2] = _ST_DOWN
            nc = code * d + kk
        elif stage == _ST_DOWN:
            nc = code * d + down(code)
        else:
            nc = down(0)
            f[2] = _ST_UP if fresh else _ST_DOWN
        nd = depth + 1
        fpos = f[3]
        if nd > cap:
            kills["cap"] += 1
            fkills["cap"] += 1
            drop()
            continue
        if nd == 2:
            if x2 is None:
                x2 = nc
            elif nc != x2 and (nc - 1) // d == (x2 - 1) // d:
                a_event = True
        descending = f[2] == _ST_DOWN
        s_small = d - vch.get(code, 0)
        s_large = D - fvch.get(fpos, 0)
        if check:
            log.checks += 1
            if s_small + 1 != s_large:
                log.record(steps, "sleep_ineq", fid, s_small + 1, s_large)
                failed = True
                break
        if nc in visited:
            if descending:
                kills["hit_visited"] += 1
                log.down_steps[s_large] = log.down_steps.get(s_large, 0) + 1
                if f[5]() < alpha:
                    fkills["early"] += 1
                    log.early[s_large] = log.early.get(s_large, 0) + 1
                else:
                    fkills["hit_visited"] += 1
                drop()
                continue
            f[0], f[1] = nc, nd
            log.record(steps, "unexpected_move", fid, 0, nc)
            failed = True
            break
        if descending and nd > t:
            kills["cap"] += 1
            fkills["cap"] += 1
            drop()
            continue
        visited.add(nc)
        vch[code] = vch.get(code, 0) + 1
        f[0], f[1] = nc, nd
        log.down_steps[s_large] = log.down_steps.get(s_large, 0) + 1
        u = f[5]()
        if fault == K.FAULT_ANY_CHILD:
            child = fpos * D + min(int(u * D), D - 1) + 1
        else:
            j = min(int(u * s_large), s_large - 1)
            sleepers = [fpos * D + c for c in range(1, D + 1) if fpos * D + c not in fvis]
            child = sleepers[j] if j < len(sleepers) else None
        if check:
            log.checks += 1
            if child is None or child in fvis:
                log.record(steps, "wake_availability", fid, "sleeper", child)
                failed = True
                break
        fvis.add(child)
        if fault != K.FAULT_FORGET_WAKE:
            fvch[fpos] = fvch.get(fpos, 0) + 1
        vpair[nc] = child
        f[3] = child
        f[4] = nd
        if check:
            log.checks += 2
            if (d - vch.get(code, 0)) + 1 != D - fvch.get(fpos, 0):
                log.record(steps, "vertex_ineq", fid, (d - vch.get(code, 0)) + 1,
                           D - fvch.get(fpos, 0))
                failed = True
                break
            if vch.get(nc, 0) or fvch.get(child, 0):
                log.record(steps, "vertex_ineq", fid, 0, 1)
                failed = True
                break
        if nd <= t:
            woken += 1
            f_woken += 1
            sched.add([nc, nd, _ST_UP, child, nd, stream(derive_key(fol_key, nc)), nid])
            nid += 1
    if check and not failed:
        for v in visited:
            log.checks += 1
            want = (d - vch.get(v, 0)) + 1
            got = D - fvch.get(vpair[v], 0)
            if want != got:
                log.record(steps, "vertex_ineq", -1, want, got)
                failed = True
                break
        if not failed:
            log.checks += 1
            if f_root != root_visits:
                log.record(steps, "root_visits", -1, root_visits, f_root)
    log.ticks = steps
    if truncation is None:
        truncation = Truncation.DEPTH_EXTINCT if kills["cap"] else Truncation.ALL_REMOVED
    small = TrialOutcome(root_visits, woken, steps, truncation, None, kills, a_event)
    large = TrialOutcome(f_root, f_woken, steps, truncation, None, fkills)
    return CoupledRun(small, large, log)


def _rfm_plus1_kernel(batch, seed: int) -> CoupledRun:
    from .batch import rfm_outcome

    batch.tally_steps[:] = 0
    batch.tally_early[:] = 0
    r, v = batch.run_raw(seed)
    log = InvariantLog(RFM_PLUS1, seed, checks=int(r[14]), ticks=int(r[2]))
    log.down_steps = {s: int(n) for s, n in enumerate(batch.tally_steps) if n}
    log.early = {s: int(n) for s, n in enumerate(batch.tally_early) if n}
    if r[15]:
        log.record(int(v[0]), K.VIOLATION_NAMES[int(v[1])], int(v[2]), int(v[3]), int(v[4]))
    return CoupledRun(rfm_outcome(r), rfm_outcome(r, follower=True), log)


def rfm_plus1_config(d: int, p: float, depth_cap: int, step_cap: int = 10**7,
                     policy: Policy = Policy.UNIFORM_RANDOM) -> SimConfig:
    return SimConfig(ModelParams(d, p), depth_cap, step_cap, policy)


def run_coupled_rfm(d: int, p: float, depth_cap: int, step_cap: int = 10**7, seed: int = 0, *,
                    check: bool = True, root_frog: str = "fresh",
                    policy: Policy = Policy.UNIFORM_RANDOM, engine: str = "auto",
                    fault: int = K.FAULT_NONE) -> CoupledRun:
    """RFM(d,p) and the coupled RFM'(d+1,p), one trial.

    Sleepers fill the tree down to ``depth_cap``.  S(v) counts the
    children of v not yet visited, so below the cap it stays d (and d+1
    on the follower side), as on the untruncated tree.  The leader equals
    ``run_rfm`` for the same seed.
    """
    if d < 2:
        raise ConfigError("need d >= 2")
    config = rfm_plus1_config(d, p, depth_cap, step_cap, policy)
    from .batch import RFMBatch, rfm_fits

    if _pick_engine(engine, rfm_fits(config, follow=True)) == "python":
        return _rfm_plus1_python(config, seed, root_frog, check, fault)
    return _rfm_plus1_kernel(RFMBatch(config, root_frog, follow=True, check=check, fault=fault),
                             seed)


# ---------------------------------------------------------------- batches

@dataclass
class CouplingRow:
    trial_id: int
    small_root_visits: int
    large_root_visits: int
    violations: int


@dataclass
class CouplingReport:
    kind: str
    d: int
    k: int
    p: float
    depth_cap: int
    trials: int
    master_seed: int
    rows: list[CouplingRow]
    violations: int
    first_violation: Optional[dict]
    checks: int
    down_steps: dict[int, int]
    early: dict[int, int]
    small_visits: list[int] = field(repr=False, default_factory=list)
    large_visits: list[int] = field(repr=False, default_factory=list)

    @property
    def ok(self) -> bool:
        return self.violations == 0

    @property
    def pair_label(self) -> str:
        if self.kind == FM_KD:
            return f"FM({self.d})~FM({self.k * self.d})"
        return f"RFM({self.d})~RFM'({self.d + 1})"

    def kill_law(self) -> list[dict]:
        """Empirical early-removal frequency per S' against the formula."""
        out = []
        for s in sorted(self.down_steps):
            n = self.down_steps[s]
            e = self.early.get(s, 0)
            freq = e / n
            out.append({"s_prime": s, "steps": n, "early": e, "frequency": freq,
                        "expected": effective_extra_kill(self.d, s),
                        "sigma": math.sqrt(max(freq * (1 - freq), 0.0) / n)})
        return out


def coupled_trials(kind: str, d: int, p: float, depth_cap: int, trials: int, master_seed: int, *,
                   k: int = 2, step_cap: int = 10**7, check: bool = True,
                   engine: str = "auto", root_frog: str = "fresh",
                   stop_on_violation: bool = False) -> CouplingReport:
    """``trials`` seeded coupled runs of one kind, merged into a report."""
    if kind not in KINDS:
        raise ConfigError(f"kind must be one of {KINDS}")
    if trials < 1:
        raise ConfigError("trials must be positive")
    from .batch import FMBatch, RFMBatch, fm_fits, rfm_fits

    if kind == FM_KD:
        if d < 2 or k < 1:
            raise ConfigError("need d >= 2 and k >= 1")
        config = fm_kd_config(d, p, depth_cap, step_cap)
        use = _pick_engine(engine, fm_fits(config, k))
        batch = FMBatch(config, k=k, check=check) if use == "kernel" else None

        def one(seed):
            if batch is not None:
                return _fm_kd_kernel(batch, seed)
            return _fm_kd_python(config, k, seed, check, K.FAULT_NONE)
    else:
        if d < 2:
            raise ConfigError("need d >= 2")
        config = rfm_plus1_config(d, p, depth_cap, step_cap)
        use = _pick_engine(engine, rfm_fits(config, follow=True))
        batch = RFMBatch(config, root_frog, follow=True, check=check) if use == "kernel" else None

        def one(seed):
            if batch is not None:
                return _rfm_plus1_kernel(batch, seed)
            return _rfm_plus1_python(config, seed, root_frog, check, K.FAULT_NONE)

    rows = []
    small, large = [], []
    violations = checks = 0
    first = None
    steps_tally: dict[int, int] = {}
    early_tally: dict[int, int] = {}
    for i in range(trials):
        seed = trial_seed(master_seed, i)
        run = one(seed)
        nv = len(run.log.violations)
        violations += nv
        checks += run.log.checks
        if nv and first is None:
            first = {"trial_id": i, "trial_seed": seed, **asdict(run.log.violations[0])}
        for s, n in run.log.down_steps.items():
            steps_tally[s] = steps_tally.get(s, 0) + n
        for s, n in run.log.early.items():
            early_tally[s] = early_tally.get(s, 0) + n
        rows.append(CouplingRow(i, run.small.root_visits, run.large.root_visits, nv))
        small.append(run.small.root_visits)
        large.append(run.large.root_visits)
        if nv and stop_on_violation:
            break
    return CouplingReport(kind, d, k if kind == FM_KD else 1, p, depth_cap, len(rows), master_seed,
                          rows, violations, first, checks, steps_tally, early_tally, small, large)


# ---------------------------------------------------------------- dominance

@dataclass
class DominanceReport:
    passed: bool
    worst_gap: float
    worst_at: Optional[int]
    flagged: list[int]
    n_small: int
    n_large: int
    margin: float


def _ecdf(sorted_xs: Sequence[int], c: int) -> float:
    import bisect

    return bisect.bisect_right(sorted_xs, c) / len(sorted_xs)


def check_dominance(samples_small: Sequence[int], samples_large: Sequence[int],
                    margin: float = 3.0) -> DominanceReport:
    """One-sided ECDF test of small <= large in the stochastic order.

    Flags every threshold c with ECDF_large(c) > ECDF_small(c) + margin*SE,
    SE being the standard error of the difference of the two ECDFs.
    """
    if not samples_small or not samples_large:
        raise ValueError("both sample sets must be nonempty")
    xs = sorted(samples_small)
    ys = sorted(samples_large)
    n, m = len(xs), len(ys)
    worst = -math.inf
    worst_at = None
    flagged = []
    for c in sorted(set(xs) | set(ys)):
        fs = _ecdf(xs, c)
        fl = _ecdf(ys, c)
        gap = fl - fs
        se = math.sqrt(fs * (1 - fs) / n + fl * (1 - fl) / m)
        if gap > worst:
            worst, worst_at = gap, c
        if gap > margin * se and gap > 0:
            flagged.append(c)
    return DominanceReport(not flagged, worst, worst_at, flagged, n, m, margin)


__all__ = [
    "FM_KD", "RFM_PLUS1", "KINDS", "Embedding", "common_prefix", "effective_extra_kill",
    "Violation", "InvariantLog", "CoupledRun", "run_coupled_fm", "run_coupled_rfm",
    "CouplingRow", "CouplingReport", "coupled_trials", "DominanceReport", "check_dominance",
]
