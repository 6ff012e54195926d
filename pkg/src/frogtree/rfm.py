"""The recursive frog model RFM(d,p).

A woken frog first climbs: at each vertex it steps to the parent with
probability rho and otherwise turns into a descending frog, which moves to
uniform children forever.  A frog reaching the root is counted and
removed; a descending frog landing on a visited site is removed without
waking anybody.

``run_rfm`` draws every move from per-vertex instruction stacks, so the
run is an abelian network: final counts do not depend on the activation
order, and removing frogs early can only lower every site's visit count.
A descending frog below every sleeper is culled at once, since it can
neither wake anyone nor come back.

Root frog conventions.  The initially awake frog must first step to a
child c of the root.  With ``root_frog="fresh"`` it then behaves like a
frog just woken at c (it climbs back with probability rho), so that
V_0 ~ Bernoulli(rho).  With ``root_frog="descend"`` it is descending from
the start, which gives V_0 = 0 and is the convention under which the
recursion in ``frogtree.bounds`` is stated.

``run_dominance_chain`` runs FM, FM' and RFM on shared per-frog walks and
checks RFM <= FM' <= FM along the way.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

from .core.rng import Tag, derive_key, hash_uniform, stream, trial_seed
from .core.sched import Policy, Scheduler
from .core.stacks import InstructionStacks
from .core.tree import ModelParams, Vertex, decode, encode, is_ancestor_code
from .core.walks import ESCAPE, LOOP_DOWN, LOOP_UP, UP, frog_walk
from .fm import ConfigError, SimConfig, TrialOutcome, Truncation

FRESH = "fresh"
DESCEND = "descend"
ROOT_FROG_CONVENTIONS = (FRESH, DESCEND)


class Phase(str, Enum):
    ASLEEP = "ASLEEP"
    AWAKE = "AWAKE"
    AWAKE_UP = "AWAKE_UP"
    AWAKE_DOWN = "AWAKE_DOWN"
    REMOVED = "REMOVED"


class KillReason(str, Enum):
    HIT_ROOT = "hit_root"
    HIT_VISITED = "hit_visited"
    EARLY = "early"
    CAP = "cap"


KILL_COLUMNS = tuple(k.value for k in KillReason)


class RemovalMode(str, Enum):
    NONE = "NONE"
    RANDOM_BERNOULLI = "RANDOM_BERNOULLI"
    SITE_LIST = "SITE_LIST"
    EXTRA_KILL = "EXTRA_KILL"


@dataclass(frozen=True)
class EarlyRemovalPolicy:
    """Extra removals on top of the RFM rules.

    RANDOM_BERNOULLI(q): a frog woken at v is removed at once iff a coin
    attached to v (not to the frog or the time) shows heads, which happens
    with probability q.
    SITE_LIST(sites): frogs woken at the listed sites are removed at once;
    with ``subtree=True`` the list names subtree roots.
    EXTRA_KILL(fn): a descending frog about to land on a sleeper site is
    removed instead with probability fn(S), S being the number of sleeping
    children of the vertex it leaves.
    """

    mode: RemovalMode = RemovalMode.NONE
    q: float = 0.0
    sites: frozenset = frozenset()
    subtree: bool = False
    kill_fn: Optional[Callable[[int], float]] = None

    @classmethod
    def none(cls):
        return cls()

    @classmethod
    def bernoulli(cls, q: float):
        if not 0.0 <= q <= 1.0:
            raise ConfigError("q must lie in [0, 1]")
        return cls(RemovalMode.RANDOM_BERNOULLI, q=q)

    @classmethod
    def site_list(cls, sites, subtree: bool = False):
        return cls(RemovalMode.SITE_LIST, sites=frozenset(tuple(v) for v in sites), subtree=subtree)

    @classmethod
    def extra_kill(cls, fn: Callable[[int], float]):
        return cls(RemovalMode.EXTRA_KILL, kill_fn=fn)


def rfm_prime_kill(d: int) -> Callable[[int], float]:
    """EXTRA_KILL rule turning RFM(d+1,p) into the coupled follower RFM'(d+1,p).

    Given S' sleeping children, a uniform step of the (d+1)-ary frog is
    removed early with overall probability (d+1-S')/(d(d+1)); conditioned
    on hitting a sleeper (probability S'/(d+1)) that is (d+1-S')/(d S').
    """
    def fn(s_prime: int) -> float:
        return (d + 1 - s_prime) / (d * s_prime) if s_prime > 0 else 0.0
    return fn


@dataclass
class FrogPath:
    id: int
    birth_site: Vertex
    moves: str
    kill: Optional[KillReason]


_ST_ROOT, _ST_UP, _ST_DOWN = 0, 1, 2


def _check_root_frog(root_frog: str) -> None:
    if root_frog not in ROOT_FROG_CONVENTIONS:
        raise ConfigError(f"root_frog must be one of {ROOT_FROG_CONVENTIONS}, got {root_frog!r}")


def _removal_test(policy: EarlyRemovalPolicy, d: int, seed: int):
    """Function code -> bool deciding removal-on-wake, or None."""
    if policy.mode is RemovalMode.RANDOM_BERNOULLI:
        key = derive_key(seed, Tag.POLICY)
        q = policy.q
        return lambda code: hash_uniform(key, code) < q
    if policy.mode is RemovalMode.SITE_LIST:
        codes = frozenset(encode(v, d) for v in policy.sites)
        if not policy.subtree:
            return codes.__contains__
        return lambda code: any(is_ancestor_code(a, code, d) for a in codes)
    return None


def run_rfm(config: SimConfig, seed: int, policy: Optional[EarlyRemovalPolicy] = None, *,
            root_frog: str = FRESH, track_sites: bool = False,
            record_paths: bool = False) -> TrialOutcome:
    """One RFM trial driven by the instruction stacks of ``seed``.

    The outcome carries the kill histogram and ``a_event``: whether, after
    x is entered (the first depth-2 site entered by any frog), some other
    child of parent(x) is ever entered.  With ``record_paths`` the outcome
    gets a ``paths`` attribute listing every frog's moves ('U'/'D').
    """
    _check_root_frog(root_frog)
    policy = policy or EarlyRemovalPolicy()
    prm = config.params
    d = prm.d
    cap, t, step_cap = config.depth_cap, config.sleepers, config.step_cap
    stacks = InstructionStacks(prm, seed)
    up, down = stacks.up, stacks.down
    sched = Scheduler(config.policy, stream(derive_key(seed, Tag.SCHEDULER)))
    nxt, drop = sched.next, sched.drop
    remove_on_wake = _removal_test(policy, d, seed)
    extra = policy.kill_fn if policy.mode is RemovalMode.EXTRA_KILL else None
    extra_rnd = stream(derive_key(seed, Tag.POLICY, 1))
    fresh = root_frog == FRESH

    visited = {0}
    vis_children: dict[int, int] = {}
    visits: dict[int, int] = {}
    entered2: list[int] = []
    kills = dict.fromkeys(KILL_COLUMNS, 0)
    paths: list[list] = []
    root_visits = woken = steps = 0
    truncation = None

    sched.add([0, 0, _ST_ROOT, 0])
    if record_paths:
        paths.append([0, (), [], None])

    def finish(fid, reason):
        kills[reason] += 1
        if record_paths:
            paths[fid][3] = KillReason(reason)

    while sched:
        if steps >= step_cap:
            truncation = Truncation.STEP_CAP
            break
        f = nxt()
        code, depth, stage = f[0], f[1], f[2]
        steps += 1
        if stage == _ST_UP:
            k = up(code)
            if k == 0:
                nc = (code - 1) // d
                if record_paths:
                    paths[f[3]][2].append("U")
                if track_sites:
                    visits[nc] = visits.get(nc, 0) + 1
                if nc == 0:
                    root_visits += 1
                    drop()
                    finish(f[3], "hit_root")
                else:
                    f[0] = nc
                    f[1] = depth - 1
                continue
            f[2] = _ST_DOWN
            nc = code * d + k
        elif stage == _ST_DOWN:
            nc = code * d + down(code)
        else:
            nc = down(0)
            f[2] = _ST_UP if fresh else _ST_DOWN
        nd = depth + 1
        if record_paths:
            paths[f[3]][2].append("D")
        if nd > cap:
            drop()
            finish(f[3], "cap")
            continue
        if nd == 2 and nc not in entered2:
            entered2.append(nc)
        descending = f[2] == _ST_DOWN
        if nc in visited:
            if track_sites:
                visits[nc] = visits.get(nc, 0) + 1
            if descending:
                drop()
                finish(f[3], "hit_visited")
            else:
                f[0], f[1] = nc, nd
            continue
        if descending and nd > t:
            drop()
            finish(f[3], "cap")
            continue
        if extra is not None and descending and nd <= t:
            s = d - vis_children.get(code, 0)
            if extra_rnd() < extra(s):
                drop()
                finish(f[3], "early")
                continue
        visited.add(nc)
        vis_children[code] = vis_children.get(code, 0) + 1
        if track_sites:
            visits[nc] = visits.get(nc, 0) + 1
        f[0], f[1] = nc, nd
        if nd <= t:
            woken += 1
            fid = len(paths) if record_paths else 0
            if record_paths:
                paths.append([fid, decode(nc, d), [], None])
            if remove_on_wake is not None and remove_on_wake(nc):
                finish(fid, "early")
            else:
                sched.add([nc, nd, _ST_UP, fid])

    if truncation is None:
        truncation = Truncation.DEPTH_EXTINCT if kills["cap"] else Truncation.ALL_REMOVED
    a_event = False
    if entered2:
        x = entered2[0]
        a_event = any((y - 1) // d == (x - 1) // d for y in entered2[1:])
    out = TrialOutcome(root_visits, woken, steps, truncation,
                       {decode(c, d): n for c, n in visits.items()} if track_sites else None,
                       kills, a_event)
    out.entered_depth2 = [decode(c, d) for c in entered2]
    if record_paths:
        out.paths = [FrogPath(fid, birth, "".join(m), kill) for fid, birth, m, kill in paths]
    return out


@dataclass
class VtSample:
    t: int
    v: int
    a_event: bool
    sibling_entries: dict[Vertex, bool]
    per_site_visits: Optional[dict[Vertex, int]] = None


def vt_config(t: int, params: ModelParams, step_cap: int = 10**7) -> SimConfig:
    return SimConfig(params, depth_cap=t + 2, step_cap=step_cap, sleeper_depth=t)


def sample_vt(t: int, params: ModelParams, step_cap: int, seed: int, *,
              root_frog: str = FRESH, track_sites: bool = False) -> VtSample:
    """Root visits of RFM with sleepers at depths 1..t, plus the sibling event.

    The cap sits at t+2 so that entries into depth-2 sites are always
    observed; nothing below depth t can affect root visits anyway.
    """
    if t < 0:
        raise ConfigError("t must be non-negative")
    out = run_rfm(vt_config(t, params, step_cap), seed, root_frog=root_frog, track_sites=track_sites)
    entered = out.entered_depth2
    sib: dict[Vertex, bool] = {}
    if entered:
        x = entered[0]
        got = set(entered)
        for k in range(1, params.d + 1):
            y = x[:-1] + (k,)
            if y != x:
                sib[y] = y in got
    return VtSample(t, out.root_visits, bool(out.a_event), sib, out.per_site_visits)


def visits_profile(config: SimConfig, policy: Optional[EarlyRemovalPolicy], trials: int,
                   seed: int, *, root_frog: str = FRESH) -> dict[Vertex, float]:
    """Mean per-site visit counts over ``trials`` seeded trials."""
    total: dict[Vertex, int] = {}
    for i in range(trials):
        out = run_rfm(config, trial_seed(seed, i), policy, root_frog=root_frog, track_sites=True)
        for v, n in out.per_site_visits.items():
            total[v] = total.get(v, 0) + n
    return {v: n / trials for v, n in total.items()}


@dataclass
class ChainResult:
    fm: TrialOutcome
    fm_prime: TrialOutcome
    rfm: TrialOutcome
    ticks: int
    violations: list[str] = field(default_factory=list)


# slot fields
_CODE, _DEPTH, _FM, _FP, _FRAMES, _RF, _RSTAGE, _RETURNED, _INSCHED = range(9)
_RS_ROOT, _RS_UP, _RS_DOWN, _RS_CLIMB = 0, 1, 2, 3


def run_dominance_chain(config: SimConfig, seed: int, *, root_frog: str = FRESH,
                        max_violations: int = 20) -> ChainResult:
    """FM, FM' and RFM in lockstep on the same per-frog walks.

    Frogs are identified by birth site across the three models.  Each tick
    picks a uniform frog among those awake in any model and advances every
    awake copy of it by one walk step, so a copy woken later simply lags
    behind.  The RFM copy follows only the loop-erased skeleton of the
    walk (climb on UP steps, descend on ESCAPE steps); if the walk leaves
    the truncated tree inside a loop, the RFM copy is removed early.

    Checked at every tick: every FM' wake is an FM-woken site, every RFM
    wake is an FM'-woken site, and cumulative root visits obey
    RFM <= FM' <= FM.
    """
    _check_root_frog(root_frog)
    prm = config.params
    d, p, rho = prm.d, prm.p, prm.rho
    cap, t, step_cap = config.depth_cap, config.sleepers, config.step_cap
    fresh = root_frog == FRESH
    frog_key = derive_key(seed, Tag.FROG)
    sched = Scheduler(config.policy, stream(derive_key(seed, Tag.SCHEDULER)))
    nxt, drop = sched.next, sched.drop

    slots: dict[int, list] = {}
    fm_woken: set[int] = set()
    fp_woken: set[int] = set()
    rf_woken: set[int] = set()
    rf_visited = {0}
    visits = [0, 0, 0]
    steps = [0, 0, 0]
    lost = [0, 0, 0]
    kills = dict.fromkeys(KILL_COLUMNS, 0)
    violations: list[str] = []
    tick = 0

    def walk(code, depth):
        return frog_walk(code, depth, d, p, rho, stream(derive_key(frog_key, code))).__next__

    def slot_for(code, depth):
        s = slots.get(code)
        if s is None:
            s = slots[code] = [code, depth, None, None, None, None, 0, False, False]
        if not s[_INSCHED]:
            s[_INSCHED] = True
            sched.add(s)
        return s

    def fm_wake(code, depth):
        fm_woken.add(code)
        slot_for(code, depth)[_FM] = walk(code, depth)

    def fp_wake(code, depth):
        if code not in fm_woken and len(violations) < max_violations:
            violations.append(f"tick {tick}: FM' woke {decode(code, d)} before FM")
        fp_woken.add(code)
        s = slot_for(code, depth)
        s[_FP] = walk(code, depth)
        s[_FRAMES] = []

    def rf_wake(code, depth):
        if code not in fp_woken and len(violations) < max_violations:
            violations.append(f"tick {tick}: RFM woke {decode(code, d)} before FM'")
        rf_woken.add(code)
        s = slot_for(code, depth)
        s[_RF] = walk(code, depth)
        s[_RSTAGE] = _RS_UP

    def commit(frames):
        for pending in frames:
            for code, depth in pending:
                if code not in fp_woken:
                    fp_wake(code, depth)
        frames.clear()

    def rf_land(s, code, depth):
        if code in rf_visited:
            s[_RF] = None
            kills["hit_visited"] += 1
        elif depth > t:
            s[_RF] = None
            kills["cap"] += 1
        else:
            rf_visited.add(code)
            rf_wake(code, depth)

    root = slot_for(0, 0)
    root[_FM] = walk(0, 0)
    root[_FP] = walk(0, 0)
    root[_FRAMES] = []
    root[_RF] = walk(0, 0)
    root[_RSTAGE] = _RS_ROOT
    capped = False

    while sched:
        if tick >= step_cap:
            capped = True
            break
        s = nxt()
        tick += 1

        if s[_FM] is not None:
            code, depth, kind = s[_FM]()
            steps[0] += 1
            if depth > cap:
                s[_FM] = None
                lost[0] += 1
            elif depth == 0:
                visits[0] += 1
            elif depth <= t and code not in fm_woken:
                fm_wake(code, depth)

        if s[_FP] is not None:
            code, depth, kind = s[_FP]()
            steps[1] += 1
            frames = s[_FRAMES]
            if depth > cap:
                s[_FP] = None
                lost[1] += 1
                commit(frames)
            else:
                if kind == LOOP_DOWN:
                    frames.append([])
                elif kind == LOOP_UP:
                    frames.pop()
                if depth == 0:
                    visits[1] += 1
                elif depth <= t and code not in fp_woken:
                    if frames:
                        frames[-1].append((code, depth))
                    else:
                        fp_wake(code, depth)

        if s[_RF] is not None:
            code, depth, kind = s[_RF]()
            steps[2] += 1
            stage = s[_RSTAGE]
            if stage == _RS_CLIMB:
                visits[2] += 1
                kills["hit_root"] += 1
                s[_RF] = None
            elif depth > cap:
                s[_RF] = None
                lost[2] += 1
                kills["cap" if kind == ESCAPE else "early"] += 1
            elif kind == ESCAPE:
                if stage == _RS_ROOT:
                    rf_visited.add(code)
                    if depth <= t:
                        rf_wake(code, depth)
                    if fresh and s[_RETURNED]:
                        s[_RSTAGE] = _RS_CLIMB
                    else:
                        s[_RSTAGE] = _RS_DOWN
                        if depth > t:
                            s[_RF] = None
                            kills["cap"] += 1
                else:
                    s[_RSTAGE] = _RS_DOWN
                    rf_land(s, code, depth)
            elif kind == UP:
                if depth == 0:
                    visits[2] += 1
                    kills["hit_root"] += 1
                    s[_RF] = None
            elif stage == _RS_ROOT and kind == LOOP_UP and depth == 0:
                s[_RETURNED] = True

        if not (visits[2] <= visits[1] <= visits[0]) and len(violations) < max_violations:
            violations.append(f"tick {tick}: root visits RFM {visits[2]}, FM' {visits[1]}, FM {visits[0]}")
        if s[_FM] is None and s[_FP] is None and s[_RF] is None:
            drop()
            s[_INSCHED] = False

    for s in list(slots.values()):
        if s[_FP] is not None and s[_FRAMES]:
            commit(s[_FRAMES])
    if not (rf_woken <= fp_woken <= fm_woken) and len(violations) < max_violations:
        violations.append("final woken sets not nested")

    def outcome(i, woken, extra_kills=None):
        if capped:
            tr = Truncation.STEP_CAP
        else:
            tr = Truncation.DEPTH_EXTINCT if lost[i] else Truncation.ALL_REMOVED
        return TrialOutcome(visits[i], len(woken), steps[i], tr, None, extra_kills)

    return ChainResult(outcome(0, fm_woken), outcome(1, fp_woken), outcome(2, rf_woken, kills),
                       tick, violations)
