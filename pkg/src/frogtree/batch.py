"""Workspace management for the compiled kernels.

``FMBatch`` and ``RFMBatch`` allocate the flat arrays once and reuse them
across trials.  ``run(seed)`` returns the same ``TrialOutcome`` as the
Python engine for that seed (site maps and paths are not available here).
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from . import _kernels as K
from .core.rng import Tag, derive_key, mix64
from .core.sched import Policy
from .fm import SimConfig, TrialOutcome, Truncation

_TRUNC = {K.TR_STEP_CAP: Truncation.STEP_CAP,
          K.TR_DEPTH_EXTINCT: Truncation.DEPTH_EXTINCT,
          K.TR_ALL_REMOVED: Truncation.ALL_REMOVED}


def fm_fits(config: SimConfig, k: int = 1) -> bool:
    d = config.params.d
    return (K.n_codes(d, config.sleepers) <= K.MAX_CELLS
            and K.n_codes(k * d, config.sleepers) <= K.MAX_CELLS
            and (k * d) ** (config.depth_cap + 2) < 2 ** 62)


def rfm_fits(config: SimConfig, follow: bool = False) -> bool:
    d = config.params.d
    if K.n_codes(d, config.depth_cap) > K.MAX_CELLS:
        return False
    return not follow or K.n_codes(d + 1, config.depth_cap) <= K.MAX_CELLS


class FMBatch:
    """FM or FM' trials; with ``k`` set, also the modified FM(kd,p) follower."""

    def __init__(self, config: SimConfig, silent: bool = False, k: Optional[int] = None,
                 check: bool = True, fault: int = K.FAULT_NONE):
        if k is not None and silent:
            raise ValueError("the follower is defined for FM only")
        if not fm_fits(config, k or 1):
            raise ValueError("configuration too large for the compiled kernel")
        self.config = config
        self.silent = silent
        self.follow = k is not None
        self.k = k or 1
        self.check = check
        self.fault = fault
        d = config.params.d
        nf = K.n_codes(d, config.sleepers)
        self.woken = np.zeros(nf, np.uint8)
        self.birth = np.zeros(nf, np.int64)
        self.wc = np.zeros(nf, np.int64)
        self.wd = np.zeros(nf, np.int64)
        self.wf = np.zeros(nf, np.uint8)
        self.wph = np.zeros(nf, np.int8)
        self.wq = np.zeros(nf, np.float64)
        self.wb = np.zeros(nf, np.int64)
        self.st = np.zeros(nf, np.uint64)
        self.pool = np.zeros(nf + 1, np.int64)
        if self.follow:
            nl = K.n_codes(self.k * d, config.sleepers)
            self.fcode = np.zeros(nf, np.int64)
            self.fdepth = np.zeros(nf, np.int64)
            self.fst = np.zeros(nf, np.uint64)
            self.lwoken = np.zeros(nl, np.uint8)
            self.lvisited = np.zeros(nl, np.uint8)
            self.proj = np.zeros(nf, np.int32)
            self.svisited = np.zeros(nf, np.uint8)
        else:
            self.fcode = self.fdepth = np.zeros(1, np.int64)
            self.fst = np.zeros(1, np.uint64)
            self.lwoken = self.lvisited = self.svisited = np.zeros(1, np.uint8)
            self.proj = np.zeros(1, np.int32)
        self.res = np.zeros(8, np.int64)
        self.viol = np.zeros(5, np.int64)

    def run_raw(self, seed: int):
        c = self.config
        prm = c.params
        self.viol[:] = 0
        K.fm_trial(prm.d, prm.p, prm.rho, c.depth_cap, c.sleepers, c.step_cap,
                   c.policy is Policy.FIFO, self.silent,
                   np.uint64(mix64(derive_key(seed, Tag.FROG))),
                   np.uint64(derive_key(seed, Tag.SCHEDULER)),
                   self.follow, self.k, np.uint64(mix64(derive_key(seed, Tag.FOLLOWER))),
                   self.check, self.fault,
                   self.woken, self.birth, self.wc, self.wd, self.wf, self.wph, self.wq,
                   self.wb, self.st, self.pool,
                   self.fcode, self.fdepth, self.fst, self.lwoken, self.lvisited,
                   self.proj, self.svisited, self.res, self.viol)
        return self.res.copy(), self.viol.copy()

    def run(self, seed: int) -> TrialOutcome:
        r, _ = self.run_raw(seed)
        return TrialOutcome(int(r[0]), int(r[1]), int(r[2]), _TRUNC[int(r[3])])


class RFMBatch:
    """RFM trials without early removal; with ``follow`` also RFM'(d+1,p)."""

    def __init__(self, config: SimConfig, root_frog: str = "fresh", follow: bool = False,
                 check: bool = True, fault: int = K.FAULT_NONE):
        if not rfm_fits(config, follow):
            raise ValueError("configuration too large for the compiled kernel")
        if follow and config.sleepers != config.depth_cap:
            raise ValueError("the coupled run needs sleepers down to the depth cap")
        self.config = config
        self.fresh = root_frog == "fresh"
        self.follow = follow
        self.check = check
        self.fault = fault
        d = config.params.d
        nc = K.n_codes(d, config.depth_cap)
        nf = K.n_codes(d, config.sleepers)
        self.ucnt = np.zeros(nc, np.int32)
        self.dcnt = np.zeros(nc, np.int32)
        self.visited = np.zeros(nc, np.uint8)
        self.vch = np.zeros(nc, np.uint8)
        self.touched = np.zeros(nc, np.int64)
        self.fr_code = np.zeros(nf, np.int64)
        self.fr_depth = np.zeros(nf, np.int64)
        self.fr_stage = np.zeros(nf, np.int8)
        self.pool = np.zeros(nf + 1, np.int64)
        if follow:
            nl = K.n_codes(d + 1, config.depth_cap)
            self.vpair = np.zeros(nc, np.int64)
            self.fvis = np.zeros(nl, np.uint8)
            self.fvch = np.zeros(nl, np.uint8)
            self.ftouched = np.zeros(nc, np.int64)
            self.fcode = np.zeros(nf, np.int64)
            self.fdepth = np.zeros(nf, np.int64)
            self.fst = np.zeros(nf, np.uint64)
        else:
            self.vpair = self.ftouched = self.fcode = self.fdepth = np.zeros(1, np.int64)
            self.fvis = self.fvch = np.zeros(1, np.uint8)
            self.fst = np.zeros(1, np.uint64)
        self.tally_steps = np.zeros(d + 2, np.int64)
        self.tally_early = np.zeros(d + 2, np.int64)
        self.res = np.zeros(16, np.int64)
        self.viol = np.zeros(5, np.int64)

    def run_raw(self, seed: int):
        c = self.config
        prm = c.params
        self.viol[:] = 0
        K.rfm_trial(prm.d, prm.rho, c.depth_cap, c.sleepers, c.step_cap,
                    c.policy is Policy.FIFO, self.fresh,
                    np.uint64(mix64(derive_key(seed, Tag.STACK_UP))),
                    np.uint64(mix64(derive_key(seed, Tag.STACK_DOWN))),
                    np.uint64(derive_key(seed, Tag.SCHEDULER)),
                    self.follow, np.uint64(mix64(derive_key(seed, Tag.FOLLOWER))),
                    self.check, self.fault,
                    self.ucnt, self.dcnt, self.visited, self.vch, self.touched,
                    self.fr_code, self.fr_depth, self.fr_stage, self.pool,
                    self.vpair, self.fvis, self.fvch, self.ftouched, self.fcode,
                    self.fdepth, self.fst, self.tally_steps, self.tally_early,
                    self.res, self.viol)
        return self.res.copy(), self.viol.copy()

    def run(self, seed: int) -> TrialOutcome:
        r, _ = self.run_raw(seed)
        return rfm_outcome(r)


def rfm_outcome(r, follower: bool = False) -> TrialOutcome:
    if follower:
        kills = {"hit_root": int(r[9]), "hit_visited": int(r[11]),
                 "early": int(r[12]), "cap": int(r[13])}
        return TrialOutcome(int(r[9]), int(r[10]), int(r[2]), _TRUNC[int(r[3])], None, kills)
    kills = {"hit_root": int(r[4]), "hit_visited": int(r[5]), "early": int(r[6]), "cap": int(r[7])}
    return TrialOutcome(int(r[0]), int(r[1]), int(r[2]), _TRUNC[int(r[3])], None, kills,
                        bool(r[8]))


def vt_samples(t: int, params, trials: int, master_seed: int, *, root_frog: str = "fresh",
               step_cap: int = 10**7, engine: str = "auto") -> tuple[np.ndarray, np.ndarray]:
    """Root-visit counts V_t and sibling-event flags for trials 0..trials-1."""
    from .core.rng import trial_seed
    from .rfm import run_rfm, vt_config

    config = vt_config(t, params, step_cap)
    if engine == "kernel" or (engine == "auto" and rfm_fits(config)):
        run = RFMBatch(config, root_frog).run
    else:
        def run(seed):
            return run_rfm(config, seed, root_frog=root_frog)
    v = np.empty(trials, np.int64)
    a = np.empty(trials, bool)
    for i in range(trials):
        out = run(trial_seed(master_seed, i))
        v[i] = out.root_visits
        a[i] = bool(out.a_event)
    return v, a
