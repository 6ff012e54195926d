import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frogtree.core.sched import Policy
from frogtree.core.tree import ModelParams
from frogtree.fm import (ConfigError, SimConfig, Truncation, estimate_root_visits, run_fm,
                         run_fm_prime, summarize)

seeds = st.integers(0, 2**63)


def cfg(d=2, p=0.3, depth=6, steps=10**6, **kw):
    return SimConfig(ModelParams(d, p), depth, steps, **kw)


def test_depth_zero_never_visits():
    for s in range(20):
        out = run_fm(cfg(p=0.45, depth=0), s)
        assert out.root_visits == 0
        assert out.frogs_woken == 0
        assert out.truncation is Truncation.DEPTH_EXTINCT


def test_no_drift_no_return():
    for s in range(20):
        out = run_fm(cfg(p=0.0, depth=5), s)
        assert out.root_visits == 0
        assert out.frogs_woken >= 5  # every walk heads straight down


def test_config_validation():
    with pytest.raises(ConfigError):
        cfg(depth=-1)
    with pytest.raises(ConfigError):
        cfg(steps=0)
    with pytest.raises(ConfigError):
        cfg(depth=3, sleeper_depth=4)
    assert cfg(depth=3).initial_sleepers() == 2 + 4 + 8


@given(seeds)
@settings(max_examples=40, deadline=None)
def test_same_seed_same_outcome(seed):
    c = cfg(p=0.35)
    assert run_fm(c, seed).key() == run_fm(c, seed).key()


@given(seeds, st.sampled_from([0.1, 0.3, 0.4]))
@settings(max_examples=40, deadline=None)
def test_counts_bounded(seed, p):
    c = cfg(p=p, depth=5)
    for out in (run_fm(c, seed), run_fm_prime(c, seed)):
        assert 0 <= out.frogs_woken <= c.initial_sleepers()
        assert out.root_visits <= out.steps_used <= c.step_cap


@given(seeds, st.sampled_from([0.2, 0.35, 0.45]))
@settings(max_examples=40, deadline=None)
def test_activation_order_irrelevant(seed, p):
    """Walks belong to birth sites, so the woken set and root visits do not depend on the policy."""
    a = cfg(p=p, depth=5)
    b = cfg(p=p, depth=5, policy=Policy.FIFO)
    for run in (run_fm, run_fm_prime):
        x, y = run(a, seed), run(b, seed)
        assert (x.root_visits, x.frogs_woken) == (y.root_visits, y.frogs_woken)


@given(seeds, st.sampled_from([0.2, 0.35, 0.45]))
@settings(max_examples=40, deadline=None)
def test_silent_loops_wake_a_subset(seed, p):
    c = cfg(p=p, depth=5)
    full = run_fm(c, seed, track_sites=True)
    silent = run_fm_prime(c, seed, track_sites=True)
    assert silent.frogs_woken <= full.frogs_woken
    assert silent.root_visits <= full.root_visits


def test_step_cap_truncates():
    out = run_fm(cfg(p=0.5, depth=8, steps=500), 3)
    assert out.truncation is Truncation.STEP_CAP
    assert out.steps_used == 500


def test_drift_half_root_frog_keeps_returning():
    # with p = 1/2 the root frog alone comes back again and again
    c = cfg(p=0.5, depth=4, steps=20000)
    s = summarize([run_fm(c, i) for i in range(20)])
    assert s.mean > 50


def test_estimate_root_visits_and_summary():
    c = cfg(p=0.3, depth=5)
    s = estimate_root_visits(c, 50, 1)
    assert s.trials == 50
    assert s.ecdf[-1][1] == 1.0
    assert math.isclose(s.sem, math.sqrt(s.variance / 50))
    with pytest.raises(ValueError):
        summarize([])
