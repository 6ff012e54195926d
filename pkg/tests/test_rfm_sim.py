import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frogtree.batch import vt_samples
from frogtree.core.sched import Policy
from frogtree.core.tree import ModelParams, p_of_rho
from frogtree.fm import ConfigError, SimConfig, Truncation
from frogtree.rfm import (EarlyRemovalPolicy, rfm_prime_kill, run_dominance_chain, run_rfm,
                          sample_vt, visits_profile)

from oracles import law_mean, rfm_root_visit_law

seeds = st.integers(0, 2**63)


def cfg(d=2, p=0.4, depth=6, steps=10**6, **kw):
    return SimConfig(ModelParams(d, p), depth, steps, **kw)


def test_exact_oracle_small_laws():
    assert rfm_root_visit_law(2, Fraction(1, 2), 0, "fresh") == {0: Fraction(1, 2), 1: Fraction(1, 2)}
    assert rfm_root_visit_law(3, 0.3, 0, "descend") == {0: 1.0}
    law = rfm_root_visit_law(2, Fraction(1, 2), 1, "fresh")
    assert sum(law.values()) == 1
    assert law_mean(law) == 1  # two frogs start climbing from depth 1


@pytest.mark.parametrize("rho,t,root_frog,d", [
    (0.5, 0, "fresh", 2), (0.72, 1, "fresh", 2), (0.72, 2, "fresh", 2),
    (0.6, 2, "descend", 2), (0.5, 1, "fresh", 3)])
def test_root_visit_law_matches_enumeration(rho, t, root_frog, d):
    law = rfm_root_visit_law(d, rho, t, root_frog)
    n = 20000
    xs, _ = vt_samples(t, ModelParams(d, p_of_rho(rho)), n, 17, root_frog=root_frog)
    chi2, dof = 0.0, -1
    tail_e = tail_o = 0.0
    for k, q in law.items():
        e, o = n * q, float(np.sum(xs == k))
        if e < 20:
            tail_e += e
            tail_o += o
            continue
        chi2 += (o - e) ** 2 / e
        dof += 1
    if tail_e > 0:
        chi2 += (tail_o - tail_e) ** 2 / max(tail_e, 1.0)
        dof += 1
    assert set(np.unique(xs)) <= set(law)
    assert chi2 < dof + 6 * math.sqrt(2 * max(dof, 1)) + 10


def test_root_frog_validation():
    with pytest.raises(ConfigError):
        run_rfm(cfg(), 0, root_frog="sideways")


@given(seeds, st.sampled_from(["fresh", "descend"]), st.sampled_from([0.2, 0.4, 0.45]))
@settings(max_examples=40, deadline=None)
def test_removals_account_for_every_frog(seed, root_frog, p):
    out = run_rfm(cfg(p=p), seed, root_frog=root_frog)
    assert out.truncation is not Truncation.STEP_CAP
    assert sum(out.kills.values()) == out.frogs_woken + 1
    assert out.kills["hit_root"] == out.root_visits


@given(seeds, st.sampled_from([0.3, 0.45]))
@settings(max_examples=40, deadline=None)
def test_abelian_order_independence(seed, p):
    """Stacks make the final counts independent of the activation order."""
    a = run_rfm(cfg(p=p), seed, track_sites=True)
    b = run_rfm(cfg(p=p, policy=Policy.FIFO), seed, track_sites=True)
    assert a.key() == b.key()
    assert a.per_site_visits == b.per_site_visits


@given(seeds, st.lists(st.tuples(st.integers(1, 2), st.integers(1, 2)), min_size=1, max_size=3))
@settings(max_examples=40, deadline=None)
def test_early_removal_lowers_every_site(seed, sites):
    c = cfg(p=0.45, depth=5)
    base = run_rfm(c, seed, track_sites=True).per_site_visits
    cut = run_rfm(c, seed, EarlyRemovalPolicy.site_list(sites, subtree=True),
                  track_sites=True).per_site_visits
    for v, n in cut.items():
        assert n <= base.get(v, 0)


def test_bernoulli_removal_of_everyone():
    c = cfg(p=0.45, depth=5)
    for s in range(20):
        out = run_rfm(c, s, EarlyRemovalPolicy.bernoulli(1.0))
        assert out.kills["early"] == out.frogs_woken
        assert out.root_visits <= 1
    with pytest.raises(ConfigError):
        EarlyRemovalPolicy.bernoulli(1.5)


def test_rfm_prime_kill_rule():
    fn = rfm_prime_kill(2)
    for s in (1, 2, 3):
        # conditional on hitting a sleeper (S'/3) the rule gives (3-S')/(2*3) overall
        assert math.isclose(s / 3 * fn(s), (3 - s) / 6)
    assert fn(0) == 0.0


def test_v0_conventions():
    prm = ModelParams(2, p_of_rho(0.6))
    xs, _ = vt_samples(0, prm, 20000, 2)
    assert abs(xs.mean() - 0.6) < 4 * math.sqrt(0.24 / 20000)
    ys, _ = vt_samples(0, prm, 200, 2, root_frog="descend")
    assert ys.max() == 0


def test_first_sibling_event_at_t1():
    """The frog woken at depth 1 turns toward the sibling of the first grandchild entered w.p. (1-rho)/2."""
    rho = 0.6
    _, a = vt_samples(1, ModelParams(2, p_of_rho(rho)), 40000, 8, root_frog="descend")
    e = (1 - rho) / 2
    assert abs(a.mean() - e) < 4 * math.sqrt(e * (1 - e) / 40000)


def test_sample_vt_sibling_entries():
    prm = ModelParams(3, 0.4)
    seen = 0
    for s in range(50):
        v = sample_vt(3, prm, 10**6, s)
        if v.sibling_entries:
            seen += 1
            assert len(v.sibling_entries) == 2
            assert v.a_event == any(v.sibling_entries.values())
    assert seen > 0
    with pytest.raises(ConfigError):
        sample_vt(-1, prm, 10, 0)


def test_vt_nondecreasing_in_mean():
    prm = ModelParams(2, p_of_rho(0.72))
    means = [vt_samples(t, prm, 4000, 5)[0].mean() for t in range(4)]
    assert all(b > a - 0.1 for a, b in zip(means, means[1:]))


def test_visits_profile_root_child():
    prof = visits_profile(cfg(p=0.3, depth=3), None, 20, 1)
    assert all(n > 0 for n in prof.values())


@given(seeds)
@settings(max_examples=15, deadline=None)
def test_dominance_chain_small(seed):
    r = run_dominance_chain(cfg(p=0.35, depth=6), seed)
    assert r.violations == []
    assert r.rfm.root_visits <= r.fm_prime.root_visits <= r.fm.root_visits
