import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frogtree.bounds import (Base, brw_min_growth, compute_moment_sequences, critical_rho,
                             ev_fixed_point, pa_limit, pa_lower_bound, pz_empirical_check,
                             q_star, sample_rde, threshold_gap)
from frogtree.core.tree import DomainError, p_of_rho

from oracles import brw_growth_bruteforce, law_mean, pa_product, rfm_root_visit_law


@given(st.integers(0, 60), st.floats(0.0, 1.0))
def test_pa_lower_bound_matches_product(t, rho):
    assert pa_lower_bound(t, rho) == pytest.approx(pa_product(t, rho), abs=1e-12)


@given(st.integers(0, 40), st.floats(0.01, 0.99))
def test_pa_lower_bound_monotone_and_bounded(t, rho):
    a, b = pa_lower_bound(t, rho), pa_lower_bound(t + 1, rho)
    assert 0.0 <= a <= b <= pa_limit(rho) + 1e-15 <= 1.0


def test_pa_small_cases():
    assert pa_lower_bound(0, 0.7) == 0.0
    assert pa_lower_bound(1, 0.6) == pytest.approx(0.2)
    with pytest.raises(DomainError):
        pa_lower_bound(-1, 0.5)
    with pytest.raises(DomainError):
        pa_lower_bound(2, 1.5)


def test_threshold_at_51():
    r = critical_rho(51, 1e-5)
    assert 0.7106 <= r.rho_star <= 0.7108
    assert 0.4154 <= r.p_star <= 0.4156
    assert threshold_gap(51, r.rho_star) > 0
    assert threshold_gap(51, r.rho_star - 2e-5) <= 0
    assert r.p_star == pytest.approx(p_of_rho(r.rho_star))


def test_threshold_absent_for_t1():
    r = critical_rho(1)
    assert not r.found and r.rho_star is None
    assert r.as_dict()["rho_star"] is None


def test_threshold_nonincreasing_in_T():
    vals = [critical_rho(T).rho_star for T in (5, 10, 51, 200)]
    assert all(b <= a + 1e-5 for a, b in zip(vals, vals[1:]))


def test_threshold_argument_checks():
    with pytest.raises(DomainError):
        critical_rho(0)
    with pytest.raises(DomainError):
        critical_rho(5, tol=0)


def test_q_star_and_brw():
    assert abs(q_star() - (2 - math.sqrt(2)) / 4) < 1e-12
    assert brw_min_growth(q_star()) == pytest.approx(1.0, abs=1e-12)
    for p in (0.05, 0.1, 0.3, 0.6):
        assert brw_min_growth(p) == pytest.approx(brw_growth_bruteforce(p), rel=1e-7)
    with pytest.raises(DomainError):
        brw_min_growth(0.0)


def test_moments_bracket_exact_small_t():
    """ev_lo <= E V_t <= ev_hi, E V_t from exhaustive enumeration (descend convention)."""
    for rho in (0.5, 0.72):
        seq = compute_moment_sequences(rho, 3, Base.ZERO)
        for t in (1, 2):
            law = rfm_root_visit_law(2, Fraction(rho).limit_denominator(1000), t, "descend")
            m = float(law_mean(law))
            m2 = float(sum(n * n * q for n, q in law.items()))
            assert seq.ev_lo[t] <= m + 1e-12
            assert m <= seq.ev_hi[t] + 1e-12
            assert m2 <= seq.ev2_hi[t] + 1e-12


def test_moment_sequence_shapes():
    seq = compute_moment_sequences(0.6, 10)
    assert seq.T == 10
    rows = list(seq.rows())
    assert len(rows) == 11
    assert all(lo <= hi for lo, hi in zip(seq.ev_lo, seq.ev_hi))
    z = compute_moment_sequences(0.6, 3, "zero")
    assert z.x_hi[0] is None and z.pz_lb[0] is None
    with pytest.raises(DomainError):
        compute_moment_sequences(1.0, 3)


def test_ev_lo_fixed_point_below_threshold():
    seq = compute_moment_sequences(0.5, 400)
    assert abs(seq.ev_lo[-1] - ev_fixed_point(0.5)) < 1e-9
    with pytest.raises(DomainError):
        ev_fixed_point(0.75)


def test_above_threshold_growth_and_bounded_ratio():
    seq = compute_moment_sequences(0.72, 2000, Base.ZERO)
    assert seq.ev_lo[300] > 1e3
    xs = [x for x in seq.x_hi if x is not None]
    assert max(xs) < 20
    assert abs(xs[-1] - xs[-2]) < 1e-9


def test_rde_sampler():
    xs = sample_rde(0, 0.6, 20000, 1)
    assert set(np.unique(xs)) <= {0, 1}
    assert abs(xs.mean() - 0.6) < 4 * math.sqrt(0.24 / 20000)
    assert sample_rde(0, 0.6, 10, 1, Base.ZERO).max() == 0
    seq = compute_moment_sequences(0.72, 4)
    ys = sample_rde(4, 0.72, 50000, 2)
    assert abs(ys.mean() - seq.ev_lo[4]) < 5 * ys.std() / math.sqrt(50000)
    with pytest.raises(DomainError):
        sample_rde(1, 0.5, 0, 0)


def test_pz_check_small():
    rep = pz_empirical_check(2, 0.72, 3000, 1, root_frog="descend")
    assert rep.passed
    assert 0 < rep.pz_lb < 1
