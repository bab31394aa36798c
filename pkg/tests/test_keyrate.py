import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tfcka import channel_stats as cs
from tfcka import keyrate as kr
from tfcka.params import DomainError, ProtocolParams


def test_binary_entropy_values():
    assert kr.binary_entropy(0.0) == 0.0
    assert kr.binary_entropy(1.0) == 0.0
    assert kr.binary_entropy(0.5) == 1.0
    assert kr.binary_entropy(0.11) == pytest.approx(0.499916, abs=1e-6)
    with pytest.raises(DomainError):
        kr.binary_entropy(1.01)


@given(st.floats(0.0, 1.0))
def test_binary_entropy_symmetric_and_bounded(x):
    assert kr.binary_entropy(x) == pytest.approx(kr.binary_entropy(1 - x), abs=1e-12)
    assert 0.0 <= kr.binary_entropy(x) <= 1.0


def test_multicast_bounds():
    assert kr.multicast_bound_star(math.sqrt(0.5)) == pytest.approx(1.0, abs=1e-12)
    assert kr.multicast_bound_star(math.sqrt(0.1)) == pytest.approx(0.152003, abs=1e-6)
    small = kr.multicast_bound_star(1e-3)
    assert small == pytest.approx(1e-6 / math.log(2), rel=1e-2)
    assert kr.multicast_bound_full(0.3, 2) == kr.multicast_bound_star(0.3)
    assert kr.multicast_bound_full(math.sqrt(0.1), 3) == pytest.approx(0.304006, abs=1e-6)
    # -3 * log2(0.99) evaluated independently
    assert kr.multicast_bound_full(0.1, 4) == pytest.approx(-3 * math.log1p(-0.01) / math.log(2), rel=1e-14)
    assert kr.multicast_bound_full(0.1, 4) == pytest.approx(0.0434987, abs=1e-7)
    for bad in (0.0, 1.0):
        with pytest.raises(DomainError):
            kr.multicast_bound_star(bad)


@given(st.floats(1e-4, 0.99), st.integers(2, 8))
def test_full_bound_is_star_bound_times_edges(eta, N):
    assert kr.multicast_bound_full(eta, N) == pytest.approx((N - 1) * kr.multicast_bound_star(eta), rel=1e-15)


@pytest.fixture(scope="module")
def n3():
    p = ProtocolParams(3, 2, alpha=0.08, eta=10**-2.5, p_dark=1e-10)
    return p, kr.prepare_yields(p, kr.EXACT_YIELDS)


def test_zero_error_rates_give_full_click_rate(n3):
    p, y = n3
    pt = kr.evaluate_rate(p, y, q_x=0.0, q_z=0.0)
    assert pt.rate == pytest.approx(p.M * cs.pr_click_kg(p), rel=1e-15)


def test_zero_amplitude_gives_no_key(n3):
    p, y = n3
    pt = kr.key_rate_symmetric(p.with_(alpha=0.0))
    assert pt.rate == 0.0 and pt.clamped


@given(st.floats(0.0, 0.5), st.floats(0.0, 0.5))
def test_rate_non_increasing_in_qber(q1, q2):
    p = ProtocolParams(3, 2, alpha=0.08, eta=10**-2.5, p_dark=1e-10)
    y = kr.prepare_yields(p, kr.EXACT_YIELDS)
    lo, hi = sorted((q1, q2))
    assert kr.evaluate_rate(p, y, q_x=hi).rate <= kr.evaluate_rate(p, y, q_x=lo).rate


def test_point_invariants(n3):
    p, y = n3
    pt = kr.evaluate_rate(p, y)
    assert 0.0 <= pt.rate <= p.M * pt.pr_kg
    assert pt.r1 == pytest.approx(pt.r2 / (p.n_parties - 1), rel=1e-15)
    assert pt.loss_db == pytest.approx(50.0, abs=1e-12)


@pytest.mark.parametrize("peak", [0.0137, 0.4137, 1.05])
def test_grid_then_golden_recovers_planted_maximum(peak):
    search = kr.SearchSpec()
    x, fx, found = kr.grid_then_golden(lambda a: 1.0 - (math.log(a) - math.log(peak)) ** 2,
                                       search.grid(), search.tol)
    assert found and abs(x - peak) <= 1e-3


def test_golden_section_on_smooth_bump():
    x, _ = kr.golden_section_max(lambda a: -(a - 0.3) ** 2, 0.0, 1.0, 1e-6)
    assert x == pytest.approx(0.3, abs=1e-6)


def test_all_zero_grid_sets_no_key_flag():
    x, fx, found = kr.grid_then_golden(lambda a: 0.0, np.linspace(0.1, 1, 5), 1e-3)
    assert not found and x == 0.1


@pytest.mark.parametrize("mode", kr.MODES)
def test_dark_counts_kill_the_key_at_high_loss(mode):
    p = ProtocolParams(3, 2, eta=10**-4.5, p_dark=1e-8)
    search = kr.SearchSpec()
    y = kr.prepare_yields(p, mode)
    assert all(kr.evaluate_rate(p.with_(alpha=float(a)), y).rate == 0.0 for a in search.grid())
    alpha, pt = kr.optimize_alpha(p, mode, yields=y)
    assert pt.no_key and pt.rate == 0.0 and alpha == search.alpha_min


@pytest.mark.parametrize("N,s", [(3, 2), (4, 2)])
def test_decoy_rate_below_exact_rate_on_amplitude_grid(N, s):
    for db in (30, 60):
        p = ProtocolParams(N, s, eta=10 ** (-db / 20), p_dark=1e-9)
        exact = kr.prepare_yields(p, kr.EXACT_YIELDS)
        bounds = kr.prepare_yields(p, kr.TWO_DECOY)
        for a in kr.SearchSpec(points=15).grid():
            q = p.with_(alpha=float(a))
            assert kr.evaluate_rate(q, bounds).rate <= kr.evaluate_rate(q, exact).rate + 1e-12


def test_unknown_mode_rejected():
    with pytest.raises(DomainError):
        kr.prepare_yields(ProtocolParams(3, 2), "three-decoy")


def test_search_spec_validation():
    with pytest.raises(DomainError):
        kr.SearchSpec(alpha_min=0.0)
    g = kr.SearchSpec().grid()
    assert len(g) == 40 and g[0] == pytest.approx(1e-3) and g[-1] == pytest.approx(1.2)
