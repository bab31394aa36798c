import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tfcka import channel_stats as cs
from tfcka import fock_oracle as fo
from tfcka.params import DomainError, ProtocolParams


def test_vacuum_yield_is_dark_count():
    p = ProtocolParams(3, 2, eta=0.4, p_dark=1e-3)
    assert fo.simulate_yield(p, (0, 0, 0)) == pytest.approx((1 - 1e-3) ** 3 * 1e-3, rel=1e-12)


def test_single_photon_spreads_evenly():
    p = ProtocolParams(3, 2, eta=0.37, p_dark=0.0)
    assert fo.simulate_yield(p, (1, 0, 0)) == pytest.approx(0.37 / 4, abs=1e-15)


def test_matches_closed_form_on_mixed_tuple():
    p = ProtocolParams(3, 2, eta=0.3)
    assert fo.simulate_yield(p, (1, 1, 2)) == pytest.approx(cs.exact_yield(p, (1, 1, 2)), abs=1e-9)
    q = ProtocolParams(3, 2, eta=0.2)
    assert fo.simulate_yield(q, (1, 1, 0)) == pytest.approx(cs.exact_yield(q, (1, 1, 0)), abs=1e-9)


@settings(max_examples=15)
@given(st.lists(st.integers(0, 2), min_size=2, max_size=3), st.floats(0, 1), st.floats(0, 0.2),
       st.floats(0, 0.8), st.floats(-1, 1))
def test_click_patterns_are_a_distribution(n, eta, pd, theta, theta1):
    N = len(n)
    p = ProtocolParams(N, 2, eta=eta, p_dark=pd, theta=theta)
    probs = fo.click_pattern_probabilities(p, n, theta1)
    assert len(probs) == 2**p.M
    assert sum(probs.values()) == pytest.approx(1.0, abs=1e-10)
    assert min(probs.values()) >= -1e-12


@given(st.lists(st.integers(0, 3), min_size=1, max_size=4), st.floats(0, 1))
def test_loss_branches_preserve_weight(n, eta):
    assert sum(w for _, w in fo.loss_branches(n, eta)) == pytest.approx(1.0, abs=1e-12)


def test_yield_identical_on_every_detector():
    p = ProtocolParams(4, 3, eta=0.5, p_dark=1e-4, theta=0.3)
    values = [fo.simulate_yield(p, (1, 2, 0, 1), j=j) for j in range(p.M)]
    assert max(values) - min(values) < 1e-10


def test_split_of_misalignment_does_not_matter():
    p = ProtocolParams(3, 2, eta=0.6, theta=0.4)
    a = fo.simulate_yield(p, (2, 1, 1))
    b = fo.simulate_yield(p, (2, 1, 1), theta1=0.9)
    assert a == pytest.approx(b, abs=1e-12)


def test_truncation_guard():
    with pytest.raises(DomainError):
        fo.simulate_yield(ProtocolParams(3, 2), (3, 2, 2))
    with pytest.raises(DomainError):
        fo.simulate_yield(ProtocolParams(3, 4), (1, 0, 0))


def test_destructive_port_stays_dark():
    p = ProtocolParams(2, 1, alpha=0.8, eta=0.7, theta=0, phi=0)
    assert fo.simulate_kg_click(p, (1, 1), 1) == pytest.approx(0.0, abs=1e-15)
    assert fo.simulate_kg_click(p, (1, 1), 0) == pytest.approx(1 - math.exp(-2 * 0.7 * 0.64), abs=1e-15)


def test_coherent_path_dark_limit():
    p = ProtocolParams(3, 2, alpha=0.0, p_dark=1e-3)
    assert fo.simulate_kg_click(p, (1, -1, 1), 2) == pytest.approx((1 - 1e-3) ** 3 * 1e-3, rel=1e-12)


def test_coherent_path_matches_closed_form():
    rng = np.random.default_rng(3)
    for _ in range(20):
        N = int(rng.integers(2, 5))
        p = ProtocolParams(N, 3, alpha=rng.uniform(0, 1.2), eta=rng.uniform(0, 1), p_dark=rng.uniform(0, 1e-3),
                           theta=rng.uniform(0, 0.5), phi=rng.uniform(0, 0.5))
        x = tuple(int(v) for v in rng.choice([1, -1], size=N))
        j = int(rng.integers(0, p.M))
        assert fo.simulate_kg_click(p, x, j) == pytest.approx(cs.pr_click_given_signs(p, j, x), abs=1e-12)


def test_sample_gain_constant_integrand():
    p = ProtocolParams(3, 2, eta=0.3, p_dark=1e-3)
    mean, err = fo.sample_gain(p, [0, 0, 0], 2000, seed=1)
    assert mean == pytest.approx((1 - 1e-3) ** 3 * 1e-3, rel=1e-12)
    assert err == 0.0


def test_sample_gain_seeded_and_clt_scaling():
    p = ProtocolParams(3, 2, eta=0.5)
    a = fo.sample_gain(p, [0.5, 0.5, 0.5], 50_000, seed=9)
    assert a == fo.sample_gain(p, [0.5, 0.5, 0.5], 50_000, seed=9)
    b = fo.sample_gain(p, [0.5, 0.5, 0.5], 100_000, seed=9)
    assert a[1] / b[1] == pytest.approx(math.sqrt(2), rel=0.1)


def test_sample_gain_requires_enough_samples():
    with pytest.raises(DomainError):
        fo.sample_gain(ProtocolParams(2, 1), [0.1, 0.1], 10, seed=0)
