import itertools
import math

import pytest
from hypothesis import given, strategies as st

from tfcka import channel_stats as cs
from tfcka.decoy import DecoyContext, bound_table
from tfcka.params import ProtocolParams
from tfcka.phase_error import (CatCoefficients, MissingYieldError, cat_coefficient, coefficient,
                               delta_residual, matching_tuples, parity_set, phase_error_bound)
from tfcka.tables import YieldTable, required_tuples, tuples_up_to


def test_cat_coefficient_values():
    a = 0.7
    assert cat_coefficient(a, 0, 0) == pytest.approx(math.exp(-a * a / 2), rel=1e-15)
    assert cat_coefficient(a, 1, 0) == 0.0
    assert cat_coefficient(a, 0, 1) == 0.0
    assert cat_coefficient(0.5, 2, 0) == pytest.approx(math.exp(-0.125) * 0.25 / math.sqrt(2), rel=1e-14)
    assert cat_coefficient(0.0, 0, 0) == 1.0 and cat_coefficient(0.0, 2, 0) == 0.0


@given(st.floats(0.0, 3.0))
def test_cat_states_split_the_coherent_norm(alpha):
    c = CatCoefficients(alpha)
    norm = sum(c.c(n, l) ** 2 for n in range(61) for l in (0, 1))
    assert norm == pytest.approx(1.0, abs=1e-12)


@given(st.floats(0.0, 3.0), st.sampled_from([0, 1]))
def test_series_matches_long_explicit_sum(alpha, l):
    explicit = math.fsum(cat_coefficient(alpha, n, l) for n in range(l, 300, 2))
    assert CatCoefficients(alpha).series(l) == pytest.approx(explicit, rel=1e-14, abs=1e-300)


@pytest.mark.parametrize("N", range(1, 7))
def test_parity_set(N):
    V = list(parity_set(N))
    assert len(V) == 2 ** (N - 1)
    assert all(sum(v) % 2 == 0 for v in V)


def test_two_party_parity_set():
    assert list(parity_set(2)) == [(0, 0), (1, 1)]


@given(st.integers(1, 4), st.sampled_from([0, 2, 4]), st.floats(0.0, 1.5))
def test_skipped_terms_are_all_zero(N, cutoff, alpha):
    c = CatCoefficients(alpha)
    for v in parity_set(N):
        kept = set(matching_tuples(v, cutoff))
        for n in tuples_up_to(N, cutoff):
            if n not in kept:
                assert coefficient(c, n, v) == 0.0
            else:
                assert sum(n) % 2 == 0


def test_residual_against_brute_force_series():
    alpha, v = 0.8, (0, 0)
    c = CatCoefficients(alpha)
    full = sum(c.c(a, 0) * c.c(b, 0) for a in range(41) for b in range(41) if a + b <= 40)
    trunc = sum(c.c(a, 0) * c.c(b, 0) for a in range(5) for b in range(5) if a + b <= 4)
    assert delta_residual(alpha, 2, v, 4) == pytest.approx(full - trunc, abs=1e-14)


@given(st.floats(0.0, 1.5), st.integers(1, 4), st.sampled_from([0, 2, 4]), st.data())
def test_residual_shrinks_with_cutoff(alpha, N, cutoff, data):
    v = data.draw(st.sampled_from(list(parity_set(N))))
    assert delta_residual(alpha, N, v, cutoff + 2) <= delta_residual(alpha, N, v, cutoff) + 1e-16
    if alpha == 0:
        assert delta_residual(alpha, N, v, cutoff) == 0.0


def _exact_table(p):
    return cs.exact_yield_table(p, required_tuples(p.n_parties, p.cutoff))


def test_zero_amplitude_bound_is_clamped():
    p = ProtocolParams(3, 2, alpha=0.0, eta=0.1, p_dark=1e-8)
    res = phase_error_bound(p, _exact_table(p), cs.pr_click_kg(p))
    assert res.raw == pytest.approx(1.0, rel=1e-12)
    assert res.clamped and res.value == 0.5


def test_missing_tuple_is_reported():
    p = ProtocolParams(3, 2, alpha=0.1, eta=0.1, p_dark=1e-8)
    t = _exact_table(p)
    del t.values[(1, 1, 0)]
    with pytest.raises(MissingYieldError) as info:
        phase_error_bound(p, t, cs.pr_click_kg(p))
    assert (1, 1, 0) in info.value.missing


@pytest.mark.parametrize("N,s", [(3, 2), (4, 2)])
def test_exact_yields_give_smaller_bound_than_decoy_bounds(N, s):
    for eta, alpha in itertools.product((0.01, 0.1, 0.5), (0.03, 0.1, 0.3)):
        p = ProtocolParams(N, s, alpha=alpha, eta=eta, p_dark=1e-9)
        pk = cs.pr_click_kg(p)
        exact = phase_error_bound(p, _exact_table(p), pk).raw
        bounded = phase_error_bound(p, bound_table(DecoyContext.from_gains(cs.gain_table(p)), 4), pk).raw
        assert exact <= bounded + 1e-15


@given(st.sampled_from(required_tuples(3, 4)), st.floats(0.0, 0.5))
def test_bound_monotone_in_each_yield(n, bump):
    p = ProtocolParams(3, 2, alpha=0.2, eta=0.1, p_dark=1e-9)
    t = _exact_table(p)
    pk = cs.pr_click_kg(p)
    before = phase_error_bound(p, t, pk).raw
    raised = YieldTable.from_mapping(3, dict(t.items()))
    raised[n] = min(1.0, t[n] + bump)
    assert phase_error_bound(p, raised, pk).raw >= before - 1e-15
