"""Tests for the coupon process, its closed-form oracle, and cover times."""

import itertools
import math

import numpy as np
import pytest

import wormald.coupon
from wormald import (
    CapExceededError,
    ContractError,
    CouponState,
    PrecisionLossError,
    closed_form,
    closed_form_system,
    coupon_step,
    cover_time,
    evaluate_drift,
    exact_cover_tail,
    make_coupon_spec,
)


def test_spec_shape_and_bounds():
    spec = make_coupon_spec(10, 4.0)
    assert spec.coord_count == 12
    assert spec.increment_bound == 1.0
    assert spec.magnitude_bound == 1.0
    assert spec.lipschitz_hint == 1.0
    assert spec.domain.s_low == -0.1
    assert spec.domain.s_high == 4.1
    assert np.all(spec.domain.z_low == -0.1)
    assert np.all(spec.domain.z_high == 1.1)


def test_spec_preconditions():
    with pytest.raises(ContractError):
        make_coupon_spec(0, 4.0)
    with pytest.raises(ContractError):
        make_coupon_spec(10, 0.0)


def test_drift_all_mass_at_truncation_flows_to_overflow():
    spec = make_coupon_spec(2, 4.0)
    out = evaluate_drift(spec, 0.0, np.array([0.0, 0.0, 1.0, 0.0]))
    assert np.array_equal(out, [0.0, 0.0, -1.0, 1.0])


def test_drift_entries_sum_to_zero():
    rng = np.random.default_rng(0)
    for l in (1, 2, 5, 10):
        spec = make_coupon_spec(l, 4.0)
        for _ in range(20):
            z = rng.uniform(0, 1, size=l + 2)
            out = evaluate_drift(spec, rng.uniform(0, 4), z)
            assert abs(math.fsum(out)) <= 1e-12


def test_closed_form_initial_conditions():
    assert closed_form(0.0, 0) == 1.0
    assert closed_form(0.0, 3) == 0.0


def test_closed_form_at_one():
    assert abs(closed_form(1.0, 0) - math.exp(-1)) <= 1e-16
    assert abs(closed_form(1.0, 1) - 0.36787944117144233) <= 1e-16
    assert abs(closed_form(1.0, 2) - 0.18393972058572117) <= 1e-16


def test_closed_form_rejects_bad_input():
    with pytest.raises(ContractError):
        closed_form(-0.5, 0)
    with pytest.raises(ContractError):
        closed_form(1.0, -1)


def test_closed_form_large_index_is_stable():
    # log-domain evaluation: no overflow of s^i or i! on the way
    value = closed_form(2.0, 300)
    assert 0.0 <= value < 1e-300 or value == 0.0
    assert np.isfinite(closed_form(700.0, 700))


def test_closed_form_is_fixed_point_of_dynamics():
    """Central-difference derivative matches the flow field z_{i-1} - z_i."""
    delta = 1e-5
    for i in range(21):
        for s in np.linspace(delta, 10.0, 40):
            lhs = (closed_form(s + delta, i) - closed_form(s - delta, i)) / (2 * delta)
            upstream = closed_form(s, i - 1) if i > 0 else 0.0
            assert abs(lhs - (upstream - closed_form(s, i))) <= 1e-8


def test_closed_form_system_sums_to_one():
    for s in (0.0, 0.5, 1.0, 4.0, 9.0):
        vec = closed_form_system(s, 10)
        assert vec.shape == (12,)
        assert abs(math.fsum(vec) - 1.0) <= 1e-15
        assert np.all(vec >= 0.0)


def test_fresh_state():
    state = CouponState.fresh(5, l=3)
    assert state.t == 0
    assert state.cover_time is None
    assert state.truncation == 3
    assert np.array_equal(state.counts_of_counts, [5, 0, 0, 0, 0])
    assert np.array_equal(state.per_type_counts, np.zeros(5, dtype=np.int64))


def test_single_type_covers_in_one_step():
    state = CouponState.fresh(1, l=2)
    coupon_step(state, 0)
    assert np.array_equal(state.counts_of_counts, [0, 1, 0, 0])
    assert state.cover_time == 1


def test_two_draws_of_same_type():
    state = CouponState.fresh(4, l=2)
    coupon_step(state, 0)
    coupon_step(state, 0)
    assert np.array_equal(state.counts_of_counts, [3, 0, 1, 0])
    assert state.t == 2
    assert state.cover_time is None


def test_step_updates_in_place_and_validates_draw():
    state = CouponState.fresh(3, l=1)
    assert coupon_step(state, 1) is state
    with pytest.raises(ContractError):
        coupon_step(state, 3)
    with pytest.raises(ContractError):
        coupon_step(state, -1)


def test_one_step_mean_change_matches_drift_formula():
    """Averaging the step over all n draws gives exactly (y_{i-1} - y_i)/n."""
    rng = np.random.default_rng(42)
    for _ in range(20):
        n = int(rng.integers(2, 12))
        l = int(rng.integers(1, 5))
        state = CouponState.fresh(n, l=l)
        for draw in rng.integers(0, n, size=int(rng.integers(0, 30))):
            coupon_step(state, int(draw))
        y = state.counts_of_counts.astype(float)

        total = np.zeros(l + 2)
        for draw in range(n):
            clone = CouponState(
                n=n, t=state.t,
                per_type_counts=state.per_type_counts.copy(),
                counts_of_counts=state.counts_of_counts.copy(),
            )
            coupon_step(clone, draw)
            total += clone.counts_of_counts - state.counts_of_counts
        mean_change = total / n

        predicted = np.empty(l + 2)
        predicted[0] = -y[0] / n
        predicted[1:l + 1] = (y[0:l] - y[1:l + 1]) / n
        predicted[l + 1] = y[l] / n
        assert np.max(np.abs(mean_change - predicted)) <= 1e-12


def test_expected_change_worked_example():
    # n=4 with bucket counts (2, 2): coordinate 1 has zero expected change,
    # coordinate 2 gains 0.5 on average.
    state = CouponState.fresh(4, l=2)
    coupon_step(state, 0)
    coupon_step(state, 1)
    assert np.array_equal(state.counts_of_counts, [2, 2, 0, 0])
    deltas = np.zeros(4)
    for draw in range(4):
        clone = CouponState(4, state.t, state.per_type_counts.copy(),
                            state.counts_of_counts.copy())
        coupon_step(clone, draw)
        deltas += clone.counts_of_counts - state.counts_of_counts
    deltas /= 4
    assert deltas[1] == 0.0
    assert deltas[2] == 0.5


def test_conservation_along_a_long_run():
    n, l, steps = 50, 3, 10_000
    rng = np.random.default_rng(11)
    state = CouponState.fresh(n, l=l)
    draws = rng.integers(0, n, size=steps)
    for t, draw in enumerate(draws, start=1):
        coupon_step(state, int(draw))
        assert int(state.counts_of_counts.sum()) == n
        assert int(state.per_type_counts.sum()) == t
        recomputed = np.bincount(np.minimum(state.per_type_counts, l + 1),
                                 minlength=l + 2)
        assert np.array_equal(recomputed, state.counts_of_counts)
    assert state.cover_time is not None
    assert state.counts_of_counts[0] == 0


def test_max_step_change_is_one():
    state = CouponState.fresh(6, l=2)
    rng = np.random.default_rng(3)
    prev = state.counts_of_counts.copy()
    for draw in rng.integers(0, 6, size=500):
        coupon_step(state, int(draw))
        assert np.max(np.abs(state.counts_of_counts - prev)) <= 1
        prev = state.counts_of_counts.copy()


def test_cover_time_single_type():
    for seed in range(5):
        assert cover_time(1, seed) == 1


def test_cover_time_deterministic_and_at_least_n():
    for n in (2, 7, 100):
        t1 = cover_time(n, seed=12345)
        t2 = cover_time(n, seed=12345)
        assert t1 == t2 >= n


def test_cover_time_mean_matches_harmonic_formula():
    """E[T] = n * H_n; check n=5 against 2000 seeded trials."""
    n, trials = 5, 2000
    expected = n * sum(1.0 / i for i in range(1, n + 1))
    times = [cover_time(n, seed) for seed in range(trials)]
    mean = np.mean(times)
    # sd of T for n=5 is about 5.1, so 5 standard errors is about 0.57
    assert abs(mean - expected) <= 0.6


def test_cover_time_cap(monkeypatch):
    monkeypatch.setattr(wormald.coupon, "COVER_TIME_CAP", 3)
    with pytest.raises(CapExceededError):
        wormald.coupon.cover_time(10, seed=0)


def test_cover_time_rejects_bad_n():
    with pytest.raises(ContractError):
        cover_time(0, seed=1)


def test_exact_tail_trivial_cases():
    assert exact_cover_tail(1, 0) == 1.0
    assert exact_cover_tail(5, 0) == 1.0
    assert exact_cover_tail(1, 3) == 0.0
    with pytest.raises(ContractError):
        exact_cover_tail(0, 1)
    with pytest.raises(ContractError):
        exact_cover_tail(3, -1)


def test_exact_tail_small_cases_match_enumeration():
    assert abs(exact_cover_tail(2, 2) - 0.5) <= 1e-12
    assert abs(exact_cover_tail(3, 3) - 7.0 / 9.0) <= 1e-12


def brute_force_tail(n, k):
    """P(cover > k) by enumerating all n^k draw sequences."""
    uncovered = 0
    for seq in itertools.product(range(n), repeat=k):
        if len(set(seq)) < n:
            uncovered += 1
    return uncovered / n**k


def test_exact_tail_matches_brute_force_n4():
    for k in (0, 1, 4, 6):
        assert abs(exact_cover_tail(4, k) - brute_force_tail(4, k)) <= 1e-12


def test_exact_tail_matches_brute_force_n3_all_k():
    for k in range(0, 12):
        assert abs(exact_cover_tail(3, k) - brute_force_tail(3, k)) <= 1e-12


def test_exact_tail_monotone_in_k():
    values = [exact_cover_tail(20, k) for k in range(20, 300, 10)]
    for lo, hi in zip(values[1:], values):
        assert lo <= hi + 1e-15


def test_exact_tail_moderate_n_in_range():
    p = exact_cover_tail(1000, 6908)
    assert 0.0 < p < 1.0


def test_exact_tail_detects_catastrophic_cancellation():
    # k barely above n: the true tail is 1 - (tiny), and the alternating
    # series cancels far past double precision.
    with pytest.raises(PrecisionLossError):
        exact_cover_tail(500, 50)
