"""Tests for the process abstraction: drift evaluation, domain box, Lipschitz."""

import numpy as np
import pytest

from wormald import (
    ContractError,
    DomainBox,
    DriftEvaluationError,
    ProcessSpec,
    Trajectory,
    estimate_lipschitz,
    evaluate_drift,
    in_domain,
    make_coupon_spec,
)


def unit_box(a, s_high=10.1):
    return DomainBox(s_low=-0.1, s_high=s_high, z_low=np.full(a, -0.1),
                     z_high=np.full(a, 1.1))


def zero_spec(a=3):
    return ProcessSpec(
        coord_count=a,
        drift=lambda s, z: np.zeros(a),
        increment_bound=1.0,
        magnitude_bound=1.0,
        domain=unit_box(a),
    )


def test_coupon_drift_at_fresh_state():
    spec = make_coupon_spec(2, 4.0)
    out = evaluate_drift(spec, 0.0, np.array([1.0, 0.0, 0.0, 0.0]))
    assert np.array_equal(out, [-1.0, 1.0, 0.0, 0.0])


def test_coupon_drift_mixed_state():
    spec = make_coupon_spec(2, 4.0)
    out = evaluate_drift(spec, 0.3, np.array([0.5, 0.5, 0.0, 0.0]))
    assert np.allclose(out, [-0.5, 0.0, 0.5, 0.0], atol=0, rtol=0)


def test_zero_drift_returns_zero_vector():
    out = evaluate_drift(zero_spec(), 1.0, np.array([0.2, 0.2, 0.2]))
    assert np.array_equal(out, np.zeros(3))


def test_drift_is_referentially_transparent():
    spec = make_coupon_spec(4, 4.0)
    z = np.array([0.3, 0.25, 0.2, 0.15, 0.05, 0.05])
    first = evaluate_drift(spec, 1.7, z)
    for _ in range(5):
        assert np.array_equal(evaluate_drift(spec, 1.7, z), first)


def test_dimension_mismatch_rejected():
    spec = make_coupon_spec(2, 4.0)
    with pytest.raises(ContractError):
        evaluate_drift(spec, 0.0, np.array([1.0, 0.0]))
    with pytest.raises(ContractError):
        in_domain(spec, 0.0, np.array([1.0, 0.0, 0.0]))


def test_wrong_drift_output_length_rejected():
    a = 3
    spec = ProcessSpec(
        coord_count=a,
        drift=lambda s, z: np.zeros(a + 1),
        increment_bound=1.0,
        magnitude_bound=1.0,
        domain=unit_box(a),
    )
    with pytest.raises(ContractError):
        evaluate_drift(spec, 0.0, np.zeros(a))


def test_nonfinite_drift_inside_domain_raises():
    spec = ProcessSpec(
        coord_count=1,
        drift=lambda s, z: np.array([np.nan]),
        increment_bound=1.0,
        magnitude_bound=1.0,
        domain=unit_box(1),
    )
    with pytest.raises(DriftEvaluationError):
        evaluate_drift(spec, 0.5, np.array([0.5]))
    # Outside the domain a non-finite value is allowed through.
    out = evaluate_drift(spec, 50.0, np.array([0.5]))
    assert np.isnan(out[0])


def test_in_domain_examples():
    spec = zero_spec(4)
    assert in_domain(spec, 1.0, np.array([0.3, 0.3, 0.2, 0.2]))
    assert not in_domain(spec, 10.1, np.array([0.3, 0.3, 0.2, 0.2]))
    assert not in_domain(spec, 1.0, np.array([1.2, 0.3, 0.2, 0.2]))


def test_in_domain_boundary_is_excluded():
    spec = zero_spec(2)
    z = np.array([0.5, 0.5])
    assert not in_domain(spec, -0.1, z)
    assert not in_domain(spec, 1.0, np.array([-0.1, 0.5]))
    assert not in_domain(spec, 1.0, np.array([0.5, 1.1]))


def test_in_domain_monotone_under_box_shrinkage():
    a = 3
    big = zero_spec(a)
    small = ProcessSpec(
        coord_count=a,
        drift=big.drift,
        increment_bound=1.0,
        magnitude_bound=1.0,
        domain=DomainBox(0.0, 5.0, np.zeros(a), np.full(a, 0.9)),
    )
    rng = np.random.default_rng(7)
    for _ in range(200):
        s = rng.uniform(-1, 12)
        z = rng.uniform(-0.3, 1.3, size=a)
        if in_domain(small, s, z):
            assert in_domain(big, s, z)


def test_domain_box_validation():
    with pytest.raises(ContractError):
        DomainBox(1.0, 1.0, np.zeros(2), np.ones(2))
    with pytest.raises(ContractError):
        DomainBox(0.0, 1.0, np.zeros(2), np.array([1.0, 0.0]))
    with pytest.raises(ContractError):
        DomainBox(0.0, 1.0, np.zeros(2), np.ones(3))


def test_process_spec_validation():
    box = unit_box(2)
    drift = lambda s, z: np.zeros(2)
    with pytest.raises(ContractError):
        ProcessSpec(0, drift, 1.0, 1.0, box)
    with pytest.raises(ContractError):
        ProcessSpec(2, drift, 0.0, 1.0, box)
    with pytest.raises(ContractError):
        ProcessSpec(2, drift, 1.0, 1.0, unit_box(3))
    with pytest.raises(ContractError):
        ProcessSpec(2, drift, 1.0, 1.0, box, lipschitz_hint=-0.5)


def test_trajectory_validation():
    with pytest.raises(ContractError):
        Trajectory(np.array([]), np.empty((0, 2)))
    with pytest.raises(ContractError):
        Trajectory(np.array([0.0, 0.0]), np.zeros((2, 2)))
    with pytest.raises(ContractError):
        Trajectory(np.array([0.0, 1.0]), np.zeros((3, 2)))
    with pytest.raises(ContractError):
        Trajectory(np.array([0.0, 1.0]), np.array([[0.0], [np.inf]]))


def test_trajectory_accessors_and_immutability():
    traj = Trajectory(np.array([0.0, 0.5]), np.array([[1.0, 0.0], [0.5, 0.5]]))
    assert len(traj) == 2
    assert traj.coord_count == 2
    p = traj.point(1)
    assert p.s == 0.5
    assert np.array_equal(p.z, [0.5, 0.5])
    with pytest.raises(ValueError):
        traj.z[0, 0] = 9.0


def test_lipschitz_zero_drift_is_zero():
    assert estimate_lipschitz(zero_spec(), 500, seed=1) == 0.0


def test_lipschitz_coupon_never_exceeds_one():
    spec = make_coupon_spec(5, 4.0)
    for seed in (0, 1, 2, 3, 12345):
        est = estimate_lipschitz(spec, 2000, seed=seed)
        assert 0.0 < est <= 1.0 + 1e-9


def test_lipschitz_linear_drift_close_to_three():
    spec = ProcessSpec(
        coord_count=1,
        drift=lambda s, z: np.array([3.0 * z[0]]),
        increment_bound=1.0,
        magnitude_bound=1.0,
        domain=unit_box(1, s_high=1.0),
    )
    est = estimate_lipschitz(spec, 10_000, seed=3)
    assert 2.9 <= est <= 3.0


def test_lipschitz_nondecreasing_in_sample_count():
    spec = make_coupon_spec(3, 4.0)
    estimates = [estimate_lipschitz(spec, count, seed=99)
                 for count in (10, 100, 1000, 5000)]
    for lo, hi in zip(estimates, estimates[1:]):
        assert hi >= lo


def test_lipschitz_deterministic_and_input_checked():
    spec = make_coupon_spec(3, 4.0)
    assert estimate_lipschitz(spec, 300, seed=5) == estimate_lipschitz(spec, 300, seed=5)
    with pytest.raises(ContractError):
        estimate_lipschitz(spec, 1, seed=5)
