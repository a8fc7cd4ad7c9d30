"""Seeded Monte Carlo execution of the coupon process, plus hypothesis checks.

Runs are embarrassingly parallel: run ``i`` draws from its own Philox stream
keyed by ``derive_seed(master_seed, i)``, so any subset of runs can execute
concurrently and aggregation is a deterministic fold over run indices.
States are sampled on the same scaled-time grid the ODE engine emits
(:func:`wormald.ode.grid_times`), which makes trajectories directly
comparable without interpolation: grid entry ``s_k`` carries the state after
``round(s_k * n)`` steps.

The hypothesis checker (:func:`check_hypotheses`) verifies empirically what
the limit theorem assumes: bounded increments, one-step means matching the
drift, and a Lipschitz drift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .coupon import CouponState, make_coupon_spec
from .errors import ContractError
from .ode import grid_times
from .process import ProcessSpec, Trajectory, estimate_lipschitz, in_domain
from .rng import derive_seed, make_generator, spawn

#: Stream indices reserved for auxiliary draws (pilot trajectory, Lipschitz
#: sampling, per-state drift sampling); run indices must stay below this.
_AUX_STREAM_BASE = 2**48


@dataclass(frozen=True)
class RunPlan:
    """A reproducible batch of simulation runs at one system size.

    ``horizon_steps`` defaults to ceil(n ln n), the natural horizon for the
    coupon process; ``s_max`` defaults to the scaled horizon
    ``horizon_steps / n``.  ``h`` and ``grid_stride`` define the shared
    sampling grid (see :func:`wormald.ode.grid_times`).
    """

    n: int
    run_count: int = 1
    master_seed: int = 0
    horizon_steps: Optional[int] = None
    truncation: int = 10
    h: float = 1e-3
    grid_stride: int = 10
    s_max: Optional[float] = None

    def __post_init__(self):
        if self.n < 1:
            raise ContractError(f"n must be positive, got {self.n}")
        if self.run_count < 1:
            raise ContractError(f"run_count must be positive, got {self.run_count}")
        if self.run_count > _AUX_STREAM_BASE:
            raise ContractError(f"run_count must be <= {_AUX_STREAM_BASE}")
        if self.truncation < 1:
            raise ContractError(f"truncation must be >= 1, got {self.truncation}")
        if self.horizon_steps is not None and self.horizon_steps < 1:
            raise ContractError(f"horizon_steps must be >= 1, got {self.horizon_steps}")
        if not self.h > 0:
            raise ContractError(f"h must be positive, got {self.h}")
        if self.grid_stride < 1:
            raise ContractError(f"grid_stride must be >= 1, got {self.grid_stride}")
        if self.s_max is not None:
            if not self.s_max > 0:
                raise ContractError(f"s_max must be positive, got {self.s_max}")
            if self.s_max * self.n > self.resolved_horizon() * (1.0 + 1e-9):
                raise ContractError(
                    f"s_max={self.s_max} reaches past the horizon of "
                    f"{self.resolved_horizon()} steps at n={self.n}"
                )

    def resolved_horizon(self) -> int:
        if self.horizon_steps is not None:
            return self.horizon_steps
        return max(1, math.ceil(self.n * math.log(self.n)))

    def resolved_s_max(self) -> float:
        if self.s_max is not None:
            return self.s_max
        return self.resolved_horizon() / self.n

    def run_seed(self, run_index: int) -> int:
        if not 0 <= run_index < self.run_count:
            raise ContractError(
                f"run_index {run_index} out of range [0, {self.run_count})"
            )
        return derive_seed(self.master_seed, run_index)


def _draws_for_run(plan: RunPlan, run_index: int) -> np.ndarray:
    plan.run_seed(run_index)  # range check
    gen = spawn(plan.master_seed, run_index)
    return gen.integers(0, plan.n, size=plan.resolved_horizon(), dtype=np.int64)


def _grid_step_counts(plan: RunPlan) -> tuple[np.ndarray, np.ndarray]:
    """Shared grid of scaled times and the step count sampled at each."""
    grid = grid_times(plan.h, plan.grid_stride, plan.resolved_s_max())
    t_grid = np.minimum(
        np.rint(grid * plan.n).astype(np.int64), plan.resolved_horizon()
    )
    return grid, t_grid


def simulate(plan: RunPlan, run_index: int) -> Trajectory:
    """Execute run ``run_index`` of the plan and sample it on the shared grid.

    The emitted grid times are bitwise-identical to the ODE engine's; each
    carries the scaled bucket counts after the nearest whole step.  States
    are scaled counts, so every entry lies in [0, 1] exactly.  Leaving the
    coupon domain box is recorded as ``sigma_exit`` (it cannot happen for
    the standard box, but the check mirrors the ODE engine's contract).
    """
    draws = _draws_for_run(plan, run_index)
    n, l = plan.n, plan.truncation
    spec = make_coupon_spec(l, plan.resolved_s_max())
    grid, t_grid = _grid_step_counts(plan)

    counts = np.zeros(n, dtype=np.int64)
    states = np.empty((grid.size, l + 2))
    sigma_exit = None
    emitted = 0
    t_prev = 0
    for k in range(grid.size):
        t_k = int(t_grid[k])
        if t_k > t_prev:
            counts += np.bincount(draws[t_prev:t_k], minlength=n)
            t_prev = t_k
        buckets = np.bincount(np.minimum(counts, l + 1), minlength=l + 2)
        z = buckets / n
        states[k] = z
        emitted += 1
        if not in_domain(spec, float(grid[k]), z):
            sigma_exit = float(grid[k])
            break
    return Trajectory(grid[:emitted], states[:emitted], sigma_exit)


def max_increment(plan: RunPlan, run_index: int) -> int:
    """Largest one-step coordinate change over a replayed run.

    Replays the run's draw sequence and reconstructs, for every step, which
    bucket the drawn type left and entered.  For the coupon process the
    answer is 1 for any run with at least one bucket-changing step.
    """
    draws = _draws_for_run(plan, run_index)
    m = draws.size
    l_over = plan.truncation + 1
    # Occurrence rank of each draw within its type: stable argsort groups a
    # type's draws in time order, so the within-group offset is the number
    # of earlier draws of that type.
    order = np.argsort(draws, kind="stable")
    sorted_draws = draws[order]
    starts = np.flatnonzero(np.r_[True, sorted_draws[1:] != sorted_draws[:-1]])
    group_lengths = np.diff(np.r_[starts, m])
    occ_sorted = np.arange(m, dtype=np.int64) - np.repeat(starts, group_lengths)
    occ = np.empty(m, dtype=np.int64)
    occ[order] = occ_sorted
    changed = np.minimum(occ + 1, l_over) != np.minimum(occ, l_over)
    return int(changed.any())


@dataclass(frozen=True)
class DriftCheckReport:
    """One-step mean changes at a frozen state versus the drift prediction."""

    description: str
    sample_count: int
    empirical: np.ndarray
    predicted: np.ndarray
    stderr: np.ndarray
    z_scores: np.ndarray

    @property
    def max_abs_z(self) -> float:
        return float(np.max(np.abs(self.z_scores)))


def empirical_drift(state: CouponState, sample_count: int, seed: int,
                    drift=None) -> DriftCheckReport:
    """Sample independent single steps from a frozen state and test the drift.

    Draws ``sample_count`` fresh uniform types from a Philox stream keyed by
    ``seed`` (each sample restarts from the same state, so the steps are
    independent), averages the per-coordinate change, and compares it with
    the predicted one-step mean -- by default the exact coupon formula
    (y_{i-1} - y_i)/n, or ``drift(s, z)`` if a drift function is supplied.
    Coordinates whose sampled change is deterministic get a z-score of zero
    when they match the prediction and infinity when they do not.
    """
    if sample_count < 100:
        raise ContractError(f"sample_count must be >= 100, got {sample_count}")
    n = state.n
    l = state.truncation
    gen = make_generator(seed)
    draws = gen.integers(0, n, size=sample_count, dtype=np.int64)
    source = np.minimum(state.per_type_counts[draws], l + 1)
    cnt = np.bincount(source, minlength=l + 2).astype(float)

    # A draw from bucket b <= l moves one unit b -> min(b+1, l+1); a draw
    # from the overflow bucket changes nothing.
    dec = cnt.copy()
    dec[l + 1] = 0.0
    inc = np.zeros(l + 2)
    inc[1 : l + 2] = cnt[0 : l + 1]
    empirical = (inc - dec) / sample_count
    mean_sq = (inc + dec) / sample_count  # each move contributes (+-1)^2

    if drift is None:
        y = state.counts_of_counts.astype(float)
        predicted = np.empty(l + 2)
        predicted[0] = -y[0] / n
        predicted[1 : l + 1] = (y[0:l] - y[1 : l + 1]) / n
        predicted[l + 1] = y[l] / n
    else:
        predicted = np.asarray(
            drift(state.t / n, state.counts_of_counts / n), dtype=float
        )

    var = np.maximum(mean_sq - empirical**2, 0.0) * sample_count / (sample_count - 1)
    stderr = np.sqrt(var / sample_count)
    z = np.zeros(l + 2)
    live = stderr > 0
    z[live] = (empirical[live] - predicted[live]) / stderr[live]
    frozen_mismatch = ~live & (np.abs(empirical - predicted) > 1e-9)
    z[frozen_mismatch] = np.inf
    return DriftCheckReport(
        description=state.describe(),
        sample_count=sample_count,
        empirical=empirical,
        predicted=predicted,
        stderr=stderr,
        z_scores=z,
    )


def pilot_states(plan: RunPlan, count: int) -> list[CouponState]:
    """Snapshot ``count`` states, evenly spaced in steps, from a pilot run.

    The pilot draws from its own reserved stream so it never shares
    randomness with the plan's numbered runs.
    """
    if count < 1:
        raise ContractError(f"count must be positive, got {count}")
    n, l, m = plan.n, plan.truncation, plan.resolved_horizon()
    gen = spawn(plan.master_seed, _AUX_STREAM_BASE)
    draws = gen.integers(0, n, size=m, dtype=np.int64)
    times = np.unique(np.linspace(0, m, count).round().astype(np.int64))
    counts = np.zeros(n, dtype=np.int64)
    states = []
    t_prev = 0
    for t_k in times:
        t_k = int(t_k)
        if t_k > t_prev:
            counts += np.bincount(draws[t_prev:t_k], minlength=n)
            t_prev = t_k
        states.append(CouponState(
            n=n,
            t=t_k,
            per_type_counts=counts.copy(),
            counts_of_counts=np.bincount(np.minimum(counts, l + 1), minlength=l + 2),
        ))
    return states


@dataclass(frozen=True)
class HypothesisCheck:
    """Outcome of one empirical hypothesis check."""

    name: str
    passed: bool
    observed: float
    bound: Optional[float]
    detail: str


@dataclass(frozen=True)
class HypothesisReport:
    """Evidence for the three hypotheses the limit theorem rests on."""

    increment: HypothesisCheck
    drift: HypothesisCheck
    lipschitz: HypothesisCheck

    @property
    def passed(self) -> bool:
        return self.increment.passed and self.drift.passed and self.lipschitz.passed

    @property
    def checks(self) -> Sequence[HypothesisCheck]:
        return (self.increment, self.drift, self.lipschitz)


def check_hypotheses(spec: ProcessSpec, plan: RunPlan, state_samples: int,
                     drift_samples: int = 10_000, lipschitz_samples: int = 20_000,
                     z_threshold: float = 5.0) -> HypothesisReport:
    """Empirically verify the bounded-increment, drift, and Lipschitz hypotheses.

    (1) replays every run in the plan and checks the largest one-step change
    against ``spec.increment_bound``; (2) samples one-step means at
    ``state_samples`` pilot states and fails if any z-score against
    ``spec.drift`` exceeds ``z_threshold`` in magnitude; (3) estimates the
    drift's Lipschitz constant and, when ``spec.lipschitz_hint`` is set,
    checks the estimate does not exceed it.  Thresholds are engineering
    choices and are echoed in the report details.
    """
    worst_inc = 0
    for i in range(plan.run_count):
        worst_inc = max(worst_inc, max_increment(plan, i))
    increment = HypothesisCheck(
        name="bounded_increments",
        passed=worst_inc <= spec.increment_bound,
        observed=float(worst_inc),
        bound=float(spec.increment_bound),
        detail=f"max one-step change over {plan.run_count} runs of "
               f"{plan.resolved_horizon()} steps at n={plan.n}",
    )

    worst_z = 0.0
    worst_state = ""
    for k, state in enumerate(pilot_states(plan, state_samples)):
        report = empirical_drift(
            state, drift_samples,
            seed=derive_seed(plan.master_seed, _AUX_STREAM_BASE + 1 + k),
            drift=spec.drift,
        )
        if report.max_abs_z > worst_z:
            worst_z = report.max_abs_z
            worst_state = report.description
    drift_check = HypothesisCheck(
        name="drift_matches_one_step_means",
        passed=worst_z <= z_threshold,
        observed=worst_z,
        bound=z_threshold,
        detail=f"worst |z| over {state_samples} pilot states x {drift_samples} "
               f"samples, at state [{worst_state}]",
    )

    estimate = estimate_lipschitz(
        spec, lipschitz_samples,
        seed=derive_seed(plan.master_seed, _AUX_STREAM_BASE + 2**32),
    )
    hint = spec.lipschitz_hint
    lippass = True if hint is None else estimate <= hint * (1.0 + 1e-9) + 1e-12
    lipschitz = HypothesisCheck(
        name="lipschitz_drift",
        passed=lippass,
        observed=estimate,
        bound=hint,
        detail=f"largest drift-difference ratio over {lipschitz_samples} point pairs"
               + ("" if hint is not None else " (no reference constant supplied)"),
    )

    return HypothesisReport(increment=increment, drift=drift_check, lipschitz=lipschitz)
