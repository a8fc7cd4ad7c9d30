"""The coupon-collecting process and its oracles.

Each step draws one of ``n`` coupon types uniformly.  Coordinate ``i`` of the
tracked state counts the types holding exactly ``i`` copies, for ``i`` up to
a truncation level ``l``; an extra overflow coordinate counts types with more
than ``l`` copies, which closes the system so the coordinates always sum to
``n``.  The scaled process converges to the ODE system

    dz_0/ds = -z_0,   dz_i/ds = z_{i-1} - z_i  (1 <= i <= l),
    dz_{l+1}/ds = z_l,

whose solution from z_0(0)=1 is the Poisson profile z_i(s) = s^i e^-s / i!
(:func:`closed_form`), the overflow coordinate being the matching Poisson
tail.  :func:`exact_cover_tail` gives the exact distribution of the cover
time by inclusion-exclusion, independent of any simulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import CapExceededError, ContractError, PrecisionLossError
from .process import DomainBox, ProcessSpec
from .rng import make_generator

#: Hard cap on cover-time steps, guarding against generator pathology.
COVER_TIME_CAP = 10**9

#: Relative size below which inclusion-exclusion terms are dropped.
_TAIL_TERM_CUTOFF = 1e-30


def coupon_drift(l: int):
    """Drift function of the truncated coupon process with overflow coordinate.

    Coordinates are indexed 0..l+1.  Mass flows down the chain: coordinate 0
    only loses (a type with 0 copies can only gain its first copy), interior
    coordinates gain from the left neighbor and lose to the right, and the
    overflow coordinate only gains.  The entries sum to zero identically.
    """
    if l < 1:
        raise ContractError(f"truncation level must be >= 1, got {l}")

    def drift(s: float, z: np.ndarray) -> np.ndarray:
        out = np.empty(l + 2)
        out[0] = -z[0]
        out[1 : l + 1] = z[0:l] - z[1 : l + 1]
        out[l + 1] = z[l]
        return out

    return drift


def make_coupon_spec(l: int = 10, s_max: float = 4.0) -> ProcessSpec:
    """ProcessSpec for the coupon process truncated at level ``l``.

    One step moves a single type between adjacent buckets, so each
    coordinate changes by at most 1 (increment bound 1) and counts never
    exceed n (magnitude bound 1).  The domain is the open box
    s in (-0.1, s_max + 0.1), each z_l in (-0.1, 1.1), on which the drift
    is 1-Lipschitz in the L1 metric.
    """
    if l < 1:
        raise ContractError(f"truncation level must be >= 1, got {l}")
    if not s_max > 0:
        raise ContractError(f"s_max must be positive, got {s_max}")
    a = l + 2
    domain = DomainBox(
        s_low=-0.1,
        s_high=s_max + 0.1,
        z_low=np.full(a, -0.1),
        z_high=np.full(a, 1.1),
    )
    return ProcessSpec(
        coord_count=a,
        drift=coupon_drift(l),
        increment_bound=1.0,
        magnitude_bound=1.0,
        domain=domain,
        lipschitz_hint=1.0,
    )


def closed_form(s: float, i: int) -> float:
    """Poisson profile s^i e^-s / i!, the exact ODE solution for coordinate i.

    Evaluated in the log domain so large ``i`` neither overflows nor
    underflows prematurely.
    """
    if s < 0:
        raise ContractError(f"s must be non-negative, got {s}")
    if i < 0:
        raise ContractError(f"coordinate index must be non-negative, got {i}")
    if s == 0.0:
        return 1.0 if i == 0 else 0.0
    if i == 0:
        return math.exp(-s)
    return math.exp(i * math.log(s) - s - math.lgamma(i + 1))


def closed_form_system(s: float, l: int) -> np.ndarray:
    """Exact solution vector of the truncated system, overflow included.

    Entries 0..l are :func:`closed_form`; the overflow entry is the Poisson
    tail 1 - sum of the others, so the vector sums to exactly one.
    """
    if l < 1:
        raise ContractError(f"truncation level must be >= 1, got {l}")
    head = [closed_form(s, i) for i in range(l + 1)]
    return np.array(head + [1.0 - math.fsum(head)])


@dataclass
class CouponState:
    """Mutable state of one coupon-collecting run.

    ``per_type_counts`` holds the copies of each of the ``n`` types;
    ``counts_of_counts[i]`` is the number of types with exactly ``i`` copies
    for ``i <= l``, with index ``l+1`` counting types past the truncation
    level.  ``cover_time`` is set the first time no type is missing.  A
    state belongs to one execution context at a time; :func:`coupon_step`
    updates it in place.
    """

    n: int
    t: int
    per_type_counts: np.ndarray
    counts_of_counts: np.ndarray
    cover_time: Optional[int] = None

    @classmethod
    def fresh(cls, n: int, l: int = 10) -> "CouponState":
        if n < 1:
            raise ContractError(f"n must be positive, got {n}")
        if l < 1:
            raise ContractError(f"truncation level must be >= 1, got {l}")
        counts_of_counts = np.zeros(l + 2, dtype=np.int64)
        counts_of_counts[0] = n
        return cls(
            n=n,
            t=0,
            per_type_counts=np.zeros(n, dtype=np.int64),
            counts_of_counts=counts_of_counts,
        )

    @property
    def truncation(self) -> int:
        return self.counts_of_counts.shape[0] - 2

    def describe(self) -> str:
        return (f"n={self.n} t={self.t} "
                f"counts_of_counts={tuple(int(c) for c in self.counts_of_counts)}")


def coupon_step(state: CouponState, draw: int) -> CouponState:
    """Apply one draw to ``state`` in place (constant time) and return it.

    Moves the drawn type from bucket min(copies, l+1) to
    min(copies + 1, l+1), advances ``t``, and records the cover time when
    the zero-copy bucket first empties.
    """
    if not 0 <= draw < state.n:
        raise ContractError(f"draw {draw} out of range [0, {state.n})")
    l_over = state.counts_of_counts.shape[0] - 1
    copies = int(state.per_type_counts[draw])
    state.per_type_counts[draw] = copies + 1
    b_old = min(copies, l_over)
    b_new = min(copies + 1, l_over)
    if b_new != b_old:
        state.counts_of_counts[b_old] -= 1
        state.counts_of_counts[b_new] += 1
    state.t += 1
    if state.cover_time is None and state.counts_of_counts[0] == 0:
        state.cover_time = state.t
    return state


def cover_time(n: int, seed: int) -> int:
    """Steps until every type has been drawn at least once.

    Consumes uniform draws from a Philox stream keyed by ``seed`` (generated
    in blocks; the draw sequence is fixed by the seed alone, so the result
    is reproducible).  Raises :class:`CapExceededError` past 10^9 draws.
    """
    if n < 1:
        raise ContractError(f"n must be positive, got {n}")
    gen = make_generator(seed)
    seen = np.zeros(n, dtype=bool)
    remaining = n
    consumed = 0
    # First block covers the typical n ln n + O(n) horizon; extensions are rare.
    block_size = int(n * math.log(max(n, 2))) + 4 * n + 16
    while True:
        block_size = min(block_size, COVER_TIME_CAP - consumed)
        if block_size <= 0:
            raise CapExceededError(f"cover time exceeded {COVER_TIME_CAP} steps (n={n})")
        block = gen.integers(0, n, size=block_size, dtype=np.int64)
        uniques, first_idx = np.unique(block, return_index=True)
        new_mask = ~seen[uniques]
        if new_mask.any():
            seen[uniques[new_mask]] = True
            remaining -= int(new_mask.sum())
            if remaining == 0:
                return consumed + int(first_idx[new_mask].max()) + 1
        consumed += block_size
        block_size = 4 * n + 16


def exact_cover_tail(n: int, k: int) -> float:
    """Exact P(cover time > k) by inclusion-exclusion.

    Sums (-1)^(j+1) C(n,j) (1 - j/n)^k over j with terms evaluated in the
    log domain and added by signed compensated (Neumaier) summation.  The
    term magnitudes are log-concave in j, so summation stops once they are
    decreasing and below 1e-30 of the largest term.  If the result is
    smaller than the accumulated rounding-error bound, the alternating sum
    has cancelled catastrophically and :class:`PrecisionLossError` is
    raised rather than returning noise.
    """
    if n < 1:
        raise ContractError(f"n must be positive, got {n}")
    if k < 0:
        raise ContractError(f"k must be non-negative, got {k}")
    if k == 0:
        return 1.0
    if n == 1:
        return 0.0

    log_binom_n = math.lgamma(n + 1)
    signs: list[float] = []
    log_terms: list[float] = []
    log_max = -math.inf
    log_scale = 1.0  # largest intermediate magnitude behind any log-term
    prev = math.inf
    for j in range(1, n):  # the j = n term vanishes for k >= 1
        log_fall = math.lgamma(j + 1) + math.lgamma(n - j + 1)
        log_pow = k * math.log1p(-j / n)
        log_t = log_binom_n - log_fall + log_pow
        signs.append(1.0 if j % 2 == 1 else -1.0)
        log_terms.append(log_t)
        log_max = max(log_max, log_t)
        log_scale = max(log_scale, log_binom_n + log_fall - log_pow)
        if log_t < prev and log_t < log_max + math.log(_TAIL_TERM_CUTOFF):
            break
        prev = log_t

    # Neumaier summation of sign * exp(log_t - log_max); rescaling by the
    # largest term keeps intermediates in range even when terms overflow
    # float64 on their own.
    total = 0.0
    comp = 0.0
    abs_total = 0.0
    for sign, log_t in zip(signs, log_terms):
        x = sign * math.exp(log_t - log_max)
        abs_total += abs(x)
        t = total + x
        if abs(total) >= abs(x):
            comp += (total - t) + x
        else:
            comp += (x - t) + total
        total = t
    total += comp

    # Each log-term carries absolute rounding error of order eps times the
    # magnitudes summed into it (lgamma values, k*log1p), which exp turns
    # into the same relative error on the term; the bound must grow with
    # that scale or noise from huge cancelling terms passes as signal.
    err_bound = 16.0 * np.finfo(float).eps * abs_total * log_scale
    if abs(total) <= err_bound:
        raise PrecisionLossError(
            f"inclusion-exclusion cancelled catastrophically at n={n}, k={k} "
            f"(|sum|={abs(total):.3e} <= error bound {err_bound:.3e} after rescaling)"
        )
    result = math.copysign(math.exp(log_max + math.log(abs(total))), total)
    return min(max(result, 0.0), 1.0)
