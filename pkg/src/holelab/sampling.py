"""Seedable coefficient draws and truncation degrees with tail certificates.

Randomness comes from a counter-based Philox stream keyed by the draw's
master seed.  Index n of a draw always consumes the two 64-bit words 2n and
2n+1 (magnitude word, phase word), so regenerating a draw with a larger
count leaves the earlier values bit-identical, and disjoint index ranges
can be produced independently.

The unit complex Gaussian (density exp(-|z|^2)/pi) is sampled as
magnitude-phase: |phi|^2 is standard exponential via inverse CDF and the
phase is uniform.  The same inverse-CDF route yields exponential magnitudes
truncated to an interval without any rejection loop, which the conditioned
hole sampler relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .coeff_models import CoefficientModel

_WORD_TO_UNIT = 2.0**-53  # top 53 bits of a 64-bit word -> uniform in [0, 1)
_SEED_MASK = (1 << 64) - 1


class Distribution(Enum):
    COMPLEX_GAUSSIAN = "complex-gaussian"
    RADEMACHER = "rademacher"
    STEINHAUS = "steinhaus"


@dataclass(frozen=True)
class CoefficientDraw:
    """One realization of the random coefficients phi_0..phi_N."""

    dist: Distribution
    values: np.ndarray
    master_seed: int
    truncation_degree: int


def uniform_pairs(master_seed: int, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-index uniform pairs (u_mag, u_phase), each in [0, 1)."""
    bg = np.random.Philox(key=int(master_seed) & _SEED_MASK)
    words = bg.random_raw(2 * count)
    u = (words >> np.uint64(11)) * _WORD_TO_UNIT
    return u[0::2], u[1::2]


def draw_coeffs(dist: Distribution, count: int, master_seed: int) -> CoefficientDraw:
    """Independent draws phi_0..phi_{count-1} from the given distribution."""
    if count < 1:
        raise ValueError("count must be >= 1")
    u_mag, u_phase = uniform_pairs(master_seed, count)
    if dist is Distribution.COMPLEX_GAUSSIAN:
        mag = np.sqrt(-np.log1p(-u_mag))
        values = mag * np.exp(2j * np.pi * u_phase)
    elif dist is Distribution.RADEMACHER:
        values = np.where(u_mag < 0.5, 1.0, -1.0).astype(np.complex128)
    elif dist is Distribution.STEINHAUS:
        values = np.exp(2j * np.pi * u_phase)
    else:
        raise ValueError(f"unknown distribution {dist!r}")
    return CoefficientDraw(dist, values, int(master_seed) & _SEED_MASK, count - 1)


def sample_seed(master_seed: int, index: int) -> int:
    """Derived 64-bit seed for Monte Carlo sample `index`.

    Hashing (seed, index) rather than advancing one stream keeps results
    independent of worker count and chunking.
    """
    return int(np.random.SeedSequence((int(master_seed) & _SEED_MASK, int(index))).generate_state(1, np.uint64)[0])


def truncated_exp_from_uniform(u, lower=0.0, upper=None):
    """Standard-exponential inverse CDF, conditioned to [lower, upper].

    With q = 1 - exp(-(upper - lower)) the conditional quantile is
    lower - log(1 - u*q); `upper=None` means no upper truncation.
    Stable for caps as small as the double-precision underflow threshold.
    """
    u = np.asarray(u, dtype=np.float64)
    if upper is None:
        return lower - np.log1p(-u)
    q = -np.expm1(-(np.asarray(upper, dtype=np.float64) - lower))
    return lower - np.log1p(-u * q)


def truncation_tail_bound(model: CoefficientModel, r: float, eps: float, degree: int) -> float:
    """Union-bound failure probability of truncating at `degree`.

    Splits the allowance eps geometrically over the discarded indices and
    uses the exact Gaussian tail P(|phi| >= lam) = exp(-lam^2): the term for
    index n is exp(-(eps * 2^-(n-degree) / (a_n r^n))^2).  If the bound is
    below `fail_prob`, the discarded tail is <= eps uniformly on |z| <= r
    with probability >= 1 - fail_prob.
    """
    log_r = math.log(r)
    log_eps = math.log(eps)
    ln2 = math.log(2.0)
    total = 0.0
    n = degree + 1
    block = 64
    while True:
        idx = np.arange(n, n + block, dtype=np.float64)
        t = model.log_coeffs(n + block - 1)[n : n + block] + idx * log_r
        log_lam_sq = 2.0 * (log_eps - (idx - degree) * ln2 - t)
        # exp(-lam^2) with lam^2 in log scale; lam^2 > ~745 underflows the term to 0
        terms = np.exp(-np.exp(np.minimum(log_lam_sq, 700.0)))
        total += float(np.sum(terms))
        # lam^2 dips before it climbs (the geometric split shrinks the
        # allowance faster than a_n r^n decays up to n ~ 4 r^2); only stop
        # once the block is all-zero on the final, increasing stretch.
        if np.all(terms == 0.0) and np.all(np.diff(log_lam_sq[-8:]) > 0):
            return total
        n += block
        if n > degree + 1_000_000:
            raise RuntimeError("tail certificate did not converge")


def truncation_degree(model: CoefficientModel, r: float, eps: float, fail_prob: float) -> int:
    """Smallest degree >= floor(e r^2) + 1 whose tail certificate meets fail_prob."""
    if not (0 < eps < 1 and 0 < fail_prob < 1):
        raise ValueError("eps and fail_prob must lie in (0, 1)")
    if not r > 0:
        raise ValueError("r must be positive")
    degree = int(math.floor(math.e * r * r)) + 1
    while truncation_tail_bound(model, r, eps, degree) > fail_prob:
        degree += 1
    return degree
