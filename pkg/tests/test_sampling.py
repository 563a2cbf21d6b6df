import math

import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from holelab import Distribution, draw_coeffs, sample_seed, truncation_degree, truncation_tail_bound
from holelab.sampling import truncated_exp_from_uniform, uniform_pairs


def test_rademacher_support():
    draw = draw_coeffs(Distribution.RADEMACHER, 8, 1234)
    assert set(draw.values.real.tolist()) <= {-1.0, 1.0}
    assert np.all(draw.values.imag == 0.0)


def test_steinhaus_unit_modulus():
    draw = draw_coeffs(Distribution.STEINHAUS, 1000, 99)
    assert np.max(np.abs(np.abs(draw.values) - 1.0)) <= 1e-15


def test_gaussian_second_moment():
    draw = draw_coeffs(Distribution.COMPLEX_GAUSSIAN, 10**5, 2024)
    m2 = float(np.mean(np.abs(draw.values) ** 2))
    assert abs(m2 - 1.0) <= 3.0 / math.sqrt(10**5)


def test_gaussian_tail_identity():
    # P(|phi| >= 1) = exp(-1) for the unit complex Gaussian
    draw = draw_coeffs(Distribution.COMPLEX_GAUSSIAN, 10**5, 31)
    p_hat = float(np.mean(np.abs(draw.values) >= 1.0))
    p = math.exp(-1.0)
    sigma = math.sqrt(p * (1.0 - p) / 10**5)
    assert abs(p_hat - p) <= 3.0 * sigma


def test_gaussian_modulus_squared_is_exponential():
    draw = draw_coeffs(Distribution.COMPLEX_GAUSSIAN, 10**5, 7)
    stat = scipy.stats.kstest(np.abs(draw.values) ** 2, "expon").statistic
    crit_99 = 1.6276 / math.sqrt(10**5)
    assert stat < crit_99


def test_steinhaus_phase_uniform():
    draw = draw_coeffs(Distribution.STEINHAUS, 10**5, 5150)
    assert abs(np.mean(draw.values)) <= 3.0 / math.sqrt(10**5) * (1 / math.sqrt(2)) * 2


def test_regeneration_bit_identical():
    for dist in Distribution:
        a = draw_coeffs(dist, 64, 8675309)
        b = draw_coeffs(dist, 64, 8675309)
        assert np.array_equal(a.values, b.values)


@given(st.integers(min_value=0, max_value=2**64 - 1), st.integers(min_value=1, max_value=40))
@settings(max_examples=30, deadline=None)
def test_extension_property(seed, short):
    for dist in Distribution:
        long = draw_coeffs(dist, short + 25, seed)
        assert np.array_equal(long.values[:short], draw_coeffs(dist, short, seed).values)


def test_distinct_seeds_distinct_streams():
    a = draw_coeffs(Distribution.COMPLEX_GAUSSIAN, 16, 1)
    b = draw_coeffs(Distribution.COMPLEX_GAUSSIAN, 16, 2)
    assert not np.array_equal(a.values, b.values)


def test_sample_seed_deterministic_and_spread():
    assert sample_seed(5, 17) == sample_seed(5, 17)
    seeds = {sample_seed(5, i) for i in range(1000)}
    assert len(seeds) == 1000


def test_uniform_pairs_range():
    u0, u1 = uniform_pairs(99, 10_000)
    for u in (u0, u1):
        assert np.all(u >= 0.0) and np.all(u < 1.0)


def test_count_validation():
    with pytest.raises(ValueError):
        draw_coeffs(Distribution.RADEMACHER, 0, 1)


# ---------------------------------------------------------------------------
# truncated exponential inverse CDF


@given(st.floats(min_value=0.0, max_value=1.0, exclude_max=True),
       st.floats(min_value=1e-300, max_value=50.0))
@settings(max_examples=200, deadline=None)
def test_truncated_exp_upper_bound_respected(u, cap):
    val = float(truncated_exp_from_uniform(u, upper=cap))
    assert 0.0 <= val <= cap


@given(st.floats(min_value=0.0, max_value=1.0, exclude_max=True),
       st.floats(min_value=0.0, max_value=100.0))
@settings(max_examples=200, deadline=None)
def test_truncated_exp_lower_bound_respected(u, lower):
    assert float(truncated_exp_from_uniform(u, lower=lower)) >= lower


def test_truncated_exp_matches_conditional_law():
    # empirical CDF of draws conditioned to [0, 1] vs the exact conditional CDF
    u = uniform_pairs(4242, 10**5)[0]
    vals = truncated_exp_from_uniform(u, upper=1.0)
    q = -math.expm1(-1.0)
    cdf = lambda x: -np.expm1(-x) / q
    stat = scipy.stats.kstest(vals, cdf).statistic
    assert stat < 1.6276 / math.sqrt(10**5)


# ---------------------------------------------------------------------------
# truncation degree


def test_truncation_degree_monotone_in_radius(gef):
    n2 = truncation_degree(gef, 2.0, 1e-9, 1e-9)
    n3 = truncation_degree(gef, 3.0, 1e-9, 1e-9)
    assert n2 <= n3


def test_truncation_degree_floor(gef):
    for r in (0.05, 1.0, 2.0):
        n = truncation_degree(gef, r, 1e-6, 1e-6)
        assert n >= math.floor(math.e * r * r) + 1


def test_truncation_certificate_verified(gef):
    degree = truncation_degree(gef, 1.0, 1e-9, 1e-9)
    assert degree >= 3
    assert truncation_tail_bound(gef, 1.0, 1e-9, degree) <= 1e-9


def test_truncation_degree_minimal(gef):
    degree = truncation_degree(gef, 1.5, 1e-9, 1e-9)
    floor = math.floor(math.e * 1.5**2) + 1
    if degree > floor:
        assert truncation_tail_bound(gef, 1.5, 1e-9, degree - 1) > 1e-9


def test_truncation_degree_validation(gef):
    with pytest.raises(ValueError):
        truncation_degree(gef, 1.0, 0.0, 0.5)
    with pytest.raises(ValueError):
        truncation_degree(gef, 1.0, 0.5, 1.5)
