import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pdcperm.exceptions import DomainError
from pdcperm.pdc import correlation_factor, observed_statistic
from pdcperm.perm import apply_permutation, balanced_switch_count, sample_permutation
from pdcperm._parallel import substream
from pdcperm.sim import generate_model
from pdcperm.specfun import gamma_ratio_half
from pdcperm.theory import (
    ModelParams,
    balanced_moments,
    corr_weighted_sum,
    cov_m0_mi,
    expected_observed_stat,
    f_all,
    f_balanced,
    folded_f_all,
    limit_pdc_all,
    mixture_components,
    perm_mixture_moments,
)

# Frozen regression values, checked independently with mpmath/fractions at build time.
F_ALL_100 = {2.0: 25.8222298947913, 4.0: 38.5597127882717, 20.0: 25.854893551121055}
LIMIT_100 = 21.84955802254351


def test_model_params_validation():
    with pytest.raises(DomainError):
        ModelParams(0, 3, 2)
    with pytest.raises(DomainError):
        ModelParams(3, 3, 2, g=-1.0)
    with pytest.raises(DomainError):
        ModelParams(3, 3, 2, sigma=0.0)
    with pytest.raises(DomainError):
        ModelParams(3, 3, 2, u=(1.0, 1.0))
    p = ModelParams(3, 3, 2, u=(0.0, 1.0))
    np.testing.assert_array_equal(p.direction(), [0.0, 1.0])


def test_expected_observed_examples():
    assert expected_observed_stat(ModelParams(2, 2, 1)) == pytest.approx(math.sqrt(2 / math.pi), rel=1e-14)
    for m, n, d, s in [(5, 9, 3, 2.0), (40, 40, 100, 0.5)]:
        p = ModelParams(m, n, d, 0.0, s)
        assert expected_observed_stat(p) == pytest.approx(s * math.sqrt(p.h) * math.sqrt(2) * gamma_ratio_half(d), rel=1e-12)


@pytest.mark.slow
def test_expected_observed_monte_carlo():
    # xbar - ybar ~ N(2g u, sigma^2 h I) exactly, so sample it directly
    p = ModelParams(100, 100, 100, 2.0)
    rng = np.random.default_rng(2024)
    vals = []
    for _ in range(10):
        z = rng.standard_normal((100_000, p.d)) * math.sqrt(p.h)
        z[:, 0] += 2 * p.g
        vals.append(np.linalg.norm(z, axis=1))
    v = np.concatenate(vals)
    assert abs(v.mean() - expected_observed_stat(p)) <= 3 * v.std(ddof=1) / math.sqrt(v.size)


def test_mixture_components_examples():
    comps = mixture_components(ModelParams(2, 2, 3, 1.5))
    assert [c.r for c in comps] == [0, 1, 2]
    np.testing.assert_allclose([c.weight for c in comps], [1 / 6, 4 / 6, 1 / 6], rtol=1e-15)
    assert comps[1].g_r == 0.0 and comps[1].lambda_r == 0.0
    assert comps[0].lambda_r == pytest.approx(2 * 1.5 / math.sqrt(1.0), rel=1e-15)
    assert all(c.lambda_r == 0.0 for c in mixture_components(ModelParams(7, 4, 3, 0.0)))
    assert math.fsum(c.weight for c in mixture_components(ModelParams(37, 21, 3, 2.0))) == pytest.approx(1.0, abs=1e-15)


def test_r0_component_is_observed():
    p = ModelParams(30, 20, 5, 1.2)
    c0 = mixture_components(p)[0]
    assert c0.g_r == p.g and c0.xi == 1.0


def test_mixture_moments_g0_equal_balanced():
    for m, n, d in [(2, 2, 1), (50, 50, 10), (13, 40, 77)]:
        p = ModelParams(m, n, d, 0.0, 1.3)
        a, b = perm_mixture_moments(p), balanced_moments(p)
        assert a[0] == pytest.approx(b[0], rel=1e-12)
        assert a[1] == pytest.approx(b[1], rel=1e-9)


def test_balanced_examples():
    mean, var = balanced_moments(ModelParams(2, 2, 1, 5.0))
    assert mean == pytest.approx(math.sqrt(2 / math.pi), rel=1e-14)
    assert var == pytest.approx(1 - 2 / math.pi, rel=1e-13)
    assert balanced_moments(ModelParams(9, 4, 6, 0.0)) == balanced_moments(ModelParams(9, 4, 6, 30.0))


@pytest.mark.slow
def test_balanced_moments_monte_carlo():
    p = ModelParams(100, 100, 100, 20.0)
    k = 4000
    stats = np.empty(k)
    for i in range(k):
        data = generate_model(p, substream(11, i, 0))
        stats[i] = observed_statistic(apply_permutation(data, sample_permutation(100, 100, "balanced", substream(11, i, 1))))
    mean, var = balanced_moments(p)
    assert abs(stats.mean() - mean) <= 3 * stats.std(ddof=1) / math.sqrt(k)


def test_variance_decreases_with_sample_size():
    for d, g in [(10, 2.0), (100, 4.0)]:
        vs = [perm_mixture_moments(ModelParams(m, m, d, g))[1] for m in (10, 20, 50, 100)]
        assert all(a > b for a, b in zip(vs, vs[1:]))


def test_f_all_examples():
    for g, v in F_ALL_100.items():
        assert f_all(ModelParams(100, 100, 100, g)) == pytest.approx(v, rel=1e-10)
    assert f_all(ModelParams(100, 100, 100, 0.0)) == pytest.approx(0.0, abs=1e-12)
    assert f_all(ModelParams(100, 100, 100, 4.0)) > f_all(ModelParams(100, 100, 100, 20.0))
    assert abs(f_all(ModelParams(100, 100, 100, 1e6)) - limit_pdc_all(100, 100)) < 0.1


@pytest.mark.parametrize("m", [20, 100])
@pytest.mark.parametrize("d", [1, 10, 100])
def test_f_all_tends_to_limit(m, d):
    assert abs(f_all(ModelParams(m, m, d, 1e4)) - limit_pdc_all(m, m)) <= 0.01


def test_folded_path_matches():
    for m, n in [(5, 5), (30, 12), (100, 100)]:
        for g in (0.1, 1.0, 4.0, 20.0):
            assert folded_f_all(m, n, g) == pytest.approx(f_all(ModelParams(m, n, 1, g)), rel=1e-10)


def test_f_balanced():
    assert f_balanced(ModelParams(100, 100, 10, 0.0)) == pytest.approx(0.0, abs=1e-12)
    for d in (1, 10, 100):
        vals = [f_balanced(ModelParams(100, 100, d, g)) for g in np.linspace(0, 20, 41)]
        assert all(b > a for a, b in zip(vals, vals[1:]))
    p = ModelParams(100, 100, 100, 20.0)
    assert f_balanced(p) > f_all(p)


def test_limit_examples():
    assert limit_pdc_all(2, 2) == pytest.approx(float(Fraction(2, 3)) / math.sqrt(2 / 9), rel=1e-14)
    assert limit_pdc_all(100, 100) == pytest.approx(LIMIT_100, rel=1e-12)
    assert limit_pdc_all(17, 40) == pytest.approx(limit_pdc_all(40, 17), rel=1e-13)
    with pytest.raises(DomainError):
        limit_pdc_all(1, 5)


def test_limit_exact_fraction():
    for m, n in [(2, 2), (6, 9), (100, 100)]:
        total = math.comb(m + n, m)
        s = sum(Fraction(math.comb(m, r) * math.comb(n, n - r), total) * abs(1 - Fraction(r, m) - Fraction(r, n))
                for r in range(min(m, n) + 1))
        expected = float(1 - s) / math.sqrt(float(Fraction(1, m + n - 1) - s * s))
        assert limit_pdc_all(m, n) == pytest.approx(expected, rel=1e-12)


def test_cov_m0_mi_examples():
    assert cov_m0_mi(10, 7, 1.0, 5) == 0.0
    assert cov_m0_mi(10, 7, 2.0, 0) == pytest.approx(8 * 7 * 16 / 100, rel=1e-15)
    with pytest.raises(DomainError):
        cov_m0_mi(10, 7, 1.0, 11)


def _exact_all(n):
    total = math.comb(2 * n, n)
    return sum(Fraction(math.comb(n, r) ** 2, total) * Fraction(2 * r - n, n) ** 2 for r in range(n + 1))


def _exact_balanced(n):
    r = balanced_switch_count(n, n)
    q = [Fraction(math.comb(r, k) * math.comb(n - r, r - k), math.comb(n, r)) for k in range(r + 1)]
    return sum(q[a] * q[b] * (1 - Fraction(2 * (2 * r - a - b), n)) ** 2 for a in range(r + 1) for b in range(r + 1))


def test_corr_sums_examples():
    assert corr_weighted_sum(8, 8, "all") == pytest.approx(1 / 15, abs=1e-15)
    assert corr_weighted_sum(8, 8, "balanced") == pytest.approx(1 / 14, abs=1e-15)
    assert corr_weighted_sum(2, 2, "all") == pytest.approx(1 / 3, abs=1e-15)
    assert _exact_all(8) == Fraction(1, 15)
    assert _exact_balanced(8) == Fraction(1, 14)


@pytest.mark.parametrize("n", [2, 3, 5, 16, 31, 64])
def test_corr_sums_match_fractions(n):
    assert corr_weighted_sum(n, n, "all") == pytest.approx(float(_exact_all(n)), abs=1e-15)
    assert corr_weighted_sum(n, n, "balanced") == pytest.approx(float(_exact_balanced(n)), abs=1e-15)


def test_corr_sum_unequal_sizes():
    # exact sum for all permutations is 1/(m+n-1); the closed form is an approximation when m != n
    assert corr_weighted_sum(100, 50, "all") == pytest.approx(1 / 149, rel=1e-12)
    assert correlation_factor(100, 50, "all") == pytest.approx(150 / 19850, rel=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 60), st.integers(1, 40), st.floats(0, 30))
def test_f_all_symmetric_in_m_n(m, d, g):
    n = m + 3
    assert f_all(ModelParams(m, n, d, g)) == pytest.approx(f_all(ModelParams(n, m, d, g)), rel=1e-9, abs=1e-12)
