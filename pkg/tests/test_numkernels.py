import math

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal
from scipy import special, stats

from app.core.exceptions import DomainError, SingularMatrixError
from app.utils.numkernels import (
    f_cdf,
    f_sf,
    median,
    midranks,
    normal_cdf,
    regularized_incomplete_beta,
    sample_covariance,
    spd_solve,
    t_cdf,
    tie_group_sizes,
)


@pytest.mark.parametrize(
    "values, expected",
    [
        ([3, 1, 2], [3, 1, 2]),
        ([5, 5], [1.5, 1.5]),
        ([2, 7, 2, 9], [1.5, 3, 1.5, 4]),
    ],
)
def test_midranks_examples(values, expected):
    assert_array_equal(midranks(values), expected)


def test_midranks_matches_rankdata(rng):
    values = rng.integers(0, 8, size=50).astype(float)
    ranks = midranks(values)

    assert_allclose(ranks, stats.rankdata(values))
    assert math.isclose(ranks.sum(), 50 * 51 / 2)


def test_midranks_monotone_transform(rng):
    values = rng.normal(size=40)
    assert_array_equal(midranks(values), midranks(np.exp(values)))


def test_tie_group_sizes():
    assert sorted(tie_group_sizes([2, 7, 2, 9, 9, 9]).tolist()) == [1, 2, 3]


@pytest.mark.parametrize("values, expected", [([3, 1, 2], 2.0), ([1, 2, 3, 4], 2.5), ([7], 7.0)])
def test_median(values, expected):
    assert median(values) == expected


def test_empty_inputs():
    with pytest.raises(DomainError):
        midranks([])
    with pytest.raises(DomainError):
        median([])


def test_normal_cdf():
    assert normal_cdf(0.0) == 0.5
    assert abs(normal_cdf(1.959963985) - 0.975) < 1e-9
    for z in np.linspace(-8, 8, 33):
        assert abs(normal_cdf(z) + normal_cdf(-z) - 1.0) < 1e-14
        assert abs(normal_cdf(z) - stats.norm.cdf(z)) < 1e-12


def test_incomplete_beta_matches_scipy():
    for a, b in [(0.5, 0.5), (1.0, 3.0), (2.5, 7.0), (15.0, 0.5), (40.0, 60.0)]:
        for x in [0.0, 0.01, 0.2, 0.5, 0.77, 0.999, 1.0]:
            assert abs(regularized_incomplete_beta(a, b, x) - special.betainc(a, b, x)) < 1e-12


def test_incomplete_beta_domain():
    with pytest.raises(DomainError):
        regularized_incomplete_beta(0.0, 1.0, 0.5)
    with pytest.raises(DomainError):
        regularized_incomplete_beta(1.0, 1.0, 1.5)


def test_t_cdf():
    assert t_cdf(0.0, 7) == 0.5
    assert abs(t_cdf(1.0, 1) - 0.75) < 1e-12
    assert abs(t_cdf(1.96, 10**6) - normal_cdf(1.96)) < 1e-3
    for df in (1, 2, 5, 29):
        for x in (-6.0, -1.3, 0.4, 2.2, 12.0):
            assert abs(t_cdf(x, df) - stats.t.cdf(x, df)) < 1e-10
    with pytest.raises(DomainError):
        t_cdf(1.0, 0)


def test_f_cdf():
    assert f_cdf(0.0, 3, 5) == 0.0
    assert abs(f_cdf(1.0, 7, 7) - 0.5) < 1e-12
    for d1, d2 in [(1, 5), (3, 27), (10, 20), (60, 2)]:
        for x in (0.05, 0.7, 1.0, 3.3, 25.0):
            assert abs(f_cdf(x, d1, d2) - stats.f.cdf(x, d1, d2)) < 1e-10
            assert abs(f_sf(x, d1, d2) - stats.f.sf(x, d1, d2)) < 1e-10
    with pytest.raises(DomainError):
        f_cdf(-1.0, 2, 2)


@pytest.mark.parametrize("df", [10**5, 10**6, 10**7])
def test_cdfs_at_large_df(df):
    for x in (0.5, 1.96, 3.0):
        upper = 0.5 * special.betaincc(0.5, df / 2.0, x * x / (df + x * x))
        assert abs(t_cdf(x, df) - (1.0 - upper)) < 1e-10
        assert abs(t_cdf(-x, df) - upper) < 1e-10
        assert abs(f_cdf(x, 1, df) - special.betainc(0.5, df / 2.0, x / (x + df))) < 1e-10

    assert abs(f_cdf(1.0, df, df) - 0.5) < 1e-10
    x = 1.0 + 3.0 / math.sqrt(df)
    assert abs(f_cdf(x, df, df) - special.betainc(df / 2.0, df / 2.0, x / (x + 1.0))) < 1e-10
    assert abs(f_cdf(x, df, df) + f_sf(x, df, df) - 1.0) < 1e-12


def test_f_cdf_one_numerator_df_is_squared_t():
    for k in (3, 12, 40):
        for x in (0.3, 2.0, 9.0):
            assert abs(f_cdf(x, 1, k) - (2 * t_cdf(math.sqrt(x), k) - 1)) < 1e-10


def test_cdfs_are_monotone_and_bounded():
    grid = np.linspace(-10, 10, 1000)
    for values in (
        [normal_cdf(z) for z in grid],
        [t_cdf(z, 4) for z in grid],
        [f_cdf(abs(z), 3, 9) for z in np.sort(np.abs(grid))],
    ):
        values = np.array(values)
        assert np.all(np.diff(values) >= -1e-14)
        assert np.all((values >= 0.0) & (values <= 1.0))


def test_sample_covariance():
    assert_allclose(sample_covariance(np.array([[1.0], [3.0]])), [[2.0]])
    assert not sample_covariance(np.ones((4, 3))).any()
    with pytest.raises(DomainError):
        sample_covariance(np.ones((1, 3)))


def test_sample_covariance_matches_numpy(rng):
    z = rng.normal(size=(25, 6))
    cov = sample_covariance(z)

    assert_allclose(cov, np.cov(z, rowvar=False), rtol=1e-12, atol=1e-14)
    assert_array_equal(cov, cov.T)


def test_spd_solve_examples():
    assert_allclose(spd_solve(np.eye(3), [1.0, -2.0, 3.0]), [1.0, -2.0, 3.0])
    assert_allclose(spd_solve(np.array([[4.0, 0.0], [0.0, 9.0]]), [2.0, 3.0]), [0.5, 1.0 / 3.0])


def test_spd_solve_random(rng):
    for d in (1, 2, 5, 20):
        g = rng.normal(size=(d, d))
        a = g.T @ g + np.eye(d)
        a = (a + a.T) / 2.0
        b = rng.normal(size=d)

        v = spd_solve(a, b)

        assert np.max(np.abs(a @ v - b)) <= 1e-8 * np.max(np.abs(b))


def test_spd_solve_singular():
    v = np.array([1.0, 2.0])
    with pytest.raises(SingularMatrixError):
        spd_solve(np.outer(v, v), [1.0, 1.0])


def test_spd_solve_singular_covariance_when_d_not_below_n(rng):
    cov = sample_covariance(rng.normal(size=(5, 8)))
    with pytest.raises(SingularMatrixError, match="Singular covariance"):
        spd_solve(cov, np.ones(8))


def test_spd_solve_rejects_non_symmetric():
    with pytest.raises(DomainError):
        spd_solve(np.array([[2.0, 1.0], [0.0, 2.0]]), [1.0, 1.0])
