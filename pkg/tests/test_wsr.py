import itertools
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal
from pydantic import ValidationError
from scipy import stats

from app.core.exceptions import DegenerateError, DomainError, ModeError
from app.schemas.enums import MethodTag, Tail, WsrMode
from app.schemas.outcome import TestOutcome, WsrStatistic
from app.services.wsr import WilcoxonSignedRank as W


def _enumerated_counts(n):
    counts = np.zeros(n * (n + 1) // 2 + 1, dtype=np.int64)
    for signs in itertools.product((0, 1), repeat=n):
        counts[sum(rank for rank, s in zip(range(1, n + 1), signs) if s)] += 1
    return counts


def test_signed_rank_statistic_examples():
    assert W.signed_rank_statistic([1, 2, 3]).t_plus == 6
    assert W.signed_rank_statistic([-1.2, 0.8, 2.5, -0.3, 1.7]).t_plus == 11

    shifted = W.signed_rank_statistic([1, 2, 3], theta0=2)
    assert shifted.t_plus == 1.5
    assert shifted.n_effective == 2
    assert shifted.had_zeros and shifted.had_ties


def test_signed_rank_statistic_all_zero():
    with pytest.raises(DegenerateError):
        W.signed_rank_statistic([2.0, 2.0], theta0=2.0)


def test_signed_rank_statistic_bounds():
    with pytest.raises(ValidationError):
        WsrStatistic(t_plus=7, n_effective=3, had_ties=False, had_zeros=False)


def test_null_distribution_matches_enumeration():
    for n in range(1, 11):
        pmf = W.signed_rank_null_distribution(n)
        assert_array_equal(pmf * 2**n, _enumerated_counts(n))


def test_null_distribution_sums_to_one():
    for n in range(1, 26):
        assert abs(W.signed_rank_null_distribution(n).sum() - 1.0) < 1e-12


def _stat(t_plus, n):
    return WsrStatistic(t_plus=t_plus, n_effective=n, had_ties=False, had_zeros=False)


def test_exact_pvalue_examples():
    assert W.wsr_exact_pvalue(_stat(11, 5)) == pytest.approx(14 / 32, abs=1e-15)
    assert W.wsr_exact_pvalue(_stat(11, 5), Tail.greater) == pytest.approx(7 / 32, abs=1e-15)
    assert W.wsr_exact_pvalue(_stat(15, 5), Tail.greater) == pytest.approx(1 / 32, abs=1e-15)
    assert W.wsr_exact_pvalue(_stat(5, 4)) == 1.0


def test_exact_pvalue_limits():
    with pytest.raises(ModeError):
        W.wsr_exact_pvalue(_stat(100, 26))
    tied = WsrStatistic(t_plus=1.5, n_effective=2, had_ties=True, had_zeros=False, tie_sizes=(2,))
    with pytest.raises(ModeError):
        W.wsr_exact_pvalue(tied)


def test_normal_pvalue_at_mean():
    assert W.wsr_normal_pvalue(_stat(232.5, 30)) == 1.0
    assert W.wsr_normal_pvalue(_stat(5, 4)) == 1.0


def test_normal_pvalue_close_to_exact():
    assert abs(W.wsr_normal_pvalue(_stat(150, 20)) - W.wsr_exact_pvalue(_stat(150, 20))) <= 0.01

    diffs = [
        abs(W.wsr_exact_pvalue(_stat(t, 30), cap=30) - W.wsr_normal_pvalue(_stat(t, 30)))
        for t in range(0, 466)
    ]
    assert max(diffs) <= 0.01


def test_normal_pvalue_matches_scipy_with_ties():
    z = np.array([1.0, 2.0, 2.0, -3.0, 4.0, 4.0, 4.0, 5.0, -6.0, 7.0, 8.0, 9.0])
    stat = W.signed_rank_statistic(z)

    expected = stats.wilcoxon(z, correction=True, method="approx").pvalue
    assert_allclose(W.wsr_normal_pvalue(stat), expected, rtol=1e-10)


def test_walsh_averages():
    assert_array_equal(W.walsh_averages([1, 2, 3]), [1, 1.5, 2, 2, 2.5, 3])
    assert_array_equal(W.walsh_averages([4.5]), [4.5])
    assert W.walsh_averages(np.arange(9.0)).size == 45


def test_hodges_lehmann():
    assert W.hodges_lehmann([1, 2, 3]) == 2
    assert W.hodges_lehmann([-1, 0, 1]) == 0
    assert W.hodges_lehmann([5]) == 5


def test_hodges_lehmann_equivariance(rng):
    z = rng.normal(size=17)
    assert_allclose(W.hodges_lehmann(z + 3.25), W.hodges_lehmann(z) + 3.25, atol=1e-12)
    assert_allclose(W.hodges_lehmann(2.5 * z), 2.5 * W.hodges_lehmann(z), atol=1e-12)


def test_positive_walsh_count_equals_t_plus():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        n = int(rng.integers(2, 21))
        z = rng.normal(rng.normal(), 1.0, size=n)
        positive = int(np.sum(W.walsh_averages(z) > 0))
        assert positive == W.signed_rank_statistic(z).t_plus


def test_wsr_test_exact_example():
    outcome = W.wsr_test([1, 2, 3, 4, 5, 6], theta0=0.0, alpha=0.05, mode=WsrMode.exact)

    assert outcome.statistic == 21
    assert outcome.p_value == pytest.approx(0.03125, abs=1e-15)
    assert outcome.significant
    assert outcome.method == MethodTag.wsr_exact
    assert outcome.p_value_mode == WsrMode.exact
    assert outcome.effect_size == 3.5


def test_wsr_test_auto_mode_switches():
    small = W.wsr_test(np.arange(1.0, 11.0), alpha=0.05)
    assert small.p_value_mode == WsrMode.exact

    large = W.wsr_test(np.arange(1.0, 31.0), alpha=0.05)
    assert large.p_value_mode == WsrMode.normal
    assert large.method == MethodTag.wsr_normal


def test_wsr_test_exact_falls_back_on_ties():
    outcome = W.wsr_test([-1.0, 1.0], alpha=0.05, mode=WsrMode.exact)

    assert outcome.p_value == 1.0
    assert outcome.p_value_mode == WsrMode.normal
    assert any("fell back" in w for w in outcome.warnings)


def test_wsr_test_exact_above_cap():
    with pytest.raises(ModeError):
        W.wsr_test(np.arange(1.0, 31.0), mode=WsrMode.exact)


def test_wsr_test_shift_identity(rng):
    z = rng.normal(0.3, 1.0, size=12)
    shifted = W.wsr_test(z, theta0=0.7, alpha=0.05)
    moved = W.wsr_test(z - 0.7, theta0=0.0, alpha=0.05)

    assert shifted.statistic == moved.statistic
    assert_allclose(shifted.p_value, moved.p_value, rtol=1e-12)
    # effect size is reported on the unshifted differences
    assert shifted.effect_size == W.hodges_lehmann(z)


def test_wsr_test_sign_antisymmetry(rng):
    for n in (8, 40):
        z = rng.normal(0.2, 1.0, size=n)
        pos = W.wsr_test(z, alpha=0.05)
        neg = W.wsr_test(-z, alpha=0.05)

        assert_allclose(pos.p_value, neg.p_value, rtol=1e-12)
        assert_allclose(neg.effect_size, -pos.effect_size, atol=1e-15)


def test_wsr_test_tails(rng):
    z = rng.normal(1.0, 1.0, size=12)
    greater = W.wsr_test(z, alpha=0.05, tail=Tail.greater)
    less = W.wsr_test(z, alpha=0.05, tail=Tail.less)
    two_sided = W.wsr_test(z, alpha=0.05)

    assert greater.p_value < 0.5 < less.p_value
    assert two_sided.p_value == pytest.approx(min(1.0, 2 * greater.p_value), abs=1e-14)


def test_wsr_test_drops_zeros():
    outcome = W.wsr_test([0.0, 0.0, 1.0, 2.0, 3.0], alpha=0.05)

    assert outcome.n_effective == 3
    assert any("zero difference" in w for w in outcome.warnings)


def test_wsr_test_bad_input():
    with pytest.raises(DomainError):
        W.wsr_test([1.0, 2.0], alpha=1.5)
    with pytest.raises(DomainError):
        W.wsr_test([])
    with pytest.raises(DomainError):
        W.wsr_test([1.0, math.nan])


def test_outcome_decision_must_match_pvalue():
    with pytest.raises(ValidationError):
        TestOutcome(
            statistic=1.0,
            p_value=0.2,
            effect_size=0.0,
            alpha=0.05,
            significant=True,
            method=MethodTag.wsr_exact,
        )
