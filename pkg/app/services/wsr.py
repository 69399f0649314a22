# app/services/wsr.py
"""
Univariate Wilcoxon signed-rank test.

The statistic is T+, the sum of the midranks of |z - theta0| over the
positive differences, with exact zeros dropped. P-values come either from the
exact null distribution of T+ (dynamic-programming convolution over ranks
1..n) or from the tie- and continuity-corrected normal approximation.
The Hodges-Lehmann estimator (median of Walsh averages) is reported as the
effect size.
"""

import logging
import math
from typing import Optional

import numpy as np

from app.core.config import settings
from app.core.exceptions import DegenerateError, DomainError, ModeError
from app.schemas.enums import MethodTag, Tail, WsrMode
from app.schemas.outcome import TestOutcome, WsrStatistic
from app.utils.numkernels import ArrayLike, midranks, normal_cdf, tie_group_sizes

logger = logging.getLogger(__name__)


def _as_finite_vector(z: ArrayLike) -> np.ndarray:
    arr = np.asarray(z, dtype=float).ravel()
    if arr.size == 0:
        raise DomainError("Signed-rank test needs a nonempty vector of differences")
    if not np.all(np.isfinite(arr)):
        raise DomainError("Differences contain NaN or infinite values")
    return arr


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")


class WilcoxonSignedRank:
    @staticmethod
    def signed_rank_statistic(z: ArrayLike, theta0: float = 0.0) -> WsrStatistic:
        shifted = _as_finite_vector(z) - theta0
        nonzero = shifted[shifted != 0.0]
        had_zeros = nonzero.size < shifted.size

        if nonzero.size == 0:
            raise DegenerateError(
                "All differences are zero after the shift; the signed-rank statistic is undefined"
            )

        magnitudes = np.abs(nonzero)
        ranks = midranks(magnitudes)
        sizes = tie_group_sizes(magnitudes)

        return WsrStatistic(
            t_plus=float(ranks[nonzero > 0].sum()),
            n_effective=int(nonzero.size),
            had_ties=bool(np.any(sizes > 1)),
            had_zeros=bool(had_zeros),
            tie_sizes=tuple(int(s) for s in sizes if s > 1),
        )

    @staticmethod
    def signed_rank_null_distribution(n: int) -> np.ndarray:
        """P(T+ = t) for t = 0..n(n+1)/2 under the null, without ties."""
        if n < 1:
            raise DomainError(f"Null distribution needs n >= 1, got {n}")

        counts = np.zeros(n * (n + 1) // 2 + 1, dtype=np.int64)
        counts[0] = 1
        top = 0
        # each rank k either joins the positive set or not
        for k in range(1, n + 1):
            counts[k : top + k + 1] += counts[: top + 1].copy()
            top += k
        return counts / float(2**n)

    @staticmethod
    def _tails(p_lower: float, p_upper: float, tail: Tail) -> float:
        if tail == Tail.less:
            p = p_lower
        elif tail == Tail.greater:
            p = p_upper
        else:
            p = 2.0 * min(p_lower, p_upper)
        return float(min(max(p, 0.0), 1.0))

    @staticmethod
    def wsr_exact_pvalue(
        stat: WsrStatistic, tail: Tail = Tail.two_sided, cap: Optional[int] = None
    ) -> float:
        cap = settings.EXACT_MODE_CAP if cap is None else cap
        n = stat.n_effective
        if n > cap:
            raise ModeError(
                f"Exact p-values are limited to n <= {cap} (got n={n}); use the normal approximation"
            )
        if stat.had_ties:
            raise ModeError(
                "Exact p-values assume distinct ranks; tied data needs the normal approximation"
            )

        pmf = WilcoxonSignedRank.signed_rank_null_distribution(n)
        t = stat.t_plus
        p_lower = float(pmf[: int(math.floor(t)) + 1].sum())
        p_upper = float(pmf[int(math.ceil(t)) :].sum())
        return WilcoxonSignedRank._tails(p_lower, p_upper, Tail(tail))

    @staticmethod
    def wsr_normal_pvalue(stat: WsrStatistic, tail: Tail = Tail.two_sided) -> float:
        n = stat.n_effective
        mean = n * (n + 1) / 4.0
        tie_correction = sum(t**3 - t for t in stat.tie_sizes) / 48.0
        variance = n * (n + 1) * (2 * n + 1) / 24.0 - tie_correction
        if variance <= 0.0:
            raise DegenerateError("Zero variance of T+ under the null (all values tied)")

        sd = math.sqrt(variance)
        p_upper = normal_cdf(-(stat.t_plus - mean - 0.5) / sd)
        p_lower = normal_cdf((stat.t_plus - mean + 0.5) / sd)
        return WilcoxonSignedRank._tails(p_lower, p_upper, Tail(tail))

    @staticmethod
    def walsh_averages(z: ArrayLike) -> np.ndarray:
        """All (z_i + z_j) / 2 for i <= j, in lexicographic (i, j) order."""
        arr = np.asarray(z, dtype=float).ravel()
        if arr.size == 0:
            raise DomainError("Walsh averages need a nonempty vector")
        i, j = np.triu_indices(arr.size)
        return (arr[i] + arr[j]) / 2.0

    @staticmethod
    def hodges_lehmann(z: ArrayLike) -> float:
        return float(np.median(WilcoxonSignedRank.walsh_averages(z)))

    @staticmethod
    def wsr_test(
        z: ArrayLike,
        theta0: float = 0.0,
        alpha: Optional[float] = None,
        mode: WsrMode = WsrMode.auto,
        tail: Tail = Tail.two_sided,
        cap: Optional[int] = None,
    ) -> TestOutcome:
        alpha = settings.DEFAULT_ALPHA if alpha is None else alpha
        cap = settings.EXACT_MODE_CAP if cap is None else cap
        _check_alpha(alpha)
        mode = WsrMode(mode)
        tail = Tail(tail)

        z = _as_finite_vector(z)
        stat = WilcoxonSignedRank.signed_rank_statistic(z, theta0)
        warnings = []
        if stat.had_zeros:
            warnings.append(
                f"dropped {z.size - stat.n_effective} zero difference(s) before ranking"
            )

        use_exact = mode == WsrMode.exact or (
            mode == WsrMode.auto and stat.n_effective <= cap and not stat.had_ties
        )
        if use_exact and stat.had_ties:
            message = "tied |differences|: exact mode fell back to the normal approximation"
            logger.warning(message)
            warnings.append(message)
            use_exact = False

        if use_exact:
            p_value = WilcoxonSignedRank.wsr_exact_pvalue(stat, tail, cap=cap)
            method, mode_used = MethodTag.wsr_exact, WsrMode.exact
        else:
            p_value = WilcoxonSignedRank.wsr_normal_pvalue(stat, tail)
            method, mode_used = MethodTag.wsr_normal, WsrMode.normal

        return TestOutcome(
            statistic=stat.t_plus,
            p_value=p_value,
            effect_size=WilcoxonSignedRank.hodges_lehmann(z),
            alpha=alpha,
            significant=p_value < alpha,
            method=method,
            tail=tail,
            n_effective=stat.n_effective,
            p_value_mode=mode_used,
            warnings=warnings,
        )
