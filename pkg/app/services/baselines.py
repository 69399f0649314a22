# app/services/baselines.py
"""
Comparison methods: the paired Hotelling T2 test and per-feature multiple
testing with a Bonferroni threshold.
"""

import logging
import math
from typing import Optional

import numpy as np

from app.core.config import settings
from app.core.exceptions import DegenerateError, DomainError, SingularMatrixError
from app.schemas.enums import MethodTag, UniTest, WsrMode
from app.schemas.outcome import HotellingDetail, MtResult, TestOutcome
from app.schemas.sample import PairedSample
from app.services.paired_sample import PairedSampleService
from app.services.wsr import WilcoxonSignedRank
from app.utils.numkernels import f_sf, sample_covariance, spd_solve, t_cdf

logger = logging.getLogger(__name__)


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")


class HotellingT2:
    @staticmethod
    def hotelling_t2_paired(
        sample: PairedSample, alpha: Optional[float] = None
    ) -> HotellingDetail:
        """T2 = N zbar' S^-1 zbar on the paired differences, via the F transform."""
        alpha = settings.DEFAULT_ALPHA if alpha is None else alpha
        _check_alpha(alpha)

        n, d = sample.n, sample.d
        if n < 2:
            raise DomainError(f"Hotelling T2 needs N >= 2 pairs, got {n}")
        if d >= n:
            raise SingularMatrixError(
                f"Singular covariance matrix: d={d} >= N={n}, the inverse of the "
                "sample covariance matrix does not exist"
            )

        z = sample.y - sample.x
        z_bar = z.mean(axis=0)
        cov = sample_covariance(z)
        t2 = float(n * z_bar @ spd_solve(cov, z_bar))

        df1, df2 = d, n - d
        f_statistic = t2 * (n - d) / (d * (n - 1))
        p_value = f_sf(max(f_statistic, 0.0), df1, df2)

        outcome = TestOutcome(
            statistic=f_statistic,
            p_value=p_value,
            effect_size=t2,
            alpha=alpha,
            significant=p_value < alpha,
            method=MethodTag.ht2,
            n_effective=n,
        )
        return HotellingDetail(
            t2=t2, f_statistic=f_statistic, df1=df1, df2=df2, outcome=outcome
        )


class MultipleTesting:
    @staticmethod
    def paired_t_pvalue(z: np.ndarray) -> tuple[float, float]:
        """Two-sided one-sample t-test of mean(z) = 0; returns (t, p)."""
        n = z.size
        if n < 2:
            raise DomainError(f"Paired t-test needs N >= 2 pairs, got {n}")
        mean = float(z.mean())
        sd = float(z.std(ddof=1))
        if sd == 0.0:
            if mean == 0.0:
                raise DegenerateError("All differences are zero; the t statistic is undefined")
            return math.copysign(math.inf, mean), 0.0
        t = mean / (sd / math.sqrt(n))
        return t, min(1.0, 2.0 * (1.0 - t_cdf(abs(t), n - 1)))

    @staticmethod
    def multiple_testing(
        sample: PairedSample,
        alpha: Optional[float] = None,
        uni_test: UniTest = UniTest.wsr,
    ) -> MtResult:
        alpha = settings.DEFAULT_ALPHA if alpha is None else alpha
        _check_alpha(alpha)
        uni_test = UniTest(uni_test)
        if sample.n < 2:
            raise DomainError(f"Multiple testing needs N >= 2 pairs, got {sample.n}")

        diffs = PairedSampleService.differences(sample)
        p_values, statistics, degenerate = [], [], []

        for k in range(sample.d):
            z_k = diffs.column(k)
            try:
                if uni_test == UniTest.wsr:
                    outcome = WilcoxonSignedRank.wsr_test(
                        z_k, theta0=0.0, alpha=alpha, mode=WsrMode.auto
                    )
                    statistic, p_value = outcome.statistic, outcome.p_value
                else:
                    statistic, p_value = MultipleTesting.paired_t_pvalue(z_k)
            except DegenerateError:
                logger.warning(
                    f"Feature {k} ({sample.feature_names[k]}) has all-zero differences; p set to 1"
                )
                degenerate.append(k)
                statistic, p_value = 0.0, 1.0
            p_values.append(float(p_value))
            statistics.append(float(statistic))

        corrected_alpha = alpha / sample.d
        significant = [k for k, p in enumerate(p_values) if p < corrected_alpha]

        return MtResult(
            per_feature_p=p_values,
            corrected_alpha=corrected_alpha,
            significant_features=significant,
            overall_significant=bool(significant),
            uni_test=uni_test,
            alpha=alpha,
            feature_names=list(sample.feature_names),
            degenerate_features=degenerate,
            per_feature_statistic=statistics,
        )
