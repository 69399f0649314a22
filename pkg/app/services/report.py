# app/services/report.py
"""
Runs one of the tests on a paired sample and turns its result into a
plain-dict report shared by the CLI (JSON or text) and the HTTP API.
"""

import logging
import math
from typing import List, Optional

from app.core.exceptions import DomainError
from app.schemas.enums import CliMethod
from app.schemas.mwsr import MwsrResult
from app.schemas.outcome import HotellingDetail, MtResult, TestOutcome
from app.schemas.run import TestOptions
from app.schemas.sample import PairedSample
from app.services.baselines import HotellingT2, MultipleTesting
from app.services.mwsr import MwsrService
from app.services.paired_sample import PairedSampleService
from app.services.wsr import WilcoxonSignedRank

logger = logging.getLogger(__name__)


def _mode(outcome: TestOutcome):
    return outcome.p_value_mode.value if outcome.p_value_mode else None


def _finite_or_none(value: float) -> Optional[float]:
    # JSON has no infinity; a zero-variance t statistic is reported as null
    return value if math.isfinite(value) else None


class ReportService:
    @staticmethod
    def run(method: CliMethod, sample: PairedSample, options: TestOptions) -> dict:
        method = CliMethod(method)
        if options.standardize:
            sample = PairedSampleService.standardize(sample)

        header = {
            "method": method.value,
            "n": sample.n,
            "d": sample.d,
            "alpha": options.alpha,
            "standardized": options.standardize,
            "feature_names": list(sample.feature_names),
        }

        if method == CliMethod.mwsr:
            result = MwsrService.mwsr_test(
                sample,
                alpha=options.alpha,
                degenerate_policy=options.degenerate_policy,
                normalize=options.normalize,
                mode=options.mode,
                tail=options.tail,
            )
            body = ReportService.mwsr_report(result, sample)
        elif method == CliMethod.ht2:
            body = ReportService.ht2_report(HotellingT2.hotelling_t2_paired(sample, options.alpha))
        elif method == CliMethod.mt:
            body = ReportService.mt_report(
                MultipleTesting.multiple_testing(sample, options.alpha, options.uni_test)
            )
        else:
            if sample.d != 1:
                raise DomainError(
                    f"The univariate signed-rank test needs a single feature, got d={sample.d}"
                )
            diffs = PairedSampleService.differences(sample)
            outcome = WilcoxonSignedRank.wsr_test(
                diffs.z, theta0=0.0, alpha=options.alpha, mode=options.mode, tail=options.tail
            )
            body = ReportService.wsr_report(outcome)

        logger.info(f"{method.value}: p={body['p_value']:.6g}, significant={body['significant']}")
        return {**header, **body}

    @staticmethod
    def wsr_report(outcome: TestOutcome) -> dict:
        return {
            "statistic": outcome.statistic,
            "p_value": outcome.p_value,
            "significant": outcome.significant,
            "effect_size": outcome.effect_size,
            "tail": outcome.tail.value,
            "p_value_mode": _mode(outcome),
            "n_effective": outcome.n_effective,
            "warnings": list(outcome.warnings),
        }

    @staticmethod
    def mwsr_report(result: MwsrResult, sample: PairedSample) -> dict:
        outcome = result.outcome
        scores = result.scores
        names = result.feature_names
        return {
            "statistic": outcome.statistic,
            "p_value": outcome.p_value,
            "significant": outcome.significant,
            "theta": outcome.effect_size,
            "theta_vector": {name: float(v) for name, v in zip(names, result.effect_vector)},
            "tail": outcome.tail.value,
            "p_value_mode": _mode(outcome),
            "n_effective": outcome.n_effective,
            "rule": {
                "w": {name: float(v) for name, v in zip(names, result.rule.w)},
                "b": result.rule.b,
                "normalized_bisectors": result.normalized_bisectors,
            },
            "rule_accuracy": MwsrService.rule_accuracy(result.rule, sample),
            "importance": {name: float(v) for name, v in zip(names, result.importance)},
            "importance_ranking": result.importance_ranking(),
            "scores": [
                {"subject": subject, "s1": float(s1), "s2": float(s2), "difference": float(s2 - s1)}
                for subject, s1, s2 in zip(result.subject_indices, scores.s1, scores.s2)
            ],
            "dropped_pairs": list(result.dropped_pairs),
            "warnings": list(outcome.warnings),
        }

    @staticmethod
    def ht2_report(detail: HotellingDetail) -> dict:
        return {
            "t2": detail.t2,
            "f_statistic": detail.f_statistic,
            "df": [detail.df1, detail.df2],
            "p_value": detail.outcome.p_value,
            "significant": detail.outcome.significant,
        }

    @staticmethod
    def mt_report(result: MtResult) -> dict:
        return {
            "uni_test": result.uni_test.value,
            "corrected_alpha": result.corrected_alpha,
            "per_feature": [
                {
                    "feature": name,
                    "index": k,
                    "statistic": _finite_or_none(result.per_feature_statistic[k]),
                    "p_value": p,
                    "significant": k in result.significant_features,
                    "degenerate": k in result.degenerate_features,
                }
                for k, (name, p) in enumerate(zip(result.feature_names, result.per_feature_p))
            ],
            "significant_features": [result.feature_names[k] for k in result.significant_features],
            # smallest raw p-value, the one compared against alpha / d
            "p_value": min(result.per_feature_p),
            "significant": result.overall_significant,
        }

    @staticmethod
    def render_text(report: dict) -> str:
        lines: List[str] = [
            f"method: {report['method']}  (N={report['n']}, d={report['d']}, alpha={report['alpha']})",
            f"p-value: {report['p_value']:.6g}",
            f"significant: {'yes' if report['significant'] else 'no'}",
        ]
        method = report["method"]
        if method == CliMethod.mwsr.value:
            lines.append(f"theta (score units): {report['theta']:.6g}")
            lines.append(f"p-value mode: {report['p_value_mode']}")
            lines.append(f"rule intercept b: {report['rule']['b']:.6g}")
            lines.append("feature importance (sorted by |importance|):")
            for item in report["importance_ranking"]:
                lines.append(f"  {item['feature']:<20} {item['importance']:+.4f}")
        elif method == CliMethod.ht2.value:
            lines.append(f"T2: {report['t2']:.6g}")
            lines.append(f"F({report['df'][0]}, {report['df'][1]}): {report['f_statistic']:.6g}")
        elif method == CliMethod.mt.value:
            lines.append(f"univariate test: {report['uni_test']}")
            lines.append(f"corrected alpha: {report['corrected_alpha']:.6g}")
            for item in report["per_feature"]:
                flag = "*" if item["significant"] else " "
                lines.append(f"  {flag} {item['feature']:<20} p={item['p_value']:.6g}")
        else:
            lines.append(f"T+: {report['statistic']:g}")
            lines.append(f"effect size (Hodges-Lehmann): {report['effect_size']:.6g}")
            lines.append(f"p-value mode: {report['p_value_mode']}")
        for warning in report.get("warnings", []):
            lines.append(f"warning: {warning}")
        return "\n".join(lines)
