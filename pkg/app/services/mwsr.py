# app/services/mwsr.py
"""
Multivariate Wilcoxon signed-rank (MWSR) test.

Step 1 builds the perpendicular bisecting hyperplane of every (x_i, y_i)
pair, oriented from x_i towards y_i, averages all pairs of hyperplanes
(i <= j, coefficients and intercept component-wise) and takes the
coefficient-wise median of those averages: the pseudomedian rule. Both
samples are scored by their signed distance to that rule.

Step 2 runs the univariate signed-rank test on the per-subject score
differences. The unit normal of the pseudomedian rule is the feature
importance vector.
"""

import logging
from typing import List, Optional, Tuple

import numpy as np

from app.core.config import settings
from app.core.exceptions import (
    DegeneratePairError,
    DegenerateRuleError,
    DomainError,
    InsufficientDataError,
)
from app.schemas.enums import DegeneratePolicy, MethodTag, Tail, WsrMode
from app.schemas.mwsr import Hyperplane, MwsrResult, ScorePair
from app.schemas.sample import PairedSample
from app.services.wsr import WilcoxonSignedRank

logger = logging.getLogger(__name__)


def _coincident_rows(x: np.ndarray, y: np.ndarray, rtol: float) -> np.ndarray:
    scale = np.maximum(np.abs(x), np.abs(y))
    return np.all(np.abs(y - x) <= rtol * scale, axis=1)


def _bisector_arrays(
    x: np.ndarray, y: np.ndarray, normalize: bool = True
) -> Tuple[np.ndarray, np.ndarray]:
    """Coefficients (N x d) and intercepts (N,) of the pairwise bisectors."""
    w = y - x
    if normalize:
        w = w / np.linalg.norm(w, axis=1, keepdims=True)
    midpoints = (x + y) / 2.0
    b = -np.einsum("ij,ij->i", w, midpoints)
    return w, b


def _walsh_arrays(w: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    i, j = np.triu_indices(w.shape[0])
    return (w[i] + w[j]) / 2.0, (b[i] + b[j]) / 2.0


def _pseudomedian_arrays(w: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, float]:
    walsh_w, walsh_b = _walsh_arrays(w, b)
    return np.median(walsh_w, axis=0), float(np.median(walsh_b))


def _stack(rules: List[Hyperplane]) -> Tuple[np.ndarray, np.ndarray]:
    if not rules:
        raise DomainError("Need at least one hyperplane")
    d = rules[0].d
    for index, rule in enumerate(rules):
        if rule.d != d:
            raise DomainError(
                f"Hyperplane {index} has dimension {rule.d}, expected {d}"
            )
    return np.vstack([rule.w for rule in rules]), np.array([rule.b for rule in rules])


def _unit_normal(rule: Hyperplane) -> Tuple[np.ndarray, float]:
    norm = float(np.linalg.norm(rule.w))
    if norm == 0.0:
        raise DegenerateRuleError("Decision rule has an all-zero coefficient vector")
    return rule.w / norm, norm


class MwsrService:
    @staticmethod
    def perpendicular_bisector(
        x_i,
        y_i,
        normalize: bool = True,
        row: Optional[int] = None,
        rtol: Optional[float] = None,
    ) -> Hyperplane:
        rtol = settings.DEGENERATE_PAIR_RTOL if rtol is None else rtol
        x_i = np.atleast_2d(np.asarray(x_i, dtype=float))
        y_i = np.atleast_2d(np.asarray(y_i, dtype=float))
        if x_i.shape != y_i.shape or x_i.shape[0] != 1:
            raise DomainError(f"Pair points must be vectors of equal length, got {x_i.shape} and {y_i.shape}")

        if _coincident_rows(x_i, y_i, rtol)[0]:
            where = f" at row {row}" if row is not None else ""
            raise DegeneratePairError(
                f"Coincident pair{where}: the perpendicular bisector is undefined",
                row=row,
            )

        w, b = _bisector_arrays(x_i, y_i, normalize)
        return Hyperplane(w=w[0], b=float(b[0]))

    @staticmethod
    def walsh_hyperplane_averages(rules: List[Hyperplane]) -> List[Hyperplane]:
        w, b = _walsh_arrays(*_stack(rules))
        return [Hyperplane(w=w_k, b=float(b_k)) for w_k, b_k in zip(w, b)]

    @staticmethod
    def pseudomedian_rule(rules: List[Hyperplane]) -> Hyperplane:
        w_hat, b_hat = _pseudomedian_arrays(*_stack(rules))
        return Hyperplane(w=w_hat, b=b_hat)

    @staticmethod
    def score(rule: Hyperplane, sample: PairedSample) -> ScorePair:
        """Signed distances of the x rows and the y rows to the rule."""
        if rule.d != sample.d:
            raise DomainError(f"Rule dimension {rule.d} does not match sample dimension {sample.d}")
        unit_w, norm = _unit_normal(rule)
        offset = rule.b / norm
        return ScorePair(s1=sample.x @ unit_w + offset, s2=sample.y @ unit_w + offset)

    @staticmethod
    def feature_importance(rule: Hyperplane) -> np.ndarray:
        unit_w, _ = _unit_normal(rule)
        return unit_w

    @staticmethod
    def classify(rule: Hyperplane, points) -> np.ndarray:
        """+1 on the y side of the rule, -1 on the x side, 0 on the hyperplane."""
        return np.sign(rule.decision_value(points)).astype(int)

    @staticmethod
    def rule_accuracy(rule: Hyperplane, sample: PairedSample) -> float:
        """Fraction of the 2N points the rule puts on their own sample's side."""
        correct = np.sum(MwsrService.classify(rule, sample.x) < 0) + np.sum(
            MwsrService.classify(rule, sample.y) > 0
        )
        return float(correct) / (2 * sample.n)

    @staticmethod
    def univariate_threshold(x, y) -> float:
        """Hodges-Lehmann location of the pair midpoints, the 1-d pseudomedian rule."""
        x = np.asarray(x, dtype=float).ravel()
        y = np.asarray(y, dtype=float).ravel()
        if x.shape != y.shape:
            raise DomainError(f"x and y differ in length: {x.size} vs {y.size}")
        return WilcoxonSignedRank.hodges_lehmann((x + y) / 2.0)

    @staticmethod
    def mwsr_test(
        sample: PairedSample,
        alpha: Optional[float] = None,
        degenerate_policy: DegeneratePolicy = DegeneratePolicy.drop,
        normalize: bool = True,
        mode: WsrMode = WsrMode.auto,
        tail: Tail = Tail.two_sided,
    ) -> MwsrResult:
        alpha = settings.DEFAULT_ALPHA if alpha is None else alpha
        degenerate_policy = DegeneratePolicy(degenerate_policy)

        coincident = _coincident_rows(sample.x, sample.y, settings.DEGENERATE_PAIR_RTOL)
        dropped = [int(i) for i in np.nonzero(coincident)[0]]
        warnings = []
        if dropped:
            if degenerate_policy == DegeneratePolicy.abort:
                raise DegeneratePairError(
                    f"Coincident pair at row {dropped[0]}: the perpendicular bisector is undefined",
                    row=dropped[0],
                )
            message = f"dropped {len(dropped)} coincident pair(s) at rows {dropped}"
            logger.warning(message)
            warnings.append(message)

        kept = [int(i) for i in np.nonzero(~coincident)[0]]
        if len(kept) < 2:
            raise InsufficientDataError(
                f"MWSR needs at least 2 non-coincident pairs, got {len(kept)}"
            )
        retained = sample.take_rows(kept) if dropped else sample

        # Step 1: pseudomedian rule and scores
        w, b = _bisector_arrays(retained.x, retained.y, normalize)
        w_hat, b_hat = _pseudomedian_arrays(w, b)
        rule = Hyperplane(w=w_hat, b=b_hat)
        scores = MwsrService.score(rule, retained)

        # Step 2: signed-rank test on the score differences
        outcome = WilcoxonSignedRank.wsr_test(
            scores.differences, theta0=0.0, alpha=alpha, mode=mode, tail=tail
        )
        outcome = outcome.model_copy(
            update={"method": MethodTag.mwsr, "warnings": warnings + outcome.warnings}
        )

        importance = MwsrService.feature_importance(rule)
        logger.debug(
            f"MWSR N={retained.n}, d={retained.d}: p={outcome.p_value:.4g}, "
            f"theta={outcome.effect_size:.4g}"
        )

        return MwsrResult(
            rule=rule,
            scores=scores,
            outcome=outcome,
            importance=importance,
            effect_vector=outcome.effect_size * importance,
            feature_names=list(sample.feature_names),
            subject_indices=kept,
            dropped_pairs=dropped,
            normalized_bisectors=normalize,
        )
