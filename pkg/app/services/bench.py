# app/services/bench.py
"""
Monte-Carlo power benchmark.

Every (scenario, shift, trial) cell gets its own seed derived from the master
seed and the three indices, so adding methods or workers never changes the
generated data. Trial results land in pre-assigned slots and are aggregated
in a fixed order, which keeps reports identical for any worker count.
"""

import csv
import hashlib
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional, Sequence, Union

import numpy as np

from app.core.config import settings
from app.core.exceptions import DomainError, OutputError, PairedTestError, SingularMatrixError
from app.schemas.bench import BenchConfig, BenchReport, BenchRow, ImportanceRow, ScenarioConfig
from app.schemas.enums import BenchMethod, UniTest
from app.services.baselines import HotellingT2, MultipleTesting
from app.services.mwsr import MwsrService
from app.services.synthgen import ScenarioGenerator

logger = logging.getLogger(__name__)

POWER_COLUMNS = [
    "method", "n", "d", "std", "rho", "shift", "trials", "alpha",
    "detections", "errors", "detection_rate", "mean_runtime_s",
]
IMPORTANCE_COLUMNS = [
    "scenario_id", "shift", "feature_index", "feature_name",
    "mwsr_mean_abs_importance", "mt_significant_fraction",
]


class MethodRun(NamedTuple):
    detected: bool
    error: Optional[str]
    runtime_s: float


class TrialSpec(NamedTuple):
    scenario: ScenarioConfig
    methods: tuple
    alpha: float
    importance_method: Optional[BenchMethod]


class TrialResult(NamedTuple):
    runs: Dict[BenchMethod, MethodRun]
    abs_importance: Optional[np.ndarray]
    mt_significant: Optional[np.ndarray]


def _run_method(method: BenchMethod, sample, alpha: float):
    if method == BenchMethod.mwsr:
        result = MwsrService.mwsr_test(sample, alpha=alpha)
        return result.outcome.significant, result
    if method == BenchMethod.mwsr_raw:
        result = MwsrService.mwsr_test(sample, alpha=alpha, normalize=False)
        return result.outcome.significant, result
    if method == BenchMethod.mt_wsr:
        result = MultipleTesting.multiple_testing(sample, alpha=alpha, uni_test=UniTest.wsr)
        return result.overall_significant, result
    if method == BenchMethod.mt_ttest:
        result = MultipleTesting.multiple_testing(sample, alpha=alpha, uni_test=UniTest.ttest)
        return result.overall_significant, result
    result = HotellingT2.hotelling_t2_paired(sample, alpha=alpha)
    return result.outcome.significant, result


def _run_trial(spec: TrialSpec) -> TrialResult:
    sample = ScenarioGenerator.generate_scenario(spec.scenario)
    runs = {}
    abs_importance = None
    mt_significant = None

    for method in spec.methods:
        start = time.perf_counter()
        try:
            detected, result = _run_method(method, sample, spec.alpha)
            error = None
        except SingularMatrixError:
            detected, result, error = False, None, "singular"
        except PairedTestError as e:
            detected, result, error = False, None, type(e).__name__
        runs[method] = MethodRun(bool(detected), error, time.perf_counter() - start)

        if result is None:
            continue
        if method == BenchMethod.mwsr:
            abs_importance = np.abs(result.importance)
        if method == spec.importance_method:
            mask = np.zeros(sample.d, dtype=bool)
            mask[result.significant_features] = True
            mt_significant = mask

    return TrialResult(runs, abs_importance, mt_significant)


def _config_digest(payload: dict) -> str:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _fmt(value) -> str:
    if value is None:
        return "NA"
    if isinstance(value, float):
        return repr(value)
    return str(value)


class PowerBenchmark:
    @staticmethod
    def run_power_curve(
        grid: Sequence[ScenarioConfig],
        shifts: Sequence[float],
        trials: int,
        alpha: Optional[float] = None,
        methods: Sequence[BenchMethod] = tuple(BenchMethod),
        master_seed: Optional[int] = None,
        workers: int = 1,
        record_runtime: bool = True,
        collect_importance: bool = True,
    ) -> BenchReport:
        alpha = settings.DEFAULT_ALPHA if alpha is None else alpha
        master_seed = settings.BENCH_MASTER_SEED if master_seed is None else master_seed
        shifts = [float(s) for s in shifts]
        # dedupe while keeping a fixed order
        methods = tuple(sorted({BenchMethod(m) for m in methods}, key=lambda m: m.value))

        if not grid:
            raise DomainError("Benchmark grid is empty")
        if not shifts:
            raise DomainError("Shift grid is empty")
        if trials < 1:
            raise DomainError(f"trials must be >= 1, got {trials}")
        if not methods:
            raise DomainError("No benchmark methods requested")
        if not 0.0 < alpha < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {alpha}")

        importance_method = None
        if collect_importance:
            if BenchMethod.mt_wsr in methods:
                importance_method = BenchMethod.mt_wsr
            elif BenchMethod.mt_ttest in methods:
                importance_method = BenchMethod.mt_ttest

        specs = []
        for s_idx, template in enumerate(grid):
            for h_idx, shift in enumerate(shifts):
                for t_idx in range(trials):
                    seed = ScenarioGenerator.derive_seed(master_seed, (s_idx, h_idx, t_idx))
                    scenario = template.model_copy(update={"shift": shift, "seed": seed})
                    specs.append(TrialSpec(scenario, methods, alpha, importance_method))

        logger.info(
            f"Running {len(specs)} trials ({len(grid)} scenarios x {len(shifts)} shifts x "
            f"{trials} trials) with {workers} worker(s)"
        )
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as executor:
                results = list(executor.map(_run_trial, specs, chunksize=max(1, trials // 4)))
        else:
            results = [_run_trial(spec) for spec in specs]

        rows: List[BenchRow] = []
        importance_rows: List[ImportanceRow] = []
        for s_idx, template in enumerate(grid):
            for h_idx, shift in enumerate(shifts):
                start = (s_idx * len(shifts) + h_idx) * trials
                cell = results[start : start + trials]

                for method in methods:
                    runs = [r.runs[method] for r in cell]
                    detections = sum(run.detected for run in runs)
                    errors = sum(run.error is not None for run in runs)
                    runtime = (
                        float(np.mean([run.runtime_s for run in runs])) if record_runtime else None
                    )
                    rows.append(
                        BenchRow(
                            method=method,
                            n=template.n,
                            d=template.d,
                            std=template.std,
                            rho=template.rho,
                            shift=shift,
                            trials=trials,
                            alpha=alpha,
                            detections=detections,
                            errors=errors,
                            detection_rate=detections / trials,
                            mean_runtime_s=runtime,
                        )
                    )

                if collect_importance:
                    importance_rows.extend(
                        PowerBenchmark._importance_rows(template, shift, cell)
                    )

            logger.info(f"Scenario {template.scenario_id} done")

        rows.sort(key=lambda r: (r.method.value, r.d, r.std, r.shift, r.n, r.rho))
        digest = _config_digest(
            {
                "grid": [cfg.model_dump(exclude={"shift", "seed"}) for cfg in grid],
                "shifts": shifts,
                "trials": trials,
                "alpha": alpha,
                "methods": [m.value for m in methods],
                "master_seed": master_seed,
                "record_runtime": record_runtime,
                "collect_importance": collect_importance,
            }
        )
        return BenchReport(rows=rows, importance_summary=importance_rows, config_digest=digest)

    @staticmethod
    def _importance_rows(
        template: ScenarioConfig, shift: float, cell: List[TrialResult]
    ) -> List[ImportanceRow]:
        mwsr = [r.abs_importance for r in cell if r.abs_importance is not None]
        mt = [r.mt_significant for r in cell if r.mt_significant is not None]
        mean_abs = np.mean(mwsr, axis=0) if mwsr else None
        fraction = np.mean(mt, axis=0) if mt else None

        return [
            ImportanceRow(
                scenario_id=template.scenario_id,
                shift=shift,
                feature_index=k,
                feature_name=f"x{k + 1}",
                mwsr_mean_abs_importance=None if mean_abs is None else float(mean_abs[k]),
                mt_significant_fraction=None if fraction is None else float(fraction[k]),
            )
            for k in range(template.d)
        ]

    @staticmethod
    def run_config(config: BenchConfig, master_seed: Optional[int] = None, workers: Optional[int] = None) -> BenchReport:
        return PowerBenchmark.run_power_curve(
            grid=config.scenarios(),
            shifts=config.shifts,
            trials=config.trials,
            alpha=config.alpha,
            methods=config.methods,
            master_seed=config.master_seed if master_seed is None else master_seed,
            workers=config.workers if workers is None else workers,
            record_runtime=config.record_runtime,
            collect_importance=config.importance,
        )

    @staticmethod
    def importance_study(
        cfg: ScenarioConfig,
        shifts: Sequence[float],
        trials: int,
        master_seed: Optional[int] = None,
        alpha: Optional[float] = None,
        uni_test: UniTest = UniTest.wsr,
        workers: int = 1,
    ) -> List[ImportanceRow]:
        """Mean |MWSR importance| and MT significant fraction per feature and shift."""
        mt_method = BenchMethod.mt_wsr if UniTest(uni_test) == UniTest.wsr else BenchMethod.mt_ttest
        report = PowerBenchmark.run_power_curve(
            grid=[cfg],
            shifts=shifts,
            trials=trials,
            alpha=alpha,
            methods=(BenchMethod.mwsr, mt_method),
            master_seed=master_seed,
            workers=workers,
            record_runtime=False,
        )
        return report.importance_summary

    @staticmethod
    def emit_csv(report: BenchReport, path: Union[str, Path]) -> None:
        rows = sorted(report.rows, key=lambda r: (r.method.value, r.d, r.std, r.shift, r.n, r.rho))
        try:
            with Path(path).open("w", newline="", encoding="utf-8") as handle:
                writer = csv.writer(handle, lineterminator="\n")
                writer.writerow(POWER_COLUMNS)
                for row in rows:
                    record = row.model_dump()
                    record["method"] = row.method.value
                    writer.writerow([_fmt(record[column]) for column in POWER_COLUMNS])
        except OSError as e:
            raise OutputError(f"Cannot write power report to {path}: {e}", path=str(path))
        logger.info(f"Wrote {len(rows)} power rows to {path}")

    @staticmethod
    def emit_importance_csv(report: BenchReport, path: Union[str, Path]) -> None:
        try:
            with Path(path).open("w", newline="", encoding="utf-8") as handle:
                writer = csv.writer(handle, lineterminator="\n")
                writer.writerow(IMPORTANCE_COLUMNS)
                for row in report.importance_summary:
                    record = row.model_dump()
                    writer.writerow([_fmt(record[column]) for column in IMPORTANCE_COLUMNS])
        except OSError as e:
            raise OutputError(f"Cannot write importance report to {path}: {e}", path=str(path))
        logger.info(f"Wrote {len(report.importance_summary)} importance rows to {path}")
