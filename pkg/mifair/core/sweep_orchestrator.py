"""Sweep Orchestrator.

Runs the eta x seed grid of a sweep, concurrently when more than one job is
allowed, and aggregates held-out metrics per eta.
"""

import asyncio
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..config import get_config
from ..exceptions import DivergenceError
from ..models import (
    Dataset, MetricsReport, PairwiseKind, SweepConfig, SweepReport,
    ThresholdCrossing, TrialRecord, TrialStatus
)
from ..services import MetricsEngine, Trainer, forward
from ..utils import run_async

logger = logging.getLogger(__name__)

PAIR_SEPARATOR = ">"


def pair_metric(kind: str, group_a: str, group_b: str) -> str:
    """Flat metric name of one ordered pair, e.g. `SPD:White|Male>Non-White|Male`."""
    return f"{kind}:{group_a}{PAIR_SEPARATOR}{group_b}"


def flatten_report(report: MetricsReport) -> Dict[str, float]:
    """Flat metric dict of a report; undefined pairwise entries are left out."""
    metrics: Dict[str, float] = {}
    for name, value in report.iota.items():
        metrics[f"iota_{name}"] = value.raw
        if value.normalized is not None:
            metrics[f"iota_norm_{name}"] = value.normalized
    for kind, table in report.pairwise.items():
        for entry in table.entries:
            if entry.defined:
                metrics[pair_metric(kind, entry.group_a, entry.group_b)] = entry.value
    if report.ddp is not None:
        metrics["DDP"] = report.ddp
    metrics["ACC_mean"] = report.acc_mean
    metrics["ACC_weighted"] = report.acc_weighted
    return metrics


def run_trial(
    config: SweepConfig,
    eta: float,
    seed: int,
    ds_train: Dataset,
    ds_eval: Dataset
) -> TrialRecord:
    """Train and assess one (eta, seed) cell; failures become failed records."""
    cfg = config.base.with_overrides(eta=eta, seed=seed)
    logger.info(f"Trial eta={eta:g} seed={seed} ({cfg.notion.name})")
    try:
        params, trace = Trainer(cfg).train(ds_train, ds_eval, config.hidden_sizes)
        engine = MetricsEngine({"units": config.units, "normalize": config.normalize, "hard": False})
        report = engine.assess(ds_eval, forward(params, ds_eval.features), config.eval_notions)
        return TrialRecord(
            eta=eta,
            seed=seed,
            metrics=flatten_report(report),
            epochs_run=trace.epochs,
            final_loss=trace.records[-1].loss if trace.records else None
        )
    except Exception as e:
        logger.error(f"Trial eta={eta:g} seed={seed} failed: {e}")
        epochs = len(e.trace.records) if isinstance(e, DivergenceError) and e.trace is not None else 0
        return TrialRecord(
            eta=eta,
            seed=seed,
            status=TrialStatus.FAILED,
            error=f"{type(e).__name__}: {e}",
            epochs_run=epochs
        )


def _metric_names(trials: Sequence[TrialRecord]) -> List[str]:
    names: Dict[str, None] = {}
    for trial in trials:
        if trial.ok:
            names.update(dict.fromkeys(trial.metrics))
    return list(names)


def aggregate(trials: Sequence[TrialRecord], etas: Sequence[float], metric_names: Sequence[str]) -> List[Dict[str, float]]:
    """Per-eta mean and population std of every metric over successful trials."""
    rows = []
    for eta in etas:
        cell = [t for t in trials if t.eta == eta]
        ok = [t for t in cell if t.ok]
        row: Dict[str, float] = {"eta": eta, "n_ok": len(ok), "n_failed": len(cell) - len(ok)}
        for name in metric_names:
            values = np.array([t.metrics[name] for t in ok if name in t.metrics], dtype=np.float64)
            row[f"{name}_mean"] = float(np.mean(values)) if values.size else float("nan")
            row[f"{name}_std"] = float(np.std(values)) if values.size else float("nan")
        rows.append(row)
    return rows


def crossings(
    aggregates: Sequence[Dict[str, float]],
    metric_names: Sequence[str],
    threshold: float
) -> List[ThresholdCrossing]:
    """Smallest eta at which every per-eta mean |pairwise| of a kind is <= threshold."""
    out = []
    for kind in PairwiseKind:
        prefix = f"{kind.value}:"
        pairs = [m for m in metric_names if m.startswith(prefix)]
        if not pairs:
            continue
        worst_by_eta: List[Tuple[float, Optional[float]]] = []
        for row in aggregates:
            means = [abs(row[f"{m}_mean"]) for m in pairs if np.isfinite(row[f"{m}_mean"])]
            worst_by_eta.append((row["eta"], max(means) if means else None))
        vanilla = next((worst for eta, worst in worst_by_eta if eta == 0.0), None)
        crossing = ThresholdCrossing(kind=kind.value, eta=None, vanilla_max_abs=vanilla)
        for eta, worst in sorted(worst_by_eta, key=lambda item: item[0]):
            if worst is not None and worst <= threshold:
                crossing.eta = eta
                crossing.max_abs_at_eta = worst
                break
        out.append(crossing)
    return out


class SweepOrchestrator:
    """Eta sweep orchestrator."""

    def __init__(self, config: SweepConfig, jobs: Optional[int] = None):
        """Initialize sweep orchestrator."""
        self.config = config
        self.jobs = jobs if jobs is not None else get_config().jobs
        self.logger = logging.getLogger(__name__)

    async def execute_sweep(self, ds_train: Dataset, ds_eval: Dataset) -> SweepReport:
        """Run every (eta, seed) trial and assemble the report."""
        cells = [(eta, seed) for eta in self.config.etas for seed in self.config.seeds]
        self.logger.info(
            f"Starting sweep: {len(self.config.etas)} etas x {len(self.config.seeds)} seeds "
            f"({self.config.base.notion.name}, jobs={self.jobs})"
        )

        if self.jobs > 1 and len(cells) > 1:
            trials = await self._run_parallel(cells, ds_train, ds_eval)
        else:
            trials = [run_trial(self.config, eta, seed, ds_train, ds_eval) for eta, seed in cells]

        report = SweepReport(config=self.config, trials=list(trials))
        report.metric_names = _metric_names(report.trials)
        report.aggregates = aggregate(report.trials, self.config.etas, report.metric_names)
        report.crossings = crossings(report.aggregates, report.metric_names, self.config.threshold)

        if report.n_failed:
            self.logger.warning(f"Sweep finished with {report.n_failed} failed trials")
        else:
            self.logger.info("Sweep completed successfully")
        return report

    async def _run_parallel(
        self,
        cells: List[Tuple[float, int]],
        ds_train: Dataset,
        ds_eval: Dataset
    ) -> List[TrialRecord]:
        loop = asyncio.get_running_loop()
        with ProcessPoolExecutor(max_workers=self.jobs) as pool:
            futures = [
                loop.run_in_executor(pool, run_trial, self.config, eta, seed, ds_train, ds_eval)
                for eta, seed in cells
            ]
            results = await asyncio.gather(*futures, return_exceptions=True)

        trials = []
        for (eta, seed), result in zip(cells, results):
            if isinstance(result, BaseException):
                self.logger.error(f"Trial eta={eta:g} seed={seed} crashed its worker: {result}")
                result = TrialRecord(
                    eta=eta, seed=seed, status=TrialStatus.FAILED, error=f"{type(result).__name__}: {result}"
                )
            trials.append(result)
        return trials


def sweep(
    cfg: SweepConfig,
    ds_train: Dataset,
    ds_eval: Dataset,
    jobs: Optional[int] = None
) -> SweepReport:
    """Synchronous wrapper around `SweepOrchestrator.execute_sweep`."""
    return run_async(SweepOrchestrator(cfg, jobs).execute_sweep(ds_train, ds_eval))
