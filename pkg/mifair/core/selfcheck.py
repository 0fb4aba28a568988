"""Self-Check Runner.

Runs the oracle batteries: MI agreement with the brute-force oracle,
finite-difference gradient checks and zero-gap witnesses per notion.
"""

import logging
import math
from typing import Dict, List, Optional

import numpy as np

from ..config import get_config
from ..models import (
    BatteryResult, EmpiricalJoint, FairnessNotion, Notion, OracleResult,
    PairwiseKind, SelfCheckSummary
)
from ..services import (
    composite_gradient_check, equivalence_witness, iota, mi_bruteforce,
    mutual_information, pairwise_baseline, perturb_witness
)

logger = logging.getLogger(__name__)

MAX_GROUPS = 8
MAX_BENEFITS = 4
WITNESS_SHAPES = ((2, 2), (8, 2), (3, 3))
KNOWN_TABLES = (
    ("independent 2x2", [[0.25, 0.25], [0.25, 0.25]], 0.0),
    ("bijection 2x2", [[0.5, 0.0], [0.0, 0.5]], math.log(2.0)),
    ("correlated 2x2", [[0.4, 0.1], [0.1, 0.4]], 0.8 * math.log(1.6) + 0.2 * math.log(0.4)),
)


def _witness_notion(tag: Notion, n_classes: int) -> FairnessNotion:
    if tag in (Notion.EO, Notion.PE) and n_classes > 2:
        return FairnessNotion(tag=tag, class_index=1)
    return FairnessNotion(tag=tag)


class SelfCheckRunner:
    """Runs every verification battery."""

    def __init__(self, seed: int = 0, config: Optional[Dict] = None):
        """Initialize self-check runner."""
        self.seed = seed
        self.config = config or get_config().verify
        self.logger = logging.getLogger(__name__)

    def run(self) -> SelfCheckSummary:
        summary = SelfCheckSummary(batteries=[
            self._mi_agreement(),
            self._gradient_check(),
            self._equivalence_witness(),
        ])
        for line in summary.lines():
            self.logger.info(line)
        return summary

    def _mi_agreement(self) -> BatteryResult:
        """Plug-in MI against the brute-force oracle on random tables."""
        tolerance = float(self.config.get("mi_tolerance", 1e-12))
        battery = BatteryResult(name="mi_agreement")
        for name, table, expected in KNOWN_TABLES:
            value = mutual_information(EmpiricalJoint.from_table(np.array(table)))
            battery.checks.append(OracleResult.compare(name, value, expected, tolerance))

        rng = np.random.default_rng(self.seed)
        for i in range(int(self.config.get("mi_tables", 500))):
            shape = (int(rng.integers(1, MAX_GROUPS + 1)), int(rng.integers(1, MAX_BENEFITS + 1)))
            table = rng.dirichlet(np.ones(shape[0] * shape[1])).reshape(shape)
            battery.checks.append(OracleResult.compare(
                f"table {i} {shape[0]}x{shape[1]}",
                mutual_information(EmpiricalJoint.from_table(table)),
                mi_bruteforce(table),
                tolerance
            ))
        return battery

    def _gradient_check(self) -> BatteryResult:
        """Analytic composite gradients against central differences."""
        tolerance = float(self.config.get("gradient_tolerance", 1e-4))
        instances = int(self.config.get("gradient_instances", 20))
        battery = BatteryResult(name="gradient_check")
        for offset, tag in enumerate(Notion):
            for i in range(instances):
                seed = self.seed * 10_000 + offset * 1_000 + i
                battery.checks.append(composite_gradient_check(FairnessNotion(tag=tag), seed, tolerance=tolerance))
        return battery

    def _equivalence_witness(self) -> BatteryResult:
        """Zero-gap witnesses give zero iota and gaps; one flip breaks both."""
        tolerance = float(self.config.get("witness_tolerance", 1e-12))
        floor = float(self.config.get("perturbation_floor", 1e-9))
        battery = BatteryResult(name="equivalence_witness")
        for tag in Notion:
            for n_groups, n_classes in WITNESS_SHAPES:
                notion = _witness_notion(tag, n_classes)
                label = f"{tag.value} G={n_groups} C={n_classes}"
                witness = equivalence_witness(notion, n_groups, n_classes, self.seed)
                ds, pred = witness.dataset, witness.prediction
                battery.checks.append(OracleResult.compare(
                    f"{label} iota", iota(notion, ds, pred, hard=True), 0.0, tolerance
                ))
                for kind in self._kinds(notion, n_classes):
                    gap = pairwise_baseline(kind, ds, pred).max_abs() or 0.0
                    battery.checks.append(OracleResult.compare(f"{label} {kind.value}", gap, 0.0, tolerance))

                ds_flip, pred_flip = perturb_witness(witness, notion)
                battery.checks.append(OracleResult.exceeds(
                    f"{label} perturbed iota", iota(notion, ds_flip, pred_flip, hard=True), floor
                ))
        return battery

    @staticmethod
    def _kinds(notion: FairnessNotion, n_classes: int) -> List[PairwiseKind]:
        if n_classes == 2:
            return list(notion.baselines)
        return [k for k in notion.baselines if k == PairwiseKind.OAE]


def run_selfcheck(seed: int = 0) -> SelfCheckSummary:
    """Run all batteries with the configured sizes and tolerances."""
    return SelfCheckRunner(seed).run()
