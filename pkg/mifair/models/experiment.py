"""Experiment Data Models.

Sweep configuration, per-trial records and aggregated sweep reports.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

from ..exceptions import ConfigError
from .fairness import Notion
from .training import TrainConfig

ALL_NOTIONS: Tuple[str, ...] = tuple(n.value for n in Notion)


class TrialStatus(str, Enum):
    """Trial outcome."""
    OK = "ok"
    FAILED = "failed"


@dataclass
class SweepConfig:
    """Eta x seed grid around a base training configuration.
    
    Attributes:
        base: Training configuration shared by all trials
        etas: Regularization strengths; 0 (vanilla) is always added
        seeds: One trial per seed per eta
        threshold: Fairness threshold s on |pairwise| values
        eval_notions: Notions assessed on every trained model
        hidden_sizes: Hidden layer widths of the classifier
        units: Reporting unit for MI values
        normalize: Also record I/H(B)
    """
    base: TrainConfig
    etas: List[float]
    seeds: List[int] = field(default_factory=lambda: [0, 1, 2, 3, 4])
    threshold: float = 0.2
    eval_notions: Tuple[str, ...] = ALL_NOTIONS
    hidden_sizes: Tuple[int, ...] = (16,)
    units: str = "nats"
    normalize: bool = False
    
    def __post_init__(self) -> None:
        errors = []
        if not self.etas:
            errors.append("eta grid must be non-empty")
        if any(e < 0 for e in self.etas):
            errors.append("eta values must be >= 0")
        if not self.seeds:
            errors.append("at least one seed is required")
        if not (0.0 < self.threshold <= 1.0):
            errors.append("threshold must satisfy 0 < s <= 1")
        if self.units not in ("nats", "bits"):
            errors.append("units must be 'nats' or 'bits'")
        if errors:
            raise ConfigError("Invalid sweep config", errors)
        self.etas = sorted({0.0} | {float(e) for e in self.etas})
        self.seeds = [int(s) for s in self.seeds]
        self.hidden_sizes = tuple(self.hidden_sizes)
        self.eval_notions = tuple(self.eval_notions)
    
    @property
    def n_trials(self) -> int:
        return len(self.etas) * len(self.seeds)
    
    def to_dict(self) -> Dict:
        return {
            "base": self.base.to_dict(),
            "etas": self.etas,
            "seeds": self.seeds,
            "threshold": self.threshold,
            "eval_notions": list(self.eval_notions),
            "hidden_sizes": list(self.hidden_sizes),
            "units": self.units,
            "normalize": self.normalize
        }


@dataclass
class TrialRecord:
    """Outcome of one (eta, seed) training run.
    
    `metrics` is flat: `iota_SP`, `SPD:a>b`, `ACC_mean`, ... evaluated on
    held-out data; empty for failed trials.
    """
    eta: float
    seed: int
    status: TrialStatus = TrialStatus.OK
    error: Optional[str] = None
    metrics: Dict[str, float] = field(default_factory=dict)
    epochs_run: int = 0
    final_loss: Optional[float] = None
    
    @property
    def ok(self) -> bool:
        return self.status == TrialStatus.OK
    
    def to_dict(self) -> Dict:
        return {
            "eta": self.eta,
            "seed": self.seed,
            "status": self.status.value,
            "error": self.error,
            "epochs_run": self.epochs_run,
            "final_loss": self.final_loss,
            "metrics": dict(self.metrics)
        }


@dataclass
class ThresholdCrossing:
    """Smallest grid eta whose per-eta mean |pairwise| values all sit within s."""
    kind: str
    eta: Optional[float]
    max_abs_at_eta: Optional[float] = None
    vanilla_max_abs: Optional[float] = None
    
    def to_dict(self) -> Dict:
        return {
            "kind": self.kind,
            "eta": self.eta,
            "max_abs_at_eta": self.max_abs_at_eta,
            "vanilla_max_abs": self.vanilla_max_abs
        }


@dataclass
class SweepReport:
    """All trials of a sweep plus their per-eta aggregates.
    
    Attributes:
        config: The sweep that produced the report
        trials: One record per (eta, seed), grid order
        aggregates: One row per eta: `eta, n_ok, n_failed, <metric>_mean, <metric>_std`
        metric_names: Metric columns in stable order
        crossings: Threshold-crossing summary per pairwise kind
    """
    config: SweepConfig
    trials: List[TrialRecord] = field(default_factory=list)
    aggregates: List[Dict[str, float]] = field(default_factory=list)
    metric_names: List[str] = field(default_factory=list)
    crossings: List[ThresholdCrossing] = field(default_factory=list)
    
    @property
    def n_failed(self) -> int:
        return sum(1 for t in self.trials if not t.ok)
    
    def aggregate_for(self, eta: float) -> Dict[str, float]:
        for row in self.aggregates:
            if row["eta"] == eta:
                return row
        raise KeyError(f"No aggregate row for eta={eta}")
    
    def to_dict(self) -> Dict:
        return {
            "config": self.config.to_dict(),
            "trials": [t.to_dict() for t in self.trials],
            "aggregates": self.aggregates,
            "metric_names": self.metric_names,
            "crossings": [c.to_dict() for c in self.crossings],
            "n_failed": self.n_failed
        }
