"""Training Data Models.

Optimizer configuration and per-epoch training traces.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

from ..exceptions import ConfigError
from .fairness import FairnessNotion, MetricsReport


class CoveragePolicy(str, Enum):
    """What to do when a batch lacks a condition set or a subgroup."""
    SKIP = "skip"
    ERROR = "error"


@dataclass
class TrainConfig:
    """Composite-objective training configuration.
    
    Attributes:
        notion: Fairness notion of the regularizer
        eta: Regularization strength
        epochs: Number of epochs, no early stopping
        batch_size: Minibatch size, None for full batch
        lr_schedule: (start epoch, rate) pairs; None uses the eta-dependent default
        momentum: SGD momentum
        weight_decay: L2 decay on weights (biases excluded)
        seed: Seed for initialization and minibatch order
        coverage_policy: Behaviour on missing coverage
    """
    notion: FairnessNotion = field(default_factory=FairnessNotion)
    eta: float = 0.0
    epochs: int = 500
    batch_size: Optional[int] = None
    lr_schedule: Optional[List[Tuple[int, float]]] = None
    momentum: float = 0.8
    weight_decay: float = 0.1
    seed: int = 0
    coverage_policy: CoveragePolicy = CoveragePolicy.SKIP
    
    def __post_init__(self) -> None:
        errors = []
        if not (self.eta >= 0):
            errors.append("eta must be >= 0")
        if not (0.0 <= self.momentum < 1.0):
            errors.append("momentum must satisfy 0 <= momentum < 1")
        if not (self.weight_decay >= 0):
            errors.append("weight_decay must be >= 0")
        if self.batch_size is not None and self.batch_size < 1:
            errors.append("batch_size must be >= 1")
        if self.epochs < 1:
            errors.append("epochs must be >= 1")
        if self.lr_schedule is not None:
            if not self.lr_schedule or any(rate <= 0 for _, rate in self.lr_schedule):
                errors.append("lr_schedule needs positive rates")
            self.lr_schedule = sorted((int(e), float(r)) for e, r in self.lr_schedule)
        if errors:
            raise ConfigError("Invalid training config", errors)
        self.coverage_policy = CoveragePolicy(self.coverage_policy)
    
    def learning_rate(self, epoch: int) -> float:
        """Rate in force at 0-based `epoch`."""
        if self.lr_schedule:
            rate = self.lr_schedule[0][1]
            for start, value in self.lr_schedule:
                if epoch >= start:
                    rate = value
            return rate
        from ..config import get_config
        rule = get_config().get('training.learning_rate', {})
        switch = float(rule.get('eta_switch', 1.0))
        return float(rule.get('low_eta', 0.1) if self.eta < switch else rule.get('high_eta', 0.01))
    
    def with_overrides(self, **changes) -> 'TrainConfig':
        values = {
            "notion": self.notion,
            "eta": self.eta,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "lr_schedule": list(self.lr_schedule) if self.lr_schedule else None,
            "momentum": self.momentum,
            "weight_decay": self.weight_decay,
            "seed": self.seed,
            "coverage_policy": self.coverage_policy
        }
        values.update(changes)
        return TrainConfig(**values)
    
    @classmethod
    def from_dict(cls, data: Dict) -> 'TrainConfig':
        """Build from a validated `train` section."""
        from ..utils.validators import validate_train_config
        is_valid, errors = validate_train_config(data)
        if not is_valid:
            raise ConfigError("Invalid train section", errors)
        lambdas = data.get("lambdas")
        notion = FairnessNotion.from_name(
            data.get("notion", "SP"),
            lambdas=tuple(lambdas) if lambdas else None,
            class_index=data.get("class_index"),
            normalize=bool(data.get("normalize", False))
        )
        schedule = data.get("lr_schedule")
        return cls(
            notion=notion,
            eta=float(data.get("eta", 0.0)),
            epochs=int(data["epochs"]),
            batch_size=data.get("batch_size"),
            lr_schedule=[tuple(entry) for entry in schedule] if schedule else None,
            momentum=float(data.get("momentum", 0.8)),
            weight_decay=float(data.get("weight_decay", 0.1)),
            seed=int(data.get("seed", 0)),
            coverage_policy=CoveragePolicy(data.get("coverage_policy", "skip"))
        )
    
    def to_dict(self) -> Dict:
        return {
            "notion": self.notion.to_dict(),
            "eta": self.eta,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "lr_schedule": [list(e) for e in self.lr_schedule] if self.lr_schedule else None,
            "momentum": self.momentum,
            "weight_decay": self.weight_decay,
            "seed": self.seed,
            "coverage_policy": self.coverage_policy.value
        }


@dataclass
class EpochRecord:
    """Training diagnostics at the end of one epoch."""
    epoch: int
    learning_rate: float
    loss: float
    iota: float
    objective: float
    train_acc: float
    eval_acc: float
    skipped_steps: int = 0
    
    def to_dict(self) -> Dict:
        return {
            "epoch": self.epoch,
            "learning_rate": self.learning_rate,
            "loss": self.loss,
            "iota": self.iota,
            "objective": self.objective,
            "train_acc": self.train_acc,
            "eval_acc": self.eval_acc,
            "skipped_steps": self.skipped_steps
        }


@dataclass
class TrainTrace:
    """Per-epoch records plus the final held-out report."""
    records: List[EpochRecord] = field(default_factory=list)
    final_report: Optional[MetricsReport] = None
    
    @property
    def epochs(self) -> int:
        return len(self.records)
    
    def column(self, name: str) -> List[float]:
        return [getattr(r, name) for r in self.records]
    
    def to_dict(self) -> Dict:
        return {
            "records": [r.to_dict() for r in self.records],
            "final_report": self.final_report.to_dict() if self.final_report else None
        }
