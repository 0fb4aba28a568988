"""MIFair Services Package.

Contains the computation engines: data loading, estimation, metrics, the
classifier, the trainer and the verification oracles.
"""

from .data_loader import load_csv, enumerate_subgroups, split, restandardize, synth_biased
from .estimation_engine import (
    joint_hard, joint_soft, mutual_information, conditional_mi, entropy, to_units
)
from .metrics_engine import (
    MetricsEngine, benefit_distribution, iota, pairwise_baseline, ddp, accuracies,
    assess, report_records, write_report
)
from .classifier import (
    init_params, forward, backward, cross_entropy, loss,
    save_checkpoint, load_checkpoint
)
from .trainer import Trainer, regularizer, objective, missing_coverage, train
from .oracle_engine import (
    mi_bruteforce, finite_diff, check_gradient, composite_gradient_check,
    equivalence_witness, perturb_witness
)

__all__ = [
    # Data
    "load_csv",
    "enumerate_subgroups",
    "split",
    "restandardize",
    "synth_biased",
    # Estimation
    "joint_hard",
    "joint_soft",
    "mutual_information",
    "conditional_mi",
    "entropy",
    "to_units",
    # Metrics
    "MetricsEngine",
    "benefit_distribution",
    "iota",
    "pairwise_baseline",
    "ddp",
    "accuracies",
    "assess",
    "report_records",
    "write_report",
    # Model
    "init_params",
    "forward",
    "backward",
    "cross_entropy",
    "loss",
    "save_checkpoint",
    "load_checkpoint",
    # Training
    "Trainer",
    "regularizer",
    "objective",
    "missing_coverage",
    "train",
    # Verification
    "mi_bruteforce",
    "finite_diff",
    "check_gradient",
    "composite_gradient_check",
    "equivalence_witness",
    "perturb_witness",
]
