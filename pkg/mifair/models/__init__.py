"""MIFair Data Models Package.

Contains the dataclasses shared by every service.
"""

from .dataset import (
    FeatureKind, FeatureColumn, CategoricalColumn, BinarizeRule, SchemaConfig,
    FeatureEncoding, Dataset, SubgroupIndex, SynthGroup, SynthConfig
)
from .distribution import EmpiricalJoint
from .fairness import (
    Notion, PairwiseKind, FairnessNotion, Prediction, PairwiseEntry,
    PairwiseTable, IotaValue, MetricsReport, parse_notion
)
from .network import ModelParams, Gradients
from .training import CoveragePolicy, TrainConfig, EpochRecord, TrainTrace
from .experiment import (
    TrialStatus, SweepConfig, TrialRecord, ThresholdCrossing, SweepReport
)
from .verification import (
    OracleResult, FiniteDiffResult, Witness, BatteryResult, SelfCheckSummary
)
from .manifest import RunManifest

__all__ = [
    # Dataset models
    "FeatureKind",
    "FeatureColumn",
    "CategoricalColumn",
    "BinarizeRule",
    "SchemaConfig",
    "FeatureEncoding",
    "Dataset",
    "SubgroupIndex",
    "SynthGroup",
    "SynthConfig",
    # Estimation models
    "EmpiricalJoint",
    # Fairness models
    "Notion",
    "PairwiseKind",
    "FairnessNotion",
    "Prediction",
    "PairwiseEntry",
    "PairwiseTable",
    "IotaValue",
    "MetricsReport",
    "parse_notion",
    # Network models
    "ModelParams",
    "Gradients",
    # Training models
    "CoveragePolicy",
    "TrainConfig",
    "EpochRecord",
    "TrainTrace",
    # Experiment models
    "TrialStatus",
    "SweepConfig",
    "TrialRecord",
    "ThresholdCrossing",
    "SweepReport",
    # Verification models
    "OracleResult",
    "FiniteDiffResult",
    "Witness",
    "BatteryResult",
    "SelfCheckSummary",
    # Manifest
    "RunManifest",
]
