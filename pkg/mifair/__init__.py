"""MIFair.

Mutual-information measures of group fairness for classifiers: assessment,
MI-regularized training and eta sweeps.
"""

__version__ = "1.0.0"
__author__ = "MIFair"

from .config import get_config
from .core import SweepOrchestrator, run_selfcheck, sweep
from .services import assess, iota, train

__all__ = ["get_config", "SweepOrchestrator", "sweep", "run_selfcheck", "assess", "iota", "train"]
