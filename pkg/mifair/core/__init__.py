"""MIFair Core Package.

Contains the sweep orchestrator, report writer and self-check runner.
"""

from .sweep_orchestrator import SweepOrchestrator, sweep, run_trial, flatten_report
from .reporting import emit_report
from .selfcheck import SelfCheckRunner, run_selfcheck

__all__ = [
    "SweepOrchestrator",
    "sweep",
    "run_trial",
    "flatten_report",
    "emit_report",
    "SelfCheckRunner",
    "run_selfcheck",
]
