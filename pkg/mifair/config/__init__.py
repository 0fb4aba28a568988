"""MIFair Configuration Package."""

from .config import Config, get_config, load_run_config

__all__ = ["Config", "get_config", "load_run_config"]
