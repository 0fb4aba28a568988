"""MIFair Configuration Loader.

Loads default settings from config.yaml, supports environment variable
overrides and parses user run documents.
"""

import os
import yaml
from copy import deepcopy
from pathlib import Path
from typing import Any, Dict, Optional, Union

from ..exceptions import ConfigError


class Config:
    """Configuration manager for MIFair defaults."""
    
    _instance: Optional['Config'] = None
    _config: Dict[str, Any] = {}
    
    def __new__(cls) -> 'Config':
        """Singleton pattern for configuration."""
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance._load_config()
        return cls._instance
    
    def _load_config(self) -> None:
        """Load configuration from config.yaml file."""
        config_path = Path(__file__).parent / "config.yaml"
        
        if not config_path.exists():
            raise FileNotFoundError(f"Configuration file not found: {config_path}")
        
        with open(config_path, 'r') as f:
            self._config = yaml.safe_load(f)
        
        self._process_env_vars(self._config)
    
    def _process_env_vars(self, config: Any, parent_key: str = "") -> Any:
        """Recursively process environment variable placeholders."""
        if isinstance(config, dict):
            for key, value in config.items():
                new_key = f"{parent_key}.{key}" if parent_key else key
                config[key] = self._process_env_vars(value, new_key)
        elif isinstance(config, list):
            for i, item in enumerate(config):
                config[i] = self._process_env_vars(item, f"{parent_key}[{i}]")
        elif isinstance(config, str) and config.startswith("${") and config.endswith("}"):
            env_value = os.getenv(config[2:-1])
            if env_value is None:
                return ""
            return env_value
        return config
    
    def get(self, key: str, default: Any = None) -> Any:
        """Get configuration value by dot-notation key."""
        value = self._config
        for k in key.split('.'):
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default
        return value
    
    @property
    def app(self) -> Dict[str, Any]:
        return self._config.get('app', {})
    
    @property
    def estimation(self) -> Dict[str, Any]:
        return self._config.get('estimation', {})
    
    @property
    def training(self) -> Dict[str, Any]:
        return self._config.get('training', {})
    
    @property
    def sweep(self) -> Dict[str, Any]:
        return self._config.get('sweep', {})
    
    @property
    def verify(self) -> Dict[str, Any]:
        return self._config.get('verify', {})
    
    @property
    def jobs(self) -> int:
        """Sweep parallelism; MIFAIR_JOBS wins over the file default of 1."""
        raw = self.get('parallel.jobs', "")
        if raw in ("", None):
            return 1
        try:
            jobs = int(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"MIFAIR_JOBS must be an integer, got {raw!r}")
        if jobs < 1:
            raise ConfigError(f"MIFAIR_JOBS must be >= 1, got {jobs}")
        return jobs
    
    def reload(self) -> None:
        """Reload configuration from file."""
        self._load_config()


def get_config() -> Config:
    """Get the singleton configuration instance."""
    return Config()


def _merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_run_config(source: Union[str, Path, Dict[str, Any]]) -> Dict[str, Any]:
    """Load a run document and fill `training` / `sweep` gaps from defaults.

    Args:
        source: Path to a YAML document, or an already-parsed mapping
        
    Returns:
        Resolved document with `data`, `schema`, `synthetic`, `train`,
        `sweep` and `output` sections
    """
    if isinstance(source, dict):
        document = deepcopy(source)
    else:
        path = Path(source)
        if not path.exists():
            raise ConfigError(f"Config file not found: {path}")
        try:
            with open(path, 'r') as f:
                document = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"Config file {path} is not valid YAML: {e}")
    
    if not isinstance(document, dict):
        raise ConfigError("Config document must be a mapping")
    
    defaults = get_config()
    document['train'] = _merge(defaults.training, document.get('train') or {})
    document['sweep'] = _merge(defaults.sweep, document.get('sweep') or {})
    document.setdefault('output', {})
    return document
