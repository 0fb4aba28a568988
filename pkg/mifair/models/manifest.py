"""Run Manifest Data Model."""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Union


@dataclass
class RunManifest:
    """Resolved configuration and artifacts of one command run."""
    command: str
    config: Dict[str, Any]
    tool_version: str
    seeds: List[int] = field(default_factory=list)
    artifacts: Dict[str, str] = field(default_factory=dict)
    digests: Dict[str, str] = field(default_factory=dict)
    timings: Dict[str, float] = field(default_factory=dict)
    created_at: str = ""
    
    def add_artifact(self, name: str, path: Union[str, Path], digest: str = "") -> None:
        self.artifacts[name] = str(path)
        if digest:
            self.digests[name] = digest
    
    def to_dict(self) -> Dict:
        return {
            "command": self.command,
            "config": self.config,
            "tool_version": self.tool_version,
            "seeds": self.seeds,
            "artifacts": self.artifacts,
            "digests": self.digests,
            "timings": self.timings,
            "created_at": self.created_at
        }
    
    def save(self, path: Union[str, Path]) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")
    
    @classmethod
    def load(cls, path: Union[str, Path]) -> 'RunManifest':
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
        return cls(**data)
