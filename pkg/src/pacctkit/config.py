"""Analysis configuration file.

JSON object with all keys optional:

    {
      "ahz": 100,
      "edges": {"utime": [0, 1, 2, 4, 8, 16], "mem": [0, 500, 2000, 7000]},
      "mem_adaptive": false,
      "passwd": "passwd"
    }

edges keys are report names (users-total, users-distinct, stime, utime,
etime, mem); each list must start at 0, increase strictly and contain at
least two values. passwd points at a passwd(5)-format file used to label
uids with login names; a relative path is resolved against the config
file's directory.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

_EDGE_REPORTS = ("users-total", "users-distinct", "stime", "utime", "etime", "mem")
_KNOWN_KEYS = {"ahz", "edges", "mem_adaptive", "passwd"}


@dataclass
class AnalysisConfig:
    ahz: int = 100
    edges: dict[str, tuple[float, ...]] = field(default_factory=dict)
    mem_adaptive: bool = False
    passwd_path: Path | None = None

    def user_names(self) -> dict[int, str]:
        if self.passwd_path is None:
            return {}
        return load_passwd(self.passwd_path)


def _check_edges(name: str, values) -> tuple[float, ...]:
    if not isinstance(values, list) or len(values) < 2:
        raise ConfigError(f"edges.{name}: need a list of at least two numbers")
    try:
        edges = tuple(float(v) for v in values)
    except (TypeError, ValueError):
        raise ConfigError(f"edges.{name}: entries must be numbers") from None
    if edges[0] != 0.0:
        raise ConfigError(f"edges.{name}: first edge must be 0")
    if any(a >= b for a, b in zip(edges, edges[1:])):
        raise ConfigError(f"edges.{name}: edges must be strictly increasing")
    return edges


def load_config(path: str | Path) -> AnalysisConfig:
    """Read and validate a config file. Unknown keys are rejected."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    unknown = set(data) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")

    cfg = AnalysisConfig()
    if "ahz" in data:
        ahz = data["ahz"]
        if not isinstance(ahz, int) or isinstance(ahz, bool) or ahz <= 0:
            raise ConfigError("ahz must be a positive integer")
        cfg.ahz = ahz
    if "edges" in data:
        block = data["edges"]
        if not isinstance(block, dict):
            raise ConfigError("edges must be an object of report name -> list")
        for name, values in block.items():
            if name not in _EDGE_REPORTS:
                raise ConfigError(
                    f"edges.{name}: unknown report (expected one of {_EDGE_REPORTS})"
                )
            cfg.edges[name] = _check_edges(name, values)
    if "mem_adaptive" in data:
        if not isinstance(data["mem_adaptive"], bool):
            raise ConfigError("mem_adaptive must be true or false")
        cfg.mem_adaptive = data["mem_adaptive"]
    if "passwd" in data:
        if not isinstance(data["passwd"], str):
            raise ConfigError("passwd must be a path string")
        p = Path(data["passwd"])
        cfg.passwd_path = p if p.is_absolute() else path.parent / p
    return cfg


def load_passwd(path: str | Path) -> dict[int, str]:
    """Map uid -> login name from a passwd(5)-format file.

    Lines that do not parse are skipped; first entry per uid wins.
    """
    names: dict[int, str] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read passwd file {path}: {exc}") from None
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(":")
        if len(parts) < 3:
            continue
        try:
            uid = int(parts[2])
        except ValueError:
            continue
        names.setdefault(uid, parts[0])
    return names
