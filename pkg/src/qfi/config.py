"""Service configuration: one YAML file plus environment overrides.

Environment variables: QFI_CONFIG points at the config file, QFI_ADDR and
QFI_DATA_DIR override the listen address and data directory.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path

import yaml

from .errors import ConfigurationError

ENV_ADDR = "QFI_ADDR"
ENV_DATA_DIR = "QFI_DATA_DIR"
ENV_CONFIG = "QFI_CONFIG"


@dataclass
class GatewayConfig:
    addr: str = "127.0.0.1:8000"
    data_dir: str = "./data"
    catalog_path: str | None = None    # None -> packaged default catalog
    regions_path: str | None = None    # None -> packaged default region table
    default_shots: int = 2048
    default_qubits: int = 8
    keyset_height: int = 4
    default_excitation_bias: float = 0.35
    per_shot_cost_s: float = 0.0001
    default_region: str = "global-avg"
    sleep_latency: bool = False

    def __post_init__(self):
        if self.default_shots < 1 or self.default_qubits < 1:
            raise ConfigurationError("default_shots and default_qubits must be positive")
        if not 1 <= self.keyset_height <= 10:
            raise ConfigurationError("keyset_height must lie in [1, 10]")
        if not 0.0 < self.default_excitation_bias < 1.0:
            raise ConfigurationError("default_excitation_bias must lie in (0, 1)")

    @property
    def host(self) -> str:
        return self.addr.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.addr.rsplit(":", 1)[1])


def load_config(path: str | Path | None = None, env: dict | None = None) -> GatewayConfig:
    """Read the config file (if any) and apply environment overrides."""
    env = os.environ if env is None else env
    path = path or env.get(ENV_CONFIG)
    values: dict = {}
    if path:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                document = yaml.safe_load(fh) or {}
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigurationError(f"malformed config {path}: {exc}") from exc
        if not isinstance(document, dict):
            raise ConfigurationError("config file must be a mapping")
        known = {f.name for f in fields(GatewayConfig)}
        unknown = set(document) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys {sorted(unknown)}")
        values.update(document)
    if env.get(ENV_ADDR):
        values["addr"] = env[ENV_ADDR]
    if env.get(ENV_DATA_DIR):
        values["data_dir"] = env[ENV_DATA_DIR]
    try:
        return GatewayConfig(**values)
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from exc
