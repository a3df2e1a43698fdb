"""Configuration: pydantic models over a local TOML file.

One file under config/:
  omegafactor.toml   engine limits, verification, simulator guards, logging,
                     and [families]: extra named forest-spec files

A missing file means all defaults. Nothing is read from the environment.
"""

from __future__ import annotations

import tomllib
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, Field


class EngineConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    # default radius cap for ball materialization (CLI --max-depth overrides)
    max_depth: int = Field(default=6, ge=0)
    # memo entries across label, demand and level caches
    memo_budget: int = Field(default=5_000_000, ge=1)


class VerifyConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    shrink: bool = True
    # demand prefix compared against the brute-force allocation per vertex
    demand_prefix: int = Field(default=10, ge=1)


class SimulatorConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    max_vertices: int = Field(default=5000, ge=1)


class LoggingConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    level: str = "WARNING"
    json_file: str | None = None


class Config(BaseModel):
    """Fully-resolved configuration tree."""

    model_config = ConfigDict(extra="forbid")

    engine: EngineConfig = EngineConfig()
    verify: VerifyConfig = VerifyConfig()
    simulator: SimulatorConfig = SimulatorConfig()
    logging: LoggingConfig = LoggingConfig()
    # name -> spec file path (relative paths resolve against config_dir)
    families: dict[str, str] = {}
    config_dir: Path = Path("config")

    def family_path(self, name: str) -> Path | None:
        raw = self.families.get(name)
        if raw is None:
            return None
        p = Path(raw)
        return p if p.is_absolute() else self.config_dir / p

    @classmethod
    def load(cls, config_dir: str | Path = "config") -> Config:
        cdir = Path(config_dir)
        main = _read_toml(cdir / "omegafactor.toml")
        return cls(
            engine=EngineConfig(**main.get("engine", {})),
            verify=VerifyConfig(**main.get("verify", {})),
            simulator=SimulatorConfig(**main.get("simulator", {})),
            logging=LoggingConfig(**main.get("logging", {})),
            families=dict(main.get("families", {})),
            config_dir=cdir,
        )


def _read_toml(path: Path) -> dict[str, Any]:
    if not path.exists():
        return {}
    with path.open("rb") as fh:
        return tomllib.load(fh)
