"""Run configuration: one YAML document per run, command-line flags win."""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import yaml

from .geometry import Deployment, LidarModel, load_preset
from .metric import GridSpec
from .optimize import InvalidSwarm, ObjectiveParams, SearchSpace, SwarmParams


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    model: LidarModel
    scenario_path: Path
    scenario_format: str
    deployment: Deployment | None
    space: SearchSpace | None
    swarm: SwarmParams
    objective: ObjectiveParams
    frame_stride: int
    seed: int
    out: Path
    voxel_edge: float
    config_hash: str

    @property
    def grid(self) -> GridSpec:
        return self.objective.grid


def _deployment(d: dict) -> Deployment:
    return Deployment(
        tuple(d.get("position", (0.0, 0.0, 2.0))),
        float(d.get("tilt_x_deg", 0.0)),
        float(d.get("tilt_y_deg", 0.0)),
    )


def config_hash(raw: dict) -> str:
    """Short sha256 of the effective config; the output directory is left out."""
    keyed = {k: v for k, v in raw.items() if k != "out"}
    blob = json.dumps(keyed, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _resolve(base: Path, value) -> Path:
    path = Path(value)
    return path if path.is_absolute() else base / path


def build_run_config(raw: dict, base_dir: Path, command: str) -> RunConfig:
    """Validate a raw config mapping for ``command``; raises ConfigError."""
    raw = copy.deepcopy(raw)
    try:
        preset = raw.get("lidar")
        if preset is None:
            raise ConfigError("config is missing 'lidar' (preset name or path)")
        preset_path = _resolve(base_dir, preset)
        try:
            model = load_preset(preset_path if preset_path.is_file() else preset)
        except FileNotFoundError:
            raise ConfigError(f"LiDAR preset not found: {preset_path}") from None

        scen = raw.get("scenario") or {}
        if "path" not in scen:
            raise ConfigError("config is missing 'scenario.path'")
        scenario_path = _resolve(base_dir, scen["path"])
        if not scenario_path.is_file():
            raise ConfigError(f"scenario file not found: {scenario_path}")
        fmt = scen.get("format", "canonical-csv")
        if fmt not in ("canonical-csv", "ngsim"):
            raise ConfigError(f"unknown scenario format {fmt!r}")

        has_dep, has_search = "deployment" in raw, "search" in raw
        if has_dep == has_search:
            raise ConfigError("config must define exactly one of 'deployment' or 'search'")
        deployment = space = None
        if command in ("simulate", "evaluate"):
            if not has_dep:
                raise ConfigError(f"'{command}' needs a fixed 'deployment'")
            deployment = _deployment(raw["deployment"])
        elif command == "optimize":
            if not has_search:
                raise ConfigError("'optimize' needs a 'search' block")
            search = raw["search"]
            space = SearchSpace.from_dict(
                {k: tuple(v) for k, v in (search.get("bounds") or {}).items()},
                _deployment(search.get("base") or {}),
            )

        seed = int(raw.get("seed", 0))
        swarm = SwarmParams(**dict(raw.get("swarm") or {}), seed=seed)
        grid = GridSpec(**dict(raw.get("grid") or {}))
        stride = int(raw.get("frame_stride", 1))
        obj = raw.get("objective") or {}
        objective = ObjectiveParams(float(obj.get("delta", 0.005)), float(obj.get("loss", -1.0)), grid, 1)
        out = _resolve(base_dir, raw.get("out", "out"))
        voxel_edge = float(raw.get("voxel_edge", 0.1))
        if voxel_edge <= 0:
            raise ConfigError("voxel_edge must be > 0")
    except (ConfigError, InvalidSwarm):
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"invalid config: {exc}") from None
    return RunConfig(model, scenario_path, fmt, deployment, space, swarm, objective,
                     stride, seed, out, voxel_edge, config_hash(raw))


def load_run_config(path, command: str, overrides: dict | None = None) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, encoding="utf-8") as fh:
            raw = yaml.safe_load(fh) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path} must hold a mapping")
    for key, value in (overrides or {}).items():
        if value is not None:
            raw[key] = value
    return build_run_config(raw, path.parent, command)
