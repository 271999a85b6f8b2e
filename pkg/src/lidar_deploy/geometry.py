"""LiDAR beam geometry: sensor models, tilt rotations and world-frame rays.

Angles are degrees on every public dataclass field (config readability) and
radians in every function argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

PRESET_DIR = Path(__file__).parent / "presets"


@dataclass(frozen=True)
class LidarModel:
    """Intrinsic geometry of a mechanical rotating LiDAR."""

    name: str
    vertical_angles: tuple[float, ...]  # degrees, sorted ascending
    horizontal_resolution: float = 0.2  # degrees
    max_range: float = 100.0
    min_range: float = 0.0

    def __post_init__(self):
        angles = tuple(sorted(float(a) for a in self.vertical_angles))
        if not angles:
            raise ValueError("vertical_angles must be non-empty")
        if any(not -90.0 < a < 90.0 for a in angles):
            raise ValueError("vertical angles must lie in (-90, 90) degrees")
        if any(b - a <= 0.0 for a, b in zip(angles, angles[1:])):
            raise ValueError("vertical angles must not contain duplicates")
        object.__setattr__(self, "vertical_angles", angles)

        res = float(self.horizontal_resolution)
        if res <= 0.0:
            raise ValueError("horizontal_resolution must be > 0")
        steps = 360.0 / res
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            raise ValueError(f"horizontal_resolution {res} does not divide 360")
        if not 0.0 <= self.min_range < self.max_range:
            raise ValueError("need 0 <= min_range < max_range")

    @property
    def n_beams(self) -> int:
        return len(self.vertical_angles)

    @property
    def n_azimuth(self) -> int:
        return int(round(360.0 / self.horizontal_resolution))

    @property
    def n_rays(self) -> int:
        return self.n_beams * self.n_azimuth

    def elevations(self) -> np.ndarray:
        return np.deg2rad(np.asarray(self.vertical_angles))

    def azimuths(self) -> np.ndarray:
        return np.arange(self.n_azimuth) * math.radians(self.horizontal_resolution)

    @classmethod
    def from_dict(cls, d: dict) -> "LidarModel":
        return cls(
            name=str(d["name"]),
            vertical_angles=tuple(d["vertical_angles"]),
            horizontal_resolution=float(d.get("horizontal_resolution_deg", 0.2)),
            min_range=float(d.get("min_range_m", 0.0)),
            max_range=float(d["max_range_m"]),
        )

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "vertical_angles": list(self.vertical_angles),
            "horizontal_resolution_deg": self.horizontal_resolution,
            "min_range_m": self.min_range,
            "max_range_m": self.max_range,
        }


def load_preset(name_or_path: str | Path) -> LidarModel:
    """Load a LiDAR preset by shipped name (``rs16``, ``RS-32``...) or file path.

    Raises FileNotFoundError naming the path when neither resolves.
    """
    path = Path(name_or_path)
    if not path.is_file():
        key = str(name_or_path).lower().replace("-", "").replace("_", "")
        shipped = PRESET_DIR / f"{key}.yaml"
        if not shipped.is_file():
            raise FileNotFoundError(f"LiDAR preset not found: {name_or_path}")
        path = shipped
    with open(path, encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"malformed preset file: {path}")
    try:
        return LidarModel.from_dict(data)
    except KeyError as exc:
        raise ValueError(f"preset {path} is missing field {exc.args[0]}") from None


def shipped_presets() -> list[str]:
    return sorted(p.stem for p in PRESET_DIR.glob("*.yaml"))


@dataclass(frozen=True)
class Deployment:
    """Mount position (meters) and tilt angles (degrees) of one sensor."""

    position: tuple[float, float, float] = (0.0, 0.0, 2.0)
    tilt_x: float = 0.0
    tilt_y: float = 0.0

    def __post_init__(self):
        pos = tuple(float(v) for v in self.position)
        if len(pos) != 3:
            raise ValueError("position must have three coordinates")
        if pos[2] < 0.0:
            raise ValueError("mount height z must be >= 0")
        if not (math.isfinite(self.tilt_x) and math.isfinite(self.tilt_y)):
            raise ValueError("tilt angles must be finite")
        object.__setattr__(self, "position", pos)

    @property
    def height(self) -> float:
        return self.position[2]


def beam_direction(azimuth, elevation):
    """Unit direction ``(sin a cos b, cos a cos b, sin b)``; broadcasts over arrays.

    Azimuth 0 points along +Y and grows toward +X.
    """
    azimuth = np.asarray(azimuth, dtype=float)
    elevation = np.asarray(elevation, dtype=float)
    cb = np.cos(elevation)
    return np.stack(
        np.broadcast_arrays(np.sin(azimuth) * cb, np.cos(azimuth) * cb, np.sin(elevation)),
        axis=-1,
    )


def rot_x(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def tilt_matrix(tilt_x: float, tilt_y: float) -> np.ndarray:
    """``R_x(tilt_x) @ R_y(tilt_y)``, applied to column vectors."""
    return rot_x(tilt_x) @ rot_y(tilt_y)


@dataclass(frozen=True)
class RaySet:
    """Rays sharing one origin, ordered beam-major then azimuth."""

    origin: np.ndarray  # (3,)
    directions: np.ndarray  # (R, 3) unit vectors
    beam_index: np.ndarray  # (R,) int
    azimuth_index: np.ndarray  # (R,) int
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.directions)


def deploy_rays(model: LidarModel, deployment: Deployment) -> RaySet:
    """Every (beam, azimuth) ray of ``model`` mounted at ``deployment``."""
    elev = model.elevations()
    azim = model.azimuths()
    local = beam_direction(azim[None, :], elev[:, None]).reshape(-1, 3)
    rot = tilt_matrix(math.radians(deployment.tilt_x), math.radians(deployment.tilt_y))
    directions = local @ rot.T
    beam_idx, az_idx = np.divmod(np.arange(len(local)), model.n_azimuth)
    return RaySet(
        origin=np.array(deployment.position, dtype=float),
        directions=directions,
        beam_index=beam_idx,
        azimuth_index=az_idx,
    )
