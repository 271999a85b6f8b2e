"""Vehicle boxes, scenario frames and trajectory-file ingestion."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import rot_z

FEET_TO_M = 0.3048
DEFAULT_DIMS = (4.5, 1.8, 1.5)  # length, width, height in meters
CANONICAL_COLUMNS = (
    "frame_id", "vehicle_id", "x_m", "y_m", "heading_deg", "length_m", "width_m", "height_m",
)
# NGSIM vehicle class -> body height (m); 1 motorcycle, 2 auto, 3 truck
NGSIM_CLASS_HEIGHT = {1: 1.2, 2: DEFAULT_DIMS[2], 3: 3.5}
# column positions in the raw whitespace-separated NGSIM trajectory files
NGSIM_COLUMNS = {
    "Vehicle_ID": 0, "Frame_ID": 1, "Local_X": 4, "Local_Y": 5,
    "v_Length": 8, "v_Width": 9, "v_Class": 10,
}


class ScenarioError(ValueError):
    pass


class MissingColumn(ScenarioError):
    def __init__(self, name: str):
        super().__init__(f"missing column: {name}")
        self.name = name


class BadValue(ScenarioError):
    def __init__(self, row: int, column: str, value=None):
        super().__init__(f"bad value {value!r} in row {row}, column {column}")
        self.row = row
        self.column = column


class EmptyScenario(ScenarioError):
    pass


def normalize_angle(theta: float) -> float:
    """Wrap to [-pi, pi)."""
    return (theta + math.pi) % (2.0 * math.pi) - math.pi


@dataclass(frozen=True)
class Vehicle:
    id: int
    center: tuple[float, float, float]
    length: float = DEFAULT_DIMS[0]
    width: float = DEFAULT_DIMS[1]
    height: float = DEFAULT_DIMS[2]
    heading: float = 0.0  # radians, forward = local +X

    def __post_init__(self):
        if min(self.length, self.width, self.height) <= 0.0:
            raise ValueError(f"vehicle {self.id}: dimensions must be positive")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        object.__setattr__(self, "heading", normalize_angle(float(self.heading)))

    @classmethod
    def on_ground(cls, id, x, y, heading=0.0, length=DEFAULT_DIMS[0],
                  width=DEFAULT_DIMS[1], height=DEFAULT_DIMS[2]) -> "Vehicle":
        """Box resting on the z=0 ground plane."""
        return cls(int(id), (x, y, height / 2.0), length, width, height, heading)

    @property
    def dims(self) -> np.ndarray:
        return np.array([self.length, self.width, self.height])

    @property
    def half_extents(self) -> np.ndarray:
        return self.dims / 2.0

    def rotation(self) -> np.ndarray:
        return rot_z(self.heading)


@dataclass(frozen=True)
class ScenarioFrame:
    frame_id: int
    vehicles: tuple[Vehicle, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "vehicles", tuple(self.vehicles))
        ids = [v.id for v in self.vehicles]
        if len(set(ids)) != len(ids):
            raise ValueError(f"frame {self.frame_id}: duplicate vehicle ids")


@dataclass(frozen=True)
class Scenario:
    frames: tuple[ScenarioFrame, ...]
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "frames", tuple(self.frames))
        fids = [f.frame_id for f in self.frames]
        if any(b <= a for a, b in zip(fids, fids[1:])):
            raise ValueError("frame ids must be strictly increasing")

    def __len__(self) -> int:
        return len(self.frames)

    def subsample(self, stride: int) -> "Scenario":
        if stride < 1:
            raise ValueError("frame stride must be >= 1")
        return Scenario(self.frames[::stride], dict(self.metadata, frame_stride=stride))

    @property
    def n_vehicles(self) -> int:
        return sum(len(f.vehicles) for f in self.frames)


def obb_corners(vehicle: Vehicle) -> np.ndarray:
    """The 8 world-frame corners, shape (8, 3).

    Corner k uses local offset signs (sx, sy, sz) taken from the bits of k:
    bit 2 -> x, bit 1 -> y, bit 0 -> z, with a set bit meaning "+".
    Corner 0 is (-l/2, -w/2, -h/2), corner 7 is (+l/2, +w/2, +h/2).
    """
    bits = (np.arange(8)[:, None] >> np.array([2, 1, 0])) & 1
    offsets = (2 * bits - 1) * vehicle.half_extents
    return np.asarray(vehicle.center) + offsets @ vehicle.rotation().T


def _group_frames(rows: list[tuple[int, Vehicle]]) -> list[ScenarioFrame]:
    by_frame: dict[int, list[Vehicle]] = {}
    for fid, veh in rows:
        by_frame.setdefault(fid, []).append(veh)
    return [ScenarioFrame(fid, tuple(by_frame[fid])) for fid in sorted(by_frame)]


def _number(raw: str, row: int, column: str, positive=False) -> float:
    try:
        value = float(raw)
    except (TypeError, ValueError):
        raise BadValue(row, column, raw) from None
    if not math.isfinite(value) or (positive and value <= 0.0):
        raise BadValue(row, column, raw)
    return value


def _integer(raw: str, row: int, column: str) -> int:
    value = _number(raw, row, column)
    if value != int(value):
        raise BadValue(row, column, raw)
    return int(value)


def _load_canonical(path: Path) -> list[tuple[int, Vehicle]]:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(line for line in fh if not line.startswith("#"))
        header = [h.strip() for h in (reader.fieldnames or [])]
        for name in CANONICAL_COLUMNS:
            if name not in header:
                raise MissingColumn(name)
        reader.fieldnames = header
        for i, rec in enumerate(reader, start=1):
            fid = _integer(rec["frame_id"], i, "frame_id")
            vid = _integer(rec["vehicle_id"], i, "vehicle_id")
            x = _number(rec["x_m"], i, "x_m")
            y = _number(rec["y_m"], i, "y_m")
            heading = math.radians(_number(rec["heading_deg"], i, "heading_deg"))
            length = _number(rec["length_m"], i, "length_m", positive=True)
            width = _number(rec["width_m"], i, "width_m", positive=True)
            height = _number(rec["height_m"], i, "height_m", positive=True)
            rows.append((fid, Vehicle.on_ground(vid, x, y, heading, length, width, height)))
    return rows


def _load_ngsim(path: Path, default_height: float) -> list[tuple[int, Vehicle]]:
    """Raw NGSIM trajectories (feet), whitespace- or comma-separated.

    A header row, when present, is matched by column name; otherwise the fixed
    positions of NGSIM_COLUMNS apply. Vehicles travel along +Local_Y, so the
    heading is pi/2 and Local_Y (front bumper) is shifted back by half a length.
    """
    rows = []
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh if ln.strip() and not ln.startswith("#")]
    if not lines:
        return rows
    sep = "," if "," in lines[0] else None
    first = [c.strip() for c in lines[0].split(sep)]
    try:
        float(first[0])
        positions = NGSIM_COLUMNS
    except ValueError:
        positions = {}
        for name in NGSIM_COLUMNS:
            if name not in first:
                if name == "v_Class":
                    continue
                raise MissingColumn(name)
            positions[name] = first.index(name)
        lines = lines[1:]
    for i, line in enumerate(lines, start=1):
        cells = [c.strip() for c in line.split(sep)]
        for name, idx in positions.items():
            if idx >= len(cells):
                raise MissingColumn(name)
        get = lambda name: cells[positions[name]]  # noqa: E731
        vid = _integer(get("Vehicle_ID"), i, "Vehicle_ID")
        fid = _integer(get("Frame_ID"), i, "Frame_ID")
        length = _number(get("v_Length"), i, "v_Length", positive=True) * FEET_TO_M
        width = _number(get("v_Width"), i, "v_Width", positive=True) * FEET_TO_M
        x = _number(get("Local_X"), i, "Local_X") * FEET_TO_M
        y = _number(get("Local_Y"), i, "Local_Y") * FEET_TO_M - length / 2.0
        height = default_height
        if "v_Class" in positions:
            height = NGSIM_CLASS_HEIGHT.get(_integer(get("v_Class"), i, "v_Class"), default_height)
        rows.append((fid, Vehicle.on_ground(vid, x, y, math.pi / 2, length, width, height)))
    return rows


def load_scenario(path, format: str = "canonical-csv", default_height: float = DEFAULT_DIMS[2]) -> Scenario:
    """Read a trajectory file into frames of ground-resting vehicle boxes."""
    path = Path(path)
    if format == "canonical-csv":
        rows = _load_canonical(path)
        units = "m"
    elif format == "ngsim":
        rows = _load_ngsim(path, default_height)
        units = "ft->m"
    else:
        raise ValueError(f"unknown scenario format {format!r}")
    if not rows:
        raise EmptyScenario(f"no vehicle rows in {path}")
    try:
        frames = _group_frames(rows)
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None
    return Scenario(frames, {"source": str(path), "format": format, "units": units})


def save_scenario(scenario: Scenario, path) -> None:
    """Write canonical-csv; floats use repr so a reload is exact."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CANONICAL_COLUMNS)
        for frame in scenario.frames:
            for v in frame.vehicles:
                w.writerow([
                    frame.frame_id, v.id, repr(v.center[0]), repr(v.center[1]),
                    repr(math.degrees(v.heading)), repr(v.length), repr(v.width), repr(v.height),
                ])
