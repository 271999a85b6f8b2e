"""Analytic ray casting of deployed LiDAR rays against vehicle boxes and the ground."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np
from numba import njit

from .geometry import LidarModel, RaySet
from .scene import ScenarioFrame, Vehicle

GROUND = -1
_ANGLE_MARGIN = 1e-9


class LabeledPoint(NamedTuple):
    position: tuple[float, float, float]
    vehicle_id: int
    beam_index: int
    azimuth_index: int
    range: float


@dataclass(frozen=True)
class LabeledPointCloud:
    """Returns of one frame, one row per ray that hit something in range.

    Rows are ordered by (beam_index, azimuth_index). Ground returns carry
    vehicle_id == GROUND.
    """

    frame_id: int
    positions: np.ndarray  # (n, 3)
    vehicle_ids: np.ndarray  # (n,)
    beam_index: np.ndarray
    azimuth_index: np.ndarray
    ranges: np.ndarray

    def __len__(self) -> int:
        return len(self.ranges)

    def __iter__(self) -> Iterator[LabeledPoint]:
        for i in range(len(self)):
            yield LabeledPoint(
                tuple(self.positions[i]), int(self.vehicle_ids[i]),
                int(self.beam_index[i]), int(self.azimuth_index[i]), float(self.ranges[i]),
            )

    @property
    def points(self) -> list[LabeledPoint]:
        return list(self)

    def select(self, mask) -> "LabeledPointCloud":
        return LabeledPointCloud(
            self.frame_id, self.positions[mask], self.vehicle_ids[mask],
            self.beam_index[mask], self.azimuth_index[mask], self.ranges[mask],
        )

    @classmethod
    def empty(cls, frame_id: int) -> "LabeledPointCloud":
        z = np.zeros(0, dtype=np.int64)
        return cls(frame_id, np.zeros((0, 3)), z, z.copy(), z.copy(), np.zeros(0))


def _slab_entry(o_local: np.ndarray, d_local: np.ndarray, half: np.ndarray) -> np.ndarray:
    """Entry distance of rays into axis-aligned boxes [-half, half].

    All arguments broadcast against (R, 3). Returns (R,) with inf for a miss.
    A ray parallel to a slab is inside it when -h <= o < h.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / d_local
        t1 = (-half - o_local) * inv
        t2 = (half - o_local) * inv
    tlo = np.minimum(t1, t2)
    thi = np.maximum(t1, t2)
    parallel = d_local == 0.0
    if parallel.any():
        inside = np.broadcast_to((-half <= o_local) & (o_local < half), d_local.shape)
        tlo = np.where(parallel, np.where(inside, -np.inf, np.inf), tlo)
        thi = np.where(parallel, np.where(inside, np.inf, -np.inf), thi)
    tnear = tlo.max(axis=1)
    tfar = thi.min(axis=1)
    hit = (tnear <= tfar) & (tfar >= 0.0)
    return np.where(hit, np.maximum(tnear, 0.0), np.inf)


def _rotate_into(rel: np.ndarray, cos_h, sin_h) -> np.ndarray:
    """World offsets (R, 3) into box frames with headings given by cos/sin (scalars or (R,))."""
    out = np.empty_like(rel)
    out[:, 0] = cos_h * rel[:, 0] + sin_h * rel[:, 1]
    out[:, 1] = -sin_h * rel[:, 0] + cos_h * rel[:, 1]
    out[:, 2] = rel[:, 2]
    return out


def _to_local(origin, directions, vehicle: Vehicle):
    c, s = math.cos(vehicle.heading), math.sin(vehicle.heading)
    rel = (np.asarray(origin, dtype=float) - vehicle.center)[None, :]
    return _rotate_into(rel, c, s)[0], _rotate_into(np.atleast_2d(directions), c, s)


def ray_obb_intersect(origin, direction, vehicle: Vehicle) -> float | None:
    """Nearest non-negative entry distance of one ray into a vehicle box, or None."""
    o_local, d_local = _to_local(origin, np.asarray(direction, dtype=float)[None, :], vehicle)
    t = float(_slab_entry(o_local, d_local, vehicle.half_extents)[0])
    return t if math.isfinite(t) else None


def _azimuth_index(rays: RaySet) -> dict:
    """Rays split by vertical sense and sorted by horizontal bearing, cached per RaySet."""
    if "groups" in rays._cache:
        return rays._cache
    d = rays.directions
    horiz = np.hypot(d[:, 0], d[:, 1])
    bearing = np.arctan2(d[:, 1], d[:, 0])
    steep = horiz < 1e-12
    groups = {}
    for name, mask in (("down", d[:, 2] < 0.0), ("up", d[:, 2] >= 0.0)):
        sel = np.flatnonzero(mask & ~steep)
        order = np.argsort(bearing[sel], kind="stable")
        groups[name] = (bearing[sel][order], sel[order], np.flatnonzero(mask & steep))
    rays._cache["groups"] = groups
    return rays._cache


def _candidate_rays(rays: RaySet, vehicle: Vehicle, max_range: float) -> np.ndarray | None:
    """Indices of rays whose horizontal bearing can reach the vehicle footprint.

    Conservative: every ray that intersects the box is returned. None means
    the vehicle is unreachable.
    """
    groups = _azimuth_index(rays)["groups"]
    o = rays.origin
    cz, hz = vehicle.center[2], vehicle.height / 2.0
    names = []
    if cz - hz <= o[2] + 1e-9:
        names.append("down")
    if cz + hz >= o[2] - 1e-9:
        names.append("up")

    rel = np.asarray(vehicle.center[:2]) - o[:2]
    dist = math.hypot(rel[0], rel[1])
    radius = math.hypot(vehicle.length, vehicle.width) / 2.0
    if dist - radius > max_range:
        return None

    if dist <= radius + 1e-6:
        parts = [np.concatenate([groups[n][1], groups[n][2]]) for n in names]
        return np.sort(np.concatenate(parts)) if parts else None

    corners = _footprint(vehicle) - o[:2]
    center_bearing = math.atan2(rel[1], rel[0])
    delta = np.arctan2(corners[:, 1], corners[:, 0]) - center_bearing
    delta = (delta + np.pi) % (2 * np.pi) - np.pi
    lo = center_bearing + delta.min() - _ANGLE_MARGIN
    hi = center_bearing + delta.max() + _ANGLE_MARGIN
    if lo < -math.pi:
        windows = [(lo + 2 * math.pi, math.pi), (-math.pi, hi)]
    elif hi > math.pi:
        windows = [(lo, math.pi), (-math.pi, hi - 2 * math.pi)]
    else:
        windows = [(lo, hi)]

    parts = []
    for n in names:
        bearing, idx, steep = groups[n]
        for a, b in windows:
            i0 = np.searchsorted(bearing, a, side="left")
            i1 = np.searchsorted(bearing, b, side="right")
            parts.append(idx[i0:i1])
        parts.append(steep)
    if not parts:
        return None
    return np.concatenate(parts)


def _footprint(vehicle: Vehicle) -> np.ndarray:
    c, s = math.cos(vehicle.heading), math.sin(vehicle.heading)
    hl, hw = vehicle.length / 2.0, vehicle.width / 2.0
    local = np.array([[hl, hw], [hl, -hw], [-hl, -hw], [-hl, hw]])
    rot = np.array([[c, -s], [s, c]])
    return np.asarray(vehicle.center[:2]) + local @ rot.T


@njit(cache=True)
def _nearest_kernel(ray_idx, owner, directions, o_local, cos_h, sin_h, halves, best_t, best_k):
    """Scalar slab test per (ray, box) candidate, same arithmetic as _slab_entry.

    Keeps, per ray, the smallest entry distance; equal distances go to the
    lower box slot.
    """
    for m in range(ray_idx.shape[0]):
        r = ray_idx[m]
        k = owner[m]
        dx, dy, dz = directions[r, 0], directions[r, 1], directions[r, 2]
        d = (cos_h[k] * dx + sin_h[k] * dy, -sin_h[k] * dx + cos_h[k] * dy, dz)
        tnear = -np.inf
        tfar = np.inf
        for a in range(3):
            o = o_local[k, a]
            h = halves[k, a]
            if d[a] == 0.0:
                if not (-h <= o and o < h):
                    tnear = np.inf
                    tfar = -np.inf
                continue
            inv = 1.0 / d[a]
            t1 = (-h - o) * inv
            t2 = (h - o) * inv
            lo = min(t1, t2)
            hi = max(t1, t2)
            if lo > tnear:
                tnear = lo
            if hi < tfar:
                tfar = hi
        if tnear <= tfar and tfar >= 0.0:
            t = max(tnear, 0.0)
            if t < best_t[r] or (t == best_t[r] and k < best_k[r]):
                best_t[r] = t
                best_k[r] = k


def _ground_distance(rays: RaySet) -> np.ndarray:
    if "ground" not in rays._cache:
        dz = rays.directions[:, 2]
        with np.errstate(divide="ignore", invalid="ignore"):
            rays._cache["ground"] = np.where(dz < 0.0, -rays.origin[2] / dz, np.inf)
    return rays._cache["ground"]


def nearest_hits(rays: RaySet, vehicles, max_range: float = math.inf) -> tuple[np.ndarray, np.ndarray]:
    """Per-ray nearest hit distance and label over all vehicles and the ground.

    Distance ties between boxes go to the lower vehicle id; a box beats the
    ground on a tie. Rays that hit nothing get (inf, GROUND).
    """
    n = len(rays)
    best_t = np.full(n, np.inf)
    best_k = np.full(n, -1, dtype=np.int64)

    vehicles = sorted(vehicles, key=lambda v: v.id)
    cand, owner = [], []
    for k, veh in enumerate(vehicles):
        idx = _candidate_rays(rays, veh, max_range)
        if idx is not None and len(idx):
            cand.append(idx)
            owner.append(np.full(len(idx), k, dtype=np.int64))
    if cand:
        headings = np.array([v.heading for v in vehicles])
        cos_h, sin_h = np.cos(headings), np.sin(headings)
        rel = rays.origin - np.array([v.center for v in vehicles])
        o_local = _rotate_into(rel, cos_h, sin_h)
        halves = np.array([v.half_extents for v in vehicles])
        _nearest_kernel(np.concatenate(cand), np.concatenate(owner), rays.directions,
                        o_local, cos_h, sin_h, halves, best_t, best_k)

    ids = np.array([v.id for v in vehicles] + [GROUND], dtype=np.int64)
    best_id = ids[best_k]  # slot -1 maps to GROUND
    t_ground = _ground_distance(rays)
    ground = t_ground < best_t
    best_t[ground] = t_ground[ground]
    best_id[ground] = GROUND
    return best_t, best_id


def cast_frame(rays: RaySet, frame: ScenarioFrame, model: LidarModel, ground: bool = True) -> LabeledPointCloud:
    """Trace every ray against the frame; keep nearest hits within the sensor's range.

    A nearest hit closer than min_range drops the ray (no pass-through).
    With ``ground=False`` ground returns still consume their rays but are
    left out of the cloud.
    """
    t, ids = nearest_hits(rays, frame.vehicles, model.max_range)
    keep = np.isfinite(t) & (t >= model.min_range) & (t <= model.max_range)
    if not ground:
        keep &= ids != GROUND
    t = t[keep]
    return LabeledPointCloud(
        frame_id=frame.frame_id,
        positions=rays.origin + t[:, None] * rays.directions[keep],
        vehicle_ids=ids[keep],
        beam_index=rays.beam_index[keep],
        azimuth_index=rays.azimuth_index[keep],
        ranges=t,
    )


def vehicle_points(cloud: LabeledPointCloud, vehicle_id: int) -> np.ndarray:
    """World positions (k, 3) of the returns labeled with ``vehicle_id``."""
    return cloud.positions[cloud.vehicle_ids == vehicle_id]
