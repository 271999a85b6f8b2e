"""Grid-occupancy perception entropy of vehicle point clouds.

Points on a vehicle are moved into the vehicle frame (origin at the box
center, +X forward) and projected onto three planes: top (x, y), side (x, z)
and front (y, z). Each plane is cut into square cells; the occupancy
probability of a view is the fraction of its cells holding at least one
point, and the vehicle's entropy sums ``-p log2 p`` over the three views.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .raycast import LabeledPointCloud
from .scene import ScenarioFrame, Vehicle

MAX_ENTROPY = 3.0 * math.log2(math.e) / math.e
BOUNDARY_TOL = 1e-6
VIEWS = ("top", "side", "front")
# vehicle-frame axes spanned by each view
VIEW_AXES = {"top": (0, 1), "side": (0, 2), "front": (1, 2)}


class FrameMismatch(ValueError):
    pass


def _ceil(x: float) -> int:
    """Ceiling that ignores floating-point excess such as 90.00000000000001."""
    return math.ceil(x - 1e-9 * max(1.0, abs(x)))


@dataclass(frozen=True)
class GridSpec:
    """Cell areas (m^2) of the top, side and front views."""

    mu_top: float = 0.0025
    mu_side: float = 0.0025
    mu_front: float = 0.0025

    def __post_init__(self):
        if min(self.mu_top, self.mu_side, self.mu_front) <= 0.0:
            raise ValueError("grid cell areas must be > 0")

    def area(self, view: str) -> float:
        return {"top": self.mu_top, "side": self.mu_side, "front": self.mu_front}[view]

    def edge(self, view: str) -> float:
        return math.sqrt(self.area(view))


@dataclass(frozen=True)
class VgopReport:
    vehicle_id: int
    p_top: float
    p_side: float
    p_front: float
    n_top: int
    n_side: int
    n_front: int
    occupied_top: int
    occupied_side: int
    occupied_front: int
    entropy: float
    point_count: int

    @property
    def mean_vgop(self) -> float:
        return (self.p_top + self.p_side + self.p_front) / 3.0


class OccupiedCells(NamedTuple):
    top: frozenset
    side: frozenset
    front: frozenset


class BaselineMetrics(NamedTuple):
    point_count: int
    occupied_voxels: int
    voxel_entropy: float


def to_vehicle_frame(points, vehicle: Vehicle) -> np.ndarray:
    """Row vectors ``(p - center) @ R_yaw(heading)``: +X forward, origin at box center."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    return (pts - np.asarray(vehicle.center)) @ vehicle.rotation()


def grid_counts(dims, grid: GridSpec) -> tuple[int, int, int]:
    """Cells per view: ceil(area / cell area)."""
    l, w, h = dims
    return (_ceil(l * w / grid.mu_top), _ceil(l * h / grid.mu_side), _ceil(w * h / grid.mu_front))


def _cell_indices(points_veh: np.ndarray, dims, grid: GridSpec) -> dict[str, np.ndarray]:
    """Per view, (k, 2) integer cell indices of the in-box points."""
    dims = np.asarray(dims, dtype=float)
    half = dims / 2.0
    pts = np.asarray(points_veh, dtype=float).reshape(-1, 3)
    pts = pts[np.all(np.abs(pts) <= half + BOUNDARY_TOL, axis=1)]
    shifted = pts + half  # grid origin at the box min-corner
    out = {}
    for view in VIEWS:
        axes = list(VIEW_AXES[view])
        edge = grid.edge(view)
        n_axis = np.array([max(1, _ceil(dims[a] / edge)) for a in axes])
        idx = np.floor(shifted[:, axes] / edge).astype(np.int64)
        out[view] = np.clip(idx, 0, n_axis - 1)
    return out


def project_and_grid(points_veh, dims, grid: GridSpec) -> OccupiedCells:
    """Occupied (i, j) cells of each view for vehicle-frame points.

    Points more than BOUNDARY_TOL outside the box are dropped; face hits are
    clamped into the boundary cell.
    """
    idx = _cell_indices(points_veh, dims, grid)
    return OccupiedCells(*(frozenset(map(tuple, np.unique(idx[v], axis=0).tolist())) for v in VIEWS))


def _occupied_counts(points_veh, dims, grid: GridSpec) -> tuple[int, int, int]:
    idx = _cell_indices(points_veh, dims, grid)
    counts = []
    for view in VIEWS:
        ij = idx[view]
        counts.append(len(np.unique(ij[:, 0] * (1 << 32) + ij[:, 1])) if len(ij) else 0)
    return tuple(counts)


def vgop(occupied, dims, grid: GridSpec) -> tuple[float, float, float]:
    """Occupancy probability per view, capped at 1.

    The cap matters only when a box side is not a whole number of cells, so
    the floor-indexed cells slightly outnumber ceil(area / cell area).
    """
    return tuple(min(1.0, occ / n) for occ, n in zip(occupied, grid_counts(dims, grid)))


def _plogp(p: float) -> float:
    return 0.0 if p <= 0.0 else -p * math.log2(p)


def pe_vgop(p_top: float, p_side: float, p_front: float) -> float:
    """Perception entropy in bits, with 0 log 0 = 0."""
    return _plogp(p_top) + _plogp(p_side) + _plogp(p_front)


def vehicle_report(points_world, vehicle: Vehicle, grid: GridSpec) -> VgopReport:
    pts = np.asarray(points_world, dtype=float).reshape(-1, 3)
    dims = (vehicle.length, vehicle.width, vehicle.height)
    occ = _occupied_counts(to_vehicle_frame(pts, vehicle), dims, grid) if len(pts) else (0, 0, 0)
    p = vgop(occ, dims, grid)
    n = grid_counts(dims, grid)
    return VgopReport(
        vehicle_id=vehicle.id,
        p_top=p[0], p_side=p[1], p_front=p[2],
        n_top=n[0], n_side=n[1], n_front=n[2],
        occupied_top=occ[0], occupied_side=occ[1], occupied_front=occ[2],
        entropy=pe_vgop(*p),
        point_count=len(pts),
    )


def _points_by_vehicle(cloud: LabeledPointCloud) -> dict[int, np.ndarray]:
    order = np.argsort(cloud.vehicle_ids, kind="stable")
    ids = cloud.vehicle_ids[order]
    uniq, start = np.unique(ids, return_index=True)
    bounds = list(start) + [len(ids)]
    return {int(u): cloud.positions[order[bounds[k]:bounds[k + 1]]] for k, u in enumerate(uniq)}


def _ceil_array(x: np.ndarray) -> np.ndarray:
    return np.ceil(x - 1e-9 * np.maximum(1.0, np.abs(x))).astype(np.int64)


def evaluate_frame(cloud: LabeledPointCloud, frame: ScenarioFrame, grid: GridSpec) -> list[VgopReport]:
    """One report per vehicle of the frame, in frame order; unhit vehicles score 0.

    All vehicles are gridded in one batched pass; the result equals calling
    vehicle_report on each vehicle's points.
    """
    if cloud.frame_id != frame.frame_id:
        raise FrameMismatch(f"cloud frame {cloud.frame_id} != scenario frame {frame.frame_id}")
    vehicles = frame.vehicles
    if not vehicles:
        return []
    n_veh = len(vehicles)
    slot = {v.id: k for k, v in enumerate(vehicles)}
    lookup = np.array([slot.get(int(i), -1) for i in np.unique(cloud.vehicle_ids)], dtype=np.int64)
    owner = lookup[np.searchsorted(np.unique(cloud.vehicle_ids), cloud.vehicle_ids)] if len(cloud) else np.zeros(0, np.int64)
    mine = owner >= 0
    owner, pts = owner[mine], cloud.positions[mine]
    point_count = np.bincount(owner, minlength=n_veh)

    centers = np.array([v.center for v in vehicles])
    dims = np.array([(v.length, v.width, v.height) for v in vehicles])
    rot = np.array([v.rotation() for v in vehicles])
    local = np.einsum("ni,nij->nj", pts - centers[owner], rot[owner])
    half = dims / 2.0
    inside = np.all(np.abs(local) <= half[owner] + BOUNDARY_TOL, axis=1)
    owner, shifted = owner[inside], (local + half[owner])[inside]

    occupied = np.zeros((n_veh, 3), dtype=np.int64)
    for col, view in enumerate(VIEWS):
        a, b = VIEW_AXES[view]
        edge = grid.edge(view)
        na = np.maximum(1, _ceil_array(dims[:, a] / edge))
        nb = np.maximum(1, _ceil_array(dims[:, b] / edge))
        ia = np.clip(np.floor(shifted[:, a] / edge).astype(np.int64), 0, na[owner] - 1)
        ib = np.clip(np.floor(shifted[:, b] / edge).astype(np.int64), 0, nb[owner] - 1)
        keys = np.unique((owner << 40) | (ia << 20) | ib)
        occupied[:, col] = np.bincount(keys >> 40, minlength=n_veh)

    reports = []
    for k, v in enumerate(vehicles):
        vdims = tuple(dims[k])
        occ = tuple(int(o) for o in occupied[k])
        p = vgop(occ, vdims, grid)
        n = grid_counts(vdims, grid)
        reports.append(VgopReport(
            vehicle_id=v.id,
            p_top=p[0], p_side=p[1], p_front=p[2],
            n_top=n[0], n_side=n[1], n_front=n[2],
            occupied_top=occ[0], occupied_side=occ[1], occupied_front=occ[2],
            entropy=pe_vgop(*p),
            point_count=int(point_count[k]),
        ))
    return reports


def baseline_metrics(cloud: LabeledPointCloud, frame: ScenarioFrame, voxel_edge: float = 0.1) -> dict[int, BaselineMetrics]:
    """Point-count and 3D voxel-occupancy proxies, keyed by vehicle id.

    These stand in for count/density/voxel-entropy style metrics when
    comparing against the grid-occupancy entropy.
    """
    if voxel_edge <= 0.0:
        raise ValueError("voxel_edge must be > 0")
    groups = _points_by_vehicle(cloud)
    out = {}
    for v in frame.vehicles:
        pts = groups.get(v.id, np.zeros((0, 3)))
        if len(pts) == 0:
            out[v.id] = BaselineMetrics(0, 0, 0.0)
            continue
        dims = v.dims
        n_axis = np.array([max(1, _ceil(d / voxel_edge)) for d in dims])
        local = to_vehicle_frame(pts, v)
        local = local[np.all(np.abs(local) <= dims / 2.0 + BOUNDARY_TOL, axis=1)]
        idx = np.clip(np.floor((local + dims / 2.0) / voxel_edge).astype(np.int64), 0, n_axis - 1)
        occupied = len(np.unique(np.ravel_multi_index(idx.T, n_axis))) if len(idx) else 0
        q = occupied / int(np.prod(n_axis))
        out[v.id] = BaselineMetrics(len(pts), occupied, _plogp(q))
    return out
