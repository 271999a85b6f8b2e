"""Synthetic traffic scenes for experiments and tests."""

from __future__ import annotations

import math

import numpy as np

from .scene import DEFAULT_DIMS, Scenario, ScenarioFrame, Vehicle


def lane_centers(n_lanes: int = 5, lane_width: float = 3.5, offset: float = 0.0) -> np.ndarray:
    return offset + (np.arange(n_lanes) - (n_lanes - 1) / 2.0) * lane_width


def _place_in_lanes(rng, n_vehicles, lanes, near, far, gap, dims):
    """Non-overlapping longitudinal slots (distance from the sensor along -y)."""
    length = dims[0]
    per_lane = [[] for _ in lanes]
    placed = 0
    attempts = 0
    while placed < n_vehicles:
        attempts += 1
        if attempts > 10000 * max(1, n_vehicles):
            raise ValueError("road segment too short for the requested vehicle count")
        lane = int(rng.integers(len(lanes)))
        s = float(rng.uniform(near + length / 2, far - length / 2))
        if all(abs(s - o) >= length + gap for o in per_lane[lane]):
            per_lane[lane].append(s)
            placed += 1
    return [(lane, s) for lane, slots in enumerate(per_lane) for s in sorted(slots)]


def five_lane_scene(n_frames: int = 10, n_vehicles: int = 20, seed: int = 0, *,
                    n_lanes: int = 5, lane_width: float = 3.5, near: float = 4.0,
                    far: float = 45.0, lateral_offset: float = 0.0, gap: float = 2.0,
                    dims=DEFAULT_DIMS) -> Scenario:
    """Default-size cars on a straight multi-lane road running away from the sensor.

    The sensor sits at the origin; the road occupies ``y in [-far, -near]``
    with lanes parallel to the y axis, so positive tilt_x lowers the beams
    onto the road. Each frame is an independent seeded draw of vehicle slots.
    """
    rng = np.random.default_rng(seed)
    lanes = lane_centers(n_lanes, lane_width, lateral_offset)
    frames = []
    for fid in range(n_frames):
        slots = _place_in_lanes(rng, n_vehicles, lanes, near, far, gap, dims)
        vehicles = []
        for vid, (lane, s) in enumerate(slots):
            heading = -math.pi / 2 if lane < n_lanes / 2 else math.pi / 2
            vehicles.append(Vehicle.on_ground(vid, lanes[lane], -s, heading, *dims))
        frames.append(ScenarioFrame(fid, tuple(vehicles)))
    return Scenario(tuple(frames), {"source": f"five_lane_scene(seed={seed})", "units": "m"})


def random_frame(rng, n_vehicles: int, frame_id: int = 0, radius: float = 40.0,
                 min_radius: float = 3.0) -> ScenarioFrame:
    """Vehicles of random size and heading scattered around the origin (overlaps allowed)."""
    vehicles = []
    for vid in range(n_vehicles):
        r = rng.uniform(min_radius, radius)
        phi = rng.uniform(-math.pi, math.pi)
        length, width, height = rng.uniform(3.0, 12.0), rng.uniform(1.5, 2.6), rng.uniform(1.2, 3.8)
        vehicles.append(Vehicle.on_ground(vid, r * math.cos(phi), r * math.sin(phi),
                                          rng.uniform(-math.pi, math.pi), length, width, height))
    return ScenarioFrame(frame_id, tuple(vehicles))
