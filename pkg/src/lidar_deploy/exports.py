"""Plain-text exports. Every file starts with a ``# config_hash=... seed=...`` line."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .metric import BaselineMetrics
from .optimize import FitnessRecord
from .raycast import LabeledPointCloud

CLOUD_COLUMNS = ("frame_id", "vehicle_id", "beam_index", "azimuth_index", "x", "y", "z", "range")
REPORT_COLUMNS = (
    "frame_id", "vehicle_id", "point_count",
    "p_top", "p_side", "p_front", "n_top", "n_side", "n_front",
    "occupied_top", "occupied_side", "occupied_front",
    "mean_vgop", "entropy", "detected", "occupied_voxels", "voxel_entropy",
)


def header_line(config_hash: str, seed: int) -> str:
    return f"# config_hash={config_hash} seed={seed}\n"


def _num(x: float) -> str:
    return repr(float(x))


def write_cloud(path, cloud: LabeledPointCloud, header: str) -> None:
    rows = [
        f"{cloud.frame_id},{vid},{b},{a},{x:.6f},{y:.6f},{z:.6f},{r:.6f}\n"
        for vid, b, a, (x, y, z), r in zip(
            cloud.vehicle_ids.tolist(), cloud.beam_index.tolist(), cloud.azimuth_index.tolist(),
            cloud.positions.tolist(), cloud.ranges.tolist())
    ]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(header)
        fh.write(",".join(CLOUD_COLUMNS) + "\n")
        fh.writelines(rows)


def read_cloud(path, frame_id: int = 0) -> LabeledPointCloud:
    """Inverse of write_cloud (positions rounded to 6 decimals); ``frame_id`` labels an empty file."""
    rows = read_table(path)
    if not rows:
        return LabeledPointCloud.empty(frame_id)
    ints = np.array([[int(r[c]) for c in CLOUD_COLUMNS[:4]] for r in rows], dtype=np.int64)
    floats = np.array([[float(r[c]) for c in CLOUD_COLUMNS[4:]] for r in rows])
    return LabeledPointCloud(int(ints[0, 0]), floats[:, :3], ints[:, 1], ints[:, 2], ints[:, 3], floats[:, 3])


def write_reports(path, rows, delta: float, baselines: dict, header: str) -> None:
    """rows: iterable of (frame_id, VgopReport); baselines keyed by (frame_id, vehicle_id)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(header)
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for frame_id, r in rows:
            base: BaselineMetrics = baselines.get((frame_id, r.vehicle_id), BaselineMetrics(0, 0, 0.0))
            w.writerow([
                frame_id, r.vehicle_id, r.point_count,
                _num(r.p_top), _num(r.p_side), _num(r.p_front), r.n_top, r.n_side, r.n_front,
                r.occupied_top, r.occupied_side, r.occupied_front,
                _num(r.mean_vgop), _num(r.entropy), int(r.mean_vgop >= delta),
                base.occupied_voxels, _num(base.voxel_entropy),
            ])


def read_table(path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(line for line in fh if not line.startswith("#")))


def write_key_values(path, items: dict, header: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(header)
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("key", "value"))
        for k, v in items.items():
            w.writerow((k, _num(v) if isinstance(v, float) else v))


def read_key_values(path) -> dict[str, str]:
    return {row["key"]: row["value"] for row in read_table(path)}


def write_history(path, history: list[FitnessRecord], names, header: str) -> None:
    cols = (
        ["iteration", "particle"] + list(names) + [f"v_{n}" for n in names]
        + ["fitness", "personal_best_fitness", "global_best_fitness"]
        + [f"gbest_{n}" for n in names] + ["de_step"]
    )
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(header)
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for rec in history:
            w.writerow(
                [rec.iteration, rec.particle] + [_num(x) for x in rec.position]
                + [_num(x) for x in rec.velocity]
                + [_num(rec.fitness), _num(rec.personal_best_fitness), _num(rec.global_best_fitness)]
                + [_num(x) for x in rec.global_best] + [int(rec.de_step)]
            )


def ensure_dir(path) -> Path:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    return path
