"""Command-line front end: simulate, evaluate, optimize, report.

Exit codes: 0 success, 2 configuration/input error, 3 I/O failure,
4 optimizer rejected the swarm parameters.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import exports
from .config import ConfigError, RunConfig, load_run_config
from .geometry import Deployment, deploy_rays
from .metric import baseline_metrics, evaluate_frame
from .optimize import InvalidSwarm, ObjectiveParams, proxy_recall, run_optimizer, vehicle_score
from .raycast import GROUND, cast_frame
from .scene import Scenario, ScenarioError, load_scenario

log = logging.getLogger("lidar_deploy")

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_OPTIMIZER = 0, 2, 3, 4


def _scenario(cfg: RunConfig) -> Scenario:
    try:
        scenario = load_scenario(cfg.scenario_path, cfg.scenario_format)
    except ScenarioError as exc:
        raise ConfigError(f"{cfg.scenario_path}: {exc}") from None
    return scenario.subsample(cfg.frame_stride)


def _header(cfg: RunConfig) -> str:
    return exports.header_line(cfg.config_hash, cfg.seed)


def cmd_simulate(cfg: RunConfig) -> int:
    scenario = _scenario(cfg)
    out = exports.ensure_dir(cfg.out)
    cloud_dir = exports.ensure_dir(out / "clouds")
    rays = deploy_rays(cfg.model, cfg.deployment)
    manifest = []
    for frame in scenario.frames:
        cloud = cast_frame(rays, frame, cfg.model)
        name = f"frame_{frame.frame_id:06d}.csv"
        exports.write_cloud(cloud_dir / name, cloud, _header(cfg))
        n_ground = int(np.count_nonzero(cloud.vehicle_ids == GROUND))
        manifest.append((frame.frame_id, f"clouds/{name}", len(cloud), len(cloud) - n_ground, n_ground))
    with open(out / "manifest.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write(_header(cfg))
        fh.write("frame_id,file,points,vehicle_points,ground_points\n")
        fh.writelines(",".join(map(str, row)) + "\n" for row in manifest)
    print(f"simulated {len(manifest)} frame(s) with {cfg.model.name} -> {out}")
    return EXIT_OK


def evaluate_deployment(deployment: Deployment, scenario: Scenario, cfg: RunConfig):
    """Per-vehicle reports, baseline proxies and the summary block for one deployment."""
    rays = deploy_rays(cfg.model, deployment)
    rows, baselines = [], {}
    for frame in scenario.frames:
        cloud = cast_frame(rays, frame, cfg.model)
        for rep in evaluate_frame(cloud, frame, cfg.grid):
            rows.append((frame.frame_id, rep))
        for vid, base in baseline_metrics(cloud, frame, cfg.voxel_edge).items():
            baselines[(frame.frame_id, vid)] = base
    reports = [r for _, r in rows]
    entropies = [r.entropy for r in reports]
    summary = {
        "lidar": cfg.model.name,
        "x": float(deployment.position[0]),
        "y": float(deployment.position[1]),
        "height": float(deployment.height),
        "tilt_x_deg": float(deployment.tilt_x),
        "tilt_y_deg": float(deployment.tilt_y),
        "frames": len(scenario.frames),
        "vehicles": len(reports),
        "detected": sum(r.mean_vgop >= cfg.objective.delta for r in reports),
        "proxy_recall": float(proxy_recall(reports, cfg.objective.delta)),
        "mean_entropy": float(np.mean(entropies)) if entropies else 0.0,
        "min_entropy": float(np.min(entropies)) if entropies else 0.0,
        "fitness": float(sum(vehicle_score(r, cfg.objective) for r in reports)),
    }
    return rows, baselines, summary


def cmd_evaluate(cfg: RunConfig) -> int:
    scenario = _scenario(cfg)
    out = exports.ensure_dir(cfg.out)
    rows, baselines, summary = evaluate_deployment(cfg.deployment, scenario, cfg)
    exports.write_reports(out / "vgop_report.csv", rows, cfg.objective.delta, baselines, _header(cfg))
    exports.write_key_values(out / "summary.csv", summary, _header(cfg))
    print(f"evaluated {summary['vehicles']} vehicle(s): proxy recall {summary['proxy_recall']:.3f}, "
          f"mean entropy {summary['mean_entropy']:.4f}")
    return EXIT_OK


def cmd_optimize(cfg: RunConfig) -> int:
    scenario = _scenario(cfg)
    out = exports.ensure_dir(cfg.out)
    space = cfg.space
    objective = ObjectiveParams(cfg.objective.delta, cfg.objective.loss, cfg.grid, 1)
    result = run_optimizer(scenario, cfg.model, space, cfg.swarm, objective)

    base_pos = space.base.position
    baseline = Deployment((base_pos[0], base_pos[1], 2.0), 0.0, 0.0)
    _, _, best_summary = evaluate_deployment(result.best, scenario, cfg)
    _, _, base_summary = evaluate_deployment(baseline, scenario, cfg)
    block = {
        "lidar": cfg.model.name,
        "seed": cfg.seed,
        "best_x": float(result.best.position[0]),
        "best_y": float(result.best.position[1]),
        "best_height": float(result.best.height),
        "best_tilt_x_deg": float(result.best.tilt_x),
        "best_tilt_y_deg": float(result.best.tilt_y),
        "best_fitness": float(result.best_fitness),
        "best_proxy_recall": best_summary["proxy_recall"],
        "baseline_height": 2.0,
        "baseline_tilt_deg": 0.0,
        "baseline_fitness": base_summary["fitness"],
        "baseline_proxy_recall": base_summary["proxy_recall"],
        "fitness_gain": float(result.best_fitness - base_summary["fitness"]),
        "recall_gain": float(best_summary["proxy_recall"] - base_summary["proxy_recall"]),
    }
    exports.write_key_values(out / "best_deployment.csv", block, _header(cfg))
    exports.write_history(out / "history.csv", result.history, space.names, _header(cfg))
    print(f"best deployment: height {block['best_height']:.3f} m, tilt_x {block['best_tilt_x_deg']:.2f} deg, "
          f"fitness {block['best_fitness']:.4f} (baseline {block['baseline_fitness']:.4f})")
    return EXIT_OK


def summarize(out: Path) -> list[str]:
    """Human-readable lines describing whatever exports exist in ``out``."""
    lines = []
    manifest = out / "manifest.csv"
    if manifest.is_file():
        rows = exports.read_table(manifest)
        pts = sum(int(r["vehicle_points"]) for r in rows)
        lines.append(f"simulate: {len(rows)} frame(s), {pts} vehicle point(s)")
    summary = out / "summary.csv"
    if summary.is_file():
        kv = exports.read_key_values(summary)
        lines.append(
            f"evaluate: {kv['vehicles']} vehicle(s), proxy recall {float(kv['proxy_recall']):.4f}, "
            f"mean entropy {float(kv['mean_entropy']):.4f}, min entropy {float(kv['min_entropy']):.4f}"
        )
    best = out / "best_deployment.csv"
    if best.is_file():
        kv = exports.read_key_values(best)
        lines.append(
            f"optimize: height {float(kv['best_height']):.3f} m, tilt_x {float(kv['best_tilt_x_deg']):.2f} deg, "
            f"fitness {float(kv['best_fitness']):.4f} vs baseline {float(kv['baseline_fitness']):.4f}, "
            f"recall {float(kv['best_proxy_recall']):.4f} vs {float(kv['baseline_proxy_recall']):.4f}"
        )
    history = out / "history.csv"
    if history.is_file():
        rows = exports.read_table(history)
        if rows:
            iters = max(int(r["iteration"]) for r in rows)
            lines.append(f"history: {len(rows)} record(s) over {iters} iteration(s), "
                         f"final global best {float(rows[-1]['global_best_fitness']):.4f}")
    return lines


def cmd_report(out: Path) -> int:
    if not out.is_dir():
        raise ConfigError(f"output directory not found: {out}")
    lines = summarize(out)
    if not lines:
        raise ConfigError(f"no exports found in {out}")
    with open(out / "report.txt", "w", encoding="utf-8") as fh:
        fh.writelines(line + "\n" for line in lines)
    print("\n".join(lines))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lidar-deploy", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("simulate", "cast a fixed deployment against every frame and export point clouds"),
        ("evaluate", "score a fixed deployment with the grid-occupancy entropy"),
        ("optimize", "search mount height and tilt with DE-PSO"),
        ("report", "summarize the exports already present in --out"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=Path, required=name != "report")
        p.add_argument("--out", type=Path)
        if name != "report":
            p.add_argument("--seed", type=int)
            p.add_argument("--preset", help="LiDAR preset name or file; overrides the config")
            p.add_argument("--frames", type=int, metavar="STRIDE", help="use every STRIDE-th frame")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "report":
            out = args.out
            if out is None:
                if args.config is None:
                    raise ConfigError("report needs --out or --config")
                out = load_run_config(args.config, "report").out
            return cmd_report(Path(out))
        overrides = {"seed": args.seed, "lidar": args.preset, "frame_stride": args.frames,
                     "out": str(args.out.resolve()) if args.out else None}
        cfg = load_run_config(args.config, args.command, overrides)
        handler = {"simulate": cmd_simulate, "evaluate": cmd_evaluate, "optimize": cmd_optimize}
        return handler[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvalidSwarm as exc:
        print(f"optimizer error: {exc}", file=sys.stderr)
        return EXIT_OPTIMIZER
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
