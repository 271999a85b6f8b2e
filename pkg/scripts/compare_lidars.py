"""Optimize height and tilt for several presets on the five-lane scene over many seeds.

Prints one row per (preset, seed) and the per-preset medians, which shows
how the optimal tilt shrinks as the beam count grows.
"""

import argparse

import numpy as np

from lidar_deploy.geometry import Deployment, load_preset
from lidar_deploy.optimize import ObjectiveParams, SearchSpace, SwarmParams, fitness, run_optimizer
from lidar_deploy.synth import five_lane_scene


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--presets", nargs="+", default=["RS-16", "RS-32", "RS-80"])
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--iterations", type=int, default=25)
    ap.add_argument("--swarm-size", type=int, default=10)
    args = ap.parse_args()

    scenario = five_lane_scene(n_frames=10, n_vehicles=20, seed=0)
    space = SearchSpace((("height", 2.0, 4.5), ("tilt_x", 0.0, 25.0)))
    objective = ObjectiveParams()
    print("preset,seed,height_m,tilt_x_deg,fitness,baseline_fitness")
    medians = {}
    for preset in args.presets:
        model = load_preset(preset)
        base = fitness(Deployment((0.0, 0.0, 2.0)), scenario, model, objective)
        rows = []
        for seed in range(args.seeds):
            swarm = SwarmParams(iterations=args.iterations, swarm_size=args.swarm_size, seed=seed)
            res = run_optimizer(scenario, model, space, swarm, objective)
            rows.append((res.best.height, res.best.tilt_x))
            print(f"{preset},{seed},{res.best.height:.3f},{res.best.tilt_x:.2f},{res.best_fitness:.3f},{base:.3f}",
                  flush=True)
        medians[preset] = np.median(np.array(rows), axis=0)
    for preset, (h, t) in medians.items():
        print(f"# {preset}: median height {h:.2f} m, median tilt {t:.2f} deg")


if __name__ == "__main__":
    main()
