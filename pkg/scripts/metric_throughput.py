"""Time ray casting plus PE-VGOP scoring over many random frames."""

import argparse
import time

import numpy as np

from lidar_deploy.geometry import Deployment, deploy_rays, load_preset
from lidar_deploy.metric import GridSpec, evaluate_frame
from lidar_deploy.raycast import cast_frame
from lidar_deploy.synth import random_frame


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--frames", type=int, default=3712)
    ap.add_argument("--preset", default="RS-16")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    model = load_preset(args.preset)
    rays = deploy_rays(model, Deployment((0.0, 0.0, 2.0)))
    rng = np.random.default_rng(args.seed)
    frames = [random_frame(rng, int(rng.integers(3, 11)), frame_id=i) for i in range(args.frames)]
    cast_frame(rays, frames[0], model)  # jit warm-up

    t_cast = t_metric = 0.0
    n = 0
    for frame in frames:
        t0 = time.perf_counter()
        cloud = cast_frame(rays, frame, model)
        t1 = time.perf_counter()
        n += len(evaluate_frame(cloud, frame, GridSpec()))
        t_metric += time.perf_counter() - t1
        t_cast += t1 - t0
    print(f"{args.frames} frames, {n} vehicles, {args.preset}: cast {t_cast:.2f} s, metric {t_metric:.2f} s, "
          f"total {t_cast + t_metric:.2f} s")


if __name__ == "__main__":
    main()
