"""Write the synthetic five-lane scene used by the example configs."""

import argparse
from pathlib import Path

from lidar_deploy.scene import save_scenario
from lidar_deploy.synth import five_lane_scene


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--frames", type=int, default=10)
    ap.add_argument("--vehicles", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parents[1] / "configs/data/five_lane.csv")
    args = ap.parse_args()
    args.out.parent.mkdir(parents=True, exist_ok=True)
    scenario = five_lane_scene(args.frames, args.vehicles, args.seed)
    save_scenario(scenario, args.out)
    print(f"wrote {len(scenario)} frames, {scenario.n_vehicles} vehicle rows -> {args.out}")


if __name__ == "__main__":
    main()
