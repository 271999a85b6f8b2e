"""LiDAR deployment simulation, grid-occupancy perception entropy and DE-PSO placement search."""

from .geometry import Deployment, LidarModel, beam_direction, deploy_rays, load_preset, tilt_matrix
from .metric import GridSpec, VgopReport, evaluate_frame, pe_vgop, project_and_grid, to_vehicle_frame, vgop
from .optimize import ObjectiveParams, SearchSpace, SwarmParams, fitness, run_optimizer
from .raycast import GROUND, LabeledPointCloud, cast_frame, ray_obb_intersect, vehicle_points
from .scene import Scenario, ScenarioFrame, Vehicle, load_scenario, obb_corners

__version__ = "0.1.0"

__all__ = [
    "Deployment", "LidarModel", "beam_direction", "deploy_rays", "load_preset", "tilt_matrix",
    "GridSpec", "VgopReport", "evaluate_frame", "pe_vgop", "project_and_grid", "to_vehicle_frame", "vgop",
    "ObjectiveParams", "SearchSpace", "SwarmParams", "fitness", "run_optimizer",
    "GROUND", "LabeledPointCloud", "cast_frame", "ray_obb_intersect", "vehicle_points",
    "Scenario", "ScenarioFrame", "Vehicle", "load_scenario", "obb_corners",
]
