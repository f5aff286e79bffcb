"""Seeded simulator and planning library for multi-UAV localization of
moving ground targets.

A mission has two phases: a boustrophedon area scan collects RSSI range
windows and fits one constant-velocity track per person, then a swarm
planner routes the UAVs to edge-access waypoints where short dwells
refine each estimate.  Everything is deterministic under a seed.
"""

from .core import (PersonState, Scenario, ScenarioError, UavState, advance,
                   distance, load_scenario, validate_scenario)
from .energy import PowerParams, mission_energy, propulsion_power
from .errorbound import (Annulus, ErrorModel, FarthestPoint, build_annulus,
                         error_at, farthest_point_error, region_contains)
from .mle import (RangeWindow, TrackEstimate, detect_collinear,
                  estimate_static_distance, extrapolate, fit_track,
                  mirror_hypothesis, window_log_likelihood)
from .planner import (Plan, PlanLeg, SwarmParams, access_radius,
                      adaptive_inertia, decode, fitness, predicted_error,
                      reference_points, solve, tour_time)
from .ranging import (RangingParams, log_std, mean_range_error, range_pdf,
                      sample_range)
from .scan import (Rect, ScanGrid, ScanPath, boustrophedon_path, build_grid,
                   ground_coverage_radius, partition_area)
from .sim import (METRIC_FIELDS, MissionReport, PersonReport, UavReport,
                  collect_metrics, run_mission, scan_paths, simulate_phase1,
                  simulate_phase2)

__version__ = "0.1.0"

__all__ = [
    "METRIC_FIELDS", "Annulus", "ErrorModel", "FarthestPoint",
    "MissionReport", "PersonReport", "PersonState", "Plan", "PlanLeg",
    "PowerParams", "RangeWindow", "RangingParams", "Rect", "ScanGrid",
    "ScanPath", "Scenario", "ScenarioError", "SwarmParams", "TrackEstimate",
    "UavReport", "UavState", "access_radius", "adaptive_inertia", "advance",
    "boustrophedon_path", "build_annulus", "build_grid", "collect_metrics",
    "decode", "detect_collinear", "distance", "error_at",
    "estimate_static_distance", "extrapolate", "farthest_point_error",
    "fit_track", "fitness", "ground_coverage_radius", "load_scenario",
    "log_std", "mean_range_error", "mirror_hypothesis", "mission_energy",
    "partition_area", "predicted_error", "propulsion_power", "range_pdf",
    "reference_points", "region_contains", "run_mission", "sample_range",
    "scan_paths", "simulate_phase1", "simulate_phase2", "solve", "tour_time",
    "validate_scenario", "window_log_likelihood",
]
