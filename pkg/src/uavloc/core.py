"""Shared domain types, kinematics and scenario validation.

Positions are numpy arrays in SI meters: UAVs are 3-D ``(x, y, h)``,
ground targets are 3-D with ``z = 0``.  Time is discrete: integer slot
index times ``slot_duration`` seconds.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields, replace

import numpy as np

Vec2 = np.ndarray  # shape (2,)
Vec3 = np.ndarray  # shape (3,)


def vec2(x: float, y: float) -> Vec2:
    return np.array([x, y], dtype=float)


def vec3(x: float, y: float, z: float) -> Vec3:
    return np.array([x, y, z], dtype=float)


class ScenarioError(ValueError):
    """Raised when a scenario configuration violates an invariant."""


@dataclass(frozen=True)
class Scenario:
    """Immutable world description for one mission.

    All lengths are meters, durations seconds, energies joules.  The
    defaults reproduce the reference setup: a 1120 m x 640 m area, four
    UAVs at 100 m altitude with 150 m communication range flying at
    25 m/s, persons bounded by 1.5 m/s, 0.025 s slots with 10 RSSI
    samples each, path-loss exponent 2 and 4 dB shadowing.
    """

    area_length: float = 1120.0
    area_width: float = 640.0
    altitude: float = 100.0
    comm_range: float = 150.0
    uav_count: int = 4
    uav_vmax: float = 25.0
    person_vmax: float = 1.5
    slot_duration: float = 0.025
    samples_per_slot: int = 10
    eta: float = 2.0
    sigma_psi: float = 4.0
    alpha: float = 0.05          # error growth rate after reception ends, 1/s
    e_th: float = 30.0           # required localization accuracy, m
    energy_budget: float = 150e3  # per-UAV propulsion budget, J
    seed: int = 0
    # person mobility: new heading/speed drawn every resample_interval slots
    resample_interval: int = 400
    boundary_mode: str = "reflect"
    # estimation / planning knobs
    collinear_tol: float = 0.5   # m, straight-line detection threshold
    annuli_count: int = 5
    theta_steps: int = 2048      # annulus boundary samples for error bound
    grid_steps: int = 256        # bounding-box grid per axis for error bound
    refine_slots: int = 20       # dwell length for the close-range refit
    hypothesis_timeout: int = 40  # slots without signal before mirror swap
    kappa: float = 2.0           # predicted-error calibration factor
    rand_per_coordinate: bool = False
    edge_access: bool = True     # visit accuracy-circle edges, not centers

    def __post_init__(self):
        check = _invariant_errors(self)
        if check:
            raise ScenarioError("; ".join(check))

    @property
    def area(self) -> Vec2:
        return vec2(self.area_length, self.area_width)

    @property
    def ground_radius(self) -> float:
        """Ground footprint radius of the communication disc."""
        return math.sqrt(self.comm_range**2 - self.altitude**2)

    def with_(self, **kw) -> "Scenario":
        return replace(self, **kw)


def _invariant_errors(s: Scenario) -> list[str]:
    errs = []
    for name in ("area_length", "area_width", "altitude", "comm_range",
                 "uav_vmax", "slot_duration", "e_th", "energy_budget"):
        v = getattr(s, name)
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            errs.append(f"{name} must be a positive finite number, got {v!r}")
    if s.comm_range <= s.altitude:
        errs.append(
            f"no ground coverage: comm_range ({s.comm_range}) must exceed "
            f"altitude ({s.altitude})")
    if not 0 <= s.person_vmax < s.uav_vmax:
        errs.append(
            f"person_vmax ({s.person_vmax}) must satisfy "
            f"0 <= person_vmax < uav_vmax ({s.uav_vmax})")
    if s.eta <= 0:
        errs.append(f"eta must be > 0, got {s.eta}")
    if s.sigma_psi < 0:
        errs.append(f"sigma_psi must be >= 0, got {s.sigma_psi}")
    if s.uav_count < 1:
        errs.append(f"uav_count must be >= 1, got {s.uav_count}")
    if s.samples_per_slot < 1:
        errs.append(f"samples_per_slot must be >= 1, got {s.samples_per_slot}")
    if s.alpha < 0:
        errs.append(f"alpha must be >= 0, got {s.alpha}")
    if s.resample_interval < 1:
        errs.append(f"resample_interval must be >= 1, got {s.resample_interval}")
    if s.boundary_mode != "reflect":
        errs.append(f"boundary_mode must be 'reflect', got {s.boundary_mode!r}")
    if s.annuli_count < 1:
        errs.append(f"annuli_count must be >= 1, got {s.annuli_count}")
    return errs


_SCENARIO_FIELDS = None


def validate_scenario(raw: dict) -> Scenario:
    """Build a Scenario from a parsed config mapping.

    Missing keys take defaults; unknown keys are an error so typos in
    config files never pass silently.
    """
    global _SCENARIO_FIELDS
    if _SCENARIO_FIELDS is None:
        _SCENARIO_FIELDS = {f.name for f in fields(Scenario)}
    if not isinstance(raw, dict):
        raise ScenarioError(f"scenario config must be an object, got {type(raw).__name__}")
    unknown = sorted(set(raw) - _SCENARIO_FIELDS)
    if unknown:
        raise ScenarioError(f"unknown scenario keys: {', '.join(unknown)}")
    return Scenario(**raw)


def load_scenario(path) -> Scenario:
    """Read a JSON scenario file and validate it."""
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{path}: not valid JSON ({exc})") from exc
    return validate_scenario(raw)


@dataclass
class UavState:
    position: Vec3
    velocity: Vec3


@dataclass
class PersonState:
    position: Vec3  # z is always 0
    velocity: Vec3  # planar


def distance(q: Vec3, w: Vec3) -> float:
    """Euclidean distance between two points."""
    return float(np.linalg.norm(np.asarray(q, dtype=float) - np.asarray(w, dtype=float)))


def advance(state, dt: float, bounds: Vec2 | None = None):
    """Propagate a state ``dt`` seconds at its current velocity.

    With ``bounds`` given (persons), the position is kept inside
    ``[0, Lx] x [0, Ly]`` by specular reflection: the offending velocity
    component flips sign and the overshoot is mirrored back, so speed is
    preserved.
    """
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    pos = state.position + state.velocity * dt
    vel = state.velocity.copy()
    if bounds is not None:
        for i in range(2):
            lim = bounds[i]
            # a slow mover can only cross one edge per step
            if pos[i] < 0:
                pos[i] = -pos[i]
                vel[i] = -vel[i]
            elif pos[i] > lim:
                pos[i] = 2 * lim - pos[i]
                vel[i] = -vel[i]
    return type(state)(position=pos, velocity=vel)
