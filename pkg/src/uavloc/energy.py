"""Rotary-wing propulsion power and mission energy accounting.

Power at forward speed V is the sum of a blade-profile term that grows
with V^2, an induced-lift term that decays with V, and a parasite term
growing with V^3:

    P(V) = P0 * (1 + 3 V^2 / U^2)
         + P1 * sqrt( sqrt(1 + V^4 / (4 vr^4)) - V^2 / (2 vr^2) )
         + A/2 * V^3

The default constants are the widely used reference numbers for a small
rotary-wing platform; they can be overridden per scenario.  Note the
inner radical uses vr^4: the quartic keeps the expression dimensionless,
matching the underlying rotor model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PowerParams:
    p0: float = 79.8563    # blade profile power at hover, W
    p1: float = 88.6279    # induced power at hover, W
    tip_speed: float = 120.0  # rotor tip speed U, m/s
    rotor_velocity: float = 4.03  # mean induced velocity vr at hover, m/s
    parasite_coeff: float = 0.018485  # lumped drag coefficient A, kg/m

    def __post_init__(self):
        for name in ("p0", "p1", "tip_speed", "rotor_velocity", "parasite_coeff"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")


def propulsion_power(v, params: PowerParams = PowerParams()):
    """Propulsion power in watts at forward speed ``v`` (scalar or array)."""
    v = np.asarray(v, dtype=float)
    if np.any(v < 0):
        raise ValueError("speed must be >= 0")
    blade = params.p0 * (1.0 + 3.0 * v**2 / params.tip_speed**2)
    vr2 = params.rotor_velocity**2
    # guard against tiny negative values from floating-point cancellation
    arg = np.maximum(np.sqrt(1.0 + v**4 / (4.0 * vr2 * vr2)) - v**2 / (2.0 * vr2), 0.0)
    induced = params.p1 * np.sqrt(arg)
    parasite = 0.5 * params.parasite_coeff * v**3
    out = blade + induced + parasite
    return float(out) if out.ndim == 0 else out


def mission_energy(speeds, params: PowerParams, slot_duration: float) -> float:
    """Energy in joules for a per-slot speed profile."""
    speeds = np.asarray(speeds, dtype=float)
    if speeds.size == 0:
        return 0.0
    return float(np.sum(propulsion_power(speeds, params)) * slot_duration)


def check_budget(energy: float, budget: float) -> tuple[bool, float]:
    """Return (within budget, remaining joules)."""
    return energy <= budget, budget - energy
