"""Annulus-intersection localization error bound.

Each reception slot constrains the target to a ring around the anchor's
ground position: estimated ground range widened by the mean ranging
error and by how far the target can have walked between that slot and
the reference slot.  The intersection of several rings is the feasible
region; the reported error is the distance from the estimate to the
farthest point of that region, found by sampling ring boundaries and a
grid over the intersection's bounding box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .ranging import RangingParams, mean_range_error

MEMBER_RTOL = 1e-9  # keeps exact boundary points inside their own ring


@dataclass(frozen=True)
class Annulus:
    center: np.ndarray  # anchor ground position, shape (2,)
    inner: float
    outer: float

    def __post_init__(self):
        if not 0 <= self.inner <= self.outer:
            raise ValueError(f"need 0 <= inner <= outer, got {self.inner}, {self.outer}")


@dataclass(frozen=True)
class ErrorModel:
    """Linear growth of the localization error after the last reception."""
    e0: float       # error bound at the reference slot, m
    alpha: float    # growth rate, 1/s
    t_ref: int      # reference slot index
    slot_duration: float

    def __post_init__(self):
        if self.e0 < 0 or self.alpha < 0:
            raise ValueError("e0 and alpha must be >= 0")


def build_annulus(d_star: float, params: RangingParams, v_max: float,
                  dt_seconds: float, center) -> Annulus:
    """Ring of feasible ground ranges for one slot's range estimate.

    ``d_star`` is the slot's ground-range estimate, ``dt_seconds`` the
    time from that slot to the reference slot.  The inner radius clamps
    at zero when the widening exceeds the estimate.
    """
    if d_star <= 0:
        raise ValueError(f"d_star must be > 0, got {d_star}")
    if dt_seconds < 0:
        raise ValueError(f"dt_seconds must be >= 0, got {dt_seconds}")
    margin = mean_range_error(d_star, params) + v_max * dt_seconds
    return Annulus(center=np.asarray(center, dtype=float).copy(),
                   inner=max(0.0, d_star - margin),
                   outer=d_star + margin)


def _membership_mask(annuli: Sequence[Annulus], pts: np.ndarray) -> np.ndarray:
    """Boolean mask of points lying inside every annulus."""
    mask = np.ones(len(pts), dtype=bool)
    for a in annuli:
        r2 = np.sum((pts - a.center) ** 2, axis=1)
        lo = a.inner**2 * (1.0 - MEMBER_RTOL)
        hi = a.outer**2 * (1.0 + MEMBER_RTOL) + 1e-12
        mask &= (r2 >= lo) & (r2 <= hi)
        if not mask.any():
            break
    return mask


def region_contains(annuli: Sequence[Annulus], p) -> bool:
    """True iff ``p`` lies inside every annulus of the set."""
    if not annuli:
        raise ValueError("need at least one annulus")
    p = np.asarray(p, dtype=float).reshape(1, 2)
    return bool(_membership_mask(annuli, p)[0])


class FarthestPoint(NamedTuple):
    error: float
    empty_region: bool


def farthest_point_error(annuli: Sequence[Annulus], w_hat,
                         theta_steps: int = 2048,
                         grid_steps: int = 256) -> FarthestPoint:
    """Max distance from the estimate to the sampled intersection region.

    Candidate points are every annulus boundary circle sampled at
    ``theta_steps`` angles, a ``grid_steps`` x ``grid_steps`` lattice
    over the intersection's bounding box, and the estimate itself, all
    filtered by membership in every annulus.  When nothing passes the
    filter the region is treated as empty and the fallback value
    ``max((outer - inner) / 2)`` is returned with the flag set.
    """
    if not annuli:
        raise ValueError("need at least one annulus")
    w_hat = np.asarray(w_hat, dtype=float)
    theta = np.linspace(0.0, 2 * math.pi, theta_steps, endpoint=False)
    unit = np.column_stack([np.cos(theta), np.sin(theta)])

    chunks = [w_hat.reshape(1, 2)]
    for a in annuli:
        chunks.append(a.center + a.outer * unit)
        if a.inner > 0:
            chunks.append(a.center + a.inner * unit)

    # bounding box of the intersection: tightest box over all outer discs
    lo = np.max([a.center - a.outer for a in annuli], axis=0)
    hi = np.min([a.center + a.outer for a in annuli], axis=0)
    if np.all(lo < hi):
        xs = np.linspace(lo[0], hi[0], grid_steps)
        ys = np.linspace(lo[1], hi[1], grid_steps)
        gx, gy = np.meshgrid(xs, ys)
        chunks.append(np.column_stack([gx.ravel(), gy.ravel()]))

    pts = np.vstack(chunks)
    mask = _membership_mask(annuli, pts)
    if not mask.any():
        fallback = max((a.outer - a.inner) / 2 for a in annuli)
        return FarthestPoint(fallback, True)
    dists = np.linalg.norm(pts[mask] - w_hat, axis=1)
    return FarthestPoint(float(dists.max()), False)


def error_at(model: ErrorModel, t) -> float:
    """Error bound at slot ``t >= t_ref``: e0 * (1 + alpha * elapsed)."""
    if t < model.t_ref:
        raise ValueError(f"t ({t}) must be >= reference slot ({model.t_ref})")
    elapsed = (t - model.t_ref) * model.slot_duration
    return model.e0 * (1.0 + model.alpha * elapsed)
