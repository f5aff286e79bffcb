"""Log-normal multiplicative ranging model.

An RSSI reading at true distance ``d`` yields the range estimate
``r = d * 10**(-psi/(10*eta))`` with ``psi ~ N(0, sigma_psi^2)`` dB of
shadowing.  Equivalently ``ln(r/d) ~ N(0, log_std^2)`` with
``log_std = sigma_psi / (xi * eta)`` and ``xi = 10*log10(e)``, so the
RSSI value itself never needs to be materialized: we sample the induced
range distribution directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

XI = 10.0 * math.log10(math.e)  # dB-to-neper conversion, ~4.3429


@dataclass(frozen=True)
class RangingParams:
    eta: float = 2.0        # path-loss exponent
    sigma_psi: float = 4.0  # shadowing std, dB

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError(f"eta must be > 0, got {self.eta}")
        if self.sigma_psi < 0:
            raise ValueError(f"sigma_psi must be >= 0, got {self.sigma_psi}")

    @property
    def sigma(self) -> float:
        """Shadowing std in nepers, sigma_psi / xi."""
        return self.sigma_psi / XI

    @property
    def log_std(self) -> float:
        return self.sigma / self.eta


@dataclass(frozen=True)
class RangeSample:
    slot: int
    uav: int
    person: int
    value: float  # m, > 0


def log_std(params: RangingParams) -> float:
    """Standard deviation of ln(r/d): sigma_psi / (xi * eta)."""
    return params.log_std


def sample_range(d, params: RangingParams, rng: np.random.Generator,
                 size=None):
    """Draw range estimates for true distance ``d`` (scalar or array).

    Deterministic under a seeded ``rng``.  With ``sigma_psi = 0`` the
    model is noiseless and returns ``d`` exactly.
    """
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("true distance must be > 0")
    s = params.log_std
    if s == 0.0:
        out = np.broadcast_to(d, size if size is not None else d.shape).copy()
    else:
        out = d * np.exp(rng.normal(0.0, s, size=size))
    return float(out) if out.ndim == 0 else out


def range_pdf(r, d: float, params: RangingParams):
    """Density of the range estimate: lognormal(ln d, log_std) at ``r``."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0) or d <= 0:
        raise ValueError("ranges and distance must be > 0")
    s = params.log_std
    if s == 0.0:
        raise ValueError("pdf is degenerate for sigma_psi = 0")
    out = np.exp(-np.log(r / d) ** 2 / (2 * s * s)) / (r * s * math.sqrt(2 * math.pi))
    return float(out) if out.ndim == 0 else out


def mean_range_error(d, params: RangingParams):
    """Magnitude of the mean ranging error at distance ``d``.

    The lognormal bias makes E[r] = d * exp(log_std^2 / 2); this returns
    ``d * (exp(log_std^2 / 2) - 1) >= 0``, applied symmetrically when
    bounding an estimate from above and below.
    """
    if np.any(np.asarray(d) < 0):
        raise ValueError(f"distance must be >= 0, got {d}")
    return d * math.expm1(params.log_std**2 / 2)
