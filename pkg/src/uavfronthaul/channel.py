"""Link-level physics: path loss, molecular absorption, LoS probability,
thermal noise, UAV orientation jitter, and received power."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .antenna import PatternEvaluator
from .geometry import AnglePair

__all__ = [
    "ChannelParams",
    "VibrationModel",
    "LOS_ENVIRONMENTS",
    "path_loss",
    "los_probability",
    "noise_power",
    "draw_vibration",
    "received_power",
]

BOLTZMANN = 1.380649e-23  # J/K
LIGHT_SPEED = 299792458.0  # m/s

# (alpha, beta) presets from the air-to-ground LoS literature.
LOS_ENVIRONMENTS = {
    "suburban": (4.88, 0.43),
    "urban": (9.61, 0.16),
    "dense-urban": (12.08, 0.11),
    "highrise-urban": (27.23, 0.08),
}


@dataclass(frozen=True)
class ChannelParams:
    f_c: float = 95e9
    p_t: float = 0.01
    absorption_k: float = 0.0        # 1/m; no 95 GHz value is pinned upstream
    bandwidth: float = 3e9
    temperature: float = 293.15
    noise_figure_db: float = 0.0
    los_alpha: float = 9.61
    los_beta: float = 0.16

    def __post_init__(self):
        positives = {
            "f_c": self.f_c, "p_t": self.p_t, "bandwidth": self.bandwidth,
            "temperature": self.temperature, "los_alpha": self.los_alpha,
            "los_beta": self.los_beta,
        }
        for name, val in positives.items():
            if not (val > 0 and math.isfinite(val)):
                raise ValueError(f"{name} must be positive and finite")
        if self.absorption_k < 0 or self.noise_figure_db < 0:
            raise ValueError("absorption_k and noise_figure_db must be >= 0")

    @property
    def wavelength(self) -> float:
        return LIGHT_SPEED / self.f_c


@dataclass(frozen=True)
class VibrationModel:
    """Per-axis Gaussian orientation jitter standard deviations, radians."""

    sigma_theta_x: float
    sigma_theta_y: float

    def __post_init__(self):
        if self.sigma_theta_x < 0 or self.sigma_theta_y < 0:
            raise ValueError("jitter sigmas must be >= 0")

    @classmethod
    def from_degrees(cls, sigma_x_deg: float, sigma_y_deg: float | None = None):
        if sigma_y_deg is None:
            sigma_y_deg = sigma_x_deg
        return cls(math.radians(sigma_x_deg), math.radians(sigma_y_deg))


def path_loss(p: ChannelParams, length) -> float:
    """Squared-magnitude path loss |h_L|^2: free-space inverse-square times
    the molecular absorption power factor exp(-K * L)."""
    L = np.asarray(length, dtype=float)
    if np.any(L <= 0):
        raise ValueError("link length must be positive")
    out = (p.wavelength / (4.0 * np.pi * L)) ** 2 * np.exp(-p.absorption_k * L)
    return float(out) if out.ndim == 0 else out


def los_probability(p: ChannelParams, elevation) -> float:
    """Line-of-sight probability vs. elevation angle (radians)."""
    e = np.asarray(elevation, dtype=float)
    deg = np.degrees(e)
    out = 1.0 / (1.0 + p.los_alpha * np.exp(-p.los_beta * (deg - p.los_alpha)))
    return float(out) if out.ndim == 0 else out


def noise_power(p: ChannelParams) -> float:
    """Thermal noise power k_B * T * BW * 10^(NF/10) in watts."""
    return BOLTZMANN * p.temperature * p.bandwidth * 10.0 ** (p.noise_figure_db / 10.0)


def draw_vibration(v: VibrationModel, rng: np.random.Generator, n: int | None = None):
    """Independent zero-mean Gaussian per-axis orientation draws.

    Returns an ``AnglePair`` for scalar use or a (2, n) array for batches.
    """
    if n is None:
        return AnglePair(rng.normal(0.0, v.sigma_theta_x),
                         rng.normal(0.0, v.sigma_theta_y))
    z = rng.standard_normal((2, n))
    z[0] *= v.sigma_theta_x
    z[1] *= v.sigma_theta_y
    return z


def received_power(p: ChannelParams, length: float, uav_antenna: PatternEvaluator,
                   sbs_antenna: PatternEvaluator, vibration_draw: AnglePair) -> float:
    """Received power of the target link.

    The SBS antenna is perfectly aligned (boresight peak); the UAV antenna is
    deflected by the vibration draw, composed into a single deviation angle
    and azimuth.  With a zero draw this reduces to
    P_t |h_L|^2 * peak_u * peak_s.
    """
    tx = math.tan(vibration_draw.theta_x)
    ty = math.tan(vibration_draw.theta_y)
    theta = math.atan(math.hypot(tx, ty))
    phi = math.atan2(ty, tx) if (tx or ty) else 0.0
    g_u = uav_antenna.peak * uav_antenna.normalized_gain(theta, phi)
    return p.p_t * path_loss(p, length) * sbs_antenna.peak * g_u
