"""Directional square-array gain model.

The full pattern is element gain x array factor x a power-normalization
constant, plus the worst-case sum-of-Gaussians envelope used by the closed
form outage chain.  Angle convention: ``theta`` is the polar angle from the
array boresight axis, ``phi`` the azimuth in the array plane, both radians.
Degrees appear only at config/CLI boundaries.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ElementMode",
    "ElementPattern",
    "ArrayConfig",
    "GaussianApprox",
    "array_factor",
    "element_gain",
    "PatternEvaluator",
    "get_evaluator",
    "normalization_g0",
    "pattern_gain",
    "gaussian_approx_gain",
]


class ElementMode(enum.Enum):
    THREE_GPP = "3gpp"
    ISOTROPIC = "isotropic"


@dataclass(frozen=True)
class ElementPattern:
    """Single-element radiation pattern (parabolic-in-dB with floor limits)."""

    g_max_db: float = 8.0
    front_back_db: float = 30.0
    sidelobe_limit_db: float = 30.0
    theta_3db_deg: float = 65.0
    phi_3db_deg: float = 65.0
    mode: ElementMode = ElementMode.THREE_GPP

    def __post_init__(self):
        if not (0.0 < self.theta_3db_deg < 180.0 and 0.0 < self.phi_3db_deg < 180.0):
            raise ValueError("3 dB beamwidths must lie in (0, 180) degrees")
        if self.front_back_db < 0 or self.sidelobe_limit_db < 0:
            raise ValueError("pattern limits must be >= 0 dB")


@dataclass(frozen=True)
class ArrayConfig:
    """Uniform square array: n x n elements, spacing in wavelengths."""

    n: int
    spacing_wl: float = 0.5
    beta_x: float = 0.0
    beta_y: float = 0.0
    element: ElementPattern = field(default_factory=ElementPattern)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("array size n must be >= 1")
        if self.spacing_wl <= 0:
            raise ValueError("element spacing must be positive")
        if not (math.isfinite(self.beta_x) and math.isfinite(self.beta_y)):
            raise ValueError("phase shifts must be finite")

    @property
    def kd(self) -> float:
        """k * d_a, dimensionless (= 2*pi*spacing in wavelengths)."""
        return 2.0 * math.pi * self.spacing_wl


def _check_angles(theta, phi):
    t = np.asarray(theta, dtype=float)
    p = np.asarray(phi, dtype=float)
    if not (np.all(np.isfinite(t)) and np.all(np.isfinite(p))):
        raise ValueError("angles must be finite")
    return t, p


def _af_axis(n: int, u):
    """(sin(n u) / (n sin u))^2 for one array axis, singularities removed.

    When sin(u) -> 0 the limit is cos(n u)/cos(u) -> +-1, so the squared
    factor tends to 1; the series form keeps the evaluation continuous.
    """
    s = np.sin(u)
    tiny = np.abs(s) < 1e-9
    safe = np.where(tiny, 1.0, s)
    f = np.sin(n * u) / (n * safe)
    f = np.where(tiny, np.cos(n * u) / np.cos(u), f)
    return f * f


def array_factor(cfg: ArrayConfig, theta, phi):
    """Normalized square-array factor in [0, 1] (unity at the steering direction)."""
    t, p = _check_angles(theta, phi)
    st = np.sin(t)
    ux = 0.5 * (cfg.kd * st * np.cos(p) + cfg.beta_x)
    uy = 0.5 * (cfg.kd * st * np.sin(p) + cfg.beta_y)
    out = _af_axis(cfg.n, ux) * _af_axis(cfg.n, uy)
    return float(out) if out.ndim == 0 else out


def _element_attenuation_db(ep: ElementPattern, theta, phi):
    """Attenuation below boresight in dB (>= 0) for the 3GPP element model."""
    st = np.sin(theta)
    ct = np.cos(theta)
    # Vertical/horizontal offsets of the direction from boresight.
    a_v = np.degrees(np.arcsin(np.clip(st * np.sin(phi), -1.0, 1.0)))
    a_h = np.degrees(np.arctan2(st * np.cos(phi), ct))
    att_v = np.minimum(12.0 * (a_v / ep.theta_3db_deg) ** 2, ep.sidelobe_limit_db)
    att_h = np.minimum(12.0 * (a_h / ep.phi_3db_deg) ** 2, ep.front_back_db)
    return np.minimum(att_v + att_h, ep.front_back_db)


def element_gain(ep: ElementPattern, theta, phi):
    """Linear element gain; boresight value is 10^(g_max_db/10)."""
    t, p = _check_angles(theta, phi)
    if ep.mode is ElementMode.ISOTROPIC:
        out = np.ones_like(t * p)
        return float(out) if out.ndim == 0 else out
    att = _element_attenuation_db(ep, t, p)
    out = 10.0 ** ((ep.g_max_db - att) / 10.0)
    return float(out) if out.ndim == 0 else out


class QuadratureError(RuntimeError):
    """Spherical power integral failed to converge; carries the last estimate."""

    def __init__(self, estimate: float):
        super().__init__(f"pattern normalization did not converge (last estimate {estimate})")
        self.estimate = estimate


class PatternEvaluator:
    """Immutable full-pattern evaluator with a cached normalization constant.

    ``g0`` forces the 4*pi steradian power integral of the full pattern to
    unity; ``peak`` is the boresight gain g0 * Ge(0) * 1.  Safe to share
    across concurrent Monte-Carlo workers.
    """

    def __init__(self, cfg: ArrayConfig, rel_tol: float = 1e-4,
                 base_panels: tuple[int, int] = (256, 512), max_doublings: int = 6):
        self.cfg = cfg
        self._g0 = self._normalize(rel_tol, base_panels, max_doublings)
        self._peak = self._g0 * float(element_gain(cfg.element, 0.0, 0.0))

    def _raw_integral(self, n_theta: int, n_phi: int) -> float:
        th = np.linspace(0.0, np.pi, n_theta + 1)
        ph = np.linspace(0.0, 2.0 * np.pi, n_phi + 1)
        # Accumulate in theta chunks to keep peak memory flat at fine grids.
        chunk = max(1, (1 << 22) // (n_phi + 1))
        inner = np.empty_like(th)
        for lo in range(0, th.size, chunk):
            tg = th[lo:lo + chunk, None]
            vals = element_gain(self.cfg.element, tg, ph[None, :]) \
                * array_factor(self.cfg, tg, ph[None, :]) * np.sin(tg)
            inner[lo:lo + chunk] = np.trapezoid(vals, ph, axis=1)
        return float(np.trapezoid(inner, th))

    def _normalize(self, rel_tol, base_panels, max_doublings) -> float:
        n_theta, n_phi = base_panels
        # Lobe count scales with n; make sure several samples land per lobe.
        while n_theta < 16 * self.cfg.n:
            n_theta *= 2
            n_phi *= 2
        prev = self._raw_integral(n_theta, n_phi)
        for _ in range(max_doublings):
            n_theta *= 2
            n_phi *= 2
            cur = self._raw_integral(n_theta, n_phi)
            if abs(cur - prev) <= rel_tol * abs(cur):
                return 4.0 * np.pi / cur
            prev = cur
        raise QuadratureError(4.0 * np.pi / prev)

    @property
    def g0(self) -> float:
        """Normalization constant of Eq-style 4*pi power balancing."""
        return self._g0

    @property
    def peak(self) -> float:
        """Boresight (maximum) gain of the normalized pattern."""
        return self._peak

    def gain(self, theta, phi):
        """Full pattern g0 * Ge * Ga."""
        return self._g0 * element_gain(self.cfg.element, theta, phi) \
            * array_factor(self.cfg, theta, phi)

    def normalized_gain(self, theta, phi):
        """Pattern divided by its boresight peak (1 at theta=0 for beta=0)."""
        return self.gain(theta, phi) / self._peak


@functools.lru_cache(maxsize=None)
def get_evaluator(cfg: ArrayConfig) -> PatternEvaluator:
    """Process-wide evaluator cache (the normalization integral is costly)."""
    return PatternEvaluator(cfg)


def normalization_g0(cfg: ArrayConfig, rel_tol: float = 1e-4) -> float:
    """Convenience wrapper: the cached-evaluator normalization constant."""
    if rel_tol == 1e-4:
        return get_evaluator(cfg).g0
    return PatternEvaluator(cfg, rel_tol=rel_tol).g0


def pattern_gain(cfg: ArrayConfig, theta, phi):
    """One-shot full pattern evaluation (builds a fresh evaluator)."""
    return PatternEvaluator(cfg).gain(theta, phi)


@dataclass(frozen=True)
class GaussianApprox:
    """Worst-case sum-of-Gaussians envelope of the square-array pattern.

    Lobe m sits at asin((2m+1)/n) with width 1/(2n); the main lobe has
    width 1/n.  Lobes whose asin argument exceeds 1 are masked off.
    """

    m_max: int = 6
    amplitudes: tuple[float, ...] = (1.0, 0.05, 0.020, 0.011, 0.006, 0.004, 0.003)

    def __post_init__(self):
        if len(self.amplitudes) != self.m_max + 1:
            raise ValueError("need m_max + 1 lobe amplitudes")
        side = self.amplitudes[1:]
        if any(b >= a for a, b in zip(side, side[1:])):
            raise ValueError("side-lobe amplitudes must be strictly decreasing")

    def lobe_params(self, n: int):
        """(amplitude, center, width, mask) arrays for an n x n array."""
        m = np.arange(self.m_max + 1)
        amps = np.asarray(self.amplitudes, dtype=float)
        ratio = (2 * m + 1) / n
        mask = np.where((ratio <= 1.0) | (m == 0), 1.0, 0.0)
        centers = np.where(mask > 0, np.arcsin(np.clip(ratio, 0.0, 1.0)), 0.0)
        centers[0] = 0.0
        widths = np.where(m == 0, 1.0 / n, 1.0 / (2.0 * n))
        return amps, centers, widths, mask

    def envelope(self, n: int, theta):
        """Normalized envelope sum_m A_m A''_m exp(-(theta-A'_m)^2 / w_m^2)."""
        if n < 1:
            raise ValueError("array size n must be >= 1")
        t = np.asarray(theta, dtype=float)
        amps, centers, widths, mask = self.lobe_params(n)
        tt = t[..., None]
        out = np.sum(amps * mask * np.exp(-((tt - centers) / widths) ** 2), axis=-1)
        return float(out) if out.ndim == 0 else out


def gaussian_approx_gain(ga: GaussianApprox, n: int, theta, g0: float = 1.0):
    """Envelope scaled by a peak gain (g0 = 1 gives the normalized envelope)."""
    return g0 * ga.envelope(n, theta)
