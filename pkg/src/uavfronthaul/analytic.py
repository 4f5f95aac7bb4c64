"""Closed-form outage chain for the worst-case antenna envelope.

The chain: per-axis Gaussian orientation jitter -> Hoyt-type distribution of
the squared normalized deflection -> conditional outage in Marcum-Q form ->
geometric distributions of the link/neighbor angles -> sector-summed,
one-dimensional-integral upper bound on the deployment-averaged outage.

All angles are radians.  ``w0`` is the main-lobe width of the (approximated)
square array, 1/n for an n x n panel.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from .antenna import GaussianApprox
from .channel import ChannelParams, VibrationModel, noise_power
from .special_math import bessel_i0_scaled, marcum_q1

__all__ = [
    "HoytParams",
    "BoundConfig",
    "hoyt_pdf",
    "hoyt_cdf",
    "worst_case_sinr",
    "outage_conditional",
    "theta11_pdf",
    "theta_d_conditional_cdf",
    "theta_d_pdf_cdf",
    "theta_d_pdf",
    "theta_d_cdf",
    "average_outage_bound",
    "bound_for_link",
    "normalized_noise",
]

_EQUAL_AXIS_TOL = 1e-6


@dataclass(frozen=True)
class HoytParams:
    """Distribution parameters of T = (Theta_x^2 + Theta_y^2) / w0^2 with
    independent zero-mean Gaussian per-axis deflections.

    ``beta_w = 2 sigma_w^2 / w0^2`` is the per-axis mean contribution (the
    squared ratio of the jitter spread to the main-lobe scale); the CDF is a
    two-term Marcum-Q (Nakagami-q) form with shape ``t_q`` = sigma_min/sigma_max.
    """

    beta_ux: float
    beta_uy: float
    w0: float

    def __post_init__(self):
        if self.beta_ux <= 0 or self.beta_uy <= 0:
            raise ValueError("beta parameters must be positive")
        if self.w0 <= 0:
            raise ValueError("main-lobe width must be positive")

    @classmethod
    def from_vibration(cls, vib: VibrationModel, n_elements: int) -> "HoytParams":
        if vib.sigma_theta_x <= 0 or vib.sigma_theta_y <= 0:
            raise ValueError("analytic chain needs strictly positive jitter")
        w0 = 1.0 / n_elements
        return cls(2.0 * vib.sigma_theta_x ** 2 / w0 ** 2,
                   2.0 * vib.sigma_theta_y ** 2 / w0 ** 2, w0)

    @property
    def n_elements(self) -> float:
        return 1.0 / self.w0

    @property
    def t_q(self) -> float:
        lo, hi = sorted((self.beta_ux, self.beta_uy))
        return math.sqrt(lo / hi)

    @property
    def symmetric(self) -> bool:
        return abs(1.0 - self.t_q) < _EQUAL_AXIS_TOL

    @property
    def b1(self) -> float:
        t = self.t_q
        return (1.0 + t) * math.sqrt(1.0 + t * t) / (2.0 * t)

    @property
    def b2(self) -> float:
        t = self.t_q
        return (1.0 - t) * math.sqrt(1.0 + t * t) / (2.0 * t)


@dataclass(frozen=True)
class BoundConfig:
    """Parameters of the conditional outage and its sector-summed average.

    ``theta_d_max`` of None means the geometric maximum atan(2R/h1) (capped
    at pi/2) is derived from the coverage radius at evaluation time.
    ``sector_mode`` selects between the printed sector weighting
    ("verbatim") and an exactly normalized first-occupied-sector
    decomposition ("normalized").
    """

    n_prime_0: float
    gamma_th: float
    j_links: int = 10
    alpha_c: float = math.radians(2.0)
    d_sectors: int = 80
    theta_d_max: float | None = None
    sector_mode: str = "normalized"
    quad_points: int = 96

    def __post_init__(self):
        if self.n_prime_0 < 0 or self.gamma_th <= 0:
            raise ValueError("noise must be >= 0 and threshold > 0")
        if self.j_links < 1 or self.d_sectors < 1:
            raise ValueError("link count and sector count must be >= 1")
        if self.alpha_c < 0:
            raise ValueError("alpha_c must be >= 0")
        if self.sector_mode not in ("normalized", "verbatim"):
            raise ValueError("sector_mode must be 'normalized' or 'verbatim'")

    def resolved_theta_d_max(self, h1: float, radius: float) -> float:
        if self.theta_d_max is not None:
            return self.theta_d_max
        return min(math.atan(2.0 * radius / h1), math.pi / 2 - 1e-9)


def hoyt_pdf(p: HoytParams, t):
    """Density of the squared normalized deflection."""
    t = np.asarray(t, dtype=float)
    bx, by = p.beta_ux, p.beta_uy
    tc = np.maximum(t, 0.0)
    a = (bx + by) / (2.0 * bx * by)
    b = abs(bx - by) / (2.0 * bx * by)
    # exp(-a t) I0(b t) written with the scaled Bessel so large t cannot
    # overflow: a - b = 1 / max(bx, by) > 0
    out = np.where(
        t < 0, 0.0,
        1.0 / math.sqrt(bx * by)
        * np.exp(-(a - b) * tc) * bessel_i0_scaled(b * tc))
    return float(out) if out.ndim == 0 else out


def hoyt_cdf(p: HoytParams, t):
    """CDF via the two-term Marcum-Q form; exact exponential branch when the
    two axes have (numerically) equal spread."""
    t = np.asarray(t, dtype=float)
    tc = np.maximum(t, 0.0)
    if p.symmetric:
        beta = math.sqrt(p.beta_ux * p.beta_uy)
        out = np.where(t < 0, 0.0, 1.0 - np.exp(-tc / beta))
        return float(out) if out.ndim == 0 else out
    s = np.sqrt(2.0 * tc / (p.beta_ux + p.beta_uy))
    out = np.where(t < 0, 0.0,
                   marcum_q1(p.b1 * s, p.b2 * s) - marcum_q1(p.b2 * s, p.b1 * s))
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def _survival(p: HoytParams, t):
    """1 - hoyt_cdf, vectorized (t may be any shape)."""
    t = np.asarray(t, dtype=float)
    if p.symmetric:
        beta = math.sqrt(p.beta_ux * p.beta_uy)
        return np.exp(-np.maximum(t, 0.0) / beta)
    s = np.sqrt(2.0 * np.maximum(t, 0.0) / (p.beta_ux + p.beta_uy))
    cdf = marcum_q1(p.b1 * s, p.b2 * s) - marcum_q1(p.b2 * s, p.b1 * s)
    return 1.0 - np.clip(cdf, 0.0, 1.0)


def normalized_noise(params: ChannelParams, path_gain_11: float,
                     peak_sbs: float, peak_uav: float) -> float:
    """Noise power divided by the boresight-aligned received power."""
    return noise_power(params) / (params.p_t * path_gain_11 * peak_sbs * peak_uav)


def worst_case_sinr(draw, theta_d_list, ga: GaussianApprox, n_elements: int,
                    n_prime_0: float) -> float:
    """Worst-case instantaneous SINR: main-lobe Gaussian signal roll-off over
    the envelope sum of the co-served neighbor angles plus normalized noise.

    ``draw`` is the (theta_x, theta_y) deflection pair of the serving UAV;
    the small-angle quadratic form of the squared normalized deflection is
    used in the numerator.
    """
    tx, ty = float(draw[0]), float(draw[1])
    w0 = 1.0 / n_elements
    t_prime = (tx * tx + ty * ty) / (w0 * w0)
    td = np.asarray(theta_d_list, dtype=float)
    interf = float(np.sum(ga.envelope(n_elements, td))) if td.size else 0.0
    return math.exp(-t_prime) / (interf + n_prime_0)


def outage_conditional(p: HoytParams, bc: BoundConfig, theta_d_list,
                       ga: GaussianApprox | None = None) -> float:
    """Worst-case outage probability conditioned on the neighbor angles.

    Evaluates 1 - F_T(-ln(arg)) with arg = (envelope sum + N'0) * gamma_th,
    saturating at 1 whenever arg >= 1 (the worst-case SINR cannot reach the
    threshold even with perfect pointing).
    """
    ga = ga or GaussianApprox()
    td = np.asarray(theta_d_list, dtype=float)
    interf = float(np.sum(ga.envelope(p.n_elements, td))) if td.size else 0.0
    arg = (interf + bc.n_prime_0) * bc.gamma_th
    if arg >= 1.0:
        return 1.0
    return float(_survival(p, -math.log(arg)))


# --- geometric angle distributions ----------------------------------------

def theta11_pdf(h1: float, radius: float, theta):
    """Density of the target link's own pointing angle for a node uniformly
    distributed in radial abscissa within the coverage radius."""
    t = np.asarray(theta, dtype=float)
    tmax = math.atan(radius / h1)
    out = np.where((t > 0) & (t < tmax), h1 / (radius * np.cos(t) ** 2), 0.0)
    return float(out) if out.ndim == 0 else out


def _theta_x_pdf(h1: float, radius: float, tx):
    """Symmetric per-axis neighbor angle density, normalized over its full
    support (-atan(R/h1), atan(R/h1))."""
    t = np.asarray(tx, dtype=float)
    tmax = math.atan(radius / h1)
    out = np.where(np.abs(t) < tmax, h1 / (2.0 * radius * np.cos(t) ** 2), 0.0)
    return float(out) if out.ndim == 0 else out


def theta_d_conditional_cdf(h1: float, radius: float, theta_x11: float,
                            theta_x, theta_d):
    """CDF of a neighbor's separation angle given its per-axis angle,
    clipped to [0, 1] where the raw expression overshoots."""
    td = np.asarray(theta_d, dtype=float)
    tx = np.asarray(theta_x, dtype=float)
    delta = np.abs(np.tan(tx - theta_x11))
    pref = h1 / np.sqrt(np.maximum(radius ** 2 - (h1 * np.tan(tx)) ** 2, 1e-300))
    inner = np.tan(np.clip(td, 0.0, math.pi / 2 - 1e-12)) ** 2 - delta ** 2
    out = np.where(inner <= 0, 0.0, pref * np.sqrt(np.maximum(inner, 0.0)))
    out = np.clip(out, 0.0, 1.0)
    return float(out) if np.ndim(out) == 0 else out


def theta_d_cdf(h1: float, radius: float, theta_x11: float,
                theta_d: float) -> float:
    """Marginal CDF of a neighbor separation angle (numerical integral of the
    conditional CDF against the per-axis angle density)."""
    tmax = math.atan(radius / h1)

    def integrand(tx):
        return (theta_d_conditional_cdf(h1, radius, theta_x11, tx, theta_d)
                * _theta_x_pdf(h1, radius, tx))

    pts = [q for q in (theta_x11 - theta_d, theta_x11, theta_x11 + theta_d)
           if -tmax < q < tmax]
    val, _ = integrate.quad(integrand, -tmax, tmax, points=pts or None, limit=200)
    return float(min(max(val, 0.0), 1.0))


def theta_d_pdf(h1: float, radius: float, theta_x11: float, theta_d: float,
                eps: float = 1e-5) -> float:
    """Marginal density of a neighbor separation angle (central difference of
    the marginal CDF; the conditional density has an integrable edge
    singularity that differencing the CDF sidesteps)."""
    lo = max(theta_d - eps, 0.0)
    hi = theta_d + eps
    return (theta_d_cdf(h1, radius, theta_x11, hi)
            - theta_d_cdf(h1, radius, theta_x11, lo)) / (hi - lo)


def theta_d_pdf_cdf(h1: float, radius: float, theta_x11: float,
                    theta_d: float) -> dict:
    """Both marginal pdf and cdf of the neighbor separation angle."""
    return {"pdf": theta_d_pdf(h1, radius, theta_x11, theta_d),
            "cdf": theta_d_cdf(h1, radius, theta_x11, theta_d)}


# --- deployment-averaged upper bound --------------------------------------

def _log_binom(n: int, k: np.ndarray) -> np.ndarray:
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def _outage_grid(p: HoytParams, bc: BoundConfig, ga: GaussianApprox,
                 theta_grid: np.ndarray, j_counts: np.ndarray) -> np.ndarray:
    """Conditional outage for every (sector angle, interferer count) pair:
    shape broadcast of theta_grid[..., None] with j_counts."""
    env = np.asarray(ga.envelope(p.n_elements, theta_grid), dtype=float)
    arg = (j_counts * env[..., None] + bc.n_prime_0) * bc.gamma_th
    ok = arg < 1.0
    t = -np.log(np.where(ok, arg, 1.0))
    return np.where(ok, _survival(p, t), 1.0)


def bound_conditional_on_theta_x(p: HoytParams, bc: BoundConfig, theta_x,
                                 h1: float, radius: float, theta_x11: float,
                                 ga: GaussianApprox | None = None) -> np.ndarray:
    """Outage bound conditioned on the neighbor per-axis angle (vectorized).

    Sectorizes the separation-angle support into D cells; each term weights
    the conditional outage with j interferers at the sector's lower edge by
    the probability of placing j of the J-1 neighbors there with the rest
    beyond it.
    """
    ga = ga or GaussianApprox()
    theta_x = np.atleast_1d(np.asarray(theta_x, dtype=float))
    D, J = bc.d_sectors, bc.j_links
    theta_d_max = bc.resolved_theta_d_max(h1, radius)

    delta = np.abs(theta_x - theta_x11)
    g1 = np.maximum(bc.alpha_c, delta)
    g2 = np.maximum(theta_d_max - g1, 0.0)
    # sector edges graded quadratically toward the admission angle, where the
    # envelope (and hence the left-endpoint overestimate) is steepest
    frac = (np.arange(D + 1) / D) ** 2
    edges = g1[:, None] + g2[:, None] * frac                      # (T, D+1)

    tan_delta_sq = np.tan(delta) ** 2
    pref = h1 / np.sqrt(np.maximum(radius ** 2 - (h1 * np.tan(theta_x)) ** 2,
                                   1e-300))
    inner = np.tan(np.clip(edges, 0.0, math.pi / 2 - 1e-9)) ** 2 \
        - tan_delta_sq[:, None]
    root = np.sqrt(np.maximum(inner, 0.0))                        # (T, D+1)

    if J == 1:
        return _outage_grid(p, bc, ga, np.zeros(theta_x.shape[0]),
                            np.zeros(1, dtype=int))[:, 0]

    j_counts = np.arange(1, J)                                    # 1 .. J-1
    p_out = _outage_grid(p, bc, ga, edges[:, :-1], j_counts)      # (T, D, J-1)

    if bc.sector_mode == "verbatim":
        width = np.maximum(root[:, 1:] - root[:, :-1], 0.0)
        rest = np.maximum(1.0 - root[:, 1:], 0.0)
        comb = np.exp(_log_binom(J, j_counts))
        with np.errstate(over="ignore"):
            prefpow = np.power(pref, J - 1)
            terms = (comb * prefpow[:, None, None]
                     * np.power(width[:, :, None], j_counts)
                     * np.power(rest[:, :, None], J - 1 - j_counts))
        total = np.sum(np.where(np.isfinite(terms), terms, 0.0) * p_out,
                       axis=(1, 2))
        return np.clip(total, 0.0, 1.0)

    # Normalized mode: exact first-occupied-sector decomposition of the J-1
    # neighbor angles, conditioned on all of them clearing the admission
    # angle (their conditional CDF is rescaled to start at 0 at g1).
    f_edges = np.clip(pref[:, None] * root, 0.0, 1.0)             # (T, D+1)
    f0 = f_edges[:, :1]
    f_cond = np.clip((f_edges - f0) / np.maximum(1.0 - f0, 1e-300), 0.0, 1.0)
    width = np.maximum(f_cond[:, 1:] - f_cond[:, :-1], 0.0)       # (T, D)
    beyond = np.maximum(1.0 - f_cond[:, 1:], 0.0)                 # (T, D)
    comb = np.exp(_log_binom(J - 1, j_counts))
    terms = (comb * np.power(width[:, :, None], j_counts)
             * np.power(beyond[:, :, None], J - 1 - j_counts))
    total = np.sum(terms * p_out, axis=(1, 2))
    # all J-1 neighbors beyond the last sector edge: only noise remains
    none_mass = np.maximum(1.0 - f_cond[:, -1], 0.0) ** (J - 1)
    p_none = _outage_grid(p, bc, ga, np.zeros(theta_x.shape[0]),
                          np.zeros(1, dtype=int))[:, 0]
    return np.clip(total + none_mass * p_none, 0.0, 1.0)


@functools.lru_cache(maxsize=32)
def _leggauss(n_pts: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n_pts)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def average_outage_bound(p: HoytParams, bc: BoundConfig, h1: float,
                         radius: float, theta_x11: float,
                         ga: GaussianApprox | None = None,
                         rel_tol: float = 2e-3, max_doublings: int = 2) -> float:
    """Upper bound on the outage probability averaged over the random
    neighbor positions, for a given target-link angle and flight height.

    One-dimensional Gauss-Legendre integral over the neighbor per-axis angle
    with node-count doubling until the estimate stabilizes; result clamped
    to [0, 1].
    """
    ga = ga or GaussianApprox()
    tmax = math.atan(radius / h1)

    def estimate(n_pts: int) -> float:
        x, w = _leggauss(n_pts)
        tx = x * tmax
        vals = bound_conditional_on_theta_x(p, bc, tx, h1, radius, theta_x11, ga)
        dens = _theta_x_pdf(h1, radius, tx)
        return float(np.sum(w * tmax * vals * dens))

    n = bc.quad_points
    prev = estimate(n)
    for _ in range(max_doublings):
        n *= 2
        cur = estimate(n)
        if abs(cur - prev) <= rel_tol * max(abs(cur), 1e-12):
            return min(max(cur, 0.0), 1.0)
        prev = cur
    return min(max(prev, 0.0), 1.0)


def bound_for_link(ctx, uav_peak: float, n_elements: int, vib: VibrationModel,
                   bc: BoundConfig, radius: float = 400.0,
                   ga: GaussianApprox | None = None) -> float:
    """Outage upper bound evaluated with one link context's own geometry.

    ``ctx`` is a ``LinkContext``; ``uav_peak`` is the boresight gain of the
    UAV array variant the bound should describe (it sets the normalized noise
    together with the context's path loss).  ``bc.n_prime_0`` is recomputed.
    """
    h1 = ctx.length_11 * math.cos(ctx.theta_11)
    n0 = normalized_noise(ctx.params, ctx.path_11, ctx.sbs_pattern.peak, uav_peak)
    bc = replace(bc, n_prime_0=n0)
    p = HoytParams.from_vibration(vib, n_elements)
    return average_outage_bound(p, bc, h1, radius, ctx.theta_11, ga)
