"""Exact intra-cell and inter-cell interference terms and end-to-end SINR.

A ``LinkContext`` freezes everything about one target link that does not
change between vibration draws: angle deltas to every interfering antenna,
path losses, LoS weights and roll angles.  The scalar operations below are
the reference implementations; the Monte-Carlo engine evaluates the same
quantities through the compiled kernel in ``_kernel``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .antenna import PatternEvaluator
from .channel import ChannelParams, noise_power, path_loss, los_probability
from .geometry import AnglePair, Topology, inter_cell_geometry, spatial_angle

__all__ = [
    "SinrBreakdown",
    "LinkContext",
    "build_link_context",
    "intra_cell_term",
    "intra_cell_total",
    "inter_cell_term",
    "sinr",
]

# Per-axis deviations beyond +-pi/2 put the interferer behind the array
# plane, where the tangent composition degenerates; the gain there is at the
# front-back floor anyway, so the angle is clamped just inside the pole.
_DEV_CLAMP = math.pi / 2 - 1e-6


def _clamp_dev(x):
    return np.clip(x, -_DEV_CLAMP, _DEV_CLAMP)


@dataclass(frozen=True)
class SinrBreakdown:
    signal_w: float
    intra_w: float
    inter_w: float
    noise_w: float

    @property
    def sinr(self) -> float:
        return self.signal_w / (self.intra_w + self.inter_w + self.noise_w)


@dataclass(frozen=True)
class LinkContext:
    """Frozen geometry/channel context of one target link."""

    target_sbs: int
    serving_uav: int
    theta_11: float
    min_theta_d: float
    length_11: float
    path_11: float
    noise_w: float
    phi_s11: float

    # intra-cell neighbors, one entry per co-served SBS
    intra_sbs: np.ndarray
    intra_dx: np.ndarray
    intra_dy: np.ndarray
    intra_roll: np.ndarray

    # inter-cell terms, one entry per (interfering UAV, link) pair
    inter_uav: np.ndarray
    inter_dx: np.ndarray
    inter_dy: np.ndarray
    inter_roll: np.ndarray
    inter_base: np.ndarray       # P_t |h_L_i1|^2 peak_s P_LoS, without UAV-side gain
    inter_s11_dev: np.ndarray    # composite S11-side deviation angle per term
    inter_s11_az: np.ndarray     # azimuth of that deviation in the SBS frame

    uav_pattern: PatternEvaluator
    sbs_pattern: PatternEvaluator
    params: ChannelParams

    def with_phi_s11(self, phi_s11: float) -> "LinkContext":
        return replace(self, phi_s11=phi_s11)

    n_uav: int = 0

    def base_11(self) -> float:
        """P_t |h_L_11|^2 peak_s peak_u of the target link."""
        return self.params.p_t * self.path_11 * self.sbs_pattern.peak * self.uav_pattern.peak

    def s11_side_gain(self, term: int) -> float:
        """Normalized SBS-antenna gain toward the term's UAV.

        Rotating the SBS array in azimuth by ``phi_s11`` shifts the pattern
        azimuth seen by every interfering direction by the same amount.
        """
        return float(self.sbs_pattern.normalized_gain(
            self.inter_s11_dev[term], self.inter_s11_az[term] - self.phi_s11))


def build_link_context(topology: Topology, target_sbs: int,
                       uav_pattern: PatternEvaluator, sbs_pattern: PatternEvaluator,
                       params: ChannelParams, *, phi_s11: float = 0.0,
                       uav_rolls: np.ndarray | None = None) -> LinkContext:
    """Assemble the per-draw-invariant interference context for one link.

    ``uav_rolls`` gives the roll angle of the UAV-mounted antenna serving
    each SBS, indexed by SBS id (defaults to zero everywhere).
    """
    u1 = int(topology.assoc[target_sbs])
    rolls = np.zeros(topology.n_sbs) if uav_rolls is None else np.asarray(uav_rolls, float)
    ang11 = topology.link_pointing(u1, target_sbs)
    ux, uy, h1 = topology.uav_xyz[u1]
    sx, sy = topology.sbs_xy[target_sbs]
    l11 = math.sqrt((sx - ux) ** 2 + (sy - uy) ** 2 + h1 * h1)
    theta_11 = spatial_angle(ang11, AnglePair(0.0, 0.0))

    neighbors = [s for s in topology.cell_members(u1) if s != target_sbs]
    intra_dx, intra_dy, intra_roll, thetas_d = [], [], [], []
    for s in neighbors:
        ang = topology.link_pointing(u1, s)
        intra_dx.append(ang11.theta_x - ang.theta_x)
        intra_dy.append(ang11.theta_y - ang.theta_y)
        intra_roll.append(rolls[s])
        # composite separation with per-axis clamping: differences beyond
        # +-pi/2 saturate at the pattern's back-hemisphere floor anyway
        thetas_d.append(math.atan(math.hypot(
            math.tan(_clamp_dev(ang11.theta_x - ang.theta_x)),
            math.tan(_clamp_dev(ang11.theta_y - ang.theta_y)))))

    inter_uav, inter_dx, inter_dy, inter_roll = [], [], [], []
    inter_base, inter_s11_dev, inter_s11_az = [], [], []
    for i in range(topology.n_uav):
        if i == u1:
            continue
        geom = inter_cell_geometry(topology, i, target_sbs)
        base = (params.p_t * path_loss(params, geom.distance)
                * sbs_pattern.peak * los_probability(params, geom.elevation))
        tdevx = math.tan(_clamp_dev(geom.bearing.theta_x - ang11.theta_x))
        tdevy = math.tan(_clamp_dev(geom.bearing.theta_y - ang11.theta_y))
        s11_dev = math.atan(math.hypot(tdevx, tdevy))
        s11_az = math.atan2(tdevy, tdevx) if (tdevx or tdevy) else 0.0
        for s in topology.cell_members(i):
            ang = topology.link_pointing(i, s)
            inter_uav.append(i)
            inter_dx.append(geom.bearing.theta_x - ang.theta_x)
            inter_dy.append(geom.bearing.theta_y - ang.theta_y)
            inter_roll.append(rolls[s])
            inter_base.append(base)
            inter_s11_dev.append(s11_dev)
            inter_s11_az.append(s11_az)

    return LinkContext(
        target_sbs=target_sbs, serving_uav=u1, theta_11=theta_11,
        min_theta_d=min(thetas_d) if thetas_d else math.inf,
        length_11=l11, path_11=float(path_loss(params, l11)),
        noise_w=noise_power(params), phi_s11=phi_s11,
        intra_sbs=np.array(neighbors, dtype=int),
        intra_dx=_clamp_dev(np.array(intra_dx)), intra_dy=_clamp_dev(np.array(intra_dy)),
        intra_roll=np.array(intra_roll),
        inter_uav=np.array(inter_uav, dtype=int),
        inter_dx=_clamp_dev(np.array(inter_dx)), inter_dy=_clamp_dev(np.array(inter_dy)),
        inter_roll=np.array(inter_roll),
        inter_base=np.array(inter_base), inter_s11_dev=np.array(inter_s11_dev),
        inter_s11_az=np.array(inter_s11_az),
        uav_pattern=uav_pattern, sbs_pattern=sbs_pattern, params=params,
        n_uav=topology.n_uav,
    )


def _deviated_gain(pattern: PatternEvaluator, dev_x, dev_y, roll):
    """Normalized pattern gain at the composite of two per-axis deviations."""
    theta = np.arctan(np.hypot(np.tan(_clamp_dev(dev_x)), np.tan(_clamp_dev(dev_y))))
    return pattern.normalized_gain(theta, roll)


def intra_cell_term(ctx: LinkContext, j: int, draw: AnglePair) -> float:
    """Interference power from the serving UAV's antenna toward neighbor j
    (index into the context's neighbor list)."""
    gain = _deviated_gain(ctx.uav_pattern,
                          ctx.intra_dx[j] - draw.theta_x,
                          ctx.intra_dy[j] - draw.theta_y,
                          ctx.intra_roll[j])
    return ctx.base_11() * float(gain)


def intra_cell_total(ctx: LinkContext, draw: AnglePair) -> float:
    return sum(intra_cell_term(ctx, j, draw) for j in range(len(ctx.intra_sbs)))


def inter_cell_term(ctx: LinkContext, term: int, draw: AnglePair) -> float:
    """Interference power of one (UAV, link) pair from another cell; ``draw``
    is that UAV's vibration state."""
    g_u = _deviated_gain(ctx.uav_pattern,
                         ctx.inter_dx[term] + draw.theta_x,
                         ctx.inter_dy[term] + draw.theta_y,
                         ctx.inter_roll[term])
    return (ctx.inter_base[term] * ctx.uav_pattern.peak
            * ctx.s11_side_gain(term) * float(g_u))


def sinr(ctx: LinkContext, draws: np.ndarray) -> SinrBreakdown:
    """End-to-end SINR breakdown for one vibration state per UAV.

    ``draws`` is (n_uav, 2) of per-axis deflection angles, indexed by UAV id.
    """
    draws = np.asarray(draws, dtype=float)
    d1 = AnglePair(*draws[ctx.serving_uav])
    t_sig = math.atan(math.hypot(math.tan(d1.theta_x), math.tan(d1.theta_y)))
    phi_sig = math.atan2(math.tan(d1.theta_y), math.tan(d1.theta_x)) \
        if (d1.theta_x or d1.theta_y) else 0.0
    signal = ctx.base_11() * float(ctx.uav_pattern.normalized_gain(t_sig, phi_sig))
    intra = intra_cell_total(ctx, d1)
    inter = sum(inter_cell_term(ctx, k, AnglePair(*draws[ctx.inter_uav[k]]))
                for k in range(len(ctx.inter_uav)))
    return SinrBreakdown(signal, intra, inter, ctx.noise_w)
