"""Monte-Carlo outage estimation over random deployments.

Draw generation is counter-based and block-partitioned: every block of
draws is produced by a Philox stream keyed on (seed, deployment, block), so
results are bit-identical regardless of how blocks are scheduled across
worker processes.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._kernel import sinr_block
from .antenna import ArrayConfig, ElementMode, PatternEvaluator, get_evaluator
from .channel import ChannelParams, VibrationModel
from .geometry import DeploymentSpec, Topology, deploy_model, deploy_random
from .interference import LinkContext, build_link_context

__all__ = [
    "SimConfig",
    "OutageResult",
    "DeploymentSummary",
    "estimate_outage",
    "average_outage",
    "tune_phi_s11",
    "run_phi_sweep",
    "run_theta_d_sweep",
    "sample_sinr",
]

_ROLL_PERIOD = math.pi / 4   # mirror symmetry halves the 90-degree lattice period


@dataclass(frozen=True)
class SimConfig:
    """Monte-Carlo run parameters (angles in radians unless suffixed)."""

    n_draws: int = 500_000
    n_deployments: int = 50
    seed: int = 20240
    gamma_th_db: float = 9.0
    alpha_c: float = math.radians(2.0)
    block_draws: int = 1 << 16
    phi_grid_points: int = 91
    phi_tune_draws: int = 4000
    cull_rel: float = 1e-8
    workers: int = 1
    deployment_model: str = "coverage"   # or "clustered"

    def __post_init__(self):
        if self.n_draws < 1 or self.n_deployments < 1 or self.block_draws < 1:
            raise ValueError("draw/deployment counts must be positive")
        if self.alpha_c < 0:
            raise ValueError("alpha_c must be >= 0")
        if self.deployment_model not in ("coverage", "clustered"):
            raise ValueError("deployment_model must be 'coverage' or 'clustered'")

    @property
    def gamma_th(self) -> float:
        return 10.0 ** (self.gamma_th_db / 10.0)

    def phi_grid(self) -> np.ndarray:
        """Orientation sweep grid over [0, 45] degrees."""
        return np.linspace(0.0, _ROLL_PERIOD, self.phi_grid_points)

    def digest(self) -> str:
        return hashlib.sha256(repr(self).encode()).hexdigest()[:12]


@dataclass(frozen=True)
class OutageResult:
    """Outage estimate of one array-size variant."""

    p_out: float
    stderr: float
    n_effective: int
    method: str                  # "MonteCarlo" or "AnalyticBound"
    config_digest: str
    n_elements: int = 0
    mean_signal_w: float = 0.0
    mean_intra_w: float = 0.0
    mean_inter_w: float = 0.0
    noise_w: float = 0.0
    phi_s11: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.p_out <= 1.0):
            raise ValueError("p_out must lie in [0, 1]")

    @classmethod
    def monte_carlo(cls, p: float, n: int, **extra) -> "OutageResult":
        err = math.sqrt(max(p * (1.0 - p), 0.0) / n)
        return cls(p_out=p, stderr=err, n_effective=n, method="MonteCarlo", **extra)


@dataclass(frozen=True)
class DeploymentSummary:
    deployment_seed: int
    theta_11: float
    min_theta_d: float
    height: float
    results: tuple[OutageResult, ...]


def _block_normals(seed: int, deployment: int, block: int, n_uav: int, nd: int):
    # Philox takes a 128-bit key: one word for the seed, one packing the
    # (deployment, block) pair so every block is an independent stream.
    rng = np.random.Generator(
        np.random.Philox(key=(seed, (deployment << 32) + block)))
    return rng.standard_normal((2, n_uav, nd))


def _pack_static(ctx: LinkContext, variants: list[PatternEvaluator]):
    """Kernel arguments that do not depend on the SBS orientation."""
    ep = variants[0].cfg.element
    for ev in variants[1:]:
        if ev.cfg.element != ep or ev.cfg.spacing_wl != variants[0].cfg.spacing_wl:
            raise ValueError("variants must share element pattern and spacing")
    peaks = np.array([ev.peak for ev in variants])
    return dict(
        n_arr=np.array([ev.cfg.n for ev in variants], dtype=np.int64),
        kd=variants[0].cfg.kd, peaks=peaks,
        base11=ctx.params.p_t * ctx.path_11 * ctx.sbs_pattern.peak * peaks,
        ta=np.tan(ctx.intra_dx), tb=np.tan(ctx.intra_dy),
        icr=np.cos(ctx.intra_roll), isr=np.sin(ctx.intra_roll),
        ita=np.tan(ctx.inter_dx), itb=np.tan(ctx.inter_dy),
        kcr=np.cos(ctx.inter_roll), ksr=np.sin(ctx.inter_roll),
        kuav=ctx.inter_uav.astype(np.int64),
        th3=ep.theta_3db_deg, ph3=ep.phi_3db_deg,
        gsl=ep.sidelobe_limit_db, fbr=ep.front_back_db,
        iso=ep.mode is ElementMode.ISOTROPIC,
    )


def _inter_consts(ctx: LinkContext, peaks: np.ndarray, phi_s11: np.ndarray):
    """(nv, K) per-term constants P_t|h|^2 peak_s P_LoS g_s peak_u for the
    given per-variant SBS orientation."""
    out = np.empty((peaks.shape[0], ctx.inter_base.shape[0]))
    for v in range(peaks.shape[0]):
        g_s = ctx.sbs_pattern.normalized_gain(
            ctx.inter_s11_dev, ctx.inter_s11_az - phi_s11[v])
        out[v] = ctx.inter_base * g_s * peaks[v]
    return out


def _cull(static: dict, iconst: np.ndarray, noise_w: float, cull_rel: float):
    """Drop inter-cell terms whose worst-case contribution is negligible
    against the noise floor (the UAV-side normalized gain is at most 1)."""
    if cull_rel <= 0 or iconst.size == 0:
        return static, iconst
    keep = iconst.max(axis=0) >= cull_rel * noise_w
    if keep.all():
        return static, iconst
    static = dict(static)
    for key in ("ita", "itb", "kcr", "ksr", "kuav"):
        static[key] = static[key][keep]
    return static, np.ascontiguousarray(iconst[:, keep])


_TAN_CLAMP = 1.0 / math.tan(1e-6)


def _tan_sum(ta, tb):
    """tan(a + b) with the same beyond-pole saturation as the kernel."""
    den = 1.0 - ta * tb
    num = ta + tb
    return np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0),
                    np.copysign(_TAN_CLAMP, num))


def _mean_uav_gain(ctx: LinkContext, variants: list[PatternEvaluator],
                   vib: VibrationModel, seed: int, n_draws: int) -> np.ndarray:
    """(nv, K) Monte-Carlo mean of the UAV-side normalized gain of every
    inter-cell term under vibration of its own UAV."""
    rng = np.random.Generator(np.random.Philox(key=(seed, 0xF1)))
    z = rng.standard_normal((2, ctx.n_uav, n_draws))
    tx = np.tan(vib.sigma_theta_x * z[0])[ctx.inter_uav]
    ty = np.tan(vib.sigma_theta_y * z[1])[ctx.inter_uav]
    theta = np.arctan(np.hypot(_tan_sum(np.tan(ctx.inter_dx)[:, None], tx),
                               _tan_sum(np.tan(ctx.inter_dy)[:, None], ty)))
    phi = ctx.inter_roll[:, None] * np.ones_like(theta)
    return np.stack([np.asarray(ev.normalized_gain(theta, phi)).mean(axis=1)
                     for ev in variants])


def _mean_intra(ctx: LinkContext, variants: list[PatternEvaluator],
                vib: VibrationModel, seed: int, n_draws: int) -> np.ndarray:
    """(nv,) Monte-Carlo mean intra-cell interference power (independent of
    the SBS orientation: the aligned SBS main lobe multiplies signal and
    intra-cell terms identically)."""
    if ctx.intra_dx.size == 0:
        return np.zeros(len(variants))
    rng = np.random.Generator(np.random.Philox(key=(seed, 0xF2)))
    z = rng.standard_normal((2, n_draws))
    tx = np.tan(vib.sigma_theta_x * z[0])
    ty = np.tan(vib.sigma_theta_y * z[1])
    theta = np.arctan(np.hypot(_tan_sum(np.tan(ctx.intra_dx)[:, None], -tx),
                               _tan_sum(np.tan(ctx.intra_dy)[:, None], -ty)))
    phi = ctx.intra_roll[:, None] * np.ones_like(theta)
    base = ctx.params.p_t * ctx.path_11 * ctx.sbs_pattern.peak
    return np.array([base * ev.peak
                     * float(np.asarray(ev.normalized_gain(theta, phi)).sum(axis=0).mean())
                     for ev in variants])


def tune_phi_s11(ctx: LinkContext, variants: list[PatternEvaluator],
                 vib: VibrationModel, cfg: SimConfig) -> np.ndarray:
    """Per-variant SBS azimuth orientation minimizing the expected inter-cell
    interference.

    The expectation factorizes: the orientation only scales each term's
    SBS-side constant, so the UAV-side gain average is computed once and the
    orientation grid is swept cheaply.
    """
    if ctx.inter_base.size == 0:
        return np.zeros(len(variants))
    phis, powers = run_phi_sweep(ctx, variants, vib, cfg)
    return phis[np.argmin(powers["mean_inter_w"], axis=1)]


def run_phi_sweep(ctx: LinkContext, variants: list[PatternEvaluator],
                  vib: VibrationModel, cfg: SimConfig,
                  phi_grid: np.ndarray | None = None):
    """Expected interference power versus SBS azimuth orientation.

    Returns (phis, table) where table has ``mean_inter_w`` of shape
    (nv, len(phis)) and ``mean_intra_w`` of shape (nv,) — the intra-cell
    average does not depend on the orientation.
    """
    phis = cfg.phi_grid() if phi_grid is None else np.asarray(phi_grid, float)
    peaks = np.array([ev.peak for ev in variants])
    inter = np.zeros((len(variants), phis.size))
    if ctx.inter_base.size:
        mean_g = _mean_uav_gain(ctx, variants, vib, cfg.seed, cfg.phi_tune_draws)
        for v in range(len(variants)):
            weights = ctx.inter_base * peaks[v] * mean_g[v]
            for j, p in enumerate(phis):
                inter[v, j] = float(np.sum(
                    weights * ctx.sbs_pattern.normalized_gain(
                        ctx.inter_s11_dev, ctx.inter_s11_az - p)))
    intra = _mean_intra(ctx, variants, vib, cfg.seed, cfg.phi_tune_draws)
    return phis, {"mean_inter_w": inter, "mean_intra_w": intra}


def run_theta_d_sweep(variants: list[PatternEvaluator], vib: VibrationModel,
                      cfg: SimConfig, theta_grid: np.ndarray,
                      phi_values: np.ndarray, base_w: float = 1.0) -> np.ndarray:
    """Mean single-neighbor intra-cell term versus separation angle.

    Returns shape (nv, len(phi_values), len(theta_grid)) of mean powers with
    the common constant factor ``base_w`` (pass a link's boresight product
    for absolute watts).
    """
    theta_grid = np.asarray(theta_grid, dtype=float)
    phi_values = np.asarray(phi_values, dtype=float)
    rng = np.random.Generator(np.random.Philox(key=(cfg.seed, 0xF3)))
    z = rng.standard_normal((2, cfg.phi_tune_draws))
    tx = np.tan(vib.sigma_theta_x * z[0])
    ty = np.tan(vib.sigma_theta_y * z[1])
    theta_eff = np.arctan(np.hypot(
        _tan_sum(np.tan(theta_grid)[:, None], -tx),
        _tan_sum(np.zeros((theta_grid.size, 1)), -ty)))       # (T, draws)
    out = np.empty((len(variants), phi_values.size, theta_grid.size))
    for v, ev in enumerate(variants):
        for i, phi in enumerate(phi_values):
            g = np.asarray(ev.normalized_gain(theta_eff, phi))
            out[v, i] = base_w * ev.peak * g.mean(axis=1)
    return out


def _run_variant_blocks(ctx: LinkContext, static: dict, iconst: np.ndarray,
                        vib: VibrationModel, cfg: SimConfig, deployment: int,
                        collect_gammas: bool = False):
    nv = static["n_arr"].shape[0]
    count = np.zeros(nv, dtype=np.int64)
    sums = [np.zeros(nv) for _ in range(3)]
    gammas_out = [] if collect_gammas else None
    static, iconst = _cull(static, iconst, ctx.noise_w, cfg.cull_rel)
    n_blocks = -(-cfg.n_draws // cfg.block_draws)
    done = 0
    for b in range(n_blocks):
        nd = min(cfg.block_draws, cfg.n_draws - done)
        z = _block_normals(cfg.seed, deployment, b, ctx.n_uav, nd)
        gam = np.empty((nv, nd))
        sinr_block(np.ascontiguousarray(z[0]), np.ascontiguousarray(z[1]),
                   vib.sigma_theta_x, vib.sigma_theta_y, ctx.serving_uav,
                   static["n_arr"], static["kd"], static["base11"],
                   static["ta"], static["tb"], static["icr"], static["isr"],
                   iconst, static["ita"], static["itb"],
                   static["kcr"], static["ksr"], static["kuav"],
                   static["th3"], static["ph3"], static["gsl"], static["fbr"],
                   static["iso"], ctx.noise_w, cfg.gamma_th,
                   count, sums[0], sums[1], sums[2], gam)
        if collect_gammas:
            gammas_out.append(gam)
        done += nd
    gam_all = np.concatenate(gammas_out, axis=1) if collect_gammas else None
    return count, sums, gam_all


def estimate_outage(ctx: LinkContext, variants: list[PatternEvaluator],
                    vib: VibrationModel, cfg: SimConfig, *, deployment: int = 0,
                    phi_s11: np.ndarray | None = None) -> tuple[OutageResult, ...]:
    """Outage probability of the context's link for every array-size variant.

    ``phi_s11`` overrides the tuned per-variant SBS orientation.
    """
    if phi_s11 is None:
        phi_s11 = tune_phi_s11(ctx, variants, vib, cfg)
    phi_s11 = np.asarray(phi_s11, dtype=float) * np.ones(len(variants))
    static = _pack_static(ctx, variants)
    iconst = _inter_consts(ctx, static["peaks"], phi_s11)
    count, sums, _ = _run_variant_blocks(ctx, static, iconst, vib, cfg, deployment)
    digest = cfg.digest()
    return tuple(
        OutageResult.monte_carlo(
            count[v] / cfg.n_draws, cfg.n_draws,
            config_digest=digest, n_elements=int(static["n_arr"][v]),
            mean_signal_w=sums[0][v] / cfg.n_draws,
            mean_intra_w=sums[1][v] / cfg.n_draws,
            mean_inter_w=sums[2][v] / cfg.n_draws,
            noise_w=ctx.noise_w, phi_s11=float(phi_s11[v]))
        for v in range(len(variants)))


def sample_sinr(ctx: LinkContext, variants: list[PatternEvaluator],
                vib: VibrationModel, cfg: SimConfig, *,
                deployment: int = 0,
                phi_s11: np.ndarray | None = None) -> np.ndarray:
    """Per-draw SINR samples, shape (nv, n_draws); for diagnostics."""
    if phi_s11 is None:
        phi_s11 = tune_phi_s11(ctx, variants, vib, cfg)
    phi_s11 = np.asarray(phi_s11, dtype=float) * np.ones(len(variants))
    static = _pack_static(ctx, variants)
    iconst = _inter_consts(ctx, static["peaks"], phi_s11)
    _, _, gam = _run_variant_blocks(ctx, static, iconst, vib, cfg, deployment,
                                    collect_gammas=True)
    return gam


def draw_rolls(topology: Topology, dep_seed: int) -> np.ndarray:
    """Per-link antenna roll angles, uniform over the symmetry period."""
    rng = np.random.Generator(np.random.Philox(key=(dep_seed, 0xB2)))
    return rng.random(topology.n_sbs) * _ROLL_PERIOD


def build_deployment_context(spec: DeploymentSpec, dep_index: int,
                             uav_eval: PatternEvaluator,
                             sbs_eval: PatternEvaluator, params: ChannelParams,
                             cfg: SimConfig) -> tuple[LinkContext, int]:
    """Deploy, pick a target link and build its context, resampling the
    deployment while the target's nearest co-served neighbor sits inside the
    minimum angular separation ``cfg.alpha_c``."""
    attempt = 0
    while True:
        dep_seed = cfg.seed + 1000 * dep_index + attempt
        if cfg.deployment_model == "coverage":
            topo = deploy_model(spec, dep_seed)
            target = int(topo.cell_members(0)[0])
        else:
            topo = deploy_random(spec, dep_seed)
            rng = np.random.Generator(np.random.Philox(key=(dep_seed, 0xA7)))
            members = topo.cell_members(0)
            target = int(members[rng.integers(members.size)])
        ctx = build_link_context(topo, target, uav_eval, sbs_eval, params,
                                 uav_rolls=draw_rolls(topo, dep_seed))
        if ctx.min_theta_d >= cfg.alpha_c or attempt >= 200:
            return ctx, dep_seed
        attempt += 1


def _one_deployment(args):
    (spec, dep_index, uav_cfgs, sbs_cfg, params, vib, cfg) = args
    variants = [get_evaluator(c) for c in uav_cfgs]
    sbs_eval = get_evaluator(sbs_cfg)
    ctx, dep_seed = build_deployment_context(spec, dep_index, variants[0],
                                             sbs_eval, params, cfg)
    results = estimate_outage(ctx, variants, vib, cfg, deployment=dep_index)
    h1 = ctx.length_11 * math.cos(ctx.theta_11)
    return DeploymentSummary(dep_seed, ctx.theta_11, ctx.min_theta_d, h1, results)


def average_outage(spec: DeploymentSpec, uav_cfgs: list[ArrayConfig],
                   sbs_cfg: ArrayConfig, params: ChannelParams,
                   vib: VibrationModel, cfg: SimConfig):
    """Deployment-averaged outage per array-size variant.

    Deployments whose target link sits closer than ``alpha_c`` to a co-served
    neighbor are resampled (the admission rule integrates such link pairs).
    Returns (per-variant OutageResult tuple, list of DeploymentSummary).

    With ``cfg.workers > 1`` deployments are evaluated in separate processes;
    the counter-based draw scheme makes the result identical either way.
    """
    jobs = [(spec, d, uav_cfgs, sbs_cfg, params, vib, cfg)
            for d in range(cfg.n_deployments)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            summaries = list(pool.map(_one_deployment, jobs))
    else:
        summaries = [_one_deployment(j) for j in jobs]
    digest = cfg.digest()
    nd = len(summaries)
    combined = []
    for v in range(len(uav_cfgs)):
        ps = np.array([s.results[v].p_out for s in summaries])
        p = float(ps.mean())
        # within-deployment sampling noise plus between-deployment spread
        var = sum(s.results[v].stderr ** 2 for s in summaries) / nd ** 2
        if nd > 1:
            var += float(ps.var(ddof=1)) / nd
        combined.append(OutageResult(
            p_out=p, stderr=math.sqrt(var),
            n_effective=nd * cfg.n_draws, method="MonteCarlo",
            config_digest=digest, n_elements=uav_cfgs[v].n,
            mean_signal_w=sum(s.results[v].mean_signal_w for s in summaries) / nd,
            mean_intra_w=sum(s.results[v].mean_intra_w for s in summaries) / nd,
            mean_inter_w=sum(s.results[v].mean_inter_w for s in summaries) / nd,
            noise_w=summaries[0].results[v].noise_w))
    return tuple(combined), summaries
