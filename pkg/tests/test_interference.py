import math

import numpy as np
import pytest

from uavfronthaul.antenna import ArrayConfig, get_evaluator
from uavfronthaul.channel import (ChannelParams, los_probability, noise_power,
                                  path_loss)
from uavfronthaul.geometry import AnglePair, Topology, deploy_model, \
    DeploymentSpec
from uavfronthaul.interference import (LinkContext, build_link_context,
                                       intra_cell_term, intra_cell_total,
                                       inter_cell_term, sinr)

P = ChannelParams()
UAV15 = get_evaluator(ArrayConfig(15))
SBS15 = get_evaluator(ArrayConfig(15))


def one_cell_topology(neighbor_offsets, h=75.0, target=(100.0, 0.0)):
    """Single UAV above the origin serving the target plus the neighbors."""
    sbs = np.vstack([[target], np.asarray(neighbor_offsets, float)])
    return Topology(np.array([[0.0, 0.0, h]]), sbs,
                    np.zeros(len(sbs), dtype=int))


def two_cell_topology():
    """Serving cell with one neighbor plus one interfering two-link cell."""
    uav = np.array([[0.0, 0.0, 75.0], [600.0, 100.0, 90.0]])
    sbs = np.array([[100.0, 0.0], [-60.0, 120.0],      # cell 0
                    [650.0, 40.0], [520.0, 180.0]])    # cell 1
    return Topology(uav, sbs, np.array([0, 0, 1, 1]))


def straight_line_intra(topology, target, j_sbs, draw, phi_roll):
    """Independent evaluation of one intra-cell interference term."""
    u1 = int(topology.assoc[target])
    ux, uy, h = topology.uav_xyz[u1]
    sx, sy = topology.sbs_xy[target]
    l11 = math.sqrt((sx - ux) ** 2 + (sy - uy) ** 2 + h * h)
    a11 = topology.link_pointing(u1, target)
    a1j = topology.link_pointing(u1, j_sbs)
    dx = (a11.theta_x - a1j.theta_x) - draw.theta_x
    dy = (a11.theta_y - a1j.theta_y) - draw.theta_y
    theta = math.atan(math.hypot(math.tan(dx), math.tan(dy)))
    return (P.p_t * path_loss(P, l11) * SBS15.peak * UAV15.peak
            * float(UAV15.normalized_gain(theta, phi_roll)))


def straight_line_inter(topology, target, i_uav, j_sbs, draw_i, phi_roll,
                        phi_s11):
    """Independent evaluation of one inter-cell interference term."""
    u1 = int(topology.assoc[target])
    ux, uy, h_i = topology.uav_xyz[i_uav]
    sx, sy = topology.sbs_xy[target]
    horiz = math.hypot(sx - ux, sy - uy)
    l_i1 = math.sqrt(horiz ** 2 + h_i ** 2)
    elev = math.atan(h_i / horiz)
    bear = topology.link_pointing(i_uav, target)
    a_ij = topology.link_pointing(i_uav, j_sbs)
    # U_i-side deviation: bearing to S11 vs pointing to its own link, plus
    # the vibration of U_i
    dx = (bear.theta_x - a_ij.theta_x) + draw_i.theta_x
    dy = (bear.theta_y - a_ij.theta_y) + draw_i.theta_y
    th_u = math.atan(math.hypot(math.tan(dx), math.tan(dy)))
    # S11-side deviation: direction to U_i vs its own boresight to U_1
    a11 = topology.link_pointing(u1, target)
    tdx = math.tan(bear.theta_x - a11.theta_x)
    tdy = math.tan(bear.theta_y - a11.theta_y)
    th_s = math.atan(math.hypot(tdx, tdy))
    az_s = math.atan2(tdy, tdx)
    return (P.p_t * path_loss(P, l_i1) * los_probability(P, elev)
            * SBS15.peak * float(SBS15.normalized_gain(th_s, az_s - phi_s11))
            * UAV15.peak * float(UAV15.normalized_gain(th_u, phi_roll)))


class TestLinkContext:
    def test_basic_fields(self):
        topo = two_cell_topology()
        ctx = build_link_context(topo, 0, UAV15, SBS15, P)
        assert ctx.serving_uav == 0 and ctx.target_sbs == 0
        assert ctx.length_11 == pytest.approx(math.sqrt(100 ** 2 + 75 ** 2))
        assert ctx.theta_11 == pytest.approx(math.atan(100.0 / 75.0))
        assert ctx.noise_w == pytest.approx(noise_power(P))
        assert len(ctx.intra_sbs) == 1
        assert len(ctx.inter_uav) == 2

    def test_min_theta_d(self):
        topo = one_cell_topology([(150.0, 30.0), (-200.0, 0.0)])
        ctx = build_link_context(topo, 0, UAV15, SBS15, P)
        a11 = topo.link_pointing(0, 0)
        seps = []
        for s in (1, 2):
            a = topo.link_pointing(0, s)
            seps.append(math.atan(math.hypot(
                math.tan(a11.theta_x - a.theta_x),
                math.tan(a11.theta_y - a.theta_y))))
        assert ctx.min_theta_d == pytest.approx(min(seps), rel=1e-12)

    def test_no_neighbors_infinite_min(self):
        topo = one_cell_topology(np.empty((0, 2)))
        ctx = build_link_context(topo, 0, UAV15, SBS15, P)
        assert math.isinf(ctx.min_theta_d)


class TestIntraCell:
    def test_colocated_equals_signal_level(self):
        topo = one_cell_topology([(100.0, 0.0)])   # neighbor on top of target
        ctx = build_link_context(topo, 0, UAV15, SBS15, P)
        term = intra_cell_term(ctx, 0, AnglePair(0.0, 0.0))
        assert term == pytest.approx(ctx.base_11(), rel=1e-12)

    def test_expression_oracle(self):
        topo = one_cell_topology([(180.0, 90.0), (-40.0, -120.0)])
        rolls = np.array([0.0, 0.3, 0.6])
        ctx = build_link_context(topo, 0, UAV15, SBS15, P, uav_rolls=rolls)
        draw = AnglePair(0.004, -0.007)
        for j, s in enumerate(ctx.intra_sbs):
            ref = straight_line_intra(topo, 0, int(s), draw, rolls[s])
            assert intra_cell_term(ctx, j, draw) == pytest.approx(ref,
                                                                  rel=1e-12)

    def test_empty_sum(self):
        topo = one_cell_topology(np.empty((0, 2)))
        ctx = build_link_context(topo, 0, UAV15, SBS15, P)
        assert intra_cell_total(ctx, AnglePair(0.01, 0.0)) == 0.0

    def test_symmetric_pair_doubles(self):
        topo = one_cell_topology([(100.0, 80.0), (100.0, -80.0)],
                                 target=(100.0, 0.0))
        ctx = build_link_context(topo, 0, UAV15, SBS15, P)
        d = AnglePair(0.0, 0.0)
        total = intra_cell_total(ctx, d)
        single = intra_cell_term(ctx, 0, d)
        assert total == pytest.approx(2.0 * single, rel=1e-9)

    def test_total_is_sum(self):
        spec = DeploymentSpec(n_sbs=100, n_uav=10, per_uav_links=10)
        topo = deploy_model(spec, seed=8)
        target = int(topo.cell_members(0)[0])
        ctx = build_link_context(topo, target, UAV15, SBS15, P)
        d = AnglePair(-0.003, 0.009)
        total = intra_cell_total(ctx, d)
        parts = sum(intra_cell_term(ctx, j, d)
                    for j in range(len(ctx.intra_sbs)))
        assert total == pytest.approx(parts, rel=1e-12)


class TestInterCell:
    def test_expression_oracle(self):
        topo = two_cell_topology()
        rolls = np.array([0.0, 0.0, 0.25, 0.55])
        phi_s11 = 0.2
        ctx = build_link_context(topo, 0, UAV15, SBS15, P,
                                 phi_s11=phi_s11, uav_rolls=rolls)
        draw = AnglePair(0.006, -0.002)
        for k in range(len(ctx.inter_uav)):
            s = 2 + k   # cell-1 SBS ids in order
            ref = straight_line_inter(topo, 0, 1, s, draw, rolls[s], phi_s11)
            assert inter_cell_term(ctx, k, draw) == pytest.approx(ref,
                                                                  rel=1e-12)

    def test_far_uav_vanishes(self):
        uav = np.array([[0.0, 0.0, 75.0], [5e7, 0.0, 90.0]])
        sbs = np.array([[100.0, 0.0], [5e7 + 50.0, 0.0]])
        topo = Topology(uav, sbs, np.array([0, 1]))
        ctx = build_link_context(topo, 0, UAV15, SBS15, P)
        assert inter_cell_term(ctx, 0, AnglePair(0.0, 0.0)) < 1e-18

    def test_los_weight_applied(self):
        topo = two_cell_topology()
        ctx = build_link_context(topo, 0, UAV15, SBS15, P)
        horiz = math.hypot(600.0 - 100.0, 100.0)
        elev = math.atan(90.0 / horiz)
        l_i1 = math.hypot(horiz, 90.0)
        expected = (P.p_t * path_loss(P, l_i1) * SBS15.peak
                    * los_probability(P, elev))
        assert ctx.inter_base[0] == pytest.approx(expected, rel=1e-12)


class TestSinr:
    def test_no_interferers_no_vibration(self):
        topo = one_cell_topology(np.empty((0, 2)))
        ctx = build_link_context(topo, 0, UAV15, SBS15, P)
        out = sinr(ctx, np.zeros((1, 2)))
        assert out.signal_w == pytest.approx(ctx.base_11(), rel=1e-12)
        assert out.intra_w == 0.0 and out.inter_w == 0.0
        assert out.sinr == pytest.approx(ctx.base_11() / noise_power(P),
                                         rel=1e-12)

    def test_full_pipeline_oracle(self):
        topo = two_cell_topology()
        rolls = np.array([0.0, 0.1, 0.25, 0.55])
        phi_s11 = 0.11
        ctx = build_link_context(topo, 0, UAV15, SBS15, P,
                                 phi_s11=phi_s11, uav_rolls=rolls)
        draws = np.array([[0.004, -0.007], [-0.002, 0.009]])
        out = sinr(ctx, draws)
        d0 = AnglePair(*draws[0])
        theta = math.atan(math.hypot(math.tan(d0.theta_x),
                                     math.tan(d0.theta_y)))
        phi = math.atan2(math.tan(d0.theta_y), math.tan(d0.theta_x))
        sig = ctx.base_11() * float(UAV15.normalized_gain(theta, phi))
        intra = straight_line_intra(topo, 0, 1, d0, rolls[1])
        inter = sum(straight_line_inter(topo, 0, 1, s, AnglePair(*draws[1]),
                                        rolls[s], phi_s11) for s in (2, 3))
        assert out.signal_w == pytest.approx(sig, rel=1e-12)
        assert out.intra_w == pytest.approx(intra, rel=1e-12)
        assert out.inter_w == pytest.approx(inter, rel=1e-12)

    def test_deterministic_with_zero_sigma(self):
        topo = two_cell_topology()
        ctx = build_link_context(topo, 0, UAV15, SBS15, P)
        a = sinr(ctx, np.zeros((2, 2)))
        b = sinr(ctx, np.zeros((2, 2)))
        assert a.sinr == b.sinr

    def test_power_scaling(self):
        topo = two_cell_topology()
        ctx = build_link_context(topo, 0, UAV15, SBS15, P)
        p2 = ChannelParams(p_t=2.0 * P.p_t)
        ctx2 = build_link_context(topo, 0, UAV15, SBS15, p2)
        draws = np.array([[0.002, 0.001], [0.0, -0.003]])
        a, b = sinr(ctx, draws), sinr(ctx2, draws)
        assert b.signal_w == pytest.approx(2.0 * a.signal_w, rel=1e-12)
        assert b.intra_w == pytest.approx(2.0 * a.intra_w, rel=1e-12)
        assert b.inter_w == pytest.approx(2.0 * a.inter_w, rel=1e-12)
        # interference-limited ratio unchanged
        sir_a = a.signal_w / (a.intra_w + a.inter_w)
        sir_b = b.signal_w / (b.intra_w + b.inter_w)
        assert sir_b == pytest.approx(sir_a, rel=1e-12)

    def test_all_components_nonnegative(self):
        spec = DeploymentSpec()
        topo = deploy_model(spec, seed=4)
        target = int(topo.cell_members(0)[0])
        ctx = build_link_context(topo, target, UAV15, SBS15, P)
        rng = np.random.default_rng(0)
        for _ in range(20):
            draws = rng.normal(0.0, math.radians(1.0), (topo.n_uav, 2))
            out = sinr(ctx, draws)
            assert out.signal_w >= 0 and out.intra_w >= 0
            assert out.inter_w >= 0 and out.noise_w > 0


class TestPhiS11:
    def test_with_phi_updates_side_gain(self):
        topo = two_cell_topology()
        ctx = build_link_context(topo, 0, UAV15, SBS15, P)
        moved = ctx.with_phi_s11(0.4)
        assert moved.phi_s11 == 0.4
        assert isinstance(moved, LinkContext)
        g0 = ctx.s11_side_gain(0)
        g1 = moved.s11_side_gain(0)
        assert g0 != g1
