import math

import numpy as np
import pytest

from uavfronthaul.geometry import (AnglePair, ConfigurationError,
                                   DeploymentSpec, Topology, deploy_model,
                                   deploy_random, inter_cell_geometry,
                                   pointing_angles, spatial_angle)

SPEC = DeploymentSpec(n_sbs=100, n_uav=10, per_uav_links=10)


class TestPointingAngles:
    def test_directly_below(self):
        ang = pointing_angles((5.0, -3.0, 80.0), (5.0, -3.0))
        assert ang.theta_x == 0.0 and ang.theta_y == 0.0

    def test_quarter_pi(self):
        ang = pointing_angles((0.0, 0.0, 100.0), (100.0, 0.0))
        assert ang.theta_x == pytest.approx(math.pi / 4, rel=1e-12)
        assert ang.theta_y == 0.0

    def test_oracle_values(self):
        ang = pointing_angles((0.0, 0.0, 80.0), (55.0, -130.0))
        assert ang.theta_x == pytest.approx(math.atan(55.0 / 80.0), rel=1e-12)
        assert ang.theta_y == pytest.approx(math.atan(-130.0 / 80.0), rel=1e-12)

    def test_round_trip(self):
        uav = (12.0, -7.0, 66.0)
        sbs = (301.5, 42.25)
        ang = pointing_angles(uav, sbs)
        assert uav[0] + uav[2] * math.tan(ang.theta_x) == pytest.approx(
            sbs[0], abs=1e-9)
        assert uav[1] + uav[2] * math.tan(ang.theta_y) == pytest.approx(
            sbs[1], abs=1e-9)

    def test_zero_height_rejected(self):
        with pytest.raises(ValueError):
            pointing_angles((0.0, 0.0, 0.0), (1.0, 1.0))


class TestSpatialAngle:
    def test_identical_is_zero(self):
        a = AnglePair(0.3, -0.2)
        assert spatial_angle(a, a) == 0.0

    def test_single_axis_reduction(self):
        assert spatial_angle(AnglePair(0.3, 0.0), AnglePair(0.0, 0.0)) \
            == pytest.approx(0.3, rel=1e-12)

    def test_two_axis_oracle(self):
        got = spatial_angle(AnglePair(0.2, 0.25), AnglePair(0.0, 0.0))
        ref = math.atan(math.hypot(math.tan(0.2), math.tan(0.25)))
        assert got == pytest.approx(ref, rel=1e-12)

    def test_symmetry(self):
        a, b = AnglePair(0.4, -0.1), AnglePair(-0.2, 0.3)
        assert spatial_angle(a, b) == pytest.approx(spatial_angle(b, a))

    def test_composition_bounds(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            dx, dy = rng.uniform(-0.7, 0.7, 2)
            v = spatial_angle(AnglePair(dx, dy), AnglePair(0.0, 0.0))
            assert v >= max(abs(dx), abs(dy)) - 1e-12
            assert v <= abs(dx) + abs(dy) + 1e-12

    def test_domain_error(self):
        with pytest.raises(ValueError):
            spatial_angle(AnglePair(1.6, 0.0), AnglePair(0.0, 0.0))


class TestDeployRandom:
    def test_cell_cardinality(self):
        topo = deploy_random(SPEC, seed=42)
        for i in range(SPEC.n_uav):
            assert topo.cell_members(i).size == SPEC.per_uav_links

    def test_determinism(self):
        a = deploy_random(SPEC, seed=42)
        b = deploy_random(SPEC, seed=42)
        assert np.array_equal(a.uav_xyz, b.uav_xyz)
        assert np.array_equal(a.sbs_xy, b.sbs_xy)
        assert np.array_equal(a.assoc, b.assoc)

    def test_different_seeds_differ(self):
        a = deploy_random(SPEC, seed=1)
        b = deploy_random(SPEC, seed=2)
        assert not np.array_equal(a.sbs_xy, b.sbs_xy)

    def test_heights_in_range(self):
        topo = deploy_random(SPEC, seed=3)
        lo, hi = SPEC.uav_height_range
        assert np.all(topo.uav_xyz[:, 2] >= lo)
        assert np.all(topo.uav_xyz[:, 2] <= hi)

    def test_infeasible_spec(self):
        with pytest.raises(ConfigurationError):
            DeploymentSpec(n_sbs=5, n_uav=10, per_uav_links=10)

    def test_disk_radius_distribution(self):
        # KS distance of r^2/R^2 CDF over many SBS draws
        rs = []
        for seed in range(100):
            topo = deploy_random(SPEC, seed=seed)
            rs.append(np.hypot(topo.sbs_xy[:, 0], topo.sbs_xy[:, 1]))
        r = np.sort(np.concatenate(rs)) / SPEC.area_radius
        n = r.size
        emp = np.arange(1, n + 1) / n
        ks = float(np.max(np.abs(emp - r ** 2)))
        assert ks < 0.02


class TestDeployModel:
    def test_structure(self):
        topo = deploy_model(SPEC, seed=9)
        assert topo.n_uav == SPEC.n_uav
        assert topo.n_sbs == SPEC.n_uav * SPEC.per_uav_links
        # target UAV above the origin, target SBS on the +x axis
        assert topo.uav_xyz[0, 0] == 0.0 and topo.uav_xyz[0, 1] == 0.0
        target = topo.cell_members(0)[0]
        assert topo.sbs_xy[target, 1] == 0.0
        assert 0.0 <= topo.sbs_xy[target, 0] <= SPEC.coverage_radius

    def test_members_within_coverage(self):
        topo = deploy_model(SPEC, seed=5)
        for i in range(topo.n_uav):
            cx, cy, _ = topo.uav_xyz[i]
            members = topo.cell_members(i)
            d = np.hypot(topo.sbs_xy[members, 0] - cx,
                         topo.sbs_xy[members, 1] - cy)
            assert np.all(d <= SPEC.coverage_radius + 1e-9)

    def test_determinism(self):
        a = deploy_model(SPEC, seed=17)
        b = deploy_model(SPEC, seed=17)
        assert np.array_equal(a.sbs_xy, b.sbs_xy)

    def test_target_link_angle_distribution(self):
        # tan(theta_11) = (R u)/h with u uniform: CDF h tan(theta)/R
        thetas = []
        for seed in range(4000):
            topo = deploy_model(SPEC, seed=seed)
            target = topo.cell_members(0)[0]
            ang = topo.link_pointing(0, target)
            h = topo.uav_xyz[0, 2]
            thetas.append(h * math.tan(ang.theta_x) / SPEC.coverage_radius)
        u = np.sort(thetas)
        emp = np.arange(1, u.size + 1) / u.size
        assert float(np.max(np.abs(emp - u))) < 0.03


class TestInterCellGeometry:
    def test_overhead(self):
        topo = Topology(np.array([[0.0, 0.0, 75.0], [10.0, 0.0, 100.0]]),
                        np.array([[10.0, 0.0], [50.0, 50.0]]),
                        np.array([0, 1]))
        geom = inter_cell_geometry(topo, 1, 0)
        assert geom.distance == pytest.approx(100.0)
        assert geom.elevation == pytest.approx(math.pi / 2)

    def test_pythagoras(self):
        topo = Topology(np.array([[0.0, 0.0, 75.0], [300.0, 400.0, 100.0]]),
                        np.array([[0.0, 0.0], [290.0, 400.0]]),
                        np.array([0, 1]))
        geom = inter_cell_geometry(topo, 1, 0)
        assert geom.distance == pytest.approx(math.sqrt(300 ** 2 + 400 ** 2
                                                        + 100 ** 2), rel=1e-12)

    def test_coordinate_oracle(self):
        topo = deploy_model(SPEC, seed=2)
        target = topo.cell_members(0)[0]
        for i in range(1, topo.n_uav):
            geom = inter_cell_geometry(topo, i, target)
            ux, uy, h = topo.uav_xyz[i]
            sx, sy = topo.sbs_xy[target]
            ref = math.sqrt((sx - ux) ** 2 + (sy - uy) ** 2 + h * h)
            assert geom.distance == pytest.approx(ref, rel=1e-12)
            assert geom.bearing.theta_x == pytest.approx(
                math.atan((sx - ux) / h), rel=1e-12)

    def test_serving_uav_rejected(self):
        topo = deploy_model(SPEC, seed=2)
        target = topo.cell_members(0)[0]
        with pytest.raises(ValueError):
            inter_cell_geometry(topo, 0, target)


class TestSerialization:
    def test_round_trip(self):
        topo = deploy_model(SPEC, seed=33)
        again = Topology.from_csv(topo.to_csv())
        assert np.array_equal(topo.uav_xyz, again.uav_xyz)
        assert np.array_equal(topo.sbs_xy, again.sbs_xy)
        assert np.array_equal(topo.assoc, again.assoc)

    def test_header_required(self):
        with pytest.raises(ConfigurationError):
            Topology.from_csv("kind,id,x,y,z,assoc\n")

    def test_immutability(self):
        topo = deploy_model(SPEC, seed=1)
        with pytest.raises(ValueError):
            topo.uav_xyz[0, 0] = 5.0
