import math

import numpy as np
import pytest

from vlcmux.geometry import (
    LinkGeometry,
    OrientationModel,
    Pose,
    ReceiverGeometry,
    RoomConfig,
    UeState,
    hr_orientations,
    link_arrays,
    link_geometry,
    orient_pd,
    pr_orientations,
    rotation_matrix,
    sample_ue,
)

ROOM = RoomConfig(5.0, 5.0, 3.0, 3.0, 0.75)


def upward_state(x=2.5, y=2.5, azimuth=math.pi / 2):
    return UeState(x, y, azimuth, azimuth - math.pi / 2, 0.0, 0.0)


class TestRotationMatrix:
    def test_zero_angles_identity(self):
        assert np.array_equal(rotation_matrix(0.0, 0.0, 0.0), np.eye(3))

    def test_quarter_turn_about_z(self):
        v = rotation_matrix(math.pi / 2, 0.0, 0.0) @ np.array([1.0, 0.0, 0.0])
        assert np.allclose(v, [0.0, 1.0, 0.0], atol=1e-12)

    def test_orthonormal_unit_determinant(self, rng):
        for _ in range(10_000):
            bz, bx, by = rng.uniform(-2 * math.pi, 2 * math.pi, 3)
            r = rotation_matrix(bz, bx, by)
            assert np.allclose(r.T @ r, np.eye(3), atol=1e-12)
            assert abs(np.linalg.det(r) - 1.0) < 1e-12


class TestOrientPd:
    def test_upward_model_fixes_z_axis(self):
        ue = upward_state(azimuth=1.234)
        assert np.allclose(orient_pd(np.array([0.0, 0.0, 1.0]), ue),
                           [0.0, 0.0, 1.0], atol=1e-12)

    def test_yaw_rotates_x_to_y(self):
        ue = UeState(0.0, 0.0, math.pi, math.pi / 2, 0.0, 0.0)
        assert np.allclose(orient_pd(np.array([1.0, 0.0, 0.0]), ue),
                           [0.0, 1.0, 0.0], atol=1e-12)

    def test_pitch_tilts_z_component(self):
        ue = UeState(0.0, 0.0, math.pi / 2, 0.0, math.radians(40.78), 0.0)
        out = orient_pd(np.array([0.0, 0.0, 1.0]), ue)
        assert out[2] == pytest.approx(math.cos(math.radians(40.78)), abs=1e-12)
        assert out[2] == pytest.approx(0.7572, abs=5e-5)

    def test_norm_preserved(self, rng):
        for _ in range(200):
            v = rng.normal(size=3)
            v /= np.linalg.norm(v)
            ue = UeState(0, 0, 1.0, *rng.uniform(-math.pi, math.pi, 3))
            assert abs(np.linalg.norm(orient_pd(v, ue)) - 1.0) < 1e-12


class TestReceiverOrientations:
    def test_pr_four_detector_azimuths(self):
        theta = math.radians(40.0)
        out = pr_orientations(4, theta)
        st, ct = math.sin(theta), math.cos(theta)
        expected = np.array([[st, 0, ct], [0, st, ct], [-st, 0, ct], [0, -st, ct]])
        assert np.allclose(out, expected, atol=1e-12)

    def test_pr_zero_elevation_all_up(self):
        for n in (1, 3, 8):
            assert np.allclose(pr_orientations(n, 0.0), [[0.0, 0.0, 1.0]] * n)

    def test_pr_single_detector(self):
        out = pr_orientations(1, math.radians(40.0))
        assert np.allclose(out[0], [math.sin(math.radians(40)), 0.0,
                                    math.cos(math.radians(40))], atol=1e-12)

    def test_hr_first_detector_points_up(self):
        out = hr_orientations(4)
        assert np.allclose(out[0], [0.0, 0.0, 1.0], atol=1e-12)

    def test_hr_second_detector_of_four(self):
        # s = 5/7, theta = acos(5/7) ~ 44.415 deg, omega = 3.6/sqrt(8*(1-25/49))
        out = hr_orientations(4)
        s = 5.0 / 7.0
        omega = 3.6 / math.sqrt(8.0 * (1.0 - s * s))
        assert omega == pytest.approx(1.8186, abs=1e-4)
        theta = math.acos(s)
        assert math.degrees(theta) == pytest.approx(44.415, abs=1e-3)
        expected = [math.cos(omega) * math.sin(theta),
                    math.sin(omega) * math.sin(theta), s]
        assert np.allclose(out[1], expected, atol=1e-12)

    def test_hr_elevations_below_horizon(self):
        for n in (1, 2, 5, 16, 32):
            out = hr_orientations(n)
            assert np.all(out[:, 2] > 0.0)  # theta < pi/2

    def test_hr_pairwise_distinct(self):
        for n in range(1, 33):
            out = hr_orientations(n)
            for i in range(n):
                for j in range(i + 1, n):
                    assert np.linalg.norm(out[i] - out[j]) > 1e-6

    def test_receiver_geometry_dispatch(self):
        pr = ReceiverGeometry("pr", 4, math.radians(40.0))
        assert np.allclose(pr.body_orientations(), pr_orientations(4, math.radians(40)))
        hr = ReceiverGeometry("hr", 4)
        assert np.allclose(hr.body_orientations(), hr_orientations(4))
        with pytest.raises(ValueError):
            ReceiverGeometry("cube", 4)


class TestSampleUe:
    def test_upward_zeroes_pitch_roll(self, rng):
        model = OrientationModel.upward()
        for _ in range(100):
            ue = sample_ue(rng, ROOM, model)
            assert ue.beta_x == 0.0 and ue.beta_y == 0.0
            assert ue.beta_z == ue.azimuth - math.pi / 2
            assert 0.0 <= ue.x <= ROOM.width and 0.0 <= ue.y <= ROOM.length
            assert 0.0 < ue.azimuth <= 2 * math.pi

    def test_same_seed_reproduces_state(self):
        model = OrientationModel.handheld()
        a = sample_ue(np.random.default_rng(42), ROOM, model)
        b = sample_ue(np.random.default_rng(42), ROOM, model)
        assert a == b

    def test_laplace_pitch_mean(self):
        model = OrientationModel.handheld()
        rng = np.random.default_rng(7)
        draws = np.array([sample_ue(rng, ROOM, model).beta_x for _ in range(100_000)])
        assert math.degrees(draws.mean()) == pytest.approx(40.78, abs=0.1)

    def test_laplace_stddevs_match_model(self):
        model = OrientationModel.handheld()
        rng = np.random.default_rng(11)
        states = [sample_ue(rng, ROOM, model) for _ in range(100_000)]
        yaw = np.array([s.beta_z - (s.azimuth - math.pi / 2) for s in states])
        pitch = np.array([s.beta_x for s in states])
        roll = np.array([s.beta_y for s in states])
        for sample, target_deg in ((yaw, 3.67), (pitch, 2.39), (roll, 2.21)):
            assert math.degrees(sample.std()) == pytest.approx(target_deg, rel=0.03)

    def test_invalid_model_kind(self):
        with pytest.raises(ValueError):
            OrientationModel("sideways")
        with pytest.raises(ValueError):
            OrientationModel("laplace")  # non-positive scales


class TestLinkGeometry:
    LED = Pose(np.array([2.5, 2.5, 3.0]), np.array([0.0, 0.0, -1.0]))

    def test_nadir_link(self):
        pd = Pose(np.array([2.5, 2.5, 0.75]), np.array([0.0, 0.0, 1.0]))
        link = link_geometry(self.LED, pd)
        assert link.distance == pytest.approx(2.25, abs=1e-15)
        assert link.cos_radiant == pytest.approx(1.0, abs=1e-15)
        assert link.cos_incidence == pytest.approx(1.0, abs=1e-15)
        assert link.visible

    def test_offset_link(self):
        pd = Pose(np.array([4.75, 2.5, 0.75]), np.array([0.0, 0.0, 1.0]))
        link = link_geometry(self.LED, pd)
        assert link.distance == pytest.approx(3.1820, abs=1e-4)
        assert link.cos_radiant == pytest.approx(0.70711, abs=1e-5)
        assert link.cos_incidence == pytest.approx(0.70711, abs=1e-5)

    def test_back_facing_detector_invisible(self):
        pd = Pose(np.array([2.5, 2.5, 0.75]), np.array([0.0, 0.0, -1.0]))
        link = link_geometry(self.LED, pd)
        assert link.cos_incidence == pytest.approx(-1.0)
        assert not link.visible

    def test_coincident_positions_rejected(self):
        pd = Pose(np.array([2.5, 2.5, 3.0]), np.array([0.0, 0.0, 1.0]))
        with pytest.raises(ValueError):
            link_geometry(self.LED, pd)

    def test_swap_symmetry_exact(self, rng):
        for _ in range(100):
            p1 = Pose(rng.uniform(0, 5, 3), _unit(rng))
            p2 = Pose(p1.position + rng.uniform(0.1, 3, 3), _unit(rng))
            fwd = link_geometry(p1, p2)
            rev = link_geometry(p2, p1)
            assert fwd.distance == rev.distance
            assert fwd.cos_radiant == rev.cos_incidence
            assert fwd.cos_incidence == rev.cos_radiant

    def test_link_arrays_match_scalar(self, rng):
        led_pos = rng.uniform(0, 5, (3, 3)) + [0, 0, 3]
        led_or = np.array([_unit(rng) for _ in range(3)])
        pd_pos = rng.uniform(0, 3, 3)
        pd_or = np.array([_unit(rng) for _ in range(2)])
        dist, cos_rad, cos_inc, vis = link_arrays(led_pos, led_or, pd_pos, pd_or)
        for nr in range(2):
            for nt in range(3):
                link = link_geometry(Pose(led_pos[nt], led_or[nt]),
                                     Pose(pd_pos, pd_or[nr]))
                assert dist[nr, nt] == pytest.approx(link.distance, rel=1e-14)
                assert cos_rad[nr, nt] == pytest.approx(link.cos_radiant, rel=1e-12, abs=1e-14)
                assert cos_inc[nr, nt] == pytest.approx(link.cos_incidence, rel=1e-12, abs=1e-14)
                assert vis[nr, nt] == link.visible

    def test_link_arrays_coincident_rejected(self):
        with pytest.raises(ValueError):
            link_arrays(np.array([[1.0, 1.0, 1.0]]), np.array([[0.0, 0.0, -1.0]]),
                        np.array([1.0, 1.0, 1.0]), np.array([[0.0, 0.0, 1.0]]))


class TestValidation:
    def test_room_height_ordering(self):
        with pytest.raises(ValueError):
            RoomConfig(5, 5, 3, 0.75, 3.0)
        with pytest.raises(ValueError):
            RoomConfig(-5, 5, 3, 3.0, 0.75)

    def test_pose_requires_unit_orientation(self):
        with pytest.raises(ValueError):
            Pose(np.zeros(3), np.array([0.0, 0.0, 2.0]))

    def test_link_visibility_requires_both_cosines(self):
        geometry = LinkGeometry(1.0, 0.5, -0.5, False)
        assert not geometry.visible


def _unit(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)
