import math

import numpy as np

from televiz.geometry import Pose, apply, compose, inverse, pose_distance, rotation_angle
from televiz.statechain import (
    AnchorMode,
    MeasurementSet,
    VirtualAnchors,
    decoupled_view,
    hmd_in_tracking,
    neck_pose,
    robot_body_from_odometry,
    zed_in_robot,
)

import oracles


def random_pose(rng, tscale=2.0):
    q, t = oracles.random_qt(rng, tscale)
    return Pose(q=q, t=t)


def as_matrix(p):
    return oracles.hom(p.q, p.t)


def identity_anchors(mode=AnchorMode.NO_MESH):
    return VirtualAnchors(
        tracking_in_robot_virtual=Pose.identity(),
        robot_in_world_virtual=Pose.identity(),
        mesh_in_world_virtual=Pose.identity(),
        mode=mode,
    )


class TestHmdInTracking:
    def test_identity_base(self):
        rng = np.random.default_rng(20)
        p = random_pose(rng)
        out = hmd_in_tracking(Pose.identity(), p)
        rot, trans = pose_distance(out, p)
        assert rot < 1e-15 and trans < 1e-15

    def test_identity_headset(self):
        out = hmd_in_tracking(Pose.translation(0, 0, 1.5), Pose.identity())
        assert np.allclose(out.t, [0, 0, 1.5])

    def test_matches_matrix_oracle(self):
        rng = np.random.default_rng(21)
        for _ in range(200):
            base, hmd = random_pose(rng), random_pose(rng)
            got = as_matrix(hmd_in_tracking(base, hmd))
            want = oracles.chain(as_matrix(base), as_matrix(hmd))
            assert oracles.mat_close(got, want, 1e-12)


class TestZedInRobot:
    MOUNT = (0.0, 0.0, 1.5)
    OFFSET = (0.05, 0.0, 0.10)

    def test_zero_angles(self):
        out = zed_in_robot(neck_pose(0, 0, self.MOUNT), Pose.translation(*self.OFFSET))
        assert np.allclose(out.t, [0.05, 0.0, 1.60])
        assert rotation_angle(out.q) < 1e-15

    def test_yaw_quarter_turn_swings_offset(self):
        out = zed_in_robot(
            neck_pose(math.pi / 2, 0, self.MOUNT), Pose.translation(0.1, 0, 0)
        )
        assert np.allclose(out.t, [0.0, 0.1, 1.5], atol=1e-12)

    def test_matches_fk_oracle(self):
        rng = np.random.default_rng(22)
        for _ in range(300):
            yaw = rng.uniform(-math.pi, math.pi)
            pitch = rng.uniform(-math.pi / 2, math.pi / 2)
            got = as_matrix(
                zed_in_robot(neck_pose(yaw, pitch, self.MOUNT), Pose.translation(*self.OFFSET))
            )
            want = oracles.neck_fk_matrix(yaw, pitch, self.MOUNT, self.OFFSET)
            assert oracles.mat_close(got, want, 1e-12)


class TestRobotBodyFromOdometry:
    def test_identity_camera_extrinsic(self):
        rng = np.random.default_rng(23)
        zw = random_pose(rng)
        out = robot_body_from_odometry(zw, Pose.identity())
        rot, trans = pose_distance(out, zw)
        assert rot < 1e-12 and trans < 1e-12

    def test_self_cancellation(self):
        rng = np.random.default_rng(24)
        p = random_pose(rng)
        out = robot_body_from_odometry(p, p)
        assert rotation_angle(out.q) < 1e-9 and np.linalg.norm(out.t) < 1e-9

    def test_round_trip(self):
        rng = np.random.default_rng(25)
        for _ in range(200):
            zw, zr = random_pose(rng), random_pose(rng)
            body = robot_body_from_odometry(zw, zr)
            back = compose(body, zr)
            rot, trans = pose_distance(back, zw)
            assert rot < 1e-12 and trans < 1e-12


class TestDecoupledView:
    def test_all_identity(self):
        meas = MeasurementSet(Pose.identity(), Pose.identity(), Pose.identity())
        view = decoupled_view(meas, identity_anchors())
        for pose in (view.zed_in_hmd_virtual, view.hmd_in_world_virtual, view.mesh_in_hmd_virtual):
            assert rotation_angle(pose.q) < 1e-12
            assert np.linalg.norm(pose.t) < 1e-12

    def test_operator_yaw_counter_rotates_camera_view(self):
        # calibrated start: anchors put the virtual headset on the camera
        head0 = Pose.translation(0, 0, 1.6)
        cam = Pose.translation(0.05, 0, 1.6)
        anchors = VirtualAnchors(
            tracking_in_robot_virtual=compose(cam, inverse(head0)),
            robot_in_world_virtual=Pose.identity(),
            mesh_in_world_virtual=Pose.identity(),
        )
        turned = compose(head0, Pose.rot_z(math.radians(30)))
        view = decoupled_view(MeasurementSet(turned, cam, cam), anchors)
        rel = view.zed_in_hmd_virtual
        assert abs(math.degrees(rotation_angle(rel.q)) - 30) < 1e-9
        fwd = rel.forward()
        assert math.degrees(math.atan2(fwd[1], fwd[0])) == -30 or np.isclose(
            math.degrees(math.atan2(fwd[1], fwd[0])), -30, atol=1e-9
        )
        assert np.linalg.norm(rel.t) < 1e-9

    def test_matches_matrix_oracle_chains(self):
        rng = np.random.default_rng(26)
        for _ in range(300):
            meas = MeasurementSet(
                hmd_in_tracking=random_pose(rng),
                zed_in_robot=random_pose(rng),
                zed_in_world=random_pose(rng),
            )
            anchors = VirtualAnchors(
                tracking_in_robot_virtual=random_pose(rng),
                robot_in_world_virtual=robot_body_from_odometry(
                    meas.zed_in_world, meas.zed_in_robot
                ),
                mesh_in_world_virtual=random_pose(rng),
                mode=AnchorMode.MESH_ANCHORED,
            )
            view = decoupled_view(meas, anchors)

            m_h_t = as_matrix(meas.hmd_in_tracking)
            m_z_r = as_matrix(meas.zed_in_robot)
            m_z_w = as_matrix(meas.zed_in_world)
            m_t_r = as_matrix(anchors.tracking_in_robot_virtual)
            m_s_w = as_matrix(anchors.mesh_in_world_virtual)

            want_view = oracles.chain(
                oracles.hom_inv(m_h_t), oracles.hom_inv(m_t_r), m_z_r
            )
            assert oracles.pose_matches_matrix(
                view.zed_in_hmd_virtual.q, view.zed_in_hmd_virtual.t, want_view, 1e-12
            )

            want_mesh = oracles.chain(
                oracles.hom_inv(m_h_t),
                oracles.hom_inv(m_t_r),
                m_z_r,
                oracles.hom_inv(m_z_w),
                m_s_w,
            )
            assert oracles.pose_matches_matrix(
                view.mesh_in_hmd_virtual.q, view.mesh_in_hmd_virtual.t, want_mesh, 1e-12
            )

            want_hmd_w = oracles.chain(
                m_z_w, oracles.hom_inv(m_z_r), m_t_r, m_h_t
            )
            assert oracles.pose_matches_matrix(
                view.hmd_in_world_virtual.q, view.hmd_in_world_virtual.t, want_hmd_w, 1e-12
            )

    def test_decoupling_headset_motion_is_odometry_independent(self):
        # the headset-induced view change must not depend on camera odometry
        rng = np.random.default_rng(27)
        h1, h2 = random_pose(rng), random_pose(rng)
        zr = random_pose(rng)
        anchor = random_pose(rng)
        rels = []
        for _ in range(5):
            zw = random_pose(rng)
            anchors = VirtualAnchors(
                tracking_in_robot_virtual=anchor,
                robot_in_world_virtual=robot_body_from_odometry(zw, zr),
                mesh_in_world_virtual=Pose.identity(),
                mode=AnchorMode.MESH_ANCHORED,
            )
            va = decoupled_view(MeasurementSet(h1, zr, zw), anchors)
            vb = decoupled_view(MeasurementSet(h2, zr, zw), anchors)
            rels.append(compose(inverse(va.hmd_in_world_virtual), vb.hmd_in_world_virtual))
            assert pose_distance(va.zed_in_hmd_virtual, vb.zed_in_hmd_virtual) != (0.0, 0.0)
        for rel in rels[1:]:
            rot, trans = pose_distance(rel, rels[0])
            assert rot < 1e-9 and trans < 1e-9

    def test_mesh_anchored_point_paths_coincide(self):
        # a world point seen through the live stream lands where the
        # reconstructed surface holds it, when odometry is noise free
        rng = np.random.default_rng(28)
        for _ in range(100):
            meas = MeasurementSet(
                hmd_in_tracking=random_pose(rng),
                zed_in_robot=random_pose(rng),
                zed_in_world=random_pose(rng),
            )
            anchors = VirtualAnchors(
                tracking_in_robot_virtual=random_pose(rng),
                robot_in_world_virtual=robot_body_from_odometry(
                    meas.zed_in_world, meas.zed_in_robot
                ),
                mesh_in_world_virtual=Pose.identity(),
                mode=AnchorMode.MESH_ANCHORED,
            )
            p_world = rng.uniform(-4, 4, size=3)
            p_cam = apply(inverse(meas.zed_in_world), p_world)
            cam_in_world_virtual = compose(
                anchors.robot_in_world_virtual, meas.zed_in_robot
            )
            via_stream = apply(cam_in_world_virtual, p_cam)
            via_mesh = apply(anchors.mesh_in_world_virtual, p_world)
            assert np.linalg.norm(via_stream - via_mesh) < 1e-9
