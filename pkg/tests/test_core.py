"""Core types: skeletons, 6-DoF rotations, heading normalization."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sportsim.core import (BodyState, ObjectKinematics, SkeletonSpec,
                           get_skeleton, heading_normalize,
                           matrix_from_rot6d, rot6d_from_matrix,
                           rot6d_identity, rot_z, yaw_of)
from sportsim.errors import ConfigError, InvalidStateError


def make_state(joint_pos, root_yaw=0.0, joint_count=None):
    j = joint_count or len(joint_pos)
    pos = np.zeros((j, 3))
    pos[:len(joint_pos)] = joint_pos
    rot = rot6d_identity(j)
    rot[0] = rot6d_from_matrix(rot_z(root_yaw))
    return BodyState(joint_rot=rot, joint_pos=pos,
                     ang_vel=np.zeros((j, 3)), lin_vel=np.zeros((j, 3)))


class TestSkeletonSpec:
    def test_smpl_arithmetic(self):
        s = SkeletonSpec.smpl()
        assert (s.joint_count, s.actuated_count, s.action_dim) == (24, 23, 69)

    def test_smplx_arithmetic(self):
        s = SkeletonSpec.smplx()
        assert (s.joint_count, s.actuated_count, s.action_dim) == (52, 51, 153)

    def test_end_effectors_valid(self):
        for s in (SkeletonSpec.smpl(), SkeletonSpec.smplx()):
            assert all(0 <= i < s.joint_count for i in s.end_effectors)

    def test_inconsistent_counts_rejected(self):
        with pytest.raises(ConfigError):
            SkeletonSpec(name="bad", joint_count=24, actuated_count=24,
                         action_dim=72, body_names=("x",) * 24, end_effectors=(0,))

    def test_from_config(self, tmp_path):
        path = tmp_path / "skel.yaml"
        path.write_text(
            "name: mini\nbody_names: [Pelvis, L_Wrist, R_Wrist, L_Ankle, R_Ankle, Head]\n")
        s = SkeletonSpec.from_config(path)
        assert s.joint_count == 6 and s.action_dim == 15

    def test_unknown_skeleton(self):
        with pytest.raises(ConfigError):
            get_skeleton("giraffe")


class TestYawOf:
    def test_identity_is_zero(self):
        assert yaw_of(make_state([(0.0, 0.0, 1.0)])) == 0.0

    def test_yaw_quarter_turn(self):
        # oracle: explicit matrix-log style decomposition of Rz(pi/2)
        st_ = make_state([(0.0, 0.0, 1.0)], root_yaw=np.pi / 2)
        assert yaw_of(st_) == pytest.approx(np.pi / 2, abs=1e-12)

    def test_roll_has_no_heading(self):
        # rotation about x: z-axis Euler decomposition oracle gives yaw 0
        rx = np.array([[1.0, 0, 0], [0, 0.0, -1.0], [0, 1.0, 0.0]])
        rot = rot6d_identity(2)
        rot[0] = rot6d_from_matrix(rx)
        state = BodyState(joint_rot=rot, joint_pos=np.zeros((2, 3)),
                          ang_vel=np.zeros((2, 3)), lin_vel=np.zeros((2, 3)))
        assert yaw_of(state) == pytest.approx(0.0, abs=1e-12)

    def test_range_excludes_negative_pi(self):
        st_ = make_state([(0.0, 0.0, 1.0)], root_yaw=np.pi)
        assert yaw_of(st_) == pytest.approx(np.pi)

    def test_degenerate_rotation_rejected(self):
        rot = np.zeros((1, 6))
        with pytest.raises(InvalidStateError):
            matrix_from_rot6d(rot[0])


class TestHeadingNormalize:
    def test_identity_case(self):
        state = make_state([(0.0, 0.0, 1.0), (0.5, 0.2, 0.3)])
        out = heading_normalize(state, 0.0)
        np.testing.assert_allclose(out.joint_pos, state.joint_pos, atol=1e-15)
        np.testing.assert_allclose(out.joint_rot, state.joint_rot, atol=1e-15)

    def test_hand_rotation_example(self):
        # joint at (1,0,1), root at (0,0,1), yaw pi/2:
        # Rz(-pi/2) @ (1,0,1) = (0,-1,1), from explicit matrix evaluation
        state = make_state([(0.0, 0.0, 1.0), (1.0, 0.0, 1.0)], root_yaw=np.pi / 2)
        out = heading_normalize(state, np.pi / 2)
        np.testing.assert_allclose(out.joint_pos[1], [0.0, -1.0, 1.0], atol=1e-12)
        np.testing.assert_allclose(out.joint_pos[0], [0.0, 0.0, 1.0], atol=1e-12)

    def test_root_z_preserved(self):
        state = make_state([(3.0, -2.0, 1.37)], root_yaw=1.1)
        out = heading_normalize(state, 1.1)
        assert out.joint_pos[0, 2] == pytest.approx(1.37)
        np.testing.assert_allclose(out.joint_pos[0, :2], [0.0, 0.0], atol=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(phi=st.floats(-3.0, 3.0), tx=st.floats(-5.0, 5.0),
           ty=st.floats(-5.0, 5.0), base_yaw=st.floats(-1.5, 1.5))
    def test_rigid_transform_equivariance(self, phi, tx, ty, base_yaw):
        rng = np.random.default_rng(7)
        j = 5
        pos = rng.uniform(-1, 1, size=(j, 3)) + (0, 0, 1.2)
        vel = rng.uniform(-1, 1, size=(j, 3))
        ang = rng.uniform(-1, 1, size=(j, 3))
        rot = rot6d_identity(j)
        rot[0] = rot6d_from_matrix(rot_z(base_yaw))
        state = BodyState(joint_rot=rot, joint_pos=pos, ang_vel=ang, lin_vel=vel)

        rz = rot_z(phi)
        shift = np.array([tx, ty, 0.0])
        moved = BodyState(joint_rot=(rot.reshape(j, 2, 3) @ rz.T).reshape(j, 6),
                          joint_pos=pos @ rz.T + shift,
                          ang_vel=ang @ rz.T, lin_vel=vel @ rz.T)
        a = heading_normalize(state, yaw_of(state))
        b = heading_normalize(moved, yaw_of(moved))
        np.testing.assert_allclose(b.joint_pos, a.joint_pos, atol=1e-6)
        np.testing.assert_allclose(b.lin_vel, a.lin_vel, atol=1e-6)
        np.testing.assert_allclose(b.joint_rot, a.joint_rot, atol=1e-6)

    def test_idempotent_on_root_and_yaw(self):
        state = make_state([(2.0, -1.0, 0.9), (2.5, -1.2, 1.4)], root_yaw=0.8)
        once = heading_normalize(state, yaw_of(state))
        assert yaw_of(once) == pytest.approx(0.0, abs=1e-12)
        twice = heading_normalize(once, yaw_of(once))
        np.testing.assert_allclose(twice.joint_pos[0, :2], [0, 0], atol=1e-12)
        np.testing.assert_allclose(twice.joint_pos, once.joint_pos, atol=1e-12)

    def test_nonfinite_reference_rejected(self):
        state = make_state([(0.0, 0.0, 1.0)])
        with pytest.raises(InvalidStateError):
            heading_normalize(state, np.nan)


class TestValueTypes:
    def test_body_state_validates_shapes(self):
        with pytest.raises(InvalidStateError):
            BodyState(joint_rot=np.zeros((2, 5)), joint_pos=np.zeros((2, 3)),
                      ang_vel=np.zeros((2, 3)), lin_vel=np.zeros((2, 3)))

    def test_body_state_rejects_nan(self):
        pos = np.zeros((2, 3))
        pos[1, 1] = np.nan
        with pytest.raises(InvalidStateError):
            BodyState(joint_rot=rot6d_identity(2), joint_pos=pos,
                      ang_vel=np.zeros((2, 3)), lin_vel=np.zeros((2, 3)))

    def test_body_state_immutable(self):
        state = make_state([(0.0, 0.0, 1.0)])
        with pytest.raises(ValueError):
            state.joint_pos[0, 0] = 5.0

    def test_quaternion_norm_enforced(self):
        with pytest.raises(InvalidStateError):
            ObjectKinematics(pos=np.zeros(3), orient=np.array([1.0, 0.0, 0.0, 0.1]),
                             lin_vel=np.zeros(3), ang_vel=np.zeros(3))

    def test_object_flat13(self):
        kin = ObjectKinematics.at_rest([1.0, 2.0, 3.0])
        v = kin.flat13()
        assert v.shape == (13,)
        np.testing.assert_allclose(v[:3], [1, 2, 3])
        np.testing.assert_allclose(v[3:7], [1, 0, 0, 0])
