"""Rigid-object dynamics, contacts, proxy backend, and the stepping contract."""
import numpy as np
import pytest

from sportsim import ballistics as bal
from sportsim.core import ObjectKinematics, SkeletonSpec
from sportsim.errors import InvalidActionError, SimulationFaultError
from sportsim.physics import (DT_POLICY, DT_SIM, SUBSTEPS, TORQUE_CAP,
                              IMPLEMENT_OFFSETS, MARKER_DEFAULT, Box, Capsule,
                              ObjectSpec, ProxyArrays, ProxyHumanoidBackend,
                              SinusoidalTerrain, Sphere, StaticGeometry,
                              control_step, default_joint_offsets,
                              implement_world, sphere_substep, step_objects)


def drop_sphere(height, restitution, steps=240, dt=DT_SIM, radius=0.1):
    pos = np.array([[0.0, 0.0, height + radius]])
    vel = np.zeros((1, 3))
    geometry = StaticGeometry()
    apex_after_bounce = 0.0
    bounced = False
    force = np.zeros(1)
    for _ in range(steps):
        force[:] = 0.0
        sphere_substep(pos, vel, radius, restitution, 0.0, dt, geometry,
                       contact_force=force)
        if force[0] > 0:
            bounced = True
        if bounced:
            apex_after_bounce = max(apex_after_bounce, pos[0, 2] - radius)
    return apex_after_bounce, pos, vel


class TestSphereDynamics:
    def test_rebound_apex_energy(self):
        # energy arithmetic oracle: apex after one bounce = e^2 * h
        apex, _, _ = drop_sphere(1.0, 0.5)
        assert apex == pytest.approx(0.25, rel=0.02)

    def test_inelastic_comes_to_rest(self):
        _, pos, vel = drop_sphere(0.5, 0.0, steps=400)
        assert abs(vel[0, 2]) < 1e-6
        assert pos[0, 2] == pytest.approx(0.1, abs=1e-6)

    def test_free_flight_matches_oracle(self):
        pos = np.array([[0.0, 0.0, 10.0]])
        vel = np.array([[3.0, -1.0, 2.0]])
        launch = bal.LaunchState(p0=pos[0].copy(), v0=vel[0].copy())
        geometry = StaticGeometry()
        steps = 60  # 1 s, stays well above ground
        for _ in range(steps):
            sphere_substep(pos, vel, 0.05, 0.5, 0.0, DT_SIM, geometry)
        oracle = bal.integrate_flight(launch, DT_SIM, steps)[-1]
        np.testing.assert_allclose(pos[0], oracle[:3], atol=1e-3)

    def test_no_energy_gain_across_contacts(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            pos = np.array([[0.0, 0.0, rng.uniform(0.3, 2.0)]])
            vel = np.concatenate([rng.uniform(-5, 5, 2), [rng.uniform(-5, 0)]])[None]
            e = rng.uniform(0.0, 1.0)
            geometry = StaticGeometry()
            energy = 0.5 * np.sum(vel ** 2) + 9.81 * pos[0, 2]
            for _ in range(120):
                sphere_substep(pos, vel, 0.1, e, 0.3, DT_SIM, geometry)
                new_energy = 0.5 * np.sum(vel ** 2) + 9.81 * pos[0, 2]
                assert new_energy <= energy * (1 + 1e-6) + 1e-9
                energy = new_energy

    def test_deep_interpenetration_faults(self):
        pos = np.array([[0.0, 0.0, -5.0]])
        vel = np.zeros((1, 3))
        with pytest.raises(SimulationFaultError):
            sphere_substep(pos, vel, 0.1, 0.5, 0.0, DT_SIM, StaticGeometry())

    def test_fault_mask_path(self):
        pos = np.array([[0.0, 0.0, -5.0], [0.0, 0.0, 1.0]])
        vel = np.zeros((2, 3))
        fault = np.zeros(2, dtype=bool)
        sphere_substep(pos, vel, 0.1, 0.5, 0.0, DT_SIM, StaticGeometry(),
                       fault_out=fault)
        assert fault[0] and not fault[1]


class TestStepObjects:
    def test_sphere_and_capsule(self):
        objs = [
            (ObjectSpec(Sphere(0.1), mass=0.5, restitution=0.5), ObjectKinematics.at_rest([0, 0, 1.0])),
            (ObjectSpec(Capsule(0.02, 1.35), mass=0.8), ObjectKinematics.at_rest([2, 0, 2.0])),
        ]
        out, contacts = step_objects(objs, DT_SIM)
        assert len(out) == 2
        assert out[0].pos[2] < 1.0 and out[1].pos[2] < 2.0
        assert "object0:ground" in contacts.pair_flags

    def test_disjoint_geometry_no_flags(self):
        objs = [(ObjectSpec(Sphere(0.1), mass=0.5), ObjectKinematics.at_rest([0, 0, 5.0]))]
        _, contacts = step_objects(objs, DT_SIM)
        assert contacts.pair_flags["object0:ground"] is False
        assert contacts.pair_forces["object0:ground"] == 0.0

    def test_bad_spec_rejected(self):
        with pytest.raises(Exception):
            ObjectSpec(Sphere(-1.0), mass=1.0)
        with pytest.raises(Exception):
            ObjectSpec(Box((0.1, 0.1, 0.1)), mass=1.0, restitution=1.5)


class TestTerrain:
    def test_amplitude_bounds(self):
        terrain = SinusoidalTerrain(0.5, 8.0)
        xs = np.linspace(-20, 20, 101)
        h = terrain.height(xs[:, None], xs[None, :])
        assert np.max(np.abs(h)) <= 0.5 + 1e-12

    def test_patch_shape_and_export(self, tmp_path):
        terrain = SinusoidalTerrain(0.5, 8.0)
        patch = terrain.patch((1.0, 2.0), 0.3)
        assert patch.shape == (32, 32) and patch.dtype == np.float32
        path = tmp_path / "grid.f32"
        terrain.export_patch(path, (1.0, 2.0), 0.3)
        raw = np.frombuffer(path.read_bytes(), dtype="<f4").reshape(32, 32)
        np.testing.assert_array_equal(raw, patch)


class TestProxyBackend:
    def test_zero_actions_equilibrium(self):
        backend = ProxyHumanoidBackend()
        backend.reset()
        actions = np.zeros((1, 69))
        states = backend.step(actions)
        start = states[0].joint_pos[0].copy()
        for _ in range(30):
            states = backend.step(actions)
        np.testing.assert_allclose(states[0].joint_pos[0], start, atol=1e-9)

    def test_substep_count_is_two(self):
        assert SUBSTEPS == 2
        assert DT_POLICY / DT_SIM == pytest.approx(2.0)

    def test_actuation_saturates_at_cap(self):
        backend = ProxyHumanoidBackend()
        backend.reset()
        actions = np.zeros((1, 69))
        actions[0, 0] = 1.0  # full forward command from rest
        backend.step(actions)
        assert backend.proxy.root_drive_force[0] == pytest.approx(TORQUE_CAP)

    def test_nan_actions_rejected(self):
        backend = ProxyHumanoidBackend()
        backend.reset()
        actions = np.zeros((1, 69))
        actions[0, 3] = np.nan
        with pytest.raises(InvalidActionError):
            backend.step(actions)

    def test_shape_mismatch_rejected(self):
        backend = ProxyHumanoidBackend()
        backend.reset()
        with pytest.raises(InvalidActionError):
            backend.step(np.zeros((1, 70)))

    def test_deterministic_replay(self):
        rng = np.random.default_rng(4)
        action_log = rng.uniform(-1, 1, size=(40, 1, 69))

        def run():
            backend = ProxyHumanoidBackend()
            backend.reset()
            stream = []
            for a in action_log:
                states = backend.step(a)
                stream.append(states[0].joint_pos.copy())
            return np.array(stream)

        first, second = run(), run()
        np.testing.assert_array_equal(first, second)

    def test_body_state_shapes_smplx(self):
        backend = ProxyHumanoidBackend(SkeletonSpec.smplx())
        backend.reset()
        states = backend.step(np.zeros((1, 153)))
        assert states[0].joint_pos.shape == (52, 3)
        assert states[0].joint_rot.shape == (52, 6)


class TestImplements:
    def test_rigid_offset_invariant(self):
        proxy = ProxyArrays(3, SkeletonSpec.smpl())
        proxy.reset_rows(np.arange(3), np.zeros((3, 2)), np.array([0.0, 1.0, -2.0]))
        rng = np.random.default_rng(8)
        actions = rng.uniform(-1, 1, size=(3, 69))
        expected = np.linalg.norm(IMPLEMENT_OFFSETS["tennis_racket"])
        for _ in range(120):
            proxy.substep(actions)
            racket = implement_world(proxy, "tennis_racket")
            wrist = proxy.marker_world()[:, 1, :]
            d = np.linalg.norm(racket - wrist, axis=-1)
            np.testing.assert_allclose(d, expected, atol=1e-9)

    def test_implement_offset_norms(self):
        assert np.linalg.norm(IMPLEMENT_OFFSETS["tennis_racket"]) == pytest.approx(0.35)
        assert np.linalg.norm(IMPLEMENT_OFFSETS["table_tennis_paddle"]) == pytest.approx(0.12)
        assert np.linalg.norm(IMPLEMENT_OFFSETS["golf_club_head"]) == pytest.approx(1.14, abs=1e-3)


class TestControlStep:
    def test_objects_and_backend_advance(self):
        backend = ProxyHumanoidBackend()
        backend.reset()
        objs = [(ObjectSpec(Sphere(0.1), mass=0.4),
                 ObjectKinematics.at_rest([1.0, 0.0, 2.0]))]
        states, kins, contacts = control_step(backend, np.zeros((1, 69)), objs)
        assert len(states) == 1 and len(kins) == 1
        # two exact substeps of gravity from rest: dz = g (2 dt)^2 / 2
        expected_drop = 0.5 * 9.81 * (2 * DT_SIM) ** 2
        assert kins[0].pos[2] == pytest.approx(2.0 - expected_drop, abs=1e-9)


class TestJointOffsets:
    def test_offsets_cover_both_skeletons(self):
        for skel in (SkeletonSpec.smpl(), SkeletonSpec.smplx()):
            off = default_joint_offsets(skel)
            assert off.shape == (skel.joint_count, 3)
            assert np.all(np.isfinite(off))
            np.testing.assert_array_equal(off[0], [0, 0, 0])

    def test_marker_defaults_plausible(self):
        assert MARKER_DEFAULT.shape == (5, 3)
        # feet below the root, head above
        assert MARKER_DEFAULT[2, 2] < 0 and MARKER_DEFAULT[3, 2] < 0
        assert MARKER_DEFAULT[4, 2] > 0
