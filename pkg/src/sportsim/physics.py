"""Minimal deterministic rigid-object dynamics and the proxy humanoid backend.

The humanoid is a reduced proxy: a velocity-controlled root capsule with
PD-tracked end-effector markers (hands, feet, head) and implement geometry
rigidly offset from the right wrist. Full joint kinematics are synthesized
from the root pose, the live markers, and a fixed per-skeleton offset table,
which is what the observation layer consumes. The backend interface keeps
full-ragdoll implementations pluggable.

Everything here is vectorized over a flat agent axis and uses only
elementwise numpy ops, so results are independent of batch size, batch
order, and worker partitioning.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import (BodyState, ContactSet, ObjectKinematics, SkeletonSpec,
                   rot6d_from_yaw, wrap_angle)
from .errors import ConfigError, DomainError, InvalidActionError, SimulationFaultError

DT_SIM = 1.0 / 60.0      # physics substep
DT_POLICY = 1.0 / 30.0   # control step
SUBSTEPS = 2             # exactly dt_policy / dt_sim
GRAVITY = 9.81

TORQUE_CAP = 500.0       # N, applied actuation limit per drive

# Proxy tuning. The root behaves like a 60 kg capsule; markers like 2 kg
# point masses, so the force cap maps to the acceleration caps below.
ROOT_MASS = 60.0
MARKER_MASS = 2.0
ROOT_ACCEL_CAP = TORQUE_CAP / ROOT_MASS
MARKER_ACCEL_CAP = TORQUE_CAP / MARKER_MASS
STAND_HEIGHT = 0.93
FALLEN_HEIGHT = 0.10
KV_ROOT = 8.0            # velocity-tracking gain, 1/s
KP_Z, KD_Z = 120.0, 22.0
KP_M, KD_M = 400.0, 40.0
KR_YAW, YAW_RATE_CAP, YAW_ACCEL_CAP = 10.0, 6.0, 30.0
MARKER_REACH = 1.30
RUN_SPEED_SCALE = 6.0    # m/s per unit command
JUMP_SPEED_SCALE = 6.0   # m/s at full jump command
YAW_RATE_SCALE = 3.0
MARKER_CMD_SCALE = 1.0

MARKER_NAMES = ("L_Wrist", "R_Wrist", "L_Ankle", "R_Ankle", "Head")
N_MARKERS = 5

# Default marker offsets from the root, heading frame (x forward, y left).
MARKER_DEFAULT = np.array([
    [0.10, 0.35, 0.00],    # L_Wrist
    [0.10, -0.35, 0.00],   # R_Wrist
    [0.00, 0.12, -0.85],   # L_Ankle
    [0.00, -0.12, -0.85],  # R_Ankle
    [0.00, 0.00, 0.72],    # Head
])

# Action channel map: each actuated joint owns a triple of target signals.
# The proxy reads a documented subset and ignores the rest.
#   L_Hip  -> (forward vel cmd, lateral vel cmd, yaw rate cmd)
#   R_Hip  -> (jump cmd [>0.5 fires], stand-height delta, grip [<0 releases])
#   L_Wrist/R_Wrist/L_Ankle/R_Ankle/Head -> marker offset targets (m)
LOCO_JOINT = "L_Hip"
AUX_JOINT = "R_Hip"


def _triple_slice(skeleton: SkeletonSpec, body: str) -> slice:
    j = skeleton.index_of(body)
    if j == 0:
        raise ConfigError("root joint carries no action channels")
    return slice(3 * (j - 1), 3 * j)


# ---------------------------------------------------------------------------
# object and geometry specs


@dataclass(frozen=True)
class Sphere:
    radius: float


@dataclass(frozen=True)
class Capsule:
    radius: float
    half_length: float


@dataclass(frozen=True)
class Box:
    extents: tuple[float, float, float]  # full sizes


@dataclass(frozen=True)
class ObjectSpec:
    shape: Sphere | Capsule | Box
    mass: float
    restitution: float = 0.5
    friction: float = 0.3

    def __post_init__(self):
        if isinstance(self.shape, Sphere) and self.shape.radius <= 0:
            raise ConfigError("sphere radius must be positive")
        if isinstance(self.shape, Capsule) and (self.shape.radius <= 0 or self.shape.half_length <= 0):
            raise ConfigError("capsule dimensions must be positive")
        if isinstance(self.shape, Box) and any(e <= 0 for e in self.shape.extents):
            raise ConfigError("box extents must be positive")
        if self.mass <= 0:
            raise ConfigError("mass must be positive")
        if not 0.0 <= self.restitution <= 1.0:
            raise ConfigError("restitution must be in [0, 1]")
        if self.friction < 0:
            raise ConfigError("friction must be non-negative")


class SinusoidalTerrain:
    """Wave-like height field h = A sin(2 pi x / L) cos(2 pi y / L)."""

    def __init__(self, amplitude: float = 0.5, wavelength: float = 8.0):
        self.amplitude = amplitude
        self.wavelength = wavelength

    def height(self, x, y):
        k = 2.0 * np.pi / self.wavelength
        return self.amplitude * np.sin(k * np.asarray(x)) * np.cos(k * np.asarray(y))

    def patch(self, center_xy, yaw: float = 0.0, size: int = 32,
              extent: float = 16.0) -> np.ndarray:
        """Heading-aligned (size x size) height patch centered on center_xy."""
        half = extent / 2.0
        lin = np.linspace(-half, half, size)
        gx, gy = np.meshgrid(lin, lin, indexing="ij")
        c, s = np.cos(yaw), np.sin(yaw)
        wx = center_xy[0] + c * gx - s * gy
        wy = center_xy[1] + s * gx + c * gy
        return self.height(wx, wy).astype(np.float32)

    def export_patch(self, path, center_xy, yaw: float = 0.0, size: int = 32,
                     extent: float = 16.0) -> None:
        """Write a row-major little-endian f32 grid for inspection."""
        grid = self.patch(center_xy, yaw, size, extent)
        with open(path, "wb") as fh:
            fh.write(grid.astype("<f4").tobytes(order="C"))


@dataclass(frozen=True)
class TableTop:
    center_xy: tuple[float, float]
    half_extents: tuple[float, float]
    top_z: float


@dataclass(frozen=True)
class NetPlane:
    x: float
    half_width: float
    top_z: float


@dataclass(frozen=True)
class StaticGeometry:
    """Ground plane (optionally a terrain) plus tables and nets."""

    terrain: SinusoidalTerrain | None = None
    tables: tuple[TableTop, ...] = ()
    nets: tuple[NetPlane, ...] = ()

    def ground_height(self, x, y):
        if self.terrain is None:
            return np.zeros_like(np.asarray(x, dtype=np.float64))
        return self.terrain.height(x, y)


# ---------------------------------------------------------------------------
# batched sphere dynamics


def sphere_substep(pos, vel, radius: float, restitution: float, friction: float,
                   dt: float, geometry: StaticGeometry,
                   contact_force=None, table_hit=None, net_hit=None,
                   fault_out=None) -> None:
    """One contact-resolving flight substep for a batch of spheres, in place.

    pos/vel are (..., 3). Free flight uses the exact constant-gravity
    update (position gets the half a dt^2 term), so unobstructed flight
    matches the RK4 oracle to machine precision. Impacts resolve with
    v_n+ = -e v_n- evaluated at the contact plane (penetration-corrected,
    so bounces cannot gain energy) plus Coulomb tangential damping;
    optional output arrays receive contact force magnitudes (impulse/dt)
    and table/net hit flags. Deep interpenetration raises, or is recorded
    per element when ``fault_out`` is given so one faulted environment
    cannot poison a batch.
    """
    pos[..., 0] += vel[..., 0] * dt
    pos[..., 1] += vel[..., 1] * dt
    pos[..., 2] += vel[..., 2] * dt - 0.5 * GRAVITY * dt * dt
    vel[..., 2] -= GRAVITY * dt

    # table tops act as local ground planes within their footprint
    gh = np.asarray(geometry.ground_height(pos[..., 0], pos[..., 1]), dtype=np.float64)
    eff_ground = np.broadcast_to(gh, pos[..., 2].shape).copy()
    on_table = None
    for tb in geometry.tables:
        within = ((np.abs(pos[..., 0] - tb.center_xy[0]) <= tb.half_extents[0])
                  & (np.abs(pos[..., 1] - tb.center_xy[1]) <= tb.half_extents[1])
                  & (pos[..., 2] >= tb.top_z - 4 * radius))
        eff_ground = np.where(within, tb.top_z, eff_ground)
        on_table = within if on_table is None else (on_table | within)

    pen = eff_ground + radius - pos[..., 2]
    deep = pen > 10.0 * radius
    if fault_out is not None:
        fault_out |= deep
    elif np.any(deep):
        raise SimulationFaultError("sphere interpenetrated ground beyond 10 radii")

    hit = pen > 0.0
    if np.any(hit):
        vn = vel[..., 2]
        impact = hit & (vn < 0.0)
        # normal speed at the contact plane (removes gravity gained while
        # penetrating), keeping e<=1 bounces energy-consistent
        v_contact = np.sqrt(np.maximum(vn * vn - 2.0 * GRAVITY * pen, 0.0))
        jn = np.where(impact, (1.0 + restitution) * v_contact, 0.0)
        # Coulomb: tangential speed loses at most mu * |jn|
        vt = np.linalg.norm(vel[..., :2], axis=-1)
        dvt = np.minimum(friction * jn, vt)
        scale = np.where(vt > 1e-12, 1.0 - dvt / np.maximum(vt, 1e-12), 1.0)
        vel[..., 0] = np.where(impact, vel[..., 0] * scale, vel[..., 0])
        vel[..., 1] = np.where(impact, vel[..., 1] * scale, vel[..., 1])
        vel[..., 2] = np.where(impact, restitution * v_contact, vel[..., 2])
        # settle: kill micro-bounces so e=0 spheres come to rest exactly
        slow = hit & (np.abs(vel[..., 2]) < 0.05)
        vel[..., 2] = np.where(slow, 0.0, vel[..., 2])
        pos[..., 2] = np.where(hit, eff_ground + radius, pos[..., 2])
        if contact_force is not None:
            np.maximum(contact_force, jn / dt, out=contact_force)
        if table_hit is not None and on_table is not None:
            table_hit |= impact & on_table

    for net in geometry.nets:
        prev_x = pos[..., 0] - vel[..., 0] * dt
        crossed = ((prev_x - net.x) * (pos[..., 0] - net.x) < 0.0) | (np.abs(pos[..., 0] - net.x) < radius)
        blocked = crossed & (pos[..., 2] < net.top_z) & (np.abs(pos[..., 1]) <= net.half_width)
        if np.any(blocked):
            side = np.where(prev_x < net.x, -1.0, 1.0)
            pos[..., 0] = np.where(blocked, net.x + side * (radius + 1e-3), pos[..., 0])
            vel[..., 0] = np.where(blocked, -0.3 * vel[..., 0], vel[..., 0])
            vel[..., 1] = np.where(blocked, 0.5 * vel[..., 1], vel[..., 1])
            vel[..., 2] = np.where(blocked, 0.5 * vel[..., 2], vel[..., 2])
            if net_hit is not None:
                net_hit |= blocked


def effector_hit(ball_pos, ball_vel, point_pos, point_vel, reach: float,
                 restitution: float, dt: float = DT_SIM,
                 eff_mass: float = MARKER_MASS):
    """Resolve ball contact against a moving effector point, in place.

    Returns (hit_mask, force_estimate). The effector is treated as a moving
    surface of infinite mass: the relative normal velocity reflects with the
    given restitution, and the ball is pushed out to the reach distance.
    The force estimate is eff_mass * dv / dt (impulse over the substep).
    """
    dp = ball_pos - point_pos
    dist = np.linalg.norm(dp, axis=-1)
    near = dist < reach
    nrm = dp / np.maximum(dist, 1e-9)[..., None]
    rel = ball_vel - point_vel
    vn = np.sum(rel * nrm, axis=-1)
    hit = near & (vn < 0.0)
    dv = -(1.0 + restitution) * np.where(hit, vn, 0.0)
    ball_vel += dv[..., None] * nrm
    push = np.where(hit, reach - dist, 0.0)
    ball_pos += push[..., None] * nrm
    force = eff_mass * dv / dt
    return hit, force


# ---------------------------------------------------------------------------
# proxy humanoid (batched)


class ProxyArrays:
    """State-of-arrays for M proxy agents (a batch flattened over envs)."""

    def __init__(self, count: int, skeleton: SkeletonSpec):
        self.count = count
        self.skeleton = skeleton
        m = count
        self.root_pos = np.zeros((m, 3))
        self.root_yaw = np.zeros(m)
        self.root_vel = np.zeros((m, 3))
        self.yaw_rate = np.zeros(m)
        self.marker_loc = np.tile(MARKER_DEFAULT, (m, 1, 1))
        self.marker_vel = np.zeros((m, N_MARKERS, 3))
        self.grounded = np.ones(m, dtype=bool)
        self.fallen = np.zeros(m, dtype=bool)
        self.grip = np.ones(m, dtype=bool)
        self.height_target = np.full(m, STAND_HEIGHT)
        self.root_drive_force = np.zeros(m)
        self._loco = _triple_slice(skeleton, LOCO_JOINT)
        self._aux = _triple_slice(skeleton, AUX_JOINT)
        self._marker_slices = [_triple_slice(skeleton, n) for n in MARKER_NAMES]
        # scratch buffers (hot path, no per-step allocation)
        self._sc_v2 = np.zeros((m, 2))
        self._sc_m = np.zeros(m)
        self._sc_mk = np.zeros((m, N_MARKERS, 3))

    def reset_rows(self, rows, pos_xy, yaw) -> None:
        self.root_pos[rows, 0] = pos_xy[..., 0]
        self.root_pos[rows, 1] = pos_xy[..., 1]
        self.root_pos[rows, 2] = STAND_HEIGHT
        self.root_yaw[rows] = yaw
        self.root_vel[rows] = 0.0
        self.yaw_rate[rows] = 0.0
        self.marker_loc[rows] = MARKER_DEFAULT
        self.marker_vel[rows] = 0.0
        self.grounded[rows] = True
        self.fallen[rows] = False
        self.grip[rows] = True
        self.height_target[rows] = STAND_HEIGHT
        self.root_drive_force[rows] = 0.0

    def substep(self, actions: np.ndarray, dt: float = DT_SIM) -> None:
        """Advance every agent by one physics substep under the channel map."""
        live = ~self.fallen
        cmd_v = np.clip(actions[:, self._loco][:, :2], -1.0, 1.0) * RUN_SPEED_SCALE
        cmd_rate = np.clip(actions[:, self._loco][:, 2], -1.0, 1.0) * YAW_RATE_SCALE
        aux = actions[:, self._aux]
        jump_cmd = aux[:, 0]
        self.height_target[:] = np.where(
            live, STAND_HEIGHT + 0.3 * np.clip(aux[:, 1], -1.0, 1.0), self.height_target)
        self.grip[:] = np.where(live, aux[:, 2] >= 0.0, self.grip)

        c, s = np.cos(self.root_yaw), np.sin(self.root_yaw)
        # world-frame commanded planar velocity
        vwx = c * cmd_v[:, 0] - s * cmd_v[:, 1]
        vwy = s * cmd_v[:, 0] + c * cmd_v[:, 1]
        ax = KV_ROOT * (vwx - self.root_vel[:, 0])
        ay = KV_ROOT * (vwy - self.root_vel[:, 1])
        a_norm = np.hypot(ax, ay)
        scale = np.minimum(1.0, ROOT_ACCEL_CAP / np.maximum(a_norm, 1e-12))
        ax *= scale
        ay *= scale
        self.root_drive_force[:] = np.where(live, ROOT_MASS * a_norm * scale, 0.0)
        self.root_vel[:, 0] += np.where(live & self.grounded, ax * dt, 0.0)
        self.root_vel[:, 1] += np.where(live & self.grounded, ay * dt, 0.0)

        z = self.root_pos[:, 2]
        vz = self.root_vel[:, 2]
        az_ground = np.clip(KP_Z * (self.height_target - z) - KD_Z * vz,
                            -ROOT_ACCEL_CAP * 3, ROOT_ACCEL_CAP * 3)
        vz_new = np.where(self.grounded, vz + az_ground * dt, vz - GRAVITY * dt)
        jump = live & self.grounded & (jump_cmd > 0.5)
        vz_new = np.where(jump, JUMP_SPEED_SCALE * np.clip(jump_cmd, 0.0, 1.0), vz_new)
        self.grounded[jump] = False
        self.root_vel[:, 2] = np.where(live, vz_new, 0.0)

        # yaw-rate tracking
        r_acc = np.clip(KR_YAW * (cmd_rate - self.yaw_rate), -YAW_ACCEL_CAP, YAW_ACCEL_CAP)
        self.yaw_rate[:] = np.where(live, np.clip(self.yaw_rate + r_acc * dt,
                                                  -YAW_RATE_CAP, YAW_RATE_CAP), 0.0)

        self.root_pos[:, 0] += self.root_vel[:, 0] * dt
        self.root_pos[:, 1] += self.root_vel[:, 1] * dt
        self.root_pos[:, 2] += self.root_vel[:, 2] * dt
        self.root_yaw[:] = wrap_angle(self.root_yaw + self.yaw_rate * dt)

        landing = (~self.grounded) & (self.root_pos[:, 2] <= self.height_target) \
            & (self.root_vel[:, 2] <= 0.0)
        self.grounded |= landing
        self.root_vel[landing, 2] = 0.0
        self.root_pos[:, 2] = np.where(landing, self.height_target, self.root_pos[:, 2])

        # fallen agents collapse toward the ground and stop responding
        fz = self.root_pos[:, 2]
        self.root_pos[:, 2] = np.where(self.fallen, np.maximum(FALLEN_HEIGHT, fz - 2.0 * dt), fz)
        self.root_vel[self.fallen] = 0.0
        self.yaw_rate[self.fallen] = 0.0

        # markers: PD toward commanded offsets, acceleration clipped
        tgt = self._sc_mk
        for k, sl in enumerate(self._marker_slices):
            np.clip(actions[:, sl], -1.0, 1.0, out=tgt[:, k])
        tgt *= MARKER_CMD_SCALE
        tgt += MARKER_DEFAULT
        reach = np.linalg.norm(tgt, axis=-1)
        tgt *= np.minimum(1.0, MARKER_REACH / np.maximum(reach, 1e-12))[..., None]
        acc = KP_M * (tgt - self.marker_loc) - KD_M * self.marker_vel
        an = np.linalg.norm(acc, axis=-1)
        acc *= np.minimum(1.0, MARKER_ACCEL_CAP / np.maximum(an, 1e-12))[..., None]
        self.marker_vel += np.where(live[:, None, None], acc * dt, 0.0)
        self.marker_loc += self.marker_vel * dt

    # --- world-frame views -------------------------------------------------

    def marker_world(self, out=None) -> np.ndarray:
        """World positions of the five markers, (M, 5, 3)."""
        c, s = np.cos(self.root_yaw), np.sin(self.root_yaw)
        lx, ly, lz = self.marker_loc[..., 0], self.marker_loc[..., 1], self.marker_loc[..., 2]
        if out is None:
            out = np.empty_like(self.marker_loc)
        out[..., 0] = self.root_pos[:, None, 0] + c[:, None] * lx - s[:, None] * ly
        out[..., 1] = self.root_pos[:, None, 1] + s[:, None] * lx + c[:, None] * ly
        out[..., 2] = self.root_pos[:, None, 2] + lz
        return out

    def marker_world_vel(self, out=None) -> np.ndarray:
        c, s = np.cos(self.root_yaw), np.sin(self.root_yaw)
        vx, vy, vz = self.marker_vel[..., 0], self.marker_vel[..., 1], self.marker_vel[..., 2]
        if out is None:
            out = np.empty_like(self.marker_vel)
        out[..., 0] = self.root_vel[:, None, 0] + c[:, None] * vx - s[:, None] * vy
        out[..., 1] = self.root_vel[:, None, 1] + s[:, None] * vx + c[:, None] * vy
        out[..., 2] = self.root_vel[:, None, 2] + vz
        return out

    def heading_dir(self, out=None) -> np.ndarray:
        if out is None:
            out = np.empty((self.count, 2))
        np.cos(self.root_yaw, out=out[:, 0])
        np.sin(self.root_yaw, out=out[:, 1])
        return out

    def body_point(self, offset, out=None) -> np.ndarray:
        """World position of a rigid heading-frame offset from the root."""
        c, s = np.cos(self.root_yaw), np.sin(self.root_yaw)
        if out is None:
            out = np.empty((self.count, 3))
        out[:, 0] = self.root_pos[:, 0] + c * offset[0] - s * offset[1]
        out[:, 1] = self.root_pos[:, 1] + s * offset[0] + c * offset[1]
        out[:, 2] = self.root_pos[:, 2] + offset[2]
        return out

    def body_state(self, index: int, joint_offsets: np.ndarray) -> BodyState:
        """Materialize one agent's full BodyState from the proxy arrays."""
        skel = self.skeleton
        j = skel.joint_count
        yaw = float(self.root_yaw[index])
        c, s = np.cos(yaw), np.sin(yaw)
        rot = np.tile(rot6d_from_yaw(yaw), (j, 1))
        pos = np.empty((j, 3))
        off = joint_offsets
        pos[:, 0] = self.root_pos[index, 0] + c * off[:, 0] - s * off[:, 1]
        pos[:, 1] = self.root_pos[index, 1] + s * off[:, 0] + c * off[:, 1]
        pos[:, 2] = self.root_pos[index, 2] + off[:, 2]
        mw = self.marker_world()[index]
        for k, jidx in enumerate(skel.end_effectors):
            pos[jidx] = mw[k]
        _attach_marker_children(skel, pos, mw, yaw)
        lin = np.tile(self.root_vel[index], (j, 1))
        mv = self.marker_world_vel()[index]
        for k, jidx in enumerate(skel.end_effectors):
            lin[jidx] = mv[k]
        ang = np.tile([0.0, 0.0, self.yaw_rate[index]], (j, 1))
        return BodyState(joint_rot=rot, joint_pos=pos, ang_vel=ang, lin_vel=lin)


def _attach_marker_children(skel: SkeletonSpec, pos: np.ndarray,
                            markers: np.ndarray, yaw: float) -> None:
    """Place hand/toe/finger joints rigidly relative to their live marker."""
    c, s = np.cos(yaw), np.sin(yaw)

    def place(name, marker_idx, off):
        try:
            jidx = skel.body_names.index(name)
        except ValueError:
            return
        pos[jidx, 0] = markers[marker_idx, 0] + c * off[0] - s * off[1]
        pos[jidx, 1] = markers[marker_idx, 1] + s * off[0] + c * off[1]
        pos[jidx, 2] = markers[marker_idx, 2] + off[2]

    place("L_Hand", 0, (0.08, 0.03, -0.02))
    place("R_Hand", 1, (0.08, -0.03, -0.02))
    place("L_Toe", 2, (0.12, 0.0, -0.06))
    place("R_Toe", 3, (0.12, 0.0, -0.06))
    for side, marker_idx, sign in (("L", 0, 1.0), ("R", 1, -1.0)):
        for f, finger in enumerate(("Index", "Middle", "Pinky", "Ring", "Thumb")):
            for seg in (1, 2, 3):
                place(f"{side}_{finger}{seg}", marker_idx,
                      (0.05 + 0.03 * seg, sign * (0.01 * f - 0.02), -0.02))


def default_joint_offsets(skeleton: SkeletonSpec) -> np.ndarray:
    """Fixed heading-frame offsets of every joint from the root.

    Marker joints and their children are overwritten with live positions by
    ``ProxyArrays.body_state``; the static entries only feed observations.
    """
    table = {
        "Pelvis": (0.0, 0.0, 0.0),
        "L_Hip": (0.0, 0.09, -0.06), "R_Hip": (0.0, -0.09, -0.06),
        "Torso": (0.0, 0.0, 0.12),
        "L_Knee": (0.0, 0.10, -0.48), "R_Knee": (0.0, -0.10, -0.48),
        "Spine": (0.0, 0.0, 0.25),
        "L_Ankle": (0.0, 0.11, -0.85), "R_Ankle": (0.0, -0.11, -0.85),
        "Chest": (0.0, 0.0, 0.37),
        "L_Toe": (0.12, 0.11, -0.91), "R_Toe": (0.12, -0.11, -0.91),
        "Neck": (0.0, 0.0, 0.55),
        "L_Thorax": (0.0, 0.07, 0.52), "R_Thorax": (0.0, -0.07, 0.52),
        "Head": (0.0, 0.0, 0.72),
        "L_Shoulder": (0.0, 0.18, 0.52), "R_Shoulder": (0.0, -0.18, 0.52),
        "L_Elbow": (0.0, 0.42, 0.30), "R_Elbow": (0.0, -0.42, 0.30),
        "L_Wrist": (0.10, 0.35, 0.0), "R_Wrist": (0.10, -0.35, 0.0),
        "L_Hand": (0.14, 0.38, -0.02), "R_Hand": (0.14, -0.38, -0.02),
    }
    out = np.zeros((skeleton.joint_count, 3))
    for i, name in enumerate(skeleton.body_names):
        if name in table:
            out[i] = table[name]
        else:
            # finger joints cluster near their wrist
            side = 1.0 if name.startswith("L_") else -1.0
            out[i] = (0.16, side * 0.37, -0.02)
    return out


# ---------------------------------------------------------------------------
# implements

# Rigid heading-frame offsets of implement centers from the right wrist.
# Norms are constant by construction, which is the rigid-offset invariant.
IMPLEMENT_OFFSETS = {
    "tennis_racket": np.array([0.35, 0.0, 0.0]),
    "table_tennis_paddle": np.array([0.12, 0.0, 0.0]),
    "fencing_sword_tip": np.array([0.9, 0.0, 0.0]),
    "golf_club_head": np.array([0.35, 0.0, -1.0847]),  # 1.14 m shaft
    "boxing_hand": np.array([0.0, 0.0, 0.0]),
}


def implement_world(proxy: ProxyArrays, name: str, wrist: int = 1, out=None) -> np.ndarray:
    """World position of an implement center rigidly offset from a wrist marker."""
    try:
        off = IMPLEMENT_OFFSETS[name]
    except KeyError as exc:
        raise ConfigError(f"unknown implement {name!r}") from exc
    mw = proxy.marker_world()
    c, s = np.cos(proxy.root_yaw), np.sin(proxy.root_yaw)
    if out is None:
        out = np.empty((proxy.count, 3))
    out[:, 0] = mw[:, wrist, 0] + c * off[0] - s * off[1]
    out[:, 1] = mw[:, wrist, 1] + s * off[0] + c * off[1]
    out[:, 2] = mw[:, wrist, 2] + off[2]
    return out


def implement_from_markers(marker_pos: np.ndarray, cos_yaw, sin_yaw,
                           name: str, wrist: int = 1, out=None) -> np.ndarray:
    """Same as :func:`implement_world` from precomputed marker positions."""
    off = IMPLEMENT_OFFSETS[name]
    if out is None:
        out = np.empty(marker_pos.shape[:-2] + (3,))
    out[..., 0] = marker_pos[..., wrist, 0] + cos_yaw * off[0] - sin_yaw * off[1]
    out[..., 1] = marker_pos[..., wrist, 1] + sin_yaw * off[0] + cos_yaw * off[1]
    out[..., 2] = marker_pos[..., wrist, 2] + off[2]
    return out


# ---------------------------------------------------------------------------
# single-environment surfaces (spec operations)


class DynamicsBackend:
    """Pluggable humanoid dynamics: deterministic given state and actions."""

    skeleton: SkeletonSpec
    n_agents: int

    def reset(self, states: Sequence[BodyState]) -> None:
        raise NotImplementedError

    def step(self, actions: np.ndarray, substeps: int = SUBSTEPS) -> list[BodyState]:
        raise NotImplementedError


class ProxyHumanoidBackend(DynamicsBackend):
    """Built-in reduced proxy: root capsule + PD markers + implements."""

    def __init__(self, skeleton: SkeletonSpec | None = None, n_agents: int = 1):
        self.skeleton = skeleton or SkeletonSpec.smpl()
        self.n_agents = n_agents
        self.proxy = ProxyArrays(n_agents, self.skeleton)
        self._offsets = default_joint_offsets(self.skeleton)

    def reset(self, states: Sequence[BodyState] | None = None,
              pos_xy=None, yaw=None) -> None:
        rows = np.arange(self.n_agents)
        if states is not None:
            p = np.stack([st.root_pos[:2] for st in states])
            y = np.array([np.arctan2(st.joint_rot[0][1], st.joint_rot[0][0]) for st in states])
            self.proxy.reset_rows(rows, p, y)
        else:
            p = np.zeros((self.n_agents, 2)) if pos_xy is None else np.asarray(pos_xy, dtype=np.float64)
            y = np.zeros(self.n_agents) if yaw is None else np.asarray(yaw, dtype=np.float64)
            self.proxy.reset_rows(rows, p, y)

    def step(self, actions: np.ndarray, substeps: int = SUBSTEPS) -> list[BodyState]:
        actions = np.asarray(actions, dtype=np.float64)
        if actions.shape != (self.n_agents, self.skeleton.action_dim):
            raise InvalidActionError(
                f"actions must be ({self.n_agents}, {self.skeleton.action_dim})")
        if not np.all(np.isfinite(actions)):
            raise InvalidActionError("actions contain non-finite values")
        for _ in range(substeps):
            self.proxy.substep(actions)
        return [self.proxy.body_state(i, self._offsets) for i in range(self.n_agents)]


def step_objects(objects: Sequence[tuple[ObjectSpec, ObjectKinematics]],
                 dt: float, geometry: StaticGeometry | None = None):
    """Advance free objects one substep; returns new kinematics + ContactSet.

    Spheres collide with the ground/tables/nets; capsules and boxes fly
    ballistically with ground contact reported at their center (attachment
    and landing logic is environment-owned).
    """
    if dt <= 0:
        raise DomainError("dt must be positive")
    geometry = geometry or StaticGeometry()
    out: list[ObjectKinematics] = []
    flags: dict[str, bool] = {}
    forces: dict[str, float] = {}
    for i, (spec, kin) in enumerate(objects):
        pos = kin.pos.copy().reshape(1, 3)
        vel = kin.lin_vel.copy().reshape(1, 3)
        name = f"object{i}"
        if isinstance(spec.shape, Sphere):
            cf = np.zeros(1)
            sphere_substep(pos, vel, spec.shape.radius, spec.restitution,
                           spec.friction, dt, geometry, contact_force=cf)
            flags[f"{name}:ground"] = bool(cf[0] > 0.0)
            forces[f"{name}:ground"] = float(cf[0] * spec.mass)
        else:
            vel[0, 2] -= GRAVITY * dt
            pos += vel * dt
            gh = float(np.asarray(geometry.ground_height(pos[0, 0], pos[0, 1])))
            touching = pos[0, 2] <= gh + getattr(spec.shape, "radius", 0.05)
            flags[f"{name}:ground"] = bool(touching)
            forces[f"{name}:ground"] = 0.0
        out.append(ObjectKinematics(pos=pos[0], orient=kin.orient,
                                    lin_vel=vel[0], ang_vel=kin.ang_vel))
    contacts = ContactSet(body_forces=np.zeros((1, 3)), pair_flags=flags,
                          pair_forces=forces)
    return out, contacts


class PairContacts:
    """Named geometry-pair contact tracker with per-episode latched flags."""

    def __init__(self, count: int, pair_names: Sequence[str]):
        self.count = count
        self.names = tuple(pair_names)
        self.flags = {n: np.zeros(count, dtype=bool) for n in self.names}
        self.latched = {n: np.zeros(count, dtype=bool) for n in self.names}
        self.forces = {n: np.zeros(count) for n in self.names}

    def observe(self, name: str, hit: np.ndarray, force: np.ndarray | None = None) -> None:
        if name not in self.flags:
            raise ConfigError(f"unknown contact pair {name!r}")
        self.flags[name] |= hit
        self.latched[name] |= hit
        if force is not None:
            np.maximum(self.forces[name], force, out=self.forces[name])

    def clear_step(self) -> None:
        for n in self.names:
            self.flags[n][:] = False
            self.forces[n][:] = 0.0

    def reset_rows(self, rows) -> None:
        for n in self.names:
            self.flags[n][rows] = False
            self.latched[n][rows] = False
            self.forces[n][rows] = 0.0


def control_step(backend: DynamicsBackend, actions: np.ndarray,
                 objects: Sequence[tuple[ObjectSpec, ObjectKinematics]] = (),
                 geometry: StaticGeometry | None = None,
                 dt_policy: float = DT_POLICY):
    """One 30 Hz control step = exactly two 60 Hz physics substeps."""
    substeps = int(round(dt_policy / DT_SIM))
    states = backend.step(actions, substeps=substeps)
    objs = list(objects)
    contacts = None
    for _ in range(substeps):
        objs_new = []
        stepped, contacts = step_objects(objs, DT_SIM, geometry)
        objs_new = [(spec, kin) for (spec, _), kin in zip(objs, stepped)]
        objs = objs_new
    return states, [k for _, k in objs], contacts
