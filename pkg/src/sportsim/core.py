"""Shared domain types, skeleton definitions, and heading normalization.

Conventions used everywhere in the engine:

* world frame is z-up, gravity points along -z;
* units are meters, seconds, radians, Newtons;
* joint rotations use the two-column 6-DoF representation: the first two
  columns of the rotation matrix, stored as ``[c0x, c0y, c0z, c1x, c1y, c1z]``;
* free objects carry unit quaternions in ``(w, x, y, z)`` order;
* the root joint is index 0 (pelvis).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import yaml

from .errors import ConfigError, InvalidStateError

# Canonical SMPL joint order. Frozen here because the engine's observation
# layouts and target-body indices depend on it.
SMPL_BODY_NAMES = (
    "Pelvis", "L_Hip", "R_Hip", "Torso", "L_Knee", "R_Knee", "Spine",
    "L_Ankle", "R_Ankle", "Chest", "L_Toe", "R_Toe", "Neck", "L_Thorax",
    "R_Thorax", "Head", "L_Shoulder", "R_Shoulder", "L_Elbow", "R_Elbow",
    "L_Wrist", "R_Wrist", "L_Hand", "R_Hand",
)

_FINGERS = ("Index", "Middle", "Pinky", "Ring", "Thumb")

# 22 body joints (shared prefix with SMPL up to the wrists) + 15 joints per hand.
SMPLX_BODY_NAMES = SMPL_BODY_NAMES[:22] + tuple(
    f"{side}_{finger}{seg}"
    for side in ("L", "R")
    for finger in _FINGERS
    for seg in (1, 2, 3)
)

# Wrists, ankles, head: identical indices in both skeletons.
_END_EFFECTOR_NAMES = ("L_Wrist", "R_Wrist", "L_Ankle", "R_Ankle", "Head")


def _frozen(a: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(a, dtype=np.float64).copy()
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SkeletonSpec:
    """Joint layout of a humanoid embodiment.

    ``action_dim`` is three target signals per actuated joint; the root is
    never actuated.
    """

    name: str
    joint_count: int
    actuated_count: int
    action_dim: int
    body_names: tuple[str, ...]
    end_effectors: tuple[int, ...]

    def __post_init__(self):
        if self.actuated_count != self.joint_count - 1:
            raise ConfigError("actuated_count must equal joint_count - 1")
        if self.action_dim != 3 * self.actuated_count:
            raise ConfigError("action_dim must equal 3 * actuated_count")
        if len(self.body_names) != self.joint_count:
            raise ConfigError("body_names length must equal joint_count")
        for idx in self.end_effectors:
            if not 0 <= idx < self.joint_count:
                raise ConfigError(f"end-effector index {idx} out of range")

    @classmethod
    def from_body_names(cls, name: str, body_names: Sequence[str],
                        end_effectors: Sequence[str] | None = None) -> "SkeletonSpec":
        names = tuple(body_names)
        ee_names = tuple(end_effectors) if end_effectors else _END_EFFECTOR_NAMES
        try:
            ee = tuple(names.index(n) for n in ee_names)
        except ValueError as exc:
            raise ConfigError(f"end effector not in body_names: {exc}") from exc
        j = len(names)
        return cls(name=name, joint_count=j, actuated_count=j - 1,
                   action_dim=3 * (j - 1), body_names=names, end_effectors=ee)

    @classmethod
    def smpl(cls) -> "SkeletonSpec":
        return cls.from_body_names("smpl", SMPL_BODY_NAMES)

    @classmethod
    def smplx(cls) -> "SkeletonSpec":
        return cls.from_body_names("smplx", SMPLX_BODY_NAMES)

    @classmethod
    def from_config(cls, path) -> "SkeletonSpec":
        """Load a skeleton from a YAML key-value document.

        Required keys: ``name``, ``body_names``; optional ``end_effectors``
        (joint names).
        """
        with open(path, "r", encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
        if not isinstance(doc, dict) or "name" not in doc or "body_names" not in doc:
            raise ConfigError(f"skeleton config {path} needs 'name' and 'body_names'")
        return cls.from_body_names(doc["name"], doc["body_names"],
                                   doc.get("end_effectors"))

    def index_of(self, body_name: str) -> int:
        try:
            return self.body_names.index(body_name)
        except ValueError as exc:
            raise ConfigError(f"unknown body name {body_name!r}") from exc


def get_skeleton(name: str) -> SkeletonSpec:
    if name == "smpl":
        return SkeletonSpec.smpl()
    if name == "smplx":
        return SkeletonSpec.smplx()
    raise ConfigError(f"unknown skeleton {name!r}")


# ---------------------------------------------------------------------------
# rotation helpers


def rot_z(yaw: float) -> np.ndarray:
    """3x3 rotation about the world z-axis."""
    c, s = np.cos(yaw), np.sin(yaw)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rot_y(pitch: float) -> np.ndarray:
    """3x3 rotation about the world y-axis."""
    c, s = np.cos(pitch), np.sin(pitch)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def quat_from_yaw(yaw) -> np.ndarray:
    """Unit quaternion (w, x, y, z) for a rotation about z (vectorizes)."""
    yaw = np.asarray(yaw, dtype=np.float64)
    half = 0.5 * yaw
    w, z = np.cos(half), np.sin(half)
    zero = np.zeros_like(w)
    return np.stack([w, zero, zero, z], axis=-1)


def quat_mul(q1, q2) -> np.ndarray:
    """Hamilton product of (w, x, y, z) quaternions (vectorizes)."""
    q1 = np.asarray(q1, dtype=np.float64)
    q2 = np.asarray(q2, dtype=np.float64)
    w1, x1, y1, z1 = (q1[..., i] for i in range(4))
    w2, x2, y2, z2 = (q2[..., i] for i in range(4))
    return np.stack([
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
        w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
    ], axis=-1)


def rot6d_identity(count: int | None = None) -> np.ndarray:
    one = np.array([1.0, 0.0, 0.0, 0.0, 1.0, 0.0])
    if count is None:
        return one
    return np.tile(one, (count, 1))


def rot6d_from_matrix(mat: np.ndarray) -> np.ndarray:
    """First two columns of a rotation matrix, stacked column-first."""
    mat = np.asarray(mat, dtype=np.float64)
    return np.concatenate([mat[..., :, 0], mat[..., :, 1]], axis=-1)


def matrix_from_rot6d(r6: np.ndarray) -> np.ndarray:
    """Gram-Schmidt reconstruction of the full rotation matrix."""
    r6 = np.asarray(r6, dtype=np.float64)
    a1, a2 = r6[..., :3], r6[..., 3:6]
    n1 = np.linalg.norm(a1, axis=-1, keepdims=True)
    if np.any(n1 < 1e-8):
        raise InvalidStateError("degenerate 6-DoF rotation: zero-norm first column")
    b1 = a1 / n1
    a2p = a2 - np.sum(b1 * a2, axis=-1, keepdims=True) * b1
    n2 = np.linalg.norm(a2p, axis=-1, keepdims=True)
    if np.any(n2 < 1e-8):
        raise InvalidStateError("degenerate 6-DoF rotation: collinear columns")
    b2 = a2p / n2
    b3 = np.cross(b1, b2)
    return np.stack([b1, b2, b3], axis=-1)


def rot6d_from_yaw(yaw) -> np.ndarray:
    """6-DoF representation of a pure yaw rotation (vectorizes over yaw)."""
    yaw = np.asarray(yaw, dtype=np.float64)
    c, s = np.cos(yaw), np.sin(yaw)
    z = np.zeros_like(c)
    return np.stack([c, s, z, -s, c, z], axis=-1)


def wrap_angle(a):
    """Wrap to (-pi, pi]."""
    a = np.asarray(a, dtype=np.float64)
    out = np.arctan2(np.sin(a), np.cos(a))
    out = np.where(out <= -np.pi, np.pi, out)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# value types


@dataclass(frozen=True)
class BodyState:
    """One agent's joint kinematics: rotations, positions, velocities.

    Arrays are (J, 6) / (J, 3) and are frozen on construction; the root
    joint is row 0.
    """

    joint_rot: np.ndarray
    joint_pos: np.ndarray
    ang_vel: np.ndarray
    lin_vel: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "joint_rot", _frozen(self.joint_rot))
        object.__setattr__(self, "joint_pos", _frozen(self.joint_pos))
        object.__setattr__(self, "ang_vel", _frozen(self.ang_vel))
        object.__setattr__(self, "lin_vel", _frozen(self.lin_vel))
        j = self.joint_pos.shape[0]
        if self.joint_rot.shape != (j, 6):
            raise InvalidStateError(f"joint_rot must be ({j}, 6)")
        for name in ("joint_pos", "ang_vel", "lin_vel"):
            if getattr(self, name).shape != (j, 3):
                raise InvalidStateError(f"{name} must be ({j}, 3)")
        for name in ("joint_rot", "joint_pos", "ang_vel", "lin_vel"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise InvalidStateError(f"non-finite values in {name}")

    @property
    def joint_count(self) -> int:
        return self.joint_pos.shape[0]

    @property
    def root_pos(self) -> np.ndarray:
        return self.joint_pos[0]

    def flat(self) -> np.ndarray:
        """Concatenated (rot, pos, ang_vel, lin_vel) proprioception vector."""
        return np.concatenate([self.joint_rot.ravel(), self.joint_pos.ravel(),
                               self.ang_vel.ravel(), self.lin_vel.ravel()])


@dataclass(frozen=True)
class ObjectKinematics:
    """Free-object 13-value state: position, unit quaternion, velocities."""

    pos: np.ndarray
    orient: np.ndarray
    lin_vel: np.ndarray
    ang_vel: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "pos", _frozen(self.pos))
        object.__setattr__(self, "orient", _frozen(self.orient))
        object.__setattr__(self, "lin_vel", _frozen(self.lin_vel))
        object.__setattr__(self, "ang_vel", _frozen(self.ang_vel))
        if self.pos.shape != (3,) or self.lin_vel.shape != (3,) or self.ang_vel.shape != (3,):
            raise InvalidStateError("object vectors must have shape (3,)")
        if self.orient.shape != (4,):
            raise InvalidStateError("orientation must be a quaternion (4,)")
        for name in ("pos", "orient", "lin_vel", "ang_vel"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise InvalidStateError(f"non-finite values in {name}")
        if abs(np.linalg.norm(self.orient) - 1.0) > 1e-6:
            raise InvalidStateError("quaternion norm must be 1 within 1e-6")

    @classmethod
    def at_rest(cls, pos) -> "ObjectKinematics":
        return cls(pos=np.asarray(pos, dtype=np.float64),
                   orient=np.array([1.0, 0.0, 0.0, 0.0]),
                   lin_vel=np.zeros(3), ang_vel=np.zeros(3))

    def flat13(self) -> np.ndarray:
        return np.concatenate([self.pos, self.orient, self.lin_vel, self.ang_vel])


@dataclass(frozen=True)
class ArenaBounds:
    """Axis-aligned horizontal extent of a playing area."""

    min_xy: np.ndarray
    max_xy: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "min_xy", _frozen(self.min_xy))
        object.__setattr__(self, "max_xy", _frozen(self.max_xy))
        if self.min_xy.shape != (2,) or self.max_xy.shape != (2,):
            raise InvalidStateError("bounds must be 2-vectors")
        if not np.all(self.min_xy < self.max_xy):
            raise InvalidStateError("min_xy must be componentwise below max_xy")

    def contains(self, xy) -> bool:
        xy = np.asarray(xy, dtype=np.float64)[..., :2]
        return bool(np.all(xy >= self.min_xy) and np.all(xy <= self.max_xy))

    def wall_distances(self, xy) -> np.ndarray:
        """Signed distances to the four walls (x-min, x-max, y-min, y-max)."""
        xy = np.asarray(xy, dtype=np.float64)
        return np.stack([xy[..., 0] - self.min_xy[0], self.max_xy[0] - xy[..., 0],
                         xy[..., 1] - self.min_xy[1], self.max_xy[1] - xy[..., 1]], axis=-1)


@dataclass(frozen=True)
class ContactSet:
    """Per-body contact forces plus named geometry-pair contact results.

    ``pair_flags`` latch semantics (per step or per episode) are owned by
    the environment that fills them.
    """

    body_forces: np.ndarray
    pair_flags: Mapping[str, bool] = field(default_factory=dict)
    pair_forces: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "body_forces", _frozen(self.body_forces))
        if self.body_forces.ndim != 2 or self.body_forces.shape[1] != 3:
            raise InvalidStateError("body_forces must be (J, 3)")
        if not np.all(np.isfinite(self.body_forces)):
            raise InvalidStateError("non-finite contact forces")

    def body_force_sq_norms(self) -> np.ndarray:
        """Per-body squared force norms, shape (J,)."""
        return np.sum(self.body_forces ** 2, axis=-1)


# ---------------------------------------------------------------------------
# heading normalization


def yaw_of(state: BodyState) -> float:
    """Heading (z-axis Euler angle) of the root rotation, in (-pi, pi]."""
    mat = matrix_from_rot6d(state.joint_rot[0])
    y = float(np.arctan2(mat[1, 0], mat[0, 0]))
    return np.pi if y <= -np.pi else y


def heading_normalize(state: BodyState, reference_yaw: float) -> BodyState:
    """Express a body state in the frame rotated by -reference_yaw about z,
    with the root's x-y position moved to the origin (root z preserved).
    """
    if not np.isfinite(reference_yaw):
        raise InvalidStateError("reference_yaw must be finite")
    rz = rot_z(-reference_yaw)
    root = state.joint_pos[0]
    shift = np.array([root[0], root[1], 0.0])
    pos = (state.joint_pos - shift) @ rz.T
    lin = state.lin_vel @ rz.T
    ang = state.ang_vel @ rz.T
    j = state.joint_count
    cols = state.joint_rot.reshape(j, 2, 3)
    rot = (cols @ rz.T).reshape(j, 6)
    return BodyState(joint_rot=rot, joint_pos=pos, ang_vel=ang, lin_vel=lin)
