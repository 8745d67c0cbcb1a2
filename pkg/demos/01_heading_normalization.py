"""Heading normalization: the frame every observation lives in.

Every value an agent sees is expressed relative to its own heading: rotate
the world by minus the root yaw and put the root's ground position at the
origin. This script builds a small pose, drives it around the world with a
rigid transform, and shows that the normalized view never changes.
"""
import numpy as np

from sportsim.core import (BodyState, heading_normalize, rot6d_from_matrix,
                           rot6d_identity, rot_z, yaw_of)

# a three-joint "body": root, one hand out front, one foot below
pos = np.array([[0.0, 0.0, 0.93],
                [0.6, 0.2, 1.10],
                [0.1, -0.1, 0.08]])
rot = rot6d_identity(3)
state = BodyState(joint_rot=rot, joint_pos=pos,
                  ang_vel=np.zeros((3, 3)),
                  lin_vel=np.tile([2.0, 0.0, 0.0], (3, 1)))

print("yaw of the original pose:", yaw_of(state))
normalized = heading_normalize(state, yaw_of(state))
print("normalized joint positions:\n", normalized.joint_pos.round(4))

# now pick the body up, spin it 117 degrees, and drop it somewhere else
phi = np.deg2rad(117.0)
rz = rot_z(phi)
moved = BodyState(
    joint_rot=np.stack([rot6d_from_matrix(rz @ np.eye(3))] * 3),
    joint_pos=pos @ rz.T + np.array([12.0, -7.0, 0.0]),
    ang_vel=np.zeros((3, 3)),
    lin_vel=(np.tile([2.0, 0.0, 0.0], (3, 1))) @ rz.T)

renormalized = heading_normalize(moved, yaw_of(moved))
print("\nafter a rigid world transform, yaw becomes:", round(yaw_of(moved), 4))
print("max difference between normalized views:",
      np.max(np.abs(renormalized.joint_pos - normalized.joint_pos)))
print("velocities agree too:",
      np.allclose(renormalized.lin_vel, normalized.lin_vel, atol=1e-12))
