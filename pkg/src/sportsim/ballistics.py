"""Closed-form drag-free projectile predictors used as dense-reward inputs.

All predictors assume constant gravity along -z and no aerodynamic forces,
so they agree exactly with the simulated free flight. Scalar entry points
validate and raise; the ``*_xy`` batch variants broadcast over leading axes
and signal unreachable planes with NaN, which reward kernels treat as
"cannot land".
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidStateError, NoSolutionError

GRAVITY = 9.81  # m/s^2

# Flight-time floor for the desired-velocity solver: the reach-time formula
# degenerates to T=0 when ball and target share a height.
MIN_FLIGHT_TIME = 0.25  # s


@dataclass(frozen=True)
class LaunchState:
    """Initial position/velocity of a ballistic flight; g is a magnitude."""

    p0: np.ndarray
    v0: np.ndarray
    gravity: float = GRAVITY

    def __post_init__(self):
        p0 = np.asarray(self.p0, dtype=np.float64)
        v0 = np.asarray(self.v0, dtype=np.float64)
        object.__setattr__(self, "p0", p0)
        object.__setattr__(self, "v0", v0)
        if p0.shape != (3,) or v0.shape != (3,):
            raise InvalidStateError("p0 and v0 must be 3-vectors")
        if not (np.all(np.isfinite(p0)) and np.all(np.isfinite(v0)) and np.isfinite(self.gravity)):
            raise InvalidStateError("non-finite launch state")
        if self.gravity <= 0:
            raise DomainError("gravity magnitude must be positive")


def predict_land_ground(launch: LaunchState) -> np.ndarray:
    """Landing point (x, y) on the z=0 plane.

    Uses the positive root T = (v_z + sqrt(v_z^2 + 2 g z0)) / g; requires
    z0 >= 0.
    """
    z0 = launch.p0[2]
    if z0 < 0:
        raise DomainError(f"launch height must be non-negative, got {z0}")
    g = launch.gravity
    vz = launch.v0[2]
    t = (vz + np.sqrt(vz * vz + 2.0 * g * z0)) / g
    return launch.p0[:2] + launch.v0[:2] * t


def predict_land_height(launch: LaunchState, h: float) -> np.ndarray:
    """Landing point (x, y) at the *descending* crossing of the plane z=h.

    The flight time is the larger real root of z0 + v_z T - g T^2 / 2 = h;
    raises NoSolutionError when the trajectory never reaches the plane.
    """
    g = launch.gravity
    vz = launch.v0[2]
    disc = vz * vz - 2.0 * g * (h - launch.p0[2])
    if disc < 0:
        raise NoSolutionError(f"trajectory apex is below plane z={h}")
    t = (vz + np.sqrt(disc)) / g
    if t < 0:
        raise NoSolutionError(f"descending crossing of z={h} lies in the past")
    return launch.p0[:2] + launch.v0[:2] * t


def land_ground_xy(pos, vel, gravity: float = GRAVITY, out=None) -> np.ndarray:
    """Batch landing points on z=0 for positions (..., 3) and velocities (..., 3).

    Where the flight never reaches z=0 (launch point below the plane with
    too little upward speed), the current x-y is returned instead so reward
    terms stay total.
    """
    pos = np.asarray(pos, dtype=np.float64)
    vel = np.asarray(vel, dtype=np.float64)
    vz = vel[..., 2]
    disc = vz * vz + 2.0 * gravity * pos[..., 2]
    safe = disc >= 0.0
    t = (vz + np.sqrt(np.where(safe, disc, 0.0))) / gravity
    t = np.where(safe, np.maximum(t, 0.0), 0.0)
    if out is None:
        out = np.empty(pos.shape[:-1] + (2,), dtype=np.float64)
    np.multiply(vel[..., :2], t[..., None], out=out)
    out += pos[..., :2]
    return out


def land_height_xy(pos, vel, h: float, gravity: float = GRAVITY):
    """Batch descending-crossing landing points on z=h.

    Returns ``(xy, valid)``; entries with no crossing have valid=False and
    NaN coordinates.
    """
    pos = np.asarray(pos, dtype=np.float64)
    vel = np.asarray(vel, dtype=np.float64)
    vz = vel[..., 2]
    disc = vz * vz - 2.0 * gravity * (h - pos[..., 2])
    valid = disc >= 0.0
    t = (vz + np.sqrt(np.where(valid, disc, 0.0))) / gravity
    valid = valid & (t >= 0.0)
    xy = pos[..., :2] + vel[..., :2] * t[..., None]
    xy = np.where(valid[..., None], xy, np.nan)
    return xy, valid


def desired_throw_velocity(p_ball, p_goal, gravity: float = GRAVITY,
                           literal_vz: bool = False) -> np.ndarray:
    """Velocity that carries a drag-free projectile from p_ball through p_goal.

    Flight time is T = sqrt(2 |dz| / g), floored at MIN_FLIGHT_TIME, and the
    horizontal speed is ||dxy|| / T. By default the vertical component is
    chosen so the integrated trajectory passes through the goal at time T;
    ``literal_vz=True`` selects the sign variant
    v_z = ((p_ball - p_goal)_z + g T^2 / 2) / T instead.
    """
    p_ball = np.asarray(p_ball, dtype=np.float64)
    p_goal = np.asarray(p_goal, dtype=np.float64)
    delta = p_goal - p_ball
    if np.all(np.abs(delta) < 1e-12):
        raise DomainError("ball and goal coincide; throw direction undefined")
    t = np.sqrt(2.0 * abs(delta[2]) / gravity)
    t = max(t, MIN_FLIGHT_TIME)
    v = delta / t
    if literal_vz:
        v[2] = (-delta[2] + 0.5 * gravity * t * t) / t
    else:
        v[2] = delta[2] / t + 0.5 * gravity * t
    return v


def desired_throw_velocity_xy(p_ball, p_goal, gravity: float = GRAVITY,
                              literal_vz: bool = False, out=None) -> np.ndarray:
    """Batch form of :func:`desired_throw_velocity` over (..., 3) arrays.

    Degenerate ball/goal coincidences yield NaN rows for the caller to fault.
    """
    p_ball = np.asarray(p_ball, dtype=np.float64)
    p_goal = np.asarray(p_goal, dtype=np.float64)
    delta = p_goal - p_ball
    degenerate = np.all(np.abs(delta) < 1e-12, axis=-1)
    t = np.sqrt(2.0 * np.abs(delta[..., 2]) / gravity)
    t = np.maximum(t, MIN_FLIGHT_TIME)
    if out is None:
        out = np.empty_like(delta)
    np.divide(delta, t[..., None], out=out)
    if literal_vz:
        out[..., 2] = (-delta[..., 2] + 0.5 * gravity * t * t) / t
    else:
        out[..., 2] += 0.5 * gravity * t
    out[degenerate] = np.nan
    return out


def reach_time(p_ball, p_goal, gravity: float = GRAVITY):
    """T = sqrt(2 |dz| / g), the desired-velocity flight time (no floor)."""
    p_ball = np.asarray(p_ball, dtype=np.float64)
    p_goal = np.asarray(p_goal, dtype=np.float64)
    return np.sqrt(2.0 * np.abs((p_ball - p_goal)[..., 2]) / gravity)


def integrate_flight(launch: LaunchState, dt: float, steps: int) -> np.ndarray:
    """Fixed-step RK4 integration of free flight, test oracle only.

    Returns (steps + 1, 6) samples of (position, velocity), including the
    initial state.
    """
    if dt <= 0:
        raise DomainError("dt must be positive")
    if steps < 1:
        raise DomainError("steps must be >= 1")
    g = np.array([0.0, 0.0, -launch.gravity])
    out = np.empty((steps + 1, 6), dtype=np.float64)
    p = launch.p0.astype(np.float64).copy()
    v = launch.v0.astype(np.float64).copy()
    out[0, :3], out[0, 3:] = p, v
    for i in range(1, steps + 1):
        # RK4 on (p' = v, v' = g); exact for constant acceleration.
        k1p, k1v = v, g
        k2p, k2v = v + 0.5 * dt * k1v, g
        k3p, k3v = v + 0.5 * dt * k2v, g
        k4p, k4v = v + dt * k3v, g
        p = p + (dt / 6.0) * (k1p + 2 * k2p + 2 * k3p + k4p)
        v = v + (dt / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v)
        out[i, :3], out[i, 3:] = p, v
    return out


def solve_launch_velocity(p0, p_target, speed: float,
                          gravity: float = GRAVITY) -> np.ndarray:
    """Launch velocity of magnitude ~speed whose flight lands at p_target.

    Solves the flat (lower-angle) trajectory; if the requested speed cannot
    cover the range, the speed is raised to the minimum feasible value.
    Used by ball launchers at episode reset, not by reward kernels.
    """
    p0 = np.asarray(p0, dtype=np.float64)
    p_target = np.asarray(p_target, dtype=np.float64)
    delta = p_target - p0
    r = float(np.hypot(delta[0], delta[1]))
    if r < 1e-9:
        raise DomainError("target is directly above/below the launch point")
    dz = float(delta[2])
    s = float(speed)
    for _ in range(64):
        # a tan^2 - r tan + (a + dz) = 0 with a = g r^2 / (2 s^2)
        a = gravity * r * r / (2.0 * s * s)
        disc = r * r - 4.0 * a * (a + dz)
        if disc >= 0:
            break
        s *= 1.1
    else:
        raise NoSolutionError("no feasible launch speed found")
    tan_theta = (r - np.sqrt(disc)) / (2.0 * a)
    dir_xy = delta[:2] / r
    vxy = s / np.sqrt(1.0 + tan_theta * tan_theta)
    return np.array([dir_xy[0] * vxy, dir_xy[1] * vxy, vxy * tan_theta])
