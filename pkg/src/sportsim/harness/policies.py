"""Random and scripted policies for exercising reward/termination paths.

Scripted policies are deterministic functions of environment state and the
step counter; they exist to drive episodes through specific code paths (a
straight run, a timed swing, a throw) and make no claim of behavior quality.
"""
from __future__ import annotations

import numpy as np

from ..core import wrap_angle
from ..envs.base import BatchEnv
from ..errors import ConfigError
from ..physics import AUX_JOINT, LOCO_JOINT, MARKER_NAMES


def _slices(env: BatchEnv):
    skel = env.skeleton
    def triple(name):
        j = skel.index_of(name)
        return slice(3 * (j - 1), 3 * j)
    return triple


class Policy:
    """Produces actions of shape (num_envs * n_agents, action_dim)."""

    name = "policy"

    def reset(self, env: BatchEnv) -> None:
        pass

    def act(self, env: BatchEnv, step: int) -> np.ndarray:
        raise NotImplementedError


class RandomPolicy(Policy):
    name = "random"

    def __init__(self, seed: int = 0):
        self.seed = seed
        self._rng = np.random.Generator(np.random.PCG64(seed))

    def reset(self, env):
        self._rng = np.random.Generator(np.random.PCG64(self.seed))

    def act(self, env, step):
        m = env.num_envs * env.n_agents
        return self._rng.uniform(-1.0, 1.0, size=(m, env.action_dim))


class ZeroPolicy(Policy):
    name = "zero"

    def act(self, env, step):
        m = env.num_envs * env.n_agents
        return np.zeros((m, env.action_dim))


class StraightRunner(Policy):
    """Full-speed forward run along the agent's spawn heading."""

    name = "straight_runner"

    def act(self, env, step):
        m = env.num_envs * env.n_agents
        a = np.zeros((m, env.action_dim))
        triple = _slices(env)
        a[:, triple(LOCO_JOINT)] = (1.0, 0.0, 0.0)
        return a


class RunAndJump(Policy):
    """Run forward and fire the jump channel just before a trigger plane."""

    name = "run_and_jump"

    def __init__(self, trigger_x: float = 18.5, tuck: float = 0.6):
        self.trigger_x = trigger_x
        self.tuck = tuck

    def act(self, env, step):
        m = env.num_envs * env.n_agents
        a = np.zeros((m, env.action_dim))
        triple = _slices(env)
        a[:, triple(LOCO_JOINT)] = (1.0, 0.0, 0.0)
        along = env.proxy.root_pos[:, 0] * np.cos(env.proxy.root_yaw) \
            + env.proxy.root_pos[:, 1] * np.sin(env.proxy.root_yaw)
        near = along > self.trigger_x
        aux = triple(AUX_JOINT)
        a[near, aux.start] = 1.0
        airborne = ~env.proxy.grounded
        for foot in ("L_Ankle", "R_Ankle"):
            sl = triple(foot)
            a[airborne, sl.start + 2] = self.tuck  # tuck feet upward mid-flight
        return a


class BallChaser(Policy):
    """Steer toward the ball and run through it toward +x."""

    name = "ball_chaser"

    def act(self, env, step):
        m = env.num_envs * env.n_agents
        a = np.zeros((m, env.action_dim))
        triple = _slices(env)
        ball = np.repeat(env.ball_pos, env.n_agents, axis=0)
        to_ball = ball[:, :2] - env.proxy.root_pos[:, :2]
        desired = np.arctan2(to_ball[:, 1], to_ball[:, 0])
        err = wrap_angle(desired - env.proxy.root_yaw)
        loco = triple(LOCO_JOINT)
        a[:, loco.start] = 1.0
        a[:, loco.start + 2] = np.clip(err, -1.0, 1.0)
        return a


class FixedSwing(Policy):
    """Periodic right-wrist swing; drives implement-contact code paths."""

    name = "fixed_swing"

    def __init__(self, period: int = 30, amplitude: float = 0.9):
        self.period = period
        self.amplitude = amplitude

    def act(self, env, step):
        m = env.num_envs * env.n_agents
        a = np.zeros((m, env.action_dim))
        triple = _slices(env)
        phase = 2.0 * np.pi * (step % self.period) / self.period
        sl = triple("R_Wrist")
        a[:, sl.start] = self.amplitude * np.sin(phase)
        a[:, sl.start + 1] = -self.amplitude * np.cos(phase)
        a[:, sl.start + 2] = 0.3 * np.sin(phase)
        return a


class GolfSwing(Policy):
    """Lateral club sweep through the ball's resting height.

    The wrist height is chosen so the club head passes at the ball's level
    on the spawn terrain; the y-sweep carries it through the ball.
    """

    name = "golf_swing"

    def __init__(self, period: int = 24):
        self.period = period

    def act(self, env, step):
        m = env.num_envs * env.n_agents
        a = np.zeros((m, env.action_dim))
        triple = _slices(env)
        phase = 2.0 * np.pi * (step % self.period) / self.period
        sl = triple("R_Wrist")
        a[:, sl.start] = 0.05
        a[:, sl.start + 1] = np.sin(phase)
        a[:, sl.start + 2] = 0.37
        return a


class BallTracker(Policy):
    """Chase the ball with the racket center; hits happen when it arrives."""

    name = "ball_tracker"

    def __init__(self, implement_forward: float = 0.35):
        self.implement_forward = implement_forward

    def act(self, env, step):
        from ..physics import MARKER_DEFAULT
        m = env.num_envs * env.n_agents
        a = np.zeros((m, env.action_dim))
        triple = _slices(env)
        p = env.proxy
        c, s = np.cos(p.root_yaw), np.sin(p.root_yaw)
        ball = np.repeat(env.ball_pos, env.n_agents, axis=0)
        dx = ball[:, 0] - p.root_pos[:, 0]
        dy = ball[:, 1] - p.root_pos[:, 1]
        local_x = c * dx + s * dy - self.implement_forward
        local_y = -s * dx + c * dy
        local_z = ball[:, 2] - p.root_pos[:, 2]
        sl = triple("R_Wrist")
        a[:, sl.start] = np.clip(local_x - MARKER_DEFAULT[1, 0], -1.0, 1.0)
        a[:, sl.start + 1] = np.clip(local_y - MARKER_DEFAULT[1, 1], -1.0, 1.0)
        a[:, sl.start + 2] = np.clip(local_z - MARKER_DEFAULT[1, 2], -1.0, 1.0)
        return a


class Returner(Policy):
    """Strafe to the predicted bounce point and camp the racket there.

    Uses the engine's own landing predictor at the bounce plane (surface
    plus ball radius). Reliably produces racket contact; returns still land
    where the reflection takes them, so hit counts stay incidental.
    """

    name = "returner"

    def __init__(self, strike_dz: float = 0.15):
        self.strike_dz = strike_dz

    def act(self, env, step):
        from .. import ballistics
        from ..physics import MARKER_DEFAULT
        c_ = env.cfg.consts
        fwd = c_.get("racket_offset", c_.get("paddle_offset", 0.35))
        plane = c_.get("table_height", 0.0) + c_["ball_radius"]
        m = env.num_envs * env.n_agents
        a = np.zeros((m, env.action_dim))
        triple = _slices(env)
        p = env.proxy
        land, valid = ballistics.land_height_xy(env.ball_pos, env.ball_vel, plane)
        land = np.where(valid[:, None], land, env.ball_pos[:, :2])
        c, s = np.cos(p.root_yaw), np.sin(p.root_yaw)
        dx = land[:, 0] - p.root_pos[:, 0]
        dy = land[:, 1] - p.root_pos[:, 1]
        lx = c * dx + s * dy
        ly = -s * dx + c * dy
        loco = triple(LOCO_JOINT)
        a[:, loco.start] = np.clip(1.2 * (lx - fwd), -1.0, 1.0)
        a[:, loco.start + 1] = np.clip(1.2 * ly, -1.0, 1.0)
        sl = triple("R_Wrist")
        a[:, sl.start] = np.clip(lx - fwd - MARKER_DEFAULT[1, 0], -1.0, 1.0)
        a[:, sl.start + 1] = np.clip(ly - MARKER_DEFAULT[1, 1], -1.0, 1.0)
        a[:, sl.start + 2] = np.clip(plane + self.strike_dz - p.root_pos[:, 2]
                                     - MARKER_DEFAULT[1, 2], -1.0, 1.0)
        return a


class Thrower(Policy):
    """Hold the implement, swing forward, and release after the hold stage."""

    name = "thrower"

    def __init__(self, release_step: int = 36):
        self.release_step = release_step

    def act(self, env, step):
        m = env.num_envs * env.n_agents
        a = np.zeros((m, env.action_dim))
        triple = _slices(env)
        aux = triple(AUX_JOINT)
        steps = env.elapsed_steps
        per_agent = np.repeat(steps, env.n_agents)
        wind_up = (per_agent >= self.release_step - 8) & (per_agent < self.release_step)
        released = per_agent >= self.release_step
        a[:, aux.start + 2] = np.where(released, -1.0, 1.0)
        sl = triple("R_Wrist")
        a[wind_up, sl.start] = 1.0
        a[wind_up, sl.start + 2] = 0.8
        return a


class Lunger(Policy):
    """Close on the opponent with the striking arm extended."""

    name = "lunger"

    def act(self, env, step):
        m = env.num_envs * env.n_agents
        a = np.zeros((m, env.action_dim))
        triple = _slices(env)
        opp = env.proxy.root_pos[env._opp]
        to_opp = opp[:, :2] - env.proxy.root_pos[:, :2]
        desired = np.arctan2(to_opp[:, 1], to_opp[:, 0])
        err = wrap_angle(desired - env.proxy.root_yaw)
        loco = triple(LOCO_JOINT)
        a[:, loco.start] = 0.8
        a[:, loco.start + 2] = np.clip(err, -1.0, 1.0)
        sl = triple("R_Wrist")
        a[:, sl.start] = 1.0
        a[:, sl.start + 1] = 0.35  # bring the arm across to the centerline
        return a


class BridgePolicy(Policy):
    """Policy served by an external process over the bridge frame format.

    The runner sends an obs frame [observations (rows, obs_dim)] and the
    policy server answers with a step frame [actions (rows, action_dim)].
    Connection establishment retries 3 times with exponential backoff
    before aborting.
    """

    name = "bridge"
    RETRIES = 3
    BACKOFF_S = 0.25

    def __init__(self, endpoint: str):
        self.endpoint = endpoint
        host, _, port = endpoint.rpartition(":")
        self.host = host or "127.0.0.1"
        try:
            self.port = int(port)
        except ValueError as exc:
            raise ConfigError(f"bad bridge policy endpoint {endpoint!r}") from exc
        self.sock = None

    def reset(self, env):
        import socket
        import time as _time
        from ..errors import ProtocolError
        last = None
        for attempt in range(self.RETRIES):
            try:
                self.sock = socket.create_connection((self.host, self.port),
                                                     timeout=10.0)
                self.sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
                return
            except OSError as exc:
                last = exc
                _time.sleep(self.BACKOFF_S * (2 ** attempt))
        raise ProtocolError(
            f"policy endpoint {self.endpoint} unreachable after "
            f"{self.RETRIES} attempts: {last}")

    def act(self, env, step):
        from ..bridge import KIND_OBS, KIND_STEP, read_frame, send_frame
        from ..errors import ProtocolError
        m = env.num_envs * env.n_agents
        obs = env.obs.reshape(m, env.obs_dim)
        send_frame(self.sock, KIND_OBS, env.num_envs, (obs,))
        _, kind, _, arrays = read_frame(self.sock)
        if kind != KIND_STEP or len(arrays) != 1 \
                or arrays[0].shape != (m, env.action_dim):
            raise ProtocolError("policy server sent a malformed step frame")
        return arrays[0].astype(np.float64)


POLICIES = {
    "random": RandomPolicy,
    "zero": ZeroPolicy,
    "straight_runner": StraightRunner,
    "run_and_jump": RunAndJump,
    "ball_chaser": BallChaser,
    "fixed_swing": FixedSwing,
    "golf_swing": GolfSwing,
    "ball_tracker": BallTracker,
    "returner": Returner,
    "thrower": Thrower,
    "lunger": Lunger,
}

DEFAULT_POLICY = {
    "high_jump": "run_and_jump",
    "long_jump": "run_and_jump",
    "hurdling": "straight_runner",
    "golf": "golf_swing",
    "javelin": "thrower",
    "tennis": "returner",
    "table_tennis": "returner",
    "fencing": "lunger",
    "boxing": "lunger",
    "penalty_kick": "ball_chaser",
    "soccer_match": "ball_chaser",
    "free_throw": "thrower",
    "basketball_match": "ball_chaser",
}


def make_policy(name: str, seed: int = 0) -> Policy:
    if name.startswith("bridge://"):
        return BridgePolicy(name[len("bridge://"):])
    if name not in POLICIES:
        raise ConfigError(f"unknown policy {name!r}; known: {sorted(POLICIES)} "
                          "or bridge://host:port")
    cls = POLICIES[name]
    return cls(seed) if cls is RandomPolicy else cls()
