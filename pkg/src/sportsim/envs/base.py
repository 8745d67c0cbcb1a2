"""Batched environment core: stepping, observations, terminations, resets.

State is kept as structure-of-arrays over the env axis and every update is
elementwise, so results are bitwise independent of batch size, env order,
and worker partitioning. Per-env randomness comes from
``SeedSequence(seed, spawn_key=(env_index, episode_index))`` which makes
spawns reproducible for a single env extracted from any batch.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from types import SimpleNamespace
from typing import Sequence

import numpy as np

from ..core import get_skeleton, rot6d_identity
from ..errors import ConfigError, InvalidActionError
from ..physics import (DT_POLICY, DT_SIM, SUBSTEPS, N_MARKERS, ProxyArrays,
                       default_joint_offsets)
from .config import SportConfig


class TerminationReason(enum.IntEnum):
    NONE = 0
    FALL = 1
    BAR_CONTACT = 2
    BAR_NOT_CLEARED = 3
    OUT_OF_BOUNDS = 4
    OFF_TRACK = 5
    BALL_BACKWARD = 6
    NO_CONTACT_TIMEOUT = 7
    BALL_TOO_CLOSE_TO_BODY = 8
    LOST_POINT = 9
    JAVELIN_DETACHED = 10
    JAVELIN_POSE_DEVIATION = 11
    JAVELIN_NOT_RELEASED = 12
    POINT_SCORED = 13
    TIME_LIMIT = 14
    SIMULATION_FAULT = 15


@dataclass(frozen=True)
class MatchState:
    """Scoring view of one environment."""

    scores: tuple[int, int]
    serving_side: int
    n_hit: int
    point_latched: bool


@dataclass
class EpisodeSummary:
    """Terminal record of one episode, consumed by the metrics accumulator."""

    sport: str
    env_index: int
    episode_index: int
    steps: int
    reason: TerminationReason
    success: bool
    distance: float | None = None
    hits: int | None = None
    error_distance: float | None = None
    event_time: float | None = None
    level: float | None = None
    scores: tuple[int, int] | None = None

    @property
    def time_s(self) -> float:
        return self.steps * DT_POLICY


@dataclass
class StepResult:
    """One batched control step; arrays are views valid until the next step."""

    obs: np.ndarray        # (N, A, obs_dim) float32
    rewards: np.ndarray    # (N, A) float64
    done: np.ndarray       # (N,) bool
    info: dict


def _fall_rule(snap, cfg):
    return np.any(snap.fallen, axis=-1)


def _time_limit_rule(snap, cfg):
    return snap.elapsed_s >= cfg.time_limit


def _fault_rule(snap, cfg):
    return snap.faulted


def evaluate_termination(rules, snap, cfg) -> np.ndarray:
    """Apply ordered (reason, rule) pairs; the first match per env wins.

    The full order is always: simulation fault, the sport's rule list,
    then the time limit.
    """
    full = ((TerminationReason.SIMULATION_FAULT, _fault_rule),) + tuple(rules) + (
        (TerminationReason.TIME_LIMIT, _time_limit_rule),)
    reason = np.zeros(np.shape(snap.elapsed_s), dtype=np.uint8)
    for code, rule in full:
        hit = np.asarray(rule(snap, cfg), dtype=bool) & (reason == 0)
        reason[hit] = int(code)
    return reason


class BatchEnv:
    """Base class for the batched sport environments.

    Subclasses define GOAL_DIM and RULES, and implement the _spawn_one,
    _substep_objects, _post_physics, _compute_rewards, _write_goal_obs,
    and _summarize hooks.
    """

    SPORT: str = ""
    GOAL_DIM: int = 0
    RULES: tuple = ()

    def __init__(self, cfg: SportConfig, num_envs: int, seed: int = 0,
                 first_index: int = 0, auto_reset: bool = True):
        if cfg.sport != self.SPORT:
            raise ConfigError(f"config is for {cfg.sport!r}, env is {self.SPORT!r}")
        if num_envs < 1:
            raise ConfigError("num_envs must be >= 1")
        self.cfg = cfg
        self.num_envs = num_envs
        self.seed = seed
        self.first_index = first_index
        self.auto_reset = auto_reset
        self.skeleton = get_skeleton(cfg.skeleton)
        self.n_agents = cfg.n_agents
        n, a = num_envs, cfg.n_agents
        m = n * a
        self.proxy = ProxyArrays(m, self.skeleton)
        self._offsets = default_joint_offsets(self.skeleton)

        j = self.skeleton.joint_count
        self.proprio_dim = j * 15
        self.obs_dim = self.proprio_dim + self.GOAL_DIM
        self.action_dim = self.skeleton.action_dim

        self.obs = np.zeros((n, a, self.obs_dim), dtype=np.float32)
        self.rewards = np.zeros((n, a))
        self.reward_terms: dict[str, np.ndarray] = {}
        self.reason = np.zeros(n, dtype=np.uint8)
        self.done = np.zeros(n, dtype=bool)
        self.faulted = np.zeros(n, dtype=bool)
        self._summary_emitted = np.zeros(n, dtype=bool)
        self.elapsed_steps = np.zeros(n, dtype=np.int64)
        self.elapsed_s = np.zeros(n)
        self.episode_index = np.zeros(n, dtype=np.int64)
        self.prev_root_pos = np.zeros((m, 3))
        self.root_spawn = np.zeros((m, 3))

        # scoring state (used by the competitive sports; inert elsewhere)
        self.scores = np.zeros((n, 2), dtype=np.int64)
        self.serving_side = np.zeros(n, dtype=np.int64)
        self.n_hit = np.zeros(n, dtype=np.int64)
        self.point_latch = np.zeros(n, dtype=bool)

        self._obs_flat = self.obs.reshape(m, self.obs_dim)
        self._init_proprio_template()
        self.snap = SimpleNamespace(
            fallen=self.proxy.fallen.reshape(n, a),
            root_pos=self.proxy.root_pos.reshape(n, a, 3),
            elapsed_s=self.elapsed_s,
            faulted=self.faulted,
        )
        self._info: dict = {"reason": self.reason, "episodes": [],
                            "terms": self.reward_terms}
        self._scratch_m3 = np.zeros((m, 3))
        self._alloc()

    # ------------------------------------------------------------------ hooks

    def _alloc(self) -> None:
        """Allocate sport-specific buffers and extend self.snap."""

    def _spawn_one(self, env: int, rng: np.random.Generator) -> None:
        """Reset one environment's sport state (proxy rows already placed)."""

    def _spawn_agents(self, env: int, rng: np.random.Generator) -> None:
        """Place the proxy agents for one environment; default at origin."""
        self.set_agent(env, 0, (0.0, 0.0), 0.0)

    def _substep_objects(self) -> None:
        """Advance free objects by one physics substep (dt = DT_SIM)."""

    def _post_physics(self) -> None:
        """Update latches, match events, landings after the two substeps."""

    def _compute_rewards(self) -> None:
        """Fill self.rewards (N, A) and self.reward_terms."""

    def _write_goal_obs(self) -> None:
        """Fill the goal-state slice of the observation buffer."""

    def _summarize(self, env: int) -> EpisodeSummary:
        return EpisodeSummary(
            sport=self.SPORT, env_index=self.first_index + env,
            episode_index=int(self.episode_index[env]),
            steps=int(self.elapsed_steps[env]),
            reason=TerminationReason(int(self.reason[env])),
            success=False)

    # ------------------------------------------------------------- utilities

    def agent_rows(self, env: int) -> slice:
        return slice(env * self.n_agents, (env + 1) * self.n_agents)

    def set_agent(self, env: int, agent: int, pos_xy, yaw: float) -> None:
        row = env * self.n_agents + agent
        self.proxy.reset_rows(np.array([row]), np.asarray(pos_xy, dtype=np.float64),
                              np.asarray(yaw, dtype=np.float64))
        self.root_spawn[row] = self.proxy.root_pos[row]
        self.prev_root_pos[row] = self.proxy.root_pos[row]

    def _rng(self, env: int) -> np.random.Generator:
        ss = np.random.SeedSequence(
            entropy=self.seed,
            spawn_key=(self.first_index + env, int(self.episode_index[env])))
        return np.random.Generator(np.random.PCG64(ss))

    def match_state(self, env: int) -> MatchState:
        return MatchState(scores=(int(self.scores[env, 0]), int(self.scores[env, 1])),
                          serving_side=int(self.serving_side[env]),
                          n_hit=int(self.n_hit[env]),
                          point_latched=bool(self.point_latch[env]))

    # ------------------------------------------------------------- main loop

    def reset(self) -> np.ndarray:
        self.reason[:] = 0
        self.done[:] = False
        self._reset_envs(np.arange(self.num_envs))
        self._write_obs()
        return self.obs

    def _reset_envs(self, idx: np.ndarray) -> None:
        # done/reason are left for the caller: they are step outputs and are
        # recomputed from scratch on every step
        if len(idx) == 0:
            return
        self.elapsed_steps[idx] = 0
        self.elapsed_s[idx] = 0.0
        self.faulted[idx] = False
        self._summary_emitted[idx] = False
        self.scores[idx] = 0
        self.serving_side[idx] = 0
        self.n_hit[idx] = 0
        self.point_latch[idx] = False
        for env in idx:
            env = int(env)
            rng = self._rng(env)
            self._spawn_agents(env, rng)
            self._spawn_one(env, rng)
        rows = (idx[:, None] * self.n_agents + np.arange(self.n_agents)).ravel()
        self.prev_root_pos[rows] = self.proxy.root_pos[rows]

    def step(self, actions: np.ndarray) -> StepResult:
        actions = np.asarray(actions, dtype=np.float64)
        m = self.num_envs * self.n_agents
        if actions.shape == (self.num_envs, self.n_agents, self.action_dim):
            actions = actions.reshape(m, self.action_dim)
        elif actions.shape != (m, self.action_dim):
            raise InvalidActionError(
                f"actions must be ({self.num_envs}, {self.n_agents}, "
                f"{self.action_dim}), got {actions.shape}")
        bad = ~np.isfinite(actions)
        if np.any(bad):
            bad_env = np.any(bad.reshape(self.num_envs, -1), axis=-1)
            self.faulted |= bad_env
            actions = np.where(bad, 0.0, actions)

        np.copyto(self.prev_root_pos, self.proxy.root_pos)
        self._save_prev()
        for _ in range(SUBSTEPS):
            self.proxy.substep(actions, DT_SIM)
            self._substep_objects()
        self.elapsed_steps += 1
        np.multiply(self.elapsed_steps, DT_POLICY, out=self.elapsed_s)

        self._post_physics()
        self._compute_rewards()
        self.rewards[self.faulted] = 0.0
        self.reason[:] = evaluate_termination(self.RULES, self.snap, self.cfg)
        np.not_equal(self.reason, 0, out=self.done)

        episodes = self._info["episodes"]
        episodes.clear()
        if np.any(self.done):
            # summarize each episode once, even when terminal envs keep
            # being stepped without auto-reset
            finished = np.flatnonzero(self.done & ~self._summary_emitted)
            for env in finished:
                episodes.append(self._summarize(int(env)))
            self.episode_index[finished] += 1
            self._summary_emitted |= self.done
            if self.auto_reset:
                self._reset_envs(np.flatnonzero(self.done))
        self._write_obs()
        return StepResult(obs=self.obs, rewards=self.rewards, done=self.done,
                          info=self._info)

    def _save_prev(self) -> None:
        """Snapshot sport-specific prev-state before physics (hook)."""

    # ------------------------------------------------------------ observation

    def _init_proprio_template(self):
        j = self.skeleton.joint_count
        self._rot_slice = slice(0, j * 6)
        self._pos_slice = slice(j * 6, j * 9)
        self._ang_slice = slice(j * 9, j * 12)
        self._lin_slice = slice(j * 12, j * 15)
        # heading-normalized joint rotations are constant for the proxy
        self._obs_flat[:, self._rot_slice] = np.tile(rot6d_identity(), j)
        self._posv = self._obs_flat[:, self._pos_slice].reshape(-1, j, 3)
        self._angv = self._obs_flat[:, self._ang_slice].reshape(-1, j, 3)
        self._linv = self._obs_flat[:, self._lin_slice].reshape(-1, j, 3)
        self._goalv = self._obs_flat[:, self.proprio_dim:]
        self._posv[:, :, 0] = self._offsets[:, 0]
        self._posv[:, :, 1] = self._offsets[:, 1]
        self._angv[:] = 0.0
        self._ee = np.asarray(self.skeleton.end_effectors, dtype=np.int64)
        # children rigidly attached to a marker (hands, toes, fingers)
        child_idx, child_parent, child_off = [], [], []
        marker_children = {
            "L_Hand": (0, (0.08, 0.03, -0.02)), "R_Hand": (1, (0.08, -0.03, -0.02)),
            "L_Toe": (2, (0.12, 0.0, -0.06)), "R_Toe": (3, (0.12, 0.0, -0.06)),
        }
        for i, name in enumerate(self.skeleton.body_names):
            if name in marker_children:
                k, off = marker_children[name]
                child_idx.append(i), child_parent.append(k), child_off.append(off)
            elif name.split("_", 1)[-1][:-1] in ("Index", "Middle", "Pinky", "Ring", "Thumb"):
                side = 0 if name.startswith("L_") else 1
                seg = int(name[-1])
                f = ("Index", "Middle", "Pinky", "Ring", "Thumb").index(name.split("_", 1)[-1][:-1])
                sign = 1.0 if side == 0 else -1.0
                child_idx.append(i), child_parent.append(side)
                child_off.append((0.05 + 0.03 * seg, sign * (0.01 * f - 0.02), -0.02))
        self._child_idx = np.asarray(child_idx, dtype=np.int64)
        self._child_parent = np.asarray(child_parent, dtype=np.int64)
        self._child_off = np.asarray(child_off, dtype=np.float64).reshape(-1, 3)

    def _write_obs(self) -> None:
        p = self.proxy
        root_z = p.root_pos[:, 2]
        self._posv[:, :, 2] = self._offsets[None, :, 2] + root_z[:, None]
        loc = p.marker_loc
        self._posv[:, self._ee, 0] = loc[:, :, 0]
        self._posv[:, self._ee, 1] = loc[:, :, 1]
        self._posv[:, self._ee, 2] = loc[:, :, 2] + root_z[:, None]
        if len(self._child_idx):
            par = loc[:, self._child_parent, :]
            self._posv[:, self._child_idx, 0] = par[:, :, 0] + self._child_off[:, 0]
            self._posv[:, self._child_idx, 1] = par[:, :, 1] + self._child_off[:, 1]
            self._posv[:, self._child_idx, 2] = par[:, :, 2] + self._child_off[:, 2] + root_z[:, None]
        self._angv[:, :, 2] = p.yaw_rate[:, None]
        c, s = np.cos(p.root_yaw), np.sin(p.root_yaw)
        vx = c * p.root_vel[:, 0] + s * p.root_vel[:, 1]
        vy = -s * p.root_vel[:, 0] + c * p.root_vel[:, 1]
        self._linv[:, :, 0] = vx[:, None]
        self._linv[:, :, 1] = vy[:, None]
        self._linv[:, :, 2] = p.root_vel[:, None, 2]
        mv = p.marker_vel
        self._linv[:, self._ee, 0] = vx[:, None] + mv[:, :, 0]
        self._linv[:, self._ee, 1] = vy[:, None] + mv[:, :, 1]
        self._linv[:, self._ee, 2] = p.root_vel[:, 2][:, None] + mv[:, :, 2]
        if len(self._child_idx):
            pv = mv[:, self._child_parent, :]
            self._linv[:, self._child_idx, 0] = vx[:, None] + pv[:, :, 0]
            self._linv[:, self._child_idx, 1] = vy[:, None] + pv[:, :, 1]
            self._linv[:, self._child_idx, 2] = p.root_vel[:, 2][:, None] + pv[:, :, 2]
        self._write_goal_obs()

    # heading-frame helpers for goal observations -----------------------------

    def _yaw_cs(self, rows, extra_axis: bool):
        p = self.proxy
        c, s = np.cos(p.root_yaw), np.sin(p.root_yaw)
        root = p.root_pos
        if rows is not None:
            c, s, root = c[rows], s[rows], root[rows]
        if extra_axis:
            c, s, root = c[:, None], s[:, None], root[:, None, :]
        return c, s, root

    def to_local_points(self, world, rows=None, out=None) -> np.ndarray:
        """World points -> agent heading frame (translate xy, rotate by -yaw).

        ``world`` is (3,), (M, 3), or (M, K, 3); z is preserved (absolute).
        """
        world = np.asarray(world, dtype=np.float64)
        c, s, root = self._yaw_cs(rows, extra_axis=world.ndim >= 3)
        dx = world[..., 0] - root[..., 0]
        dy = world[..., 1] - root[..., 1]
        if out is None:
            out = np.empty(dx.shape + (3,))
        out[..., 0] = c * dx + s * dy
        out[..., 1] = -s * dx + c * dy
        out[..., 2] = world[..., 2]
        return out

    def to_local_vectors(self, world, rows=None, out=None) -> np.ndarray:
        """World vectors -> agent heading frame (rotation only)."""
        world = np.asarray(world, dtype=np.float64)
        c, s, _ = self._yaw_cs(rows, extra_axis=world.ndim >= 3)
        vx = c * world[..., 0] + s * world[..., 1]
        if out is None:
            out = np.empty(vx.shape + (3,))
        out[..., 0] = vx
        out[..., 1] = -s * world[..., 0] + c * world[..., 1]
        out[..., 2] = world[..., 2]
        return out


def batch_of(envs: Sequence[BatchEnv]) -> BatchEnv:
    """Combine homogeneous single-sport envs into one fresh batch.

    Environments must share the sport, config, seed, and form a contiguous
    index range; heterogeneous batches are a configuration error. Live
    state is not transferred: after reset() the batch reproduces, bitwise,
    what the individual envs would produce from their own resets, because
    per-env randomness depends only on (seed, env index, episode index).
    """
    if not envs:
        raise ConfigError("empty batch")
    first = envs[0]
    for e in envs[1:]:
        if e.SPORT != first.SPORT or e.cfg != first.cfg or e.seed != first.seed:
            raise ConfigError("heterogeneous batch: sport/config/seed must match")
    indices = [e.first_index for e in envs]
    sizes = [e.num_envs for e in envs]
    expect = first.first_index
    for idx, size in zip(indices, sizes):
        if idx != expect:
            raise ConfigError("batch env indices must be contiguous")
        expect = idx + size
    return type(first)(first.cfg, sum(sizes), seed=first.seed,
                       first_index=first.first_index)
