"""Tennis and table tennis ball-return environments.

A launcher serves balls at the agent; each successful return (landing in
the opponent half of the court or table) increments the rally hit count,
re-arms the racket-contact gate, and relaunches the ball back, so episodes
measure sustained rallies. Losing the point ends the episode.
"""
from __future__ import annotations

import numpy as np

from .. import rewards
from ..ballistics import solve_launch_velocity
from ..physics import (DT_SIM, NetPlane, StaticGeometry, TableTop,
                       effector_hit, implement_from_markers, sphere_substep)
from .base import BatchEnv, EpisodeSummary, TerminationReason
from .track import _combined_fall


def _lost_point(snap, cfg):
    return snap.lost


class RacketEnvBase(BatchEnv):
    GOAL_DIM = 12
    RULES = (
        (TerminationReason.FALL, _combined_fall),
        (TerminationReason.LOST_POINT, _lost_point),
    )
    IMPLEMENT = ""
    LAND_PLANE = 0.0

    def _alloc(self):
        n = self.num_envs
        self.ball_pos = np.zeros((n, 3))
        self.ball_vel = np.zeros((n, 3))
        self.target = np.zeros((n, 3))        # return target, opponent half
        self.racket_pos = np.zeros((n, 3))
        self.returned = np.zeros(n, dtype=bool)   # C_rb for the current exchange
        self.lost = np.zeros(n, dtype=bool)
        self.agent_bounces = np.zeros(n, dtype=np.int64)
        self.error_sum = np.zeros(n)
        self.error_count = np.zeros(n, dtype=np.int64)
        self._markers = np.zeros((n, 5, 3))
        self._marker_vels = np.zeros((n, 5, 3))
        self._racket_vel = np.zeros((n, 3))
        self._prev_racket = np.zeros((n, 3))
        self._bounce_force = np.zeros(n)
        self._table_hit = np.zeros(n, dtype=bool)
        self._fault_scratch = np.zeros(n, dtype=bool)
        self._rngs: list = [None] * n
        self.r_ball = self.cfg.const("ball_radius")
        self.snap.lost = self.lost
        self.geometry = self._build_geometry()

    def _build_geometry(self) -> StaticGeometry:
        raise NotImplementedError

    def _sample_incoming(self, env, rng):
        """(launch position, landing point on the agent half) for a serve."""
        raise NotImplementedError

    def _sample_target(self, env, rng):
        """Return target on the opponent half."""
        raise NotImplementedError

    def _launch(self, env, rng, from_pos=None):
        launch, land = self._sample_incoming(env, rng)
        if from_pos is not None:
            launch = np.array([from_pos[0], from_pos[1], launch[2]])
        speed = rng.uniform(self.cfg.const("launch_speed_low"),
                            self.cfg.const("launch_speed_high"))
        self.ball_pos[env] = launch
        self.ball_vel[env] = solve_launch_velocity(launch, land, speed)
        self.target[env] = self._sample_target(env, rng)
        self.returned[env] = False
        self.agent_bounces[env] = 0

    def _spawn_one(self, env, rng):
        self._rngs[env] = rng
        self.lost[env] = False
        self.error_sum[env] = 0.0
        self.error_count[env] = 0
        self.serving_side[env] = 1  # launcher serves
        self._launch(env, rng)
        row = env * self.n_agents
        mw = self.proxy.marker_world()[row]
        yaw = self.proxy.root_yaw[row]
        self._prev_racket[env] = implement_from_markers(
            mw[None], np.cos(yaw), np.sin(yaw), self.IMPLEMENT)[0]

    def _substep_objects(self):
        self.proxy.marker_world(out=self._markers)
        c, s = np.cos(self.proxy.root_yaw), np.sin(self.proxy.root_yaw)
        implement_from_markers(self._markers, c, s, self.IMPLEMENT, out=self.racket_pos)
        np.subtract(self.racket_pos, self._prev_racket, out=self._racket_vel)
        self._racket_vel /= DT_SIM
        np.copyto(self._prev_racket, self.racket_pos)

        armed = ~self.returned & ~self.lost
        if np.any(armed):
            pos = self.ball_pos.copy()
            vel = self.ball_vel.copy()
            hit, _ = effector_hit(pos, vel, self.racket_pos, self._racket_vel,
                                  self.r_ball + self._racket_reach(), 0.8)
            hit &= armed
            self.ball_pos[hit] = pos[hit]
            self.ball_vel[hit] = vel[hit]
            self.returned |= hit

        self._bounce_force[:] = 0.0
        self._table_hit[:] = False
        self._fault_scratch[:] = False
        sphere_substep(self.ball_pos, self.ball_vel, self.r_ball,
                       self.cfg.const("restitution"), self.cfg.const("friction"),
                       DT_SIM, self.geometry, contact_force=self._bounce_force,
                       table_hit=self._table_hit, fault_out=self._fault_scratch)
        self.faulted |= self._fault_scratch
        self._process_bounces()

    def _racket_reach(self) -> float:
        raise NotImplementedError

    def _process_bounces(self):
        raise NotImplementedError

    def _rally_success(self, envs):
        for env in envs:
            err = float(np.linalg.norm(self.ball_pos[env, :2] - self.target[env, :2]))
            self.error_sum[env] += err
            self.error_count[env] += 1
            self.n_hit[env] += 1
            rng = self._rngs[env]
            self._launch(env, rng, from_pos=self.ball_pos[env])

    def _compute_rewards(self):
        bd = rewards.reward_racket_sport(self.racket_pos, self.ball_pos,
                                         self.ball_vel, self.target,
                                         self.returned, self.n_hit, self.SPORT)
        self.rewards[:, 0] = bd.total
        self.reward_terms.update(bd.terms)

    def _write_goal_obs(self):
        g = self._goalv
        self.to_local_points(self.ball_pos, out=g[:, 0:3])
        self.to_local_vectors(self.ball_vel, out=g[:, 3:6])
        self.to_local_points(self.racket_pos, out=g[:, 6:9])
        self.to_local_points(self.target, out=g[:, 9:12])

    def _summarize(self, env):
        hits = int(self.n_hit[env])
        err = (float(self.error_sum[env] / self.error_count[env])
               if self.error_count[env] > 0 else None)
        return EpisodeSummary(
            sport=self.SPORT, env_index=self.first_index + env,
            episode_index=int(self.episode_index[env]),
            steps=int(self.elapsed_steps[env]),
            reason=TerminationReason(int(self.reason[env])),
            success=hits >= 1, hits=hits, error_distance=err,
            scores=(int(self.scores[env, 0]), int(self.scores[env, 1])))


class TennisEnv(RacketEnvBase):
    SPORT = "tennis"
    IMPLEMENT = "tennis_racket"

    def _build_geometry(self):
        c = self.cfg
        return StaticGeometry(nets=(NetPlane(0.0, c.const("court_width") / 2 + 2.0,
                                             c.const("net_height")),))

    def _racket_reach(self):
        return self.cfg.const("racket_radius")

    def _spawn_agents(self, env, rng):
        baseline = -self.cfg.const("court_length") / 2.0
        self.set_agent(env, 0, (baseline, 0.0), 0.0)

    def _sample_incoming(self, env, rng):
        c = self.cfg
        half_l = c.const("court_length") / 2.0
        half_w = c.const("court_width") / 2.0
        launch = np.array([half_l - 1.0, rng.uniform(-half_w + 1, half_w - 1),
                           c.const("launch_height")])
        land = np.array([rng.uniform(-half_l + 1.0, -2.0),
                         rng.uniform(-half_w + 0.5, half_w - 0.5), 0.0])
        return launch, land

    def _sample_target(self, env, rng):
        c = self.cfg
        half_l = c.const("court_length") / 2.0
        half_w = c.const("court_width") / 2.0
        return np.array([rng.uniform(2.0, half_l - 1.0),
                         rng.uniform(-half_w + 0.5, half_w - 0.5), 0.0])

    def _process_bounces(self):
        c = self.cfg
        half_l = c.const("court_length") / 2.0
        half_w = c.const("court_width") / 2.0
        bounced = (self._bounce_force > 0.0) & ~self.lost
        if not np.any(bounced):
            return
        x, y = self.ball_pos[:, 0], self.ball_pos[:, 1]
        in_court = (np.abs(x) <= half_l) & (np.abs(y) <= half_w)
        # incoming ball bouncing on the agent side
        incoming = bounced & ~self.returned
        self.agent_bounces[incoming & (x < 0)] += 1
        self.lost |= incoming & ((self.agent_bounces >= 2) | (x >= 0) | ~in_court)
        # returned ball landing
        landing = bounced & self.returned
        good = landing & (x > 0) & in_court
        self.lost |= landing & ~good
        if np.any(good):
            self._rally_success(np.flatnonzero(good))


class TableTennisEnv(RacketEnvBase):
    SPORT = "table_tennis"
    IMPLEMENT = "table_tennis_paddle"
    LAND_PLANE = 0.76

    def _build_geometry(self):
        c = self.cfg
        table = TableTop((0.0, 0.0),
                         (c.const("table_length") / 2.0, c.const("table_width") / 2.0),
                         c.const("table_height"))
        net = NetPlane(0.0, c.const("table_width") / 2.0 + 0.1,
                       c.const("table_height") + c.const("net_height"))
        return StaticGeometry(tables=(table,), nets=(net,))

    def _racket_reach(self):
        return self.cfg.const("paddle_radius")

    def _spawn_agents(self, env, rng):
        self.set_agent(env, 0, (self.cfg.const("agent_x"), 0.0), 0.0)

    def _sample_incoming(self, env, rng):
        c = self.cfg
        half_l = c.const("table_length") / 2.0
        half_w = c.const("table_width") / 2.0
        launch = np.array([half_l - 0.2, rng.uniform(-half_w + 0.2, half_w - 0.2),
                           c.const("launch_height")])
        land = np.array([rng.uniform(-half_l + 0.15, -0.2),
                         rng.uniform(-half_w + 0.1, half_w - 0.1),
                         c.const("table_height")])
        return launch, land

    def _sample_target(self, env, rng):
        c = self.cfg
        half_l = c.const("table_length") / 2.0
        half_w = c.const("table_width") / 2.0
        return np.array([rng.uniform(0.2, half_l - 0.15),
                         rng.uniform(-half_w + 0.1, half_w - 0.1),
                         c.const("table_height")])

    def _process_bounces(self):
        bounced = (self._bounce_force > 0.0) & ~self.lost
        if not np.any(bounced):
            return
        floor = bounced & ~self._table_hit
        self.lost |= floor
        table = bounced & self._table_hit
        x = self.ball_pos[:, 0]
        self.agent_bounces[table & ~self.returned & (x < 0)] += 1
        self.lost |= table & ~self.returned & (self.agent_bounces >= 3)
        good = table & self.returned & (x > 0)
        self.lost |= table & self.returned & (x <= 0)
        if np.any(good):
            self._rally_success(np.flatnonzero(good))
