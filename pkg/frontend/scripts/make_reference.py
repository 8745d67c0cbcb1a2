"""Generate the cross-boundary reference rollout fixture.

Runs the engine in process with a fixed seed and a recorded f32 action
stream, and stores per-step sha256 digests of exactly the bytes the wire
protocol carries (observations, rewards, dones, little-endian f32). The
TypeScript client replays the same actions against a served engine and
must reproduce every digest.

Usage: python scripts/make_reference.py (from the frontend/ directory)
"""
import hashlib
import json
import pathlib

import numpy as np

from sportsim.envs import make_env

SPORT = "penalty_kick"
BATCH = 8
SEED = 99
TIME_LIMIT = 1.0
STEPS = 60


def digest(*parts: bytes) -> str:
    h = hashlib.sha256()
    for p in parts:
        h.update(p)
    return h.hexdigest()


def main():
    env = make_env(SPORT, num_envs=BATCH, seed=SEED, time_limit=TIME_LIMIT)
    rows = env.num_envs * env.n_agents
    rng = np.random.default_rng(12345)
    obs = env.reset()
    steps = []
    actions_out = []
    episodes = 0
    initial_digest = digest(obs.reshape(rows, -1).astype("<f4").tobytes())
    for _ in range(STEPS):
        actions = rng.uniform(-1.0, 1.0,
                              (rows, env.action_dim)).astype("<f4")
        actions_out.append(actions.ravel().tolist())
        res = env.step(actions.astype(np.float64))
        dones_f = np.repeat(res.done, env.n_agents).astype("<f4")
        steps.append(digest(res.obs.reshape(rows, -1).astype("<f4").tobytes(),
                            res.rewards.reshape(rows).astype("<f4").tobytes(),
                            dones_f.tobytes()))
        episodes += int(np.sum(res.done))
    doc = {
        "sport": SPORT,
        "batch": BATCH,
        "seed": SEED,
        "time_limit": TIME_LIMIT,
        "rows": rows,
        "obs_dim": env.obs_dim,
        "action_dim": env.action_dim,
        "n_agents": env.n_agents,
        "episodes": episodes,
        "initial_obs_sha256": initial_digest,
        "step_sha256": steps,
        "actions": actions_out,
    }
    out = pathlib.Path(__file__).resolve().parent.parent / "fixtures" / "reference_rollout.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(doc))
    print(f"wrote {out} ({episodes} episodes over {STEPS} steps)")


if __name__ == "__main__":
    main()
