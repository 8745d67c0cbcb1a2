"""Deterministic replay: log a run, re-execute it, demand bitwise equality.

Also extracts a single environment out of the logged batch and replays it
standalone, showing that results do not depend on how a batch is
partitioned.
"""
import tempfile
from pathlib import Path

import numpy as np

from sportsim.envs import make_env
from sportsim.harness import make_policy, replay
from sportsim.harness.trajlog import TrajectoryWriter

out = Path(tempfile.mkdtemp()) / "penalty_kick.bin"
env = make_env("penalty_kick", num_envs=4, seed=42, time_limit=2.0)
policy = make_policy("random", seed=42)
policy.reset(env)

writer = TrajectoryWriter(out, env, "random")
writer.write_initial(env.reset())
for step in range(90):
    actions = policy.act(env, step).astype(np.float32).astype(np.float64)
    res = env.step(actions)
    writer.write_step(step, actions, res.obs, res.rewards, res.done,
                      res.info["reason"], terms=res.info["terms"],
                      match=(env.scores, env.serving_side, env.n_hit))
writer.close()
print(f"logged 90 steps x 4 envs to {out}")

verdict = replay(out)
print("full-batch replay:", verdict)

for k in range(4):
    single = replay(out, env_index=k)
    print(f"env {k} replayed standalone (batch of one): ok={single['ok']}")
