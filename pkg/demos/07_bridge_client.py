"""The wire bridge: drive a served environment batch from another process.

Starts the engine server in a subprocess (the same thing
``sportsim serve`` does), connects the reference client, and runs a short
random-policy loop over the socket.
"""
import subprocess
import sys

import numpy as np

from sportsim.bridge import BridgeClient

proc = subprocess.Popen(
    [sys.executable, "-m", "sportsim.harness.cli", "serve",
     "--sport", "penalty_kick", "--batch", "8", "--seed", "3",
     "--port", "0", "--max-sessions", "1", "--time-limit", "2"],
    stdout=subprocess.PIPE, text=True)
port = int(proc.stdout.readline().split(":")[-1])
print(f"server is listening on port {port}")

client = BridgeClient(port=port)
spec = client.connect()
print("negotiated environment:", {k: v for k, v in spec.items()
                                  if k != "initial_obs"})

rows = spec["num_envs"] * spec["n_agents"]
rng = np.random.default_rng(0)
episodes = 0
reward_sum = 0.0
for step in range(120):
    actions = rng.uniform(-1, 1, (rows, spec["action_dim"])).astype("<f4")
    obs, rewards, dones = client.step_batch(actions)
    reward_sum += float(rewards.sum())
    episodes += int(dones[::spec["n_agents"]].sum())
print(f"120 bridged steps: {episodes} episodes finished, "
      f"total reward {reward_sum:.2f}")
client.close()
proc.wait(timeout=10)
print("server exited cleanly")
