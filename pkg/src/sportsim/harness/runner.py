"""Benchmark runner: evaluation over N trials, throughput measurement.

Evaluation partitions the batch into worker shards with one metrics
accumulator each, merged at the end; episode order is fixed by
(termination step, env index), so results are identical for any worker
count. Actions are quantized to f32 before stepping so trajectory logs
replay bitwise.
"""
from __future__ import annotations

import json
import os
import time
import tracemalloc
from dataclasses import dataclass, field

import numpy as np

from ..envs import load_config, make_env
from ..errors import ConfigError
from ..metrics import MetricsAccumulator, report_csv, report_text
from .policies import DEFAULT_POLICY, make_policy
from .trajlog import TrajectoryWriter


@dataclass
class RunSpec:
    """One evaluation run: sport, policy, batch, trials, seed, outputs."""

    sport: str
    policy: str = ""                 # empty -> the sport's default scripted policy
    batch_size: int = 64
    trials: int = 1000
    seed: int = 0
    config_path: str | None = None
    config_overrides: dict = field(default_factory=dict)
    out_dir: str | None = None
    log_trajectories: bool = False
    workers: int = 1
    max_steps: int | None = None     # safety valve for pathological policies

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trial count must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch size must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


def _resolve_config(spec: RunSpec):
    path = spec.config_path
    if path and not os.path.isabs(path) and not os.path.exists(path):
        root = os.environ.get("SPORTSIM_CONFIG_ROOT")
        if root:
            candidate = os.path.join(root, path)
            if os.path.exists(candidate):
                path = candidate
    return load_config(spec.sport, overrides_path=path, **spec.config_overrides)


def run_eval(spec: RunSpec) -> dict:
    """Run exactly spec.trials episodes and emit the metric table.

    Returns {"accumulator", "table_text", "table_csv", "paths", "episodes"}.
    """
    cfg = _resolve_config(spec)
    env = make_env(spec.sport, num_envs=spec.batch_size, seed=spec.seed, config=cfg)
    policy_name = spec.policy or DEFAULT_POLICY[spec.sport]
    policy = make_policy(policy_name, seed=spec.seed)
    policy.reset(env)

    writer = None
    paths = {}
    if spec.out_dir:
        os.makedirs(spec.out_dir, exist_ok=True)
    if spec.log_trajectories:
        if not spec.out_dir:
            raise ConfigError("trajectory logging needs an output directory")
        paths["trajectory"] = os.path.join(spec.out_dir, "trajectory.bin")
        writer = TrajectoryWriter(paths["trajectory"], env, policy_name)

    obs = env.reset()
    if writer:
        writer.write_initial(obs)

    shard_bounds = np.linspace(0, spec.batch_size, spec.workers + 1).astype(int)
    shards = [MetricsAccumulator(spec.sport) for _ in range(spec.workers)]
    episodes = []
    step = 0
    hard_cap = spec.max_steps or (cfg.max_steps + 10) * (
        spec.trials // spec.batch_size + 2)
    while len(episodes) < spec.trials and step < hard_cap:
        actions = policy.act(env, step).astype(np.float32).astype(np.float64)
        res = env.step(actions)
        if writer:
            writer.write_step(step, actions, res.obs, res.rewards, res.done,
                              res.info["reason"], terms=res.info["terms"],
                              match=(env.scores, env.serving_side, env.n_hit))
        for summary in sorted(res.info["episodes"], key=lambda s: s.env_index):
            episodes.append(summary)
        step += 1
    if writer:
        writer.close()
    if len(episodes) < spec.trials:
        raise ConfigError(
            f"{spec.sport}: only {len(episodes)} episodes finished in "
            f"{step} steps; raise max_steps")
    episodes = episodes[:spec.trials]
    for summary in episodes:
        shard = np.searchsorted(shard_bounds, summary.env_index % spec.batch_size,
                                side="right") - 1
        shards[shard].record_trial(summary)
    acc = shards[0]
    for other in shards[1:]:
        acc = acc.merge(other)

    table_text = report_text([acc])
    table_csv = report_csv([acc])
    stamp = f"config_hash={cfg.hash()} seed={spec.seed}"
    if spec.out_dir:
        paths["metrics_txt"] = os.path.join(spec.out_dir, "metrics.txt")
        paths["metrics_csv"] = os.path.join(spec.out_dir, "metrics.csv")
        paths["run_json"] = os.path.join(spec.out_dir, "run.json")
        with open(paths["metrics_txt"], "w", encoding="utf-8") as fh:
            fh.write(f"# {stamp}\n" + table_text)
        with open(paths["metrics_csv"], "w", encoding="utf-8") as fh:
            fh.write(f"# {stamp}\n" + table_csv)
        with open(paths["run_json"], "w", encoding="utf-8") as fh:
            json.dump({"sport": spec.sport, "policy": policy_name,
                       "batch_size": spec.batch_size, "trials": spec.trials,
                       "seed": spec.seed, "config_hash": cfg.hash(),
                       "steps_executed": step}, fh, indent=2, sort_keys=True)
    return {"accumulator": acc, "table_text": table_text,
            "table_csv": table_csv, "paths": paths, "episodes": episodes,
            "faults": int(np.sum([e.reason == 15 for e in episodes]))}


def run_bench(sport: str, batch_size: int = 4096, duration_s: float = 5.0,
              seed: int = 0, warmup_steps: int = 20) -> dict:
    """Measure sustained batched env-steps/second with a random policy.

    Reports p50/p99 per-step latency and the net traced allocation growth
    per step after warmup (steady-state leak check).
    """
    env = make_env(sport, num_envs=batch_size, seed=seed)
    policy = make_policy("random", seed=seed)
    policy.reset(env)
    env.reset()
    m = env.num_envs * env.n_agents
    actions = np.zeros((m, env.action_dim))
    for step in range(warmup_steps):
        actions[:] = policy.act(env, step)
        env.step(actions)

    max_samples = 100_000
    latencies = np.zeros(max_samples)
    tracemalloc.start()
    # settle the tracer on steady state (per-step scratch gets re-traced once)
    for step in range(5):
        actions[:] = policy.act(env, warmup_steps + step)
        env.step(actions)
    base_current, _ = tracemalloc.get_traced_memory()
    t_end = time.perf_counter() + duration_s
    steps = 0
    while time.perf_counter() < t_end and steps < max_samples:
        actions[:] = policy.act(env, steps + warmup_steps + 5)
        t0 = time.perf_counter()
        env.step(actions)
        latencies[steps] = time.perf_counter() - t0
        steps += 1
    end_current, _ = tracemalloc.get_traced_memory()
    tracemalloc.stop()

    lat = np.sort(latencies[:steps])
    total_env_steps = steps * batch_size
    elapsed = float(np.sum(lat))
    alloc_growth = (end_current - base_current) / max(steps, 1)
    return {
        "sport": sport,
        "batch_size": batch_size,
        "steps": steps,
        "env_steps_per_s": total_env_steps / elapsed if elapsed > 0 else 0.0,
        "p50_latency_s": float(lat[len(lat) // 2]) if steps else 0.0,
        "p99_latency_s": float(lat[min(len(lat) - 1, int(len(lat) * 0.99))]) if steps else 0.0,
        "alloc_growth_bytes_per_step": float(alloc_growth),
    }
