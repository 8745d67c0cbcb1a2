"""Benchmark harness: policies, evaluation runner, trajectory replay, CLI."""
from .policies import DEFAULT_POLICY, POLICIES, Policy, RandomPolicy, make_policy
from .runner import RunSpec, run_bench, run_eval
from .trajlog import TrajectoryWriter, read_log, replay

__all__ = [
    "DEFAULT_POLICY", "POLICIES", "Policy", "RandomPolicy", "make_policy",
    "RunSpec", "run_bench", "run_eval",
    "TrajectoryWriter", "read_log", "replay",
]
