"""Batched environments + scripted policies + the metrics table.

Runs the hurdling benchmark with the scripted straight-runner over flat
(zero-height) hurdles, then with the full random-height curriculum, and
prints the evaluation tables side by side.
"""
from sportsim.harness import RunSpec, run_eval

flat = RunSpec(sport="hurdling", policy="straight_runner", batch_size=50,
               trials=100, seed=7,
               config_overrides={"time_limit": 22.0,
                                 "curriculum": {"fixed_level": 0.0}})
result_flat = run_eval(flat)
print("flat hurdles (sanity anchor - the runner always finishes):")
print(result_flat["table_text"])

curriculum = RunSpec(sport="hurdling", policy="straight_runner", batch_size=50,
                     trials=100, seed=7,
                     config_overrides={"time_limit": 22.0})
result_cur = run_eval(curriculum)
print("random hurdle heights in [0, 1.167] m (the flat-footed runner trips "
      "on anything above its step clearance):")
print(result_cur["table_text"])

reasons = {}
for ep in result_cur["episodes"]:
    reasons[ep.reason.name] = reasons.get(ep.reason.name, 0) + 1
print("termination reasons over the curriculum run:", reasons)
