"""Alternating-freeze self-play: one slot trains while the other is frozen.

The scheduler is a pure function of (config, global step); walking it
forward swaps the trainable slot each phase and snapshots the newly frozen
policy into a FIFO ring.
"""
from sportsim.selfplay import (SelfPlaySchedule, advance, opponent_for,
                               set_slot, snapshot_manifest)

sched = SelfPlaySchedule(phase_length=100_000, capacity=4, sampling="uniform")
sched = set_slot(sched, "A", {"tag": "A-init"})
sched = set_slot(sched, "B", {"tag": "B-init"})

print("step        trainable  frozen  snapshots")
for step in range(0, 800_001, 100_000):
    sched = advance(sched, step)
    sched = set_slot(sched, sched.active_slot,
                     {"tag": f"{sched.active_slot}-phase{sched.phase_index}"})
    ids = [s.snapshot_id for s in sched.snapshots]
    print(f"{step:>9,d}   {sched.active_slot}          {sched.frozen_slot}       {ids}")

print("\nopponent sampled for three seeds (uniform over the ring):")
for seed in (1, 2, 3):
    print(f"  seed {seed}: {opponent_for(sched, seed)}")

print("\nsnapshot manifest:")
print(snapshot_manifest(sched))
