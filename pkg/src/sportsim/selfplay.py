"""Alternating-freeze self-play scheduling for the competitive sports.

Two policy slots take turns being trainable: every phase the active slot
swaps and the newly frozen policy is snapshotted into a FIFO ring buffer.
The scheduler owns opaque policy handles only; training itself lives
elsewhere.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from .errors import ConfigError

DEFAULT_PHASE_LENGTH = 2_000_000  # env steps per training phase


@dataclass(frozen=True)
class PolicySnapshot:
    snapshot_id: int
    created_step: int
    content_hash: str
    handle: Any


@dataclass(frozen=True)
class SelfPlaySchedule:
    """Immutable scheduler state; advance() returns the successor state."""

    phase_length: int = DEFAULT_PHASE_LENGTH
    active_slot: str = "A"
    phase_index: int = 0
    capacity: int = 8
    sampling: str = "latest"            # latest | uniform
    snapshots: tuple[PolicySnapshot, ...] = ()
    slots: dict = field(default_factory=lambda: {"A": None, "B": None})

    def __post_init__(self):
        if self.phase_length <= 0:
            raise ConfigError("phase_length must be positive")
        if self.active_slot not in ("A", "B"):
            raise ConfigError("active_slot must be 'A' or 'B'")
        if self.sampling not in ("latest", "uniform"):
            raise ConfigError("sampling must be 'latest' or 'uniform'")
        if self.capacity < 1:
            raise ConfigError("snapshot capacity must be >= 1")

    @property
    def frozen_slot(self) -> str:
        return "B" if self.active_slot == "A" else "A"

    @property
    def trainable_slots(self) -> tuple[str, ...]:
        return (self.active_slot,)


def slot_for_step(schedule: SelfPlaySchedule, global_step: int) -> str:
    """Active slot at a global step, as pure phase-parity arithmetic."""
    if global_step < 0:
        raise ConfigError("global_step must be non-negative")
    return "A" if (global_step // schedule.phase_length) % 2 == 0 else "B"


def _hash_handle(handle) -> str:
    try:
        blob = json.dumps(handle, sort_keys=True, default=repr).encode()
    except TypeError:
        blob = repr(handle).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def advance(schedule: SelfPlaySchedule, global_step: int) -> SelfPlaySchedule:
    """Swap the trainable slot at every phase boundary the step has passed.

    On each swap the policy that just finished training is snapshotted
    (FIFO eviction at capacity).
    """
    target_phase = global_step // schedule.phase_length
    state = schedule
    while state.phase_index < target_phase:
        frozen_handle = state.slots[state.active_slot]
        snap = PolicySnapshot(
            snapshot_id=state.phase_index,
            created_step=(state.phase_index + 1) * state.phase_length,
            content_hash=_hash_handle(frozen_handle),
            handle=frozen_handle)
        snaps = state.snapshots + (snap,)
        if len(snaps) > state.capacity:
            snaps = snaps[len(snaps) - state.capacity:]
        state = replace(state,
                        active_slot="B" if state.active_slot == "A" else "A",
                        phase_index=state.phase_index + 1,
                        snapshots=snaps)
    return state


def opponent_for(schedule: SelfPlaySchedule, seed: int) -> Any:
    """Pick the frozen opponent for a rollout, deterministically in the seed."""
    if schedule.sampling == "latest" or not schedule.snapshots:
        return schedule.slots[schedule.frozen_slot]
    rng = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(entropy=seed, spawn_key=(schedule.phase_index,))))
    pick = int(rng.integers(len(schedule.snapshots)))
    return schedule.snapshots[pick].handle


def set_slot(schedule: SelfPlaySchedule, slot: str, handle) -> SelfPlaySchedule:
    if slot not in ("A", "B"):
        raise ConfigError("slot must be 'A' or 'B'")
    slots = dict(schedule.slots)
    slots[slot] = handle
    return replace(schedule, slots=slots)


def snapshot_manifest(schedule: SelfPlaySchedule) -> str:
    """JSON manifest of the snapshot store (ids, steps, content hashes)."""
    entries = [{"id": s.snapshot_id, "created_step": s.created_step,
                "content_hash": s.content_hash} for s in schedule.snapshots]
    return json.dumps({"phase_length": schedule.phase_length,
                       "capacity": schedule.capacity,
                       "snapshots": entries}, indent=2)
