"""Binary trajectory logs with bitwise replay verification.

Format: length-delimited little-endian records, 32-bit floats.

    record  = u32 length, u8 tag, payload
    tag 1   = header, UTF-8 JSON (engine version, sport, config, seed, dims)
    tag 2   = initial observations, f32[num_envs * n_agents * obs_dim]
    tag 3   = step: u32 step index, then f32 actions, f32 observations,
              f32 rewards, u8 done[num_envs], u8 reason[num_envs],
              the reward breakdown (u8 term count, per term: u8 name
              length, name bytes, unweighted f32 values
              [num_envs * n_agents]), and the match state
              (i32 scores[num_envs * 2], u8 serving[num_envs],
              i32 hit_count[num_envs])
    tag 4   = end: sha256 of all preceding bytes

A plain-text sidecar (<path>.schema.txt) documents the layout. Replaying a
log re-executes the engine from the logged seed and actions and demands
bitwise-identical observations, rewards, term values, and match state.
"""
from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass

import numpy as np

from .. import __version__ as ENGINE_VERSION
from ..envs import make_env
from ..errors import ReplayError

TAG_HEADER, TAG_INITIAL, TAG_STEP, TAG_END = 1, 2, 3, 4

SCHEMA_TEXT = __doc__


def _pack_record(tag: int, payload: bytes) -> bytes:
    return struct.pack("<IB", len(payload), tag) + payload


class TrajectoryWriter:
    def __init__(self, path, env, policy_name: str):
        self.path = path
        self._hash = hashlib.sha256()
        self._fh = open(path, "wb")
        header = {
            "engine_version": ENGINE_VERSION,
            "sport": env.SPORT,
            "config": env.cfg.to_dict(),
            "config_hash": env.cfg.hash(),
            "seed": env.seed,
            "first_index": env.first_index,
            "num_envs": env.num_envs,
            "n_agents": env.n_agents,
            "obs_dim": env.obs_dim,
            "action_dim": env.action_dim,
            "skeleton": env.skeleton.name,
            "policy": policy_name,
        }
        self._write(TAG_HEADER, json.dumps(header, sort_keys=True).encode())
        with open(f"{path}.schema.txt", "w", encoding="utf-8") as fh:
            fh.write(SCHEMA_TEXT)

    def _write(self, tag: int, payload: bytes) -> None:
        rec = _pack_record(tag, payload)
        self._hash.update(rec)
        self._fh.write(rec)

    def write_initial(self, obs: np.ndarray) -> None:
        self._write(TAG_INITIAL, obs.astype("<f4").tobytes())

    def write_step(self, step: int, actions, obs, rewards, done, reason,
                   terms=None, match=None) -> None:
        parts = [struct.pack("<I", step),
                 np.asarray(actions).astype("<f4").tobytes(),
                 np.asarray(obs).astype("<f4").tobytes(),
                 np.asarray(rewards).astype("<f4").tobytes(),
                 np.asarray(done).astype(np.uint8).tobytes(),
                 np.asarray(reason).astype(np.uint8).tobytes()]
        terms = terms or {}
        parts.append(struct.pack("<B", len(terms)))
        for name in sorted(terms):
            encoded = name.encode()
            parts.append(struct.pack("<B", len(encoded)))
            parts.append(encoded)
            parts.append(np.asarray(terms[name]).astype("<f4").tobytes())
        if match is None:
            match = (np.zeros((len(np.asarray(done)), 2), dtype=np.int64),
                     np.zeros(len(np.asarray(done)), dtype=np.int64),
                     np.zeros(len(np.asarray(done)), dtype=np.int64))
        scores, serving, n_hit = match
        parts.append(np.asarray(scores).astype("<i4").tobytes())
        parts.append(np.asarray(serving).astype(np.uint8).tobytes())
        parts.append(np.asarray(n_hit).astype("<i4").tobytes())
        self._write(TAG_STEP, b"".join(parts))

    def close(self) -> None:
        self._write(TAG_END, self._hash.digest())
        self._fh.close()


@dataclass
class TrajectoryLog:
    header: dict
    initial_obs: np.ndarray           # (N, A, obs_dim) f32
    actions: list[np.ndarray]         # per step, (N*A, action_dim) f32
    observations: list[np.ndarray]    # per step, (N, A, obs_dim) f32
    rewards: list[np.ndarray]         # per step, (N, A) f32
    done: list[np.ndarray]
    reason: list[np.ndarray]
    terms: list[dict]                 # per step, name -> (N*A,) f32
    match: list[tuple]                # per step, (scores, serving, n_hit)


def read_log(path) -> TrajectoryLog:
    with open(path, "rb") as fh:
        blob = fh.read()
    offset = 0
    running = hashlib.sha256()
    header = None
    initial = None
    actions, observations, rewards, dones, reasons = [], [], [], [], []
    terms_list, match_list = [], []
    saw_end = False
    while offset < len(blob):
        if offset + 5 > len(blob):
            raise ReplayError("truncated record header")
        length, tag = struct.unpack_from("<IB", blob, offset)
        payload = blob[offset + 5: offset + 5 + length]
        if len(payload) != length:
            raise ReplayError("truncated record payload")
        if tag == TAG_END:
            if payload != running.digest():
                raise ReplayError("integrity hash mismatch: log is corrupt")
            saw_end = True
            offset += 5 + length
            continue
        running.update(blob[offset: offset + 5 + length])
        offset += 5 + length
        if tag == TAG_HEADER:
            header = json.loads(payload.decode())
            if header["engine_version"] != ENGINE_VERSION:
                raise ReplayError(
                    f"log from engine {header['engine_version']}, "
                    f"this build is {ENGINE_VERSION}")
        elif tag == TAG_INITIAL:
            n, a, d = header["num_envs"], header["n_agents"], header["obs_dim"]
            initial = np.frombuffer(payload, dtype="<f4").reshape(n, a, d)
        elif tag == TAG_STEP:
            n, a = header["num_envs"], header["n_agents"]
            d, ad = header["obs_dim"], header["action_dim"]
            pos = 4
            fa = np.frombuffer(payload, dtype="<f4", count=n * a * ad, offset=pos)
            pos += 4 * n * a * ad
            fo = np.frombuffer(payload, dtype="<f4", count=n * a * d, offset=pos)
            pos += 4 * n * a * d
            fr = np.frombuffer(payload, dtype="<f4", count=n * a, offset=pos)
            pos += 4 * n * a
            dn = np.frombuffer(payload, dtype=np.uint8, count=n, offset=pos)
            pos += n
            rs = np.frombuffer(payload, dtype=np.uint8, count=n, offset=pos)
            pos += n
            n_terms = payload[pos]
            pos += 1
            step_terms = {}
            for _ in range(n_terms):
                name_len = payload[pos]
                pos += 1
                name = payload[pos:pos + name_len].decode()
                pos += name_len
                step_terms[name] = np.frombuffer(payload, dtype="<f4",
                                                 count=n * a, offset=pos)
                pos += 4 * n * a
            scores = np.frombuffer(payload, dtype="<i4", count=n * 2,
                                   offset=pos).reshape(n, 2)
            pos += 8 * n
            serving = np.frombuffer(payload, dtype=np.uint8, count=n, offset=pos)
            pos += n
            hit_count = np.frombuffer(payload, dtype="<i4", count=n, offset=pos)
            actions.append(fa.reshape(n * a, ad))
            observations.append(fo.reshape(n, a, d))
            rewards.append(fr.reshape(n, a))
            dones.append(dn)
            reasons.append(rs)
            terms_list.append(step_terms)
            match_list.append((scores, serving, hit_count))
        else:
            raise ReplayError(f"unknown record tag {tag}")
    if header is None or initial is None:
        raise ReplayError("log missing header or initial observations")
    if not saw_end:
        raise ReplayError("log missing end record (incomplete write)")
    return TrajectoryLog(header, initial, actions, observations, rewards,
                         dones, reasons, terms_list, match_list)


def replay(path, env_index: int | None = None) -> dict:
    """Re-execute a log and verify observations/rewards bitwise.

    With ``env_index`` set, a single environment is re-run standalone
    (batch of one) and compared against its logged column, demonstrating
    partition independence.
    """
    log = read_log(path)
    h = log.header
    from ..envs import load_config
    cfg_doc = h["config"]
    cfg = load_config(h["sport"],
                      skeleton=cfg_doc["skeleton"], n_agents=cfg_doc["n_agents"],
                      time_limit=cfg_doc["time_limit"],
                      curriculum=cfg_doc["curriculum"],
                      weights=cfg_doc["weights"], consts=cfg_doc["consts"])
    if cfg.hash() != h["config_hash"]:
        raise ReplayError("config hash mismatch after reconstruction")
    if env_index is None:
        env = make_env(h["sport"], num_envs=h["num_envs"], seed=h["seed"],
                       config=cfg, first_index=h["first_index"])
        col = slice(None)
    else:
        env = make_env(h["sport"], num_envs=1, seed=h["seed"], config=cfg,
                       first_index=h["first_index"] + env_index)
        col = slice(env_index, env_index + 1)

    obs = env.reset().astype("<f4")
    mismatches = 0
    if not np.array_equal(obs, log.initial_obs[col]):
        mismatches += 1
    a = env.n_agents
    agent_col = slice(None) if env_index is None else \
        slice(env_index * a, (env_index + 1) * a)
    for t, logged_actions in enumerate(log.actions):
        if env_index is None:
            act = logged_actions
        else:
            act = logged_actions.reshape(h["num_envs"], a, -1)[env_index]
        res = env.step(act.astype(np.float64))
        ok = (np.array_equal(res.obs.astype("<f4"), log.observations[t][col])
              and np.array_equal(res.rewards.astype("<f4"), log.rewards[t][col])
              and np.array_equal(res.done.astype(np.uint8), log.done[t][col])
              and np.array_equal(np.asarray(res.info["reason"], dtype=np.uint8),
                                 log.reason[t][col]))
        logged_terms = log.terms[t]
        if logged_terms and set(logged_terms) != set(env.reward_terms):
            ok = False
        for name, values in logged_terms.items():
            got = np.asarray(env.reward_terms.get(name)).astype("<f4").ravel()
            if not np.array_equal(got, values[agent_col]):
                ok = False
        scores, serving, n_hit = log.match[t]
        if not (np.array_equal(env.scores.astype("<i4"), scores[col])
                and np.array_equal(env.serving_side.astype(np.uint8), serving[col])
                and np.array_equal(env.n_hit.astype("<i4"), n_hit[col])):
            ok = False
        if not ok:
            mismatches += 1
    return {"ok": mismatches == 0, "steps": len(log.actions),
            "mismatches": mismatches, "sport": h["sport"],
            "config_hash": h["config_hash"], "seed": h["seed"]}
