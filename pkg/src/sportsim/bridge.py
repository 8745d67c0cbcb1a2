"""Local wire protocol exposing batched step/reset to external trainers.

Frame layout (all little-endian), carried over a stream transport with a
u32 length prefix per frame:

    magic   4 bytes  b"SBRG"
    version u16
    kind    u8       0=reset  1=step  2=obs  3=close
    batch   u32      number of environments N
    payload u32 array count, then per array: u8 ndim, u32 dims[ndim],
            contiguous f32 data

The protocol needs no serialization library, so any language can implement
it. A reset frame doubles as the handshake: the server validates the
client's version and answers with an obs frame whose first array is the
environment spec [sport_code, num_envs, n_agents, obs_dim, action_dim] and
whose second is the initial observations (N * n_agents, obs_dim). A step
frame carries one actions array (N * n_agents, action_dim) and is answered
with [obs, rewards, dones]. An obs frame with zero arrays signals a
protocol error; the session survives and the next well-formed request is
served. Multi-agent sports expose one row per agent, in env-major order.
"""
from __future__ import annotations

import os
import socket
import struct

import numpy as np

from .envs import SPORTS, make_env
from .errors import ProtocolError

MAGIC = b"SBRG"
PROTOCOL_VERSION = 1
KIND_RESET, KIND_STEP, KIND_OBS, KIND_CLOSE = 0, 1, 2, 3
MAX_FRAME_BYTES = 1 << 30
SOCKET_BUFFER = 1 << 22


def _grow_buffers(sock: socket.socket) -> None:
    for opt in (socket.SO_SNDBUF, socket.SO_RCVBUF):
        try:
            sock.setsockopt(socket.SOL_SOCKET, opt, SOCKET_BUFFER)
        except OSError:
            pass

SPORT_CODES = {name: i for i, name in enumerate(SPORTS)}


def _frame_parts(kind: int, batch_n: int, arrays, version: int):
    """Length prefix + header + per-array (meta, raw data) buffer list."""
    parts = [b"", MAGIC + struct.pack("<HBI", version, kind, batch_n)
             + struct.pack("<I", len(arrays))]
    total = len(parts[1])
    for arr in arrays:
        arr = np.ascontiguousarray(arr, dtype="<f4")
        meta = struct.pack("<B", arr.ndim) \
            + (struct.pack(f"<{arr.ndim}I", *arr.shape) if arr.ndim else b"")
        parts.append(meta)
        parts.append(memoryview(arr).cast("B"))
        total += len(meta) + arr.nbytes
    parts[0] = struct.pack("<I", total)
    return parts, total + 4


def encode_frame(kind: int, batch_n: int, arrays=(), version: int = PROTOCOL_VERSION) -> bytes:
    parts, _ = _frame_parts(kind, batch_n, arrays, version)
    return b"".join(parts)


def send_frame(sock: socket.socket, kind: int, batch_n: int, arrays=(),
               version: int = PROTOCOL_VERSION) -> None:
    """Scatter-gather frame send without intermediate joins.

    sendmsg returns short for frames larger than the socket buffer, so the
    remainder is resent by skipping whole consumed parts and slicing the
    partially consumed one (views only, no copies).
    """
    parts, total = _frame_parts(kind, batch_n, arrays, version)
    sent = sock.sendmsg(parts)
    while sent < total:
        skipped = 0
        rest = []
        for part in parts:
            size = len(part) if isinstance(part, bytes) else part.nbytes
            if skipped + size <= sent:
                skipped += size
                continue
            offset = sent - skipped
            view = memoryview(part)
            rest.append(view[offset:] if offset else view)
            skipped += size
        parts = rest
        total -= sent
        sent = sock.sendmsg(parts)


def decode_frame(frame):
    """-> (version, kind, batch_n, [arrays]); raises ProtocolError on junk.

    Accepts bytes/bytearray/memoryview; returned arrays are zero-copy views
    into the given buffer.
    """
    frame = memoryview(frame)
    if len(frame) < 11 or bytes(frame[:4]) != MAGIC:
        raise ProtocolError("bad magic")
    version, kind, batch_n = struct.unpack_from("<HBI", frame, 4)
    n_arrays, = struct.unpack_from("<I", frame, 11)
    offset = 15
    arrays = []
    for _ in range(n_arrays):
        if offset + 1 > len(frame):
            raise ProtocolError("truncated array header")
        ndim = frame[offset]
        offset += 1
        dims = struct.unpack_from(f"<{ndim}I", frame, offset)
        offset += 4 * ndim
        count = int(np.prod(dims)) if ndim else 1
        end = offset + 4 * count
        if end > len(frame):
            raise ProtocolError("array payload does not match declared shape")
        arrays.append(np.frombuffer(frame, dtype="<f4", count=count,
                                    offset=offset).reshape(dims))
        offset = end
    if offset != len(frame):
        raise ProtocolError("trailing bytes after declared arrays")
    return version, kind, batch_n, arrays


class RxBuffer:
    """Reusable receive buffer; decoded arrays view it until the next read."""

    def __init__(self):
        self._buf = bytearray(1 << 16)

    def fill(self, sock: socket.socket, count: int) -> memoryview:
        if len(self._buf) < count:
            self._buf = bytearray(max(count, 2 * len(self._buf)))
        view = memoryview(self._buf)
        got = 0
        while got < count:
            n = sock.recv_into(view[got:count], count - got)
            if n == 0:
                raise ConnectionError("peer closed")
            got += n
        return view[:count]


def _recv_exact(sock: socket.socket, count: int) -> bytearray:
    buf = bytearray(count)
    view = memoryview(buf)
    got = 0
    while got < count:
        n = sock.recv_into(view[got:], count - got)
        if n == 0:
            raise ConnectionError("peer closed")
        got += n
    return buf


def read_frame(sock: socket.socket, rx: RxBuffer | None = None):
    """Read one length-prefixed frame.

    With an RxBuffer the frame is decoded zero-copy into the reused buffer,
    so the returned arrays are only valid until the next read on it.
    """
    if rx is None:
        length, = struct.unpack("<I", _recv_exact(sock, 4))
        if length > MAX_FRAME_BYTES:
            raise ProtocolError(f"frame too large: {length}")
        return decode_frame(_recv_exact(sock, length))
    length, = struct.unpack("<I", rx.fill(sock, 4))
    if length > MAX_FRAME_BYTES:
        raise ProtocolError(f"frame too large: {length}")
    return decode_frame(rx.fill(sock, length))


# ---------------------------------------------------------------------------
# server


def serve(sport: str, batch_size: int, seed: int = 0, host: str = "127.0.0.1",
          port: int = 7864, max_sessions: int | None = None,
          ready_callback=None, time_limit: float | None = None,
          unix_path: str | None = None) -> None:
    """Serve one environment batch; requests are strictly serialized.

    Each accepted connection is a session over the same persistent batch;
    the batch resets whenever a session sends a reset frame. With
    ``unix_path`` the transport is a Unix domain socket instead of TCP
    loopback (same frames, lower copy overhead).
    """
    overrides = {} if time_limit is None else {"time_limit": time_limit}
    env = make_env(sport, num_envs=batch_size, seed=seed, **overrides)
    rows = env.num_envs * env.n_agents
    spec_arr = np.array([SPORT_CODES[sport], env.num_envs, env.n_agents,
                         env.obs_dim, env.action_dim], dtype="<f4")
    dones_f = np.zeros(rows, dtype="<f4")

    if unix_path is not None:
        if os.path.exists(unix_path):
            os.unlink(unix_path)
        server = socket.socket(socket.AF_UNIX, socket.SOCK_STREAM)
        server.bind(unix_path)
    else:
        server = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        server.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        server.bind((host, port))
    with server:
        server.listen(1)
        if unix_path is not None:
            print(f"LISTENING unix:{unix_path}", flush=True)
            if ready_callback:
                ready_callback(unix_path)
        else:
            actual_port = server.getsockname()[1]
            print(f"LISTENING {host}:{actual_port}", flush=True)
            if ready_callback:
                ready_callback(actual_port)
        sessions = 0
        while max_sessions is None or sessions < max_sessions:
            conn, _ = server.accept()
            sessions += 1
            if unix_path is None:
                conn.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
            _grow_buffers(conn)
            with conn:
                try:
                    _serve_session(conn, env, spec_arr, dones_f)
                except (ConnectionError, BrokenPipeError):
                    continue
    if unix_path is not None and os.path.exists(unix_path):
        os.unlink(unix_path)


def _serve_session(conn, env, spec_arr, dones_f) -> None:
    rows = env.num_envs * env.n_agents
    rx = RxBuffer()
    while True:
        try:
            version, kind, batch_n, arrays = read_frame(conn, rx)
        except ProtocolError:
            send_frame(conn, KIND_OBS, env.num_envs, ())
            continue
        if kind == KIND_CLOSE:
            send_frame(conn, KIND_CLOSE, env.num_envs, ())
            return
        if version != PROTOCOL_VERSION:
            # handshake failure: refuse and end the session
            send_frame(conn, KIND_CLOSE, env.num_envs, ())
            return
        if kind == KIND_RESET:
            obs = env.reset()
            send_frame(conn, KIND_OBS, env.num_envs,
                       (spec_arr, obs.reshape(rows, env.obs_dim)))
        elif kind == KIND_STEP:
            ok = (len(arrays) == 1 and batch_n == env.num_envs
                  and arrays[0].shape == (rows, env.action_dim))
            if not ok:
                send_frame(conn, KIND_OBS, env.num_envs, ())
                continue
            res = env.step(arrays[0].astype(np.float64))
            rewards = res.rewards.reshape(rows).astype("<f4")
            dones_f[:] = np.repeat(res.done, env.n_agents)
            send_frame(conn, KIND_OBS, env.num_envs,
                       (res.obs.reshape(rows, env.obs_dim), rewards, dones_f))
        else:
            send_frame(conn, KIND_OBS, env.num_envs, ())


# ---------------------------------------------------------------------------
# reference client


class BridgeClient:
    """Thin synchronous client for the wire protocol."""

    def __init__(self, host: str = "127.0.0.1", port: int = 7864,
                 timeout: float = 30.0, unix_path: str | None = None):
        if unix_path is not None:
            self.sock = socket.socket(socket.AF_UNIX, socket.SOCK_STREAM)
            self.sock.settimeout(timeout)
            self.sock.connect(unix_path)
        else:
            self.sock = socket.create_connection((host, port), timeout=timeout)
            self.sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        _grow_buffers(self.sock)
        self._rx = RxBuffer()
        self.spec: dict | None = None

    def connect(self) -> dict:
        """Reset handshake: negotiates the version, returns the env spec."""
        send_frame(self.sock, KIND_RESET, 0)
        version, kind, batch_n, arrays = read_frame(self.sock, self._rx)
        if kind == KIND_CLOSE:
            raise ProtocolError("server refused the protocol version")
        if kind != KIND_OBS or len(arrays) != 2:
            raise ProtocolError("malformed handshake reply")
        spec_arr, obs = arrays
        sport = SPORTS[int(spec_arr[0])]
        self.spec = {"sport": sport, "num_envs": int(spec_arr[1]),
                     "n_agents": int(spec_arr[2]), "obs_dim": int(spec_arr[3]),
                     "action_dim": int(spec_arr[4]), "initial_obs": obs}
        return self.spec

    def reset(self) -> np.ndarray:
        spec = self.connect()
        return spec["initial_obs"]

    def step_batch(self, actions: np.ndarray):
        """-> (obs (rows, obs_dim), rewards (rows,), dones (rows,))."""
        if self.spec is None:
            raise ProtocolError("call connect() before stepping")
        rows = self.spec["num_envs"] * self.spec["n_agents"]
        actions = np.ascontiguousarray(actions, dtype="<f4")
        if actions.shape != (rows, self.spec["action_dim"]):
            raise ProtocolError(
                f"actions must be ({rows}, {self.spec['action_dim']})")
        send_frame(self.sock, KIND_STEP, self.spec["num_envs"], (actions,))
        _, kind, _, arrays = read_frame(self.sock, self._rx)
        if kind != KIND_OBS or len(arrays) != 3:
            raise ProtocolError("server reported a protocol error")
        return arrays[0], arrays[1], arrays[2]

    def close(self) -> None:
        try:
            send_frame(self.sock, KIND_CLOSE, 0)
            read_frame(self.sock)
        except (OSError, ProtocolError, ConnectionError):
            pass
        self.sock.close()


def random_rollout(host: str, port: int, steps: int = 30, seed: int = 0) -> dict:
    """Reference loop demonstrating the contract with a random policy."""
    client = BridgeClient(host, port)
    spec = client.connect()
    rows = spec["num_envs"] * spec["n_agents"]
    rng = np.random.Generator(np.random.PCG64(seed))
    total = 0.0
    episodes = 0
    for _ in range(steps):
        actions = rng.uniform(-1.0, 1.0, size=(rows, spec["action_dim"])).astype("<f4")
        _, rewards, dones = client.step_batch(actions)
        total += float(np.sum(rewards))
        episodes += int(np.sum(dones[::spec["n_agents"]]))
    client.close()
    return {"steps": steps, "total_reward": total, "episodes": episodes,
            "spec": {k: v for k, v in spec.items() if k != "initial_obs"}}


# ---------------------------------------------------------------------------
# conformance fixture


def conformance_bytes() -> bytes:
    """The published byte-stream fixture every client must parse."""
    reset = encode_frame(KIND_RESET, 0)
    obs = encode_frame(KIND_OBS, 2, (
        np.arange(6, dtype="<f4").reshape(2, 3),
        np.array([7.0, 9.0], dtype="<f4")))
    step = encode_frame(KIND_STEP, 2, (
        np.array([[0.5, -0.5], [1.5, -1.5]], dtype="<f4"),))
    close = encode_frame(KIND_CLOSE, 2)
    return reset + obs + step + close


def parse_stream(blob: bytes):
    """Split a byte stream into decoded frames (for fixture verification)."""
    frames = []
    offset = 0
    while offset < len(blob):
        length, = struct.unpack_from("<I", blob, offset)
        frames.append(decode_frame(blob[offset + 4: offset + 4 + length]))
        offset += 4 + length
    return frames
