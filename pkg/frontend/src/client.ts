/**
 * Thin synchronous-style client for the sportsim bridge.
 *
 * One session drives one environment batch; requests are strictly
 * serialized (a step is sent only after the previous reply arrived).
 */
import * as net from "node:net";

import {
  Frame,
  FrameKind,
  ProtocolError,
  decodeFrame,
  encodeFrame,
  rawArrayBytes,
} from "./framing.js";

export const SPORTS = [
  "high_jump", "long_jump", "hurdling", "golf", "javelin",
  "tennis", "table_tennis", "fencing", "boxing",
  "penalty_kick", "soccer_match", "free_throw", "basketball_match",
] as const;

export interface EnvSpec {
  sport: string;
  numEnvs: number;
  nAgents: number;
  obsDim: number;
  actionDim: number;
  initialObs: Float32Array;
}

export interface StepResult {
  obs: Float32Array;
  rewards: Float32Array;
  dones: Float32Array;
  /** raw little-endian payload bytes of [obs, rewards, dones] */
  rawBytes: Buffer[];
}

/** Buffers stream data and resolves one length-prefixed frame at a time. */
class FrameReader {
  private pending: Buffer = Buffer.alloc(0);
  private waiter: ((frame: Buffer) => void) | null = null;
  private failure: ((err: Error) => void) | null = null;

  constructor(socket: net.Socket) {
    socket.on("data", (chunk) => this.push(chunk));
    socket.on("error", (err) => this.fail(err));
    socket.on("close", () => this.fail(new Error("socket closed")));
  }

  private push(chunk: Buffer): void {
    this.pending = this.pending.length
      ? Buffer.concat([this.pending, chunk])
      : chunk;
    this.tryResolve();
  }

  private fail(err: Error): void {
    if (this.failure) {
      const f = this.failure;
      this.waiter = null;
      this.failure = null;
      f(err);
    }
  }

  private tryResolve(): void {
    if (!this.waiter || this.pending.length < 4) return;
    const len = this.pending.readUInt32LE(0);
    if (this.pending.length < 4 + len) return;
    const frame = this.pending.subarray(4, 4 + len);
    this.pending = this.pending.subarray(4 + len);
    const w = this.waiter;
    this.waiter = null;
    this.failure = null;
    w(frame);
  }

  nextFrame(): Promise<Buffer> {
    if (this.waiter) {
      return Promise.reject(new ProtocolError("concurrent read on one session"));
    }
    return new Promise((resolve, reject) => {
      this.waiter = resolve;
      this.failure = reject;
      this.tryResolve();
    });
  }
}

export class BridgeClient {
  private socket: net.Socket;
  private reader: FrameReader;
  spec: EnvSpec | null = null;

  private constructor(socket: net.Socket) {
    this.socket = socket;
    socket.setNoDelay(true);
    this.reader = new FrameReader(socket);
  }

  static connectTcp(host: string, port: number): Promise<BridgeClient> {
    return new Promise((resolve, reject) => {
      const socket = net.connect({ host, port }, () => resolve(new BridgeClient(socket)));
      socket.once("error", reject);
    });
  }

  static connectUnix(path: string): Promise<BridgeClient> {
    return new Promise((resolve, reject) => {
      const socket = net.connect({ path }, () => resolve(new BridgeClient(socket)));
      socket.once("error", reject);
    });
  }

  /** Reset handshake: negotiates the version and returns the env spec. */
  async handshake(): Promise<EnvSpec> {
    this.socket.write(encodeFrame(FrameKind.Reset, 0));
    const raw = await this.reader.nextFrame();
    const frame = decodeFrame(raw);
    if (frame.kind === FrameKind.Close) {
      throw new ProtocolError("server refused the protocol version");
    }
    if (frame.kind !== FrameKind.Obs || frame.arrays.length !== 2) {
      throw new ProtocolError("malformed handshake reply");
    }
    const [specArr, obs] = frame.arrays;
    this.spec = {
      sport: SPORTS[specArr.data[0]],
      numEnvs: specArr.data[1],
      nAgents: specArr.data[2],
      obsDim: specArr.data[3],
      actionDim: specArr.data[4],
      initialObs: obs.data,
    };
    return this.spec;
  }

  /** One batched control step; actions are (rows * actionDim) f32. */
  async stepBatch(actions: Float32Array): Promise<StepResult> {
    if (!this.spec) throw new ProtocolError("handshake() first");
    const rows = this.spec.numEnvs * this.spec.nAgents;
    if (actions.length !== rows * this.spec.actionDim) {
      throw new ProtocolError(
        `actions must have ${rows * this.spec.actionDim} values`,
      );
    }
    this.socket.write(
      encodeFrame(FrameKind.Step, this.spec.numEnvs, [
        { shape: [rows, this.spec.actionDim], data: actions },
      ]),
    );
    const raw = await this.reader.nextFrame();
    const frame = decodeFrame(raw);
    if (frame.kind !== FrameKind.Obs || frame.arrays.length !== 3) {
      throw new ProtocolError("server reported a protocol error");
    }
    return {
      obs: frame.arrays[0].data,
      rewards: frame.arrays[1].data,
      dones: frame.arrays[2].data,
      rawBytes: rawArrayBytes(raw),
    };
  }

  async close(): Promise<void> {
    try {
      this.socket.write(encodeFrame(FrameKind.Close, 0));
      await this.reader.nextFrame();
    } catch {
      // session already torn down
    }
    this.socket.destroy();
  }
}

export { Frame, FrameKind, ProtocolError };
