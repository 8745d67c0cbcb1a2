export {
  MAGIC,
  PROTOCOL_VERSION,
  FrameKind,
  ProtocolError,
  encodeFrame,
  decodeFrame,
  parseStream,
  rawArrayBytes,
} from "./framing.js";
export type { Frame, WireArray } from "./framing.js";
export { BridgeClient, SPORTS } from "./client.js";
export type { EnvSpec, StepResult } from "./client.js";
export { Rand, randomRollout } from "./randomLoop.js";
export type { RolloutReport } from "./randomLoop.js";
