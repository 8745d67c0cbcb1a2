/**
 * Frame codec for the sportsim wire protocol.
 *
 * Wire format (all little-endian), carried with a u32 length prefix:
 *   magic   4 bytes  "SBRG"
 *   version u16
 *   kind    u8       0=reset  1=step  2=obs  3=close
 *   batch   u32      number of environments
 *   payload u32 array count, then per array:
 *           u8 ndim, u32 dims[ndim], contiguous f32 data
 *
 * An obs frame with zero arrays signals a protocol error from the server;
 * the session survives it.
 */

export const MAGIC = Buffer.from("SBRG", "ascii");
export const PROTOCOL_VERSION = 1;

export enum FrameKind {
  Reset = 0,
  Step = 1,
  Obs = 2,
  Close = 3,
}

export interface WireArray {
  shape: number[];
  data: Float32Array;
}

export interface Frame {
  version: number;
  kind: FrameKind;
  batch: number;
  arrays: WireArray[];
}

export class ProtocolError extends Error {}

/** Encode one frame, including the u32 length prefix. */
export function encodeFrame(
  kind: FrameKind,
  batch: number,
  arrays: WireArray[] = [],
  version: number = PROTOCOL_VERSION,
): Buffer {
  let payloadBytes = 0;
  for (const arr of arrays) {
    payloadBytes += 1 + 4 * arr.shape.length + 4 * arr.data.length;
  }
  const frameLen = 4 + 2 + 1 + 4 + 4 + payloadBytes;
  const buf = Buffer.alloc(4 + frameLen);
  let off = 0;
  off = buf.writeUInt32LE(frameLen, off);
  off += MAGIC.copy(buf, off);
  off = buf.writeUInt16LE(version, off);
  off = buf.writeUInt8(kind, off);
  off = buf.writeUInt32LE(batch, off);
  off = buf.writeUInt32LE(arrays.length, off);
  for (const arr of arrays) {
    const count = arr.shape.reduce((a, b) => a * b, 1);
    if (count !== arr.data.length) {
      throw new ProtocolError(
        `array data length ${arr.data.length} does not match shape [${arr.shape}]`,
      );
    }
    off = buf.writeUInt8(arr.shape.length, off);
    for (const dim of arr.shape) {
      off = buf.writeUInt32LE(dim, off);
    }
    Buffer.from(arr.data.buffer, arr.data.byteOffset, arr.data.byteLength).copy(buf, off);
    off += arr.data.byteLength;
  }
  return buf;
}

/** Decode one frame body (without the length prefix). */
export function decodeFrame(frame: Buffer): Frame {
  if (frame.length < 11 || !frame.subarray(0, 4).equals(MAGIC)) {
    throw new ProtocolError("bad magic");
  }
  const version = frame.readUInt16LE(4);
  const kind = frame.readUInt8(6) as FrameKind;
  const batch = frame.readUInt32LE(7);
  const nArrays = frame.readUInt32LE(11);
  let off = 15;
  const arrays: WireArray[] = [];
  for (let i = 0; i < nArrays; i++) {
    if (off + 1 > frame.length) {
      throw new ProtocolError("truncated array header");
    }
    const ndim = frame.readUInt8(off);
    off += 1;
    const shape: number[] = [];
    for (let d = 0; d < ndim; d++) {
      shape.push(frame.readUInt32LE(off));
      off += 4;
    }
    const count = shape.reduce((a, b) => a * b, 1);
    const end = off + 4 * count;
    if (end > frame.length) {
      throw new ProtocolError("array payload does not match declared shape");
    }
    // copy so the frame buffer can be released; node Buffers may not be
    // 4-byte aligned, so go through a fresh ArrayBuffer
    const bytes = new Uint8Array(4 * count);
    bytes.set(frame.subarray(off, end));
    arrays.push({ shape, data: new Float32Array(bytes.buffer) });
    off = end;
  }
  if (off !== frame.length) {
    throw new ProtocolError("trailing bytes after declared arrays");
  }
  return { version, kind, batch, arrays };
}

/** Split a concatenated byte stream into frames (fixture verification). */
export function parseStream(blob: Buffer): Frame[] {
  const frames: Frame[] = [];
  let off = 0;
  while (off < blob.length) {
    const len = blob.readUInt32LE(off);
    frames.push(decodeFrame(blob.subarray(off + 4, off + 4 + len)));
    off += 4 + len;
  }
  return frames;
}

/** Raw payload bytes of each array in a frame body, in declaration order. */
export function rawArrayBytes(frame: Buffer): Buffer[] {
  const nArrays = frame.readUInt32LE(11);
  let off = 15;
  const out: Buffer[] = [];
  for (let i = 0; i < nArrays; i++) {
    const ndim = frame.readUInt8(off);
    off += 1;
    let count = 1;
    for (let d = 0; d < ndim; d++) {
      count *= frame.readUInt32LE(off);
      off += 4;
    }
    out.push(frame.subarray(off, off + 4 * count));
    off += 4 * count;
  }
  return out;
}
