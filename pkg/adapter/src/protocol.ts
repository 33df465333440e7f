/**
 * Eps-service wire protocol.
 *
 * One duplex byte stream carries frames of:
 *   u32 LE msg_type   (1 = eps request, 2 = eps response, 3 = error)
 *   u32 LE step_index (echoed verbatim in responses)
 *   u32 LE payload length
 *   payload           (LTNS tensor, or UTF-8 reason for errors)
 */

export const MSG_EPS_REQUEST = 1;
export const MSG_EPS_RESPONSE = 2;
export const MSG_ERROR = 3;

export interface Frame {
  msgType: number;
  stepIndex: number;
  payload: Buffer;
}

export function encodeFrame(frame: Frame): Buffer {
  const head = Buffer.alloc(12);
  head.writeUInt32LE(frame.msgType, 0);
  head.writeUInt32LE(frame.stepIndex, 4);
  head.writeUInt32LE(frame.payload.length, 8);
  return Buffer.concat([head, frame.payload]);
}

/** Incremental frame parser over an arbitrary chunking of the stream. */
export class FrameReader {
  private buffer: Buffer = Buffer.alloc(0);

  push(chunk: Buffer): Frame[] {
    this.buffer = Buffer.concat([this.buffer, chunk]);
    const frames: Frame[] = [];
    for (;;) {
      if (this.buffer.length < 12) break;
      const length = this.buffer.readUInt32LE(8);
      if (this.buffer.length < 12 + length) break;
      frames.push({
        msgType: this.buffer.readUInt32LE(0),
        stepIndex: this.buffer.readUInt32LE(4),
        payload: this.buffer.subarray(12, 12 + length),
      });
      this.buffer = this.buffer.subarray(12 + length);
    }
    return frames;
  }
}
