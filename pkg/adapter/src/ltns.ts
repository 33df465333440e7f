/**
 * LTNS tensor container (bit-exact wire/file format shared with the core).
 *
 * Layout, little endian: magic "LTNS", u32 version=1, u32 dtype=1 (float32),
 * u32 ndim, ndim x u64 extents, then row-major float32 payload.
 */

export const LTNS_MAGIC = 'LTNS';
export const LTNS_VERSION = 1;
export const LTNS_DTYPE_F32 = 1;

export interface Tensor {
  dims: number[];
  /** Row-major float32 scalars. */
  data: Float32Array;
}

export class LtnsFormatError extends Error {
  constructor(message: string, public readonly offset: number) {
    super(`${message} (offset ${offset})`);
    this.name = 'LtnsFormatError';
  }
}

export function tensorLength(dims: number[]): number {
  return dims.reduce((a, b) => a * b, 1);
}

export function encodeLtns(tensor: Tensor): Buffer {
  const { dims, data } = tensor;
  if (tensorLength(dims) !== data.length) {
    throw new LtnsFormatError(
      `dims ${JSON.stringify(dims)} disagree with payload length ${data.length}`, 0);
  }
  for (const v of data) {
    if (!Number.isFinite(v)) {
      throw new LtnsFormatError('refusing to encode non-finite data', 0);
    }
  }
  const head = Buffer.alloc(16 + 8 * dims.length);
  head.write(LTNS_MAGIC, 0, 'ascii');
  head.writeUInt32LE(LTNS_VERSION, 4);
  head.writeUInt32LE(LTNS_DTYPE_F32, 8);
  head.writeUInt32LE(dims.length, 12);
  dims.forEach((d, i) => head.writeBigUInt64LE(BigInt(d), 16 + 8 * i));
  const payload = Buffer.alloc(4 * data.length);
  for (let i = 0; i < data.length; i++) {
    payload.writeFloatLE(data[i], 4 * i);
  }
  return Buffer.concat([head, payload]);
}

export function decodeLtns(blob: Buffer): Tensor {
  if (blob.length < 4 || blob.toString('ascii', 0, 4) !== LTNS_MAGIC) {
    throw new LtnsFormatError(`bad magic ${blob.subarray(0, 4).toString('hex')}`, 0);
  }
  if (blob.length < 16) {
    throw new LtnsFormatError('truncated header', blob.length);
  }
  const version = blob.readUInt32LE(4);
  const dtype = blob.readUInt32LE(8);
  const ndim = blob.readUInt32LE(12);
  if (version !== LTNS_VERSION) throw new LtnsFormatError(`unsupported version ${version}`, 4);
  if (dtype !== LTNS_DTYPE_F32) throw new LtnsFormatError(`unsupported dtype ${dtype}`, 8);
  if (blob.length < 16 + 8 * ndim) throw new LtnsFormatError('truncated extents', blob.length);
  const dims: number[] = [];
  for (let i = 0; i < ndim; i++) {
    dims.push(Number(blob.readBigUInt64LE(16 + 8 * i)));
  }
  const count = tensorLength(dims);
  const offset = 16 + 8 * ndim;
  if (blob.length - offset < 4 * count) {
    throw new LtnsFormatError(
      `payload holds ${Math.floor((blob.length - offset) / 4)} scalars, header declares ${count}`,
      offset);
  }
  const data = new Float32Array(count);
  for (let i = 0; i < count; i++) {
    data[i] = blob.readFloatLE(offset + 4 * i);
  }
  return { dims, data };
}
