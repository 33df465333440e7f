/**
 * Model interface for the adapter, plus the deterministic stub used in
 * tests and offline runs.
 *
 * A real checkpoint plugs in behind DiffusionModel; nothing else in the
 * adapter changes. Encoding is deterministic (posterior mean, no
 * sampling) so repeated runs are reproducible end to end.
 */

import { Tensor } from './ltns';
import { FrameStack } from './frames';

export interface DiffusionModel {
  readonly latentChannels: number;
  readonly latentSize: number;
  /** Deterministic per-frame encoding of a standardized frame stack. */
  encode(frames: FrameStack): Tensor;
  /** Noise prediction at the schedule position mapped from stepIndex. */
  predictEps(latent: Tensor, stepIndex: number): Tensor;
  /** Monotone map from inversion step index to model timestep. */
  timestepFor(stepIndex: number): number;
}

/** Box-mean pooling of one H x W channel plane into size x size cells. */
function poolPlane(
  src: Float32Array, height: number, width: number, channels: number,
  channel: number, size: number,
): Float32Array {
  const out = new Float32Array(size * size);
  for (let r = 0; r < size; r++) {
    const r0 = Math.floor((r * height) / size);
    const r1 = Math.max(r0 + 1, Math.floor(((r + 1) * height) / size));
    for (let c = 0; c < size; c++) {
      const c0 = Math.floor((c * width) / size);
      const c1 = Math.max(c0 + 1, Math.floor(((c + 1) * width) / size));
      let acc = 0;
      for (let rr = r0; rr < r1; rr++) {
        for (let cc = c0; cc < c1; cc++) {
          acc += src[(rr * width + cc) * channels + channel];
        }
      }
      out[r * size + c] = acc / ((r1 - r0) * (c1 - c0));
    }
  }
  return out;
}

export interface StubModelOptions {
  latentChannels?: number;
  latentSize?: number;
  /** linear eps coefficient, eps = coeff * x scaled by the timestep */
  coeff?: number;
  virtualTimesteps?: number;
}

/**
 * Deterministic stand-in: encodes by box-pooling pixels into latent
 * geometry (channels cycle) and predicts eps as a fixed linear map of the
 * input latent. Exercises every protocol and export path without weights.
 */
export class StubDiffusionModel implements DiffusionModel {
  readonly latentChannels: number;
  readonly latentSize: number;
  private readonly coeff: number;
  private readonly virtualTimesteps: number;

  constructor(options: StubModelOptions = {}) {
    this.latentChannels = options.latentChannels ?? 4;
    this.latentSize = options.latentSize ?? 64;
    this.coeff = options.coeff ?? 0.1;
    this.virtualTimesteps = options.virtualTimesteps ?? 1000;
  }

  encode(frames: FrameStack): Tensor {
    const { count, height, width, channels, data } = frames;
    const size = this.latentSize;
    const out = new Float32Array(count * this.latentChannels * size * size);
    for (let t = 0; t < count; t++) {
      const frame = data.subarray(t * height * width * channels, (t + 1) * height * width * channels);
      for (let k = 0; k < this.latentChannels; k++) {
        const plane = poolPlane(frame, height, width, channels, k % channels, size);
        out.set(plane, (t * this.latentChannels + k) * size * size);
      }
    }
    return { dims: [count, this.latentChannels, size, size], data: out };
  }

  timestepFor(stepIndex: number): number {
    return Math.min(this.virtualTimesteps - 1, stepIndex * 100);
  }

  predictEps(latent: Tensor, stepIndex: number): Tensor {
    const scale = this.coeff * (1 + this.timestepFor(stepIndex) / this.virtualTimesteps);
    const out = new Float32Array(latent.data.length);
    for (let i = 0; i < out.length; i++) {
      out[i] = Math.fround(scale * latent.data[i]);
    }
    return { dims: [...latent.dims], data: out };
  }
}
