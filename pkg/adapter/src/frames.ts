/**
 * Frame acquisition and spatial standardization.
 *
 * Videos decode through an ffmpeg shell-out (rawvideo rgb24 pipe); tensors
 * already holding frame stacks load directly from LTNS. Standardization
 * matches the core's rules: center crop above target, zero-pad below, odd
 * margins split floor on the top/left.
 */

import { execFileSync } from 'node:child_process';
import { readFileSync } from 'node:fs';
import { decodeLtns, Tensor } from './ltns';

export interface FrameStack {
  /** frames as (T, H, W, C) with C = 3 */
  count: number;
  height: number;
  width: number;
  channels: number;
  data: Float32Array;
}

export function sampleFrameIndices(totalFrames: number, count = 8, stride = 2): number[] {
  if (totalFrames === 0) throw new Error('video has no frames');
  if (totalFrames < 0 || count < 1 || stride < 1) throw new Error('bad sampling arguments');
  if ((count - 1) * stride < totalFrames) {
    return Array.from({ length: count }, (_, i) => i * stride);
  }
  if (count <= totalFrames) {
    return Array.from({ length: count }, (_, i) => i);
  }
  const idx = Array.from({ length: totalFrames }, (_, i) => i);
  while (idx.length < count) idx.push(totalFrames - 1);
  return idx;
}

/** H x W x C -> target x target x C by center crop / zero pad. */
export function standardizeFrame(
  frame: Float32Array, height: number, width: number, channels: number, target = 512,
): Float32Array {
  const out = new Float32Array(target * target * channels);
  const srcRow0 = height > target ? Math.floor((height - target) / 2) : 0;
  const srcCol0 = width > target ? Math.floor((width - target) / 2) : 0;
  const dstRow0 = height < target ? Math.floor((target - height) / 2) : 0;
  const dstCol0 = width < target ? Math.floor((target - width) / 2) : 0;
  const rows = Math.min(height, target);
  const cols = Math.min(width, target);
  for (let r = 0; r < rows; r++) {
    for (let c = 0; c < cols; c++) {
      for (let k = 0; k < channels; k++) {
        out[((dstRow0 + r) * target + (dstCol0 + c)) * channels + k] =
          frame[((srcRow0 + r) * width + (srcCol0 + c)) * channels + k];
      }
    }
  }
  return out;
}

export function frameStackFromTensor(tensor: Tensor): FrameStack {
  let dims = tensor.dims;
  let data = tensor.data;
  if (dims.length === 3) {
    dims = [...dims, 1];
  }
  if (dims.length !== 4) {
    throw new Error(`frames tensor must be (T, H, W, C), got [${tensor.dims}]`);
  }
  return {
    count: dims[0],
    height: dims[1],
    width: dims[2],
    channels: dims[3],
    data,
  };
}

export function loadFrameStack(path: string): FrameStack {
  return frameStackFromTensor(decodeLtns(readFileSync(path)));
}

export interface DecodeOptions {
  ffmpeg?: string;
  frames?: number;
  stride?: number;
  target?: number;
  /** probe size hint; decode fails loudly when ffmpeg is absent */
}

/**
 * Decode a video container to standardized frames via ffmpeg, sampling
 * eight frames at the configured stride.
 */
export function decodeAndStandardize(videoPath: string, options: DecodeOptions = {}): FrameStack {
  const ffmpeg = options.ffmpeg ?? 'ffmpeg';
  const ffprobe = ffmpeg.replace(/ffmpeg(\.exe)?$/, 'ffprobe$1');
  const frames = options.frames ?? 8;
  const stride = options.stride ?? 2;
  const target = options.target ?? 512;

  const probe = execFileSync(ffprobe, [
    '-v', 'error', '-select_streams', 'v:0',
    '-show_entries', 'stream=width,height,nb_read_frames',
    '-count_frames', '-of', 'csv=p=0', videoPath,
  ]).toString().trim();
  const [width, height, total] = probe.split(',').map((v) => parseInt(v, 10));
  if (!width || !height || !total) {
    throw new Error(`cannot probe ${videoPath}: got "${probe}"`);
  }
  const indices = sampleFrameIndices(total, frames, stride);
  const select = indices.map((i) => `eq(n\\,${i})`).join('+');
  const raw = execFileSync(ffmpeg, [
    '-v', 'error', '-i', videoPath,
    '-vf', `select='${select}'`, '-vsync', '0',
    '-f', 'rawvideo', '-pix_fmt', 'rgb24', 'pipe:1',
  ], { maxBuffer: 1 << 30 });

  const perFrame = width * height * 3;
  const out = new Float32Array(frames * target * target * 3);
  // duplicated indices reuse the last decoded unique frame
  const unique = [...new Set(indices)];
  const byIndex = new Map<number, Float32Array>();
  unique.forEach((frameIdx, k) => {
    const plane = new Float32Array(perFrame);
    for (let i = 0; i < perFrame; i++) plane[i] = raw[k * perFrame + i];
    byIndex.set(frameIdx, standardizeFrame(plane, height, width, 3, target));
  });
  indices.forEach((frameIdx, t) => {
    out.set(byIndex.get(frameIdx)!, t * target * target * 3);
  });
  return { count: frames, height: target, width: target, channels: 3, data: out };
}
