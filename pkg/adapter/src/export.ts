/**
 * Batch export: encode every manifest video into core-readable latent
 * tensors plus a fresh JSON Lines manifest with kind "latents".
 */

import { mkdirSync, readFileSync, writeFileSync } from 'node:fs';
import * as path from 'node:path';
import { decodeAndStandardize, frameStackFromTensor, sampleFrameIndices, FrameStack } from './frames';
import { decodeLtns, encodeLtns } from './ltns';
import { DiffusionModel } from './stubmodel';

export interface ManifestEntry {
  id: string;
  tensor_path: string;
  label: 'real' | 'generated';
  source: string;
  kind?: string;
}

export function readManifest(manifestPath: string): ManifestEntry[] {
  return readFileSync(manifestPath, 'utf8')
    .split('\n')
    .map((line) => line.trim())
    .filter((line) => line.length > 0)
    .map((line) => JSON.parse(line) as ManifestEntry);
}

export interface ExportOptions {
  frames?: number;
  stride?: number;
  target?: number;
  ffmpeg?: string;
}

export interface ExportResult {
  manifestPath: string;
  exported: number;
  failures: Array<{ id: string; error: string }>;
}

function selectFrames(stack: FrameStack, frames: number, stride: number, target: number): FrameStack {
  const indices = sampleFrameIndices(stack.count, frames, stride);
  const plane = stack.height * stack.width * stack.channels;
  const out = new Float32Array(frames * plane);
  indices.forEach((idx, t) => {
    out.set(stack.data.subarray(idx * plane, (idx + 1) * plane), t * plane);
  });
  return { count: frames, height: stack.height, width: stack.width, channels: stack.channels, data: out };
}

/**
 * Per-video isolation: one broken input records a failure and the run
 * continues, mirroring the core's extraction contract.
 */
export function exportLatents(
  manifestPath: string,
  outDir: string,
  model: DiffusionModel,
  options: ExportOptions = {},
): ExportResult {
  const frames = options.frames ?? 8;
  const stride = options.stride ?? 2;
  const target = options.target ?? 512;
  mkdirSync(outDir, { recursive: true });
  const failures: Array<{ id: string; error: string }> = [];
  const lines: string[] = [];
  for (const entry of readManifest(manifestPath)) {
    try {
      let stack: FrameStack;
      if (entry.tensor_path.endsWith('.ltns')) {
        stack = frameStackFromTensor(decodeLtns(readFileSync(entry.tensor_path)));
        stack = selectFrames(stack, frames, stride, target);
      } else {
        stack = decodeAndStandardize(entry.tensor_path, {
          frames, stride, target, ffmpeg: options.ffmpeg,
        });
      }
      const latents = model.encode(stack);
      const outPath = path.join(outDir, `${entry.id}.ltns`);
      writeFileSync(outPath, encodeLtns(latents));
      lines.push(JSON.stringify({
        id: entry.id,
        tensor_path: outPath,
        label: entry.label,
        source: entry.source,
        kind: 'latents',
      }));
    } catch (err) {
      failures.push({ id: entry.id, error: String(err) });
    }
  }
  const outManifest = path.join(outDir, 'manifest.jsonl');
  writeFileSync(outManifest, lines.join('\n') + (lines.length ? '\n' : ''));
  if (failures.length) {
    writeFileSync(path.join(outDir, 'failures.json'), JSON.stringify(failures, null, 2));
  }
  return { manifestPath: outManifest, exported: lines.length, failures };
}
