import assert from 'node:assert/strict';
import { test } from 'node:test';
import { spawn, spawnSync } from 'node:child_process';
import { mkdtempSync, readFileSync, writeFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import * as path from 'node:path';
import * as net from 'node:net';
import { exportLatents, readManifest } from '../src/export';
import { decodeLtns, encodeLtns, Tensor } from '../src/ltns';
import { serveEps } from '../src/server';
import { StubDiffusionModel } from '../src/stubmodel';

const PYTHON = process.env.PYTHON ?? 'python3';

function pythonCoreAvailable(): boolean {
  const probe = spawnSync(PYTHON, ['-c', 'import inds'], { timeout: 30000 });
  return probe.status === 0;
}

function pixelVideoTensor(seed: number, frames = 10, size = 16): Tensor {
  let s = seed >>> 0 || 1;
  const next = () => {
    s ^= s << 13; s >>>= 0;
    s ^= s >> 17; s >>>= 0;
    s ^= s << 5; s >>>= 0;
    return (s / 0xffffffff) * 255;
  };
  const data = new Float32Array(frames * size * size * 3);
  for (let i = 0; i < data.length; i++) data[i] = Math.fround(next());
  return { dims: [frames, size, size, 3], data };
}

function writeFixture(dir: string, count: number): string {
  const lines: string[] = [];
  for (let k = 0; k < count; k++) {
    const tensorPath = path.join(dir, `video${k}.ltns`);
    writeFileSync(tensorPath, encodeLtns(pixelVideoTensor(k + 1)));
    lines.push(JSON.stringify({
      id: `video${k}`,
      tensor_path: tensorPath,
      label: k % 2 ? 'real' : 'generated',
      source: k % 2 ? 'cam' : 'gen1',
      kind: 'frames',
    }));
  }
  const manifest = path.join(dir, 'manifest.jsonl');
  writeFileSync(manifest, lines.join('\n') + '\n');
  return manifest;
}

test('export writes one manifest line per video with latent geometry', () => {
  const dir = mkdtempSync(path.join(tmpdir(), 'adapter-export-'));
  const manifest = writeFixture(dir, 6);
  const model = new StubDiffusionModel({ latentSize: 8 });
  const result = exportLatents(manifest, path.join(dir, 'out'), model, { target: 16 });
  assert.equal(result.exported, 6);
  assert.equal(result.failures.length, 0);
  const entries = readManifest(result.manifestPath);
  assert.equal(entries.length, 6);
  for (const entry of entries) {
    assert.equal(entry.kind, 'latents');
    const tensor = decodeLtns(readFileSync(entry.tensor_path));
    assert.deepEqual(tensor.dims, [8, 4, 8, 8]);
  }
});

test('re-export is byte-identical for a fixed model', () => {
  const dir = mkdtempSync(path.join(tmpdir(), 'adapter-idem-'));
  const manifest = writeFixture(dir, 3);
  const model = new StubDiffusionModel({ latentSize: 8 });
  const a = exportLatents(manifest, path.join(dir, 'a'), model, { target: 16 });
  const b = exportLatents(manifest, path.join(dir, 'b'), model, { target: 16 });
  const ea = readManifest(a.manifestPath);
  const eb = readManifest(b.manifestPath);
  for (let k = 0; k < ea.length; k++) {
    assert.ok(readFileSync(ea[k].tensor_path).equals(readFileSync(eb[k].tensor_path)));
  }
});

test('broken inputs are isolated per video', () => {
  const dir = mkdtempSync(path.join(tmpdir(), 'adapter-iso-'));
  const manifest = writeFixture(dir, 3);
  const lines = readFileSync(manifest, 'utf8').trim().split('\n');
  lines.push(JSON.stringify({
    id: 'missing', tensor_path: path.join(dir, 'nope.ltns'),
    label: 'real', source: 'cam', kind: 'frames',
  }));
  writeFileSync(manifest, lines.join('\n') + '\n');
  const result = exportLatents(manifest, path.join(dir, 'out'),
    new StubDiffusionModel({ latentSize: 8 }), { target: 16 });
  assert.equal(result.exported, 3);
  assert.equal(result.failures.length, 1);
  assert.equal(result.failures[0].id, 'missing');
});

test('core cmd_extract consumes exported latents with zero conversion errors', (t) => {
  if (!pythonCoreAvailable()) {
    t.skip('python core package not importable');
    return;
  }
  const dir = mkdtempSync(path.join(tmpdir(), 'adapter-core-'));
  const manifest = writeFixture(dir, 8);
  const result = exportLatents(manifest, path.join(dir, 'out'),
    new StubDiffusionModel({ latentSize: 8 }), { target: 16 });
  const proc = spawnSync(PYTHON, [
    '-m', 'inds.cli', 'extract',
    '--manifest', result.manifestPath,
    '--out', path.join(dir, 'features'),
    '--latent-size', '8', '--inversion-steps', '3',
    '--modules', 'spacetime',
  ], { encoding: 'utf8', timeout: 120000 });
  assert.equal(proc.status, 0, proc.stderr);
  assert.match(proc.stdout, /extracted 8 videos/);
  assert.doesNotMatch(proc.stdout + proc.stderr, /failures recorded/);
});

test('core inversion drives the eps service end to end', async (t) => {
  if (!pythonCoreAvailable()) {
    t.skip('python core package not importable');
    return;
  }
  const dir = mkdtempSync(path.join(tmpdir(), 'adapter-remote-'));
  const manifest = writeFixture(dir, 4);
  const exported = exportLatents(manifest, path.join(dir, 'out'),
    new StubDiffusionModel({ latentSize: 8 }), { target: 16 });
  const server = await serveEps(new StubDiffusionModel({ latentSize: 8 }), {
    host: '127.0.0.1', port: 0,
  });
  try {
    const addr = server.address() as net.AddressInfo;
    // async spawn: a blocking spawnSync would starve the in-process server
    const result = await new Promise<{ code: number | null; stdout: string; stderr: string }>(
      (resolve, reject) => {
        const proc = spawn(PYTHON, [
          '-m', 'inds.cli', 'extract',
          '--manifest', exported.manifestPath,
          '--out', path.join(dir, 'features'),
          '--latent-size', '8', '--inversion-steps', '3',
          '--modules', 'spacetime',
          '--predictor', `127.0.0.1:${addr.port}`,
        ], { timeout: 120000 });
        let stdout = '';
        let stderr = '';
        proc.stdout.on('data', (d) => { stdout += d; });
        proc.stderr.on('data', (d) => { stderr += d; });
        proc.once('error', reject);
        proc.once('close', (code) => resolve({ code, stdout, stderr }));
      });
    assert.equal(result.code, 0, result.stderr);
    assert.match(result.stdout, /extracted 4 videos/);
  } finally {
    server.close();
  }
});
