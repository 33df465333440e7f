import assert from 'node:assert/strict';
import { test } from 'node:test';
import { sampleFrameIndices, standardizeFrame } from '../src/frames';

test('stride-2 sampling over a long clip', () => {
  assert.deepEqual(sampleFrameIndices(30, 8, 2), [0, 2, 4, 6, 8, 10, 12, 14]);
});

test('stride-1 fallback exactly fills', () => {
  assert.deepEqual(sampleFrameIndices(8, 8, 2), [0, 1, 2, 3, 4, 5, 6, 7]);
});

test('short clips repeat the last index', () => {
  assert.deepEqual(sampleFrameIndices(6, 8, 2), [0, 1, 2, 3, 4, 5, 5, 5]);
});

test('empty video is rejected', () => {
  assert.throws(() => sampleFrameIndices(0));
});

test('standardize identity at target size', () => {
  const frame = new Float32Array(4 * 4 * 3).map((_, i) => i);
  const out = standardizeFrame(frame, 4, 4, 3, 4);
  assert.deepEqual(Array.from(out), Array.from(frame));
});

test('center crop keeps the interior of a larger frame', () => {
  const frame = new Float32Array(6 * 6).fill(7);
  const out = standardizeFrame(frame, 6, 6, 1, 4);
  assert.equal(out.length, 16);
  assert.ok(Array.from(out).every((v) => v === 7));
});

test('smaller frames zero-pad symmetrically', () => {
  const frame = new Float32Array(2 * 4).fill(1); // 2 rows, 4 cols
  const out = standardizeFrame(frame, 2, 4, 1, 4);
  // rows 0 and 3 are padding, rows 1..2 carry the content
  assert.deepEqual(Array.from(out.subarray(0, 4)), [0, 0, 0, 0]);
  assert.deepEqual(Array.from(out.subarray(4, 12)), [1, 1, 1, 1, 1, 1, 1, 1]);
  assert.deepEqual(Array.from(out.subarray(12)), [0, 0, 0, 0]);
});

test('odd margins split floor on the leading side', () => {
  const frame = new Float32Array([0, 1, 2, 3, 4]); // 5 rows, 1 col
  const out = standardizeFrame(frame, 5, 1, 1, 4);
  // rows: crop margin 1 splits floor(0.5)=0 on top, so rows 0..3 survive;
  // cols: pad margin 3 splits floor(1.5)=1 on the left, content in col 1
  assert.deepEqual(Array.from(out.filter((_, i) => i % 4 === 1)), [0, 1, 2, 3]);
});
