import assert from 'node:assert/strict';
import { test } from 'node:test';
import * as net from 'node:net';
import { decodeLtns, encodeLtns, Tensor } from '../src/ltns';
import {
  encodeFrame, Frame, FrameReader, MSG_EPS_REQUEST, MSG_EPS_RESPONSE, MSG_ERROR,
} from '../src/protocol';
import { serveEps } from '../src/server';
import { StubDiffusionModel } from '../src/stubmodel';

function tensorFixture(): Tensor {
  const dims = [4, 8, 8];
  const data = new Float32Array(4 * 8 * 8);
  for (let i = 0; i < data.length; i++) data[i] = Math.fround(Math.sin(i * 0.37) * 2);
  return { dims, data };
}

function requestReply(socket: net.Socket, frame: Frame): Promise<Frame> {
  return new Promise((resolve, reject) => {
    const reader = new FrameReader();
    const onData = (chunk: Buffer) => {
      const frames = reader.push(chunk);
      if (frames.length) {
        socket.off('data', onData);
        resolve(frames[0]);
      }
    };
    socket.on('data', onData);
    socket.once('error', reject);
    socket.write(encodeFrame(frame));
  });
}

test('frame reader reassembles arbitrary chunking', () => {
  const payload = Buffer.from('0123456789');
  const wire = encodeFrame({ msgType: 1, stepIndex: 7, payload });
  const reader = new FrameReader();
  const collected: Frame[] = [];
  for (let i = 0; i < wire.length; i += 3) {
    collected.push(...reader.push(wire.subarray(i, Math.min(i + 3, wire.length))));
  }
  assert.equal(collected.length, 1);
  assert.equal(collected[0].msgType, 1);
  assert.equal(collected[0].stepIndex, 7);
  assert.ok(collected[0].payload.equals(payload));
});

test('echo test: dims and step_index preserved, LTNS bit-exact', async () => {
  const model = new StubDiffusionModel({ latentSize: 8, coeff: 0.1 });
  const server = await serveEps(model, { host: '127.0.0.1', port: 0 });
  const addr = server.address() as net.AddressInfo;
  const socket = net.connect(addr.port, '127.0.0.1');
  await new Promise((resolve) => socket.once('connect', resolve));
  try {
    const tensor = tensorFixture();
    const payload = encodeLtns(tensor);
    // the request payload itself survives an encode/decode cycle bit-exactly
    const reparsed = encodeLtns(decodeLtns(payload));
    assert.ok(reparsed.equals(payload));

    const reply = await requestReply(socket, {
      msgType: MSG_EPS_REQUEST, stepIndex: 5, payload,
    });
    assert.equal(reply.msgType, MSG_EPS_RESPONSE);
    assert.equal(reply.stepIndex, 5);
    const eps = decodeLtns(reply.payload);
    assert.deepEqual(eps.dims, tensor.dims);
    const expected = model.predictEps(tensor, 5);
    assert.deepEqual(Array.from(eps.data), Array.from(expected.data));
  } finally {
    socket.destroy();
    server.close();
  }
});

test('unknown msg_type answers an error and keeps the connection alive', async () => {
  const server = await serveEps(new StubDiffusionModel({ latentSize: 8 }), {
    host: '127.0.0.1', port: 0,
  });
  const addr = server.address() as net.AddressInfo;
  const socket = net.connect(addr.port, '127.0.0.1');
  await new Promise((resolve) => socket.once('connect', resolve));
  try {
    const bad = await requestReply(socket, {
      msgType: 42, stepIndex: 1, payload: Buffer.from('junk'),
    });
    assert.equal(bad.msgType, MSG_ERROR);
    assert.match(bad.payload.toString('utf8'), /unknown msg_type 42/);

    const tensor = tensorFixture();
    const good = await requestReply(socket, {
      msgType: MSG_EPS_REQUEST, stepIndex: 2, payload: encodeLtns(tensor),
    });
    assert.equal(good.msgType, MSG_EPS_RESPONSE);
    assert.equal(good.stepIndex, 2);
  } finally {
    socket.destroy();
    server.close();
  }
});

test('malformed tensor payload answers msg_type 3 with a reason', async () => {
  const server = await serveEps(new StubDiffusionModel({ latentSize: 8 }), {
    host: '127.0.0.1', port: 0,
  });
  const addr = server.address() as net.AddressInfo;
  const socket = net.connect(addr.port, '127.0.0.1');
  await new Promise((resolve) => socket.once('connect', resolve));
  try {
    const reply = await requestReply(socket, {
      msgType: MSG_EPS_REQUEST, stepIndex: 3, payload: Buffer.from('XXXXnotatensor'),
    });
    assert.equal(reply.msgType, MSG_ERROR);
    assert.match(reply.payload.toString('utf8'), /malformed frame/);
  } finally {
    socket.destroy();
    server.close();
  }
});

test('repeated identical requests give identical responses', async () => {
  const server = await serveEps(new StubDiffusionModel({ latentSize: 8 }), {
    host: '127.0.0.1', port: 0,
  });
  const addr = server.address() as net.AddressInfo;
  const socket = net.connect(addr.port, '127.0.0.1');
  await new Promise((resolve) => socket.once('connect', resolve));
  try {
    const payload = encodeLtns(tensorFixture());
    const a = await requestReply(socket, { msgType: MSG_EPS_REQUEST, stepIndex: 4, payload });
    const b = await requestReply(socket, { msgType: MSG_EPS_REQUEST, stepIndex: 4, payload });
    assert.ok(a.payload.equals(b.payload));
  } finally {
    socket.destroy();
    server.close();
  }
});

test('timestep mapping is monotone in the step index', () => {
  const model = new StubDiffusionModel();
  let prev = -1;
  for (let s = 0; s < 10; s++) {
    const t = model.timestepFor(s);
    assert.ok(t >= prev);
    prev = t;
  }
});
