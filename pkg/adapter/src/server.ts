/**
 * Eps prediction service over TCP.
 *
 * Requests are served strictly in order per connection; a malformed frame
 * answers with msg_type 3 and the connection stays open. Multiple
 * connections share one model, serialized through the synchronous
 * predictEps call.
 */

import * as net from 'node:net';
import { decodeLtns, encodeLtns, LtnsFormatError } from './ltns';
import { encodeFrame, FrameReader, MSG_EPS_REQUEST, MSG_EPS_RESPONSE, MSG_ERROR } from './protocol';
import { DiffusionModel } from './stubmodel';

export interface ServeOptions {
  host: string;
  port: number;
}

export function parseEndpoint(endpoint: string): ServeOptions {
  const sep = endpoint.lastIndexOf(':');
  if (sep <= 0) throw new Error(`endpoint must be host:port, got "${endpoint}"`);
  const port = Number(endpoint.slice(sep + 1));
  if (!Number.isInteger(port) || port < 0 || port > 65535) {
    throw new Error(`bad port in endpoint "${endpoint}"`);
  }
  return { host: endpoint.slice(0, sep), port };
}

export function serveEps(model: DiffusionModel, options: ServeOptions): Promise<net.Server> {
  const server = net.createServer((socket) => {
    const reader = new FrameReader();
    socket.on('data', (chunk) => {
      const bytes = typeof chunk === 'string' ? Buffer.from(chunk) : chunk;
      for (const frame of reader.push(bytes)) {
        let reply: Buffer;
        if (frame.msgType !== MSG_EPS_REQUEST) {
          reply = encodeFrame({
            msgType: MSG_ERROR,
            stepIndex: frame.stepIndex,
            payload: Buffer.from(`unknown msg_type ${frame.msgType}`, 'utf8'),
          });
        } else {
          try {
            const tensor = decodeLtns(frame.payload);
            const eps = model.predictEps(tensor, frame.stepIndex);
            reply = encodeFrame({
              msgType: MSG_EPS_RESPONSE,
              stepIndex: frame.stepIndex,
              payload: encodeLtns(eps),
            });
          } catch (err) {
            const reason = err instanceof LtnsFormatError ? err.message : String(err);
            reply = encodeFrame({
              msgType: MSG_ERROR,
              stepIndex: frame.stepIndex,
              payload: Buffer.from(`malformed frame: ${reason}`, 'utf8'),
            });
          }
        }
        socket.write(reply);
      }
    });
    socket.on('error', () => socket.destroy());
  });
  return new Promise((resolve, reject) => {
    server.once('error', reject);
    server.listen(options.port, options.host, () => resolve(server));
  });
}
