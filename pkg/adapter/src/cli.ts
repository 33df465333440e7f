#!/usr/bin/env node
/**
 * Adapter CLI.
 *
 *   inds-adapter serve  --endpoint 127.0.0.1:9310 [--latent-size 64] [--latent-channels 4]
 *   inds-adapter export --manifest M --out DIR [--frames 8] [--stride 2] [--target 512]
 *
 * The stub model backs both verbs until a real checkpoint is wired in.
 */

import { exportLatents } from './export';
import { parseEndpoint, serveEps } from './server';
import { StubDiffusionModel } from './stubmodel';

interface Args {
  [key: string]: string;
}

function parseFlags(argv: string[]): Args {
  const args: Args = {};
  for (let i = 0; i < argv.length; i++) {
    if (argv[i].startsWith('--')) {
      args[argv[i].slice(2)] = argv[i + 1] ?? '';
      i++;
    }
  }
  return args;
}

function buildModel(args: Args): StubDiffusionModel {
  return new StubDiffusionModel({
    latentChannels: args['latent-channels'] ? parseInt(args['latent-channels'], 10) : undefined,
    latentSize: args['latent-size'] ? parseInt(args['latent-size'], 10) : undefined,
  });
}

async function main(): Promise<number> {
  const [verb, ...rest] = process.argv.slice(2);
  const args = parseFlags(rest);
  if (verb === 'serve') {
    if (!args.endpoint) {
      console.error('serve requires --endpoint host:port');
      return 2;
    }
    const server = await serveEps(buildModel(args), parseEndpoint(args.endpoint));
    const addr = server.address();
    console.log(`eps service listening on ${typeof addr === 'object' && addr ? `${addr.address}:${addr.port}` : args.endpoint}`);
    await new Promise(() => undefined); // runs until killed
    return 0;
  }
  if (verb === 'export') {
    if (!args.manifest || !args.out) {
      console.error('export requires --manifest and --out');
      return 2;
    }
    const result = exportLatents(args.manifest, args.out, buildModel(args), {
      frames: args.frames ? parseInt(args.frames, 10) : undefined,
      stride: args.stride ? parseInt(args.stride, 10) : undefined,
      target: args.target ? parseInt(args.target, 10) : undefined,
      ffmpeg: args.ffmpeg,
    });
    console.log(`exported ${result.exported} videos -> ${result.manifestPath}`);
    if (result.failures.length) {
      console.error(`${result.failures.length} failures recorded`);
      return 3;
    }
    return 0;
  }
  console.error('usage: inds-adapter <serve|export> [flags]');
  return 2;
}

main().then(
  (code) => { process.exitCode = code; },
  (err) => { console.error(err); process.exitCode = 1; },
);
