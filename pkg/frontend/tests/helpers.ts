/** Shared node-side helpers: file IO and fixture loading for the suites. */

import { readFile } from 'node:fs/promises';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';
import { inflateSync } from 'node:zlib';

import type { BundleIo, LoadedBundle } from '../src/loader.js';
import { loadBundle } from '../src/loader.js';
import type { DecodedImage } from '../src/png.js';
import { decodePng } from '../src/png.js';

export const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), 'fixtures');

export function inflate(compressed: Uint8Array): Uint8Array {
  return new Uint8Array(inflateSync(compressed));
}

/** IO over a local directory, the test stand-in for HTTP fetches. */
export function fileIo(root: string): BundleIo {
  return {
    async text(path: string): Promise<string> {
      return readFile(join(root, path), 'utf-8');
    },
    async image(path: string): Promise<DecodedImage> {
      const bytes = new Uint8Array(await readFile(join(root, path)));
      return decodePng(bytes, inflate);
    },
  };
}

let cachedBundle: Promise<LoadedBundle> | null = null;

/** The fixture bundle, loaded once per test process. */
export function fixtureBundle(): Promise<LoadedBundle> {
  cachedBundle ??= loadBundle(fileIo(join(FIXTURES, 'bundle')));
  return cachedBundle;
}

export async function readJson<T>(name: string): Promise<T> {
  return JSON.parse(await readFile(join(FIXTURES, name), 'utf-8')) as T;
}

export async function readFixturePng(relPath: string): Promise<DecodedImage> {
  const bytes = new Uint8Array(await readFile(join(FIXTURES, relPath)));
  return decodePng(bytes, inflate);
}

/** Mean absolute difference between float RGB (0..1) and 8-bit RGBA rows. */
export function meanAbsDiffRgb(rendered: Float64Array, reference: DecodedImage): number {
  const pixels = reference.width * reference.height;
  if (rendered.length !== pixels * 4) {
    throw new Error('image sizes differ');
  }
  let total = 0.0;
  for (let p = 0; p < pixels; p++) {
    for (let c = 0; c < 3; c++) {
      const ref = reference.data[p * 4 + c] / 255.0;
      total += Math.abs(rendered[p * 4 + c] - ref);
    }
  }
  return total / (pixels * 3);
}
