/**
 * Bundle loading: fetch the manifest, validate it, then fetch every layer
 * mesh and coefficient image.  IO is injected so the same loader runs in
 * the browser (fetch + DecompressionStream) and under tests (files +
 * zlib).  Any failure throws a BundleFormatError naming what broke, which
 * the page surfaces in the error banner.
 */

import type { BundleManifest } from './manifest.js';
import { BAND_SIZES, BundleFormatError, validateManifest } from './manifest.js';
import type { ParsedMesh } from './obj.js';
import { parseObj } from './obj.js';
import type { DecodedImage } from './png.js';
import type { LayerData } from './softrender.js';

export const MANIFEST_NAME = 'manifest.json';

export interface BundleIo {
  /** UTF-8 text of the file at a bundle-relative path. */
  text(path: string): Promise<string>;
  /** Decoded RGBA image of the PNG at a bundle-relative path. */
  image(path: string): Promise<DecodedImage>;
}

export interface LoadedBundle {
  manifest: BundleManifest;
  layers: LayerData[];
  /** Total coefficient images fetched, for the resource readout. */
  imageCount: number;
}

export type ProgressFn = (done: number, total: number) => void;

async function fetchText(io: BundleIo, path: string, field: string): Promise<string> {
  try {
    return await io.text(path);
  } catch (err) {
    throw new BundleFormatError(field, `missing file ${path}`);
  }
}

async function fetchImage(io: BundleIo, path: string, field: string): Promise<DecodedImage> {
  try {
    return await io.image(path);
  } catch (err) {
    throw new BundleFormatError(field, `missing file ${path}`);
  }
}

/**
 * Load and validate a bundle.  The result is a pure function of the
 * fetched bytes: loading the same bundle twice yields identical state.
 */
export async function loadBundle(io: BundleIo, onProgress?: ProgressFn): Promise<LoadedBundle> {
  const manifestText = await fetchText(io, MANIFEST_NAME, MANIFEST_NAME);
  let parsed: unknown;
  try {
    parsed = JSON.parse(manifestText);
  } catch (err) {
    throw new BundleFormatError(MANIFEST_NAME, `invalid JSON (${(err as Error).message})`);
  }
  const manifest = validateManifest(parsed);

  let total = 0;
  for (const layer of manifest.layers) {
    total += 1;
    for (const band of layer.bands) {
      total += band.images.length;
    }
  }
  let done = 0;
  const step = () => {
    done += 1;
    onProgress?.(done, total);
  };

  const layers: LayerData[] = [];
  let imageCount = 0;
  for (let j = 0; j < manifest.layers.length; j++) {
    const entry = manifest.layers[j];
    const field = `layers[${j}]`;
    const objText = await fetchText(io, entry.mesh, `${field}.mesh`);
    const mesh: ParsedMesh = parseObj(objText);
    if (mesh.uvs.length === 0 || mesh.normals.length === 0) {
      throw new BundleFormatError(`${field}.mesh`, 'mesh must carry normals and uvs');
    }
    step();

    const images: DecodedImage[] = [];
    for (let b = 0; b < entry.bands.length; b++) {
      const band = entry.bands[b];
      const bfield = `${field}.bands[${b}]`;
      for (let local = 0; local < band.images.length; local++) {
        const name = band.images[local];
        const img = await fetchImage(io, name, `${bfield}.images`);
        if (img.width !== band.resolution || img.height !== band.resolution) {
          throw new BundleFormatError(
            `${bfield}.resolution`,
            `${name} is ${img.width}x${img.height}, manifest says ${band.resolution}`,
          );
        }
        images.push(img);
        imageCount += 1;
        step();
      }
    }
    const expected = BAND_SIZES.slice(0, manifest.shDegree + 1)
      .reduce((a: number, b: number) => a + b, 0);
    if (images.length !== expected) {
      throw new BundleFormatError(field, 'wrong number of coefficient images');
    }
    layers.push({ mesh, images });
  }
  return { manifest, layers, imageCount };
}
