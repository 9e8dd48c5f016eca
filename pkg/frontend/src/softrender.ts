/**
 * Software reference renderer for loaded bundles.
 *
 * Implements the same fixed-order shell compositing the GPU path draws:
 * nearest hit per layer in manifest order, spherical-harmonics texture
 * decode, grazing-angle attenuation, and front-to-back under-compositing
 * over the background.  Runs anywhere (no GPU), which makes it the
 * cross-implementation anchor the fragment shader is checked against.
 */

import type { PinholeCamera } from './camera.js';
import { pixelRayDirection } from './camera.js';
import type { BundleManifest } from './manifest.js';
import type { ParsedMesh } from './obj.js';
import type { DecodedImage } from './png.js';
import { shBasis, sigmoid } from './sh.js';

/** Transmittance below one 8-bit quantum cannot change the output visibly. */
export const EARLY_EXIT_TRANSMITTANCE = 1.0 / 512.0;

export type DisplayMode = 'composite' | 'normals' | 'uvs' | 'opacity' | 'color';

export const DISPLAY_MODES: DisplayMode[] = [
  'composite', 'normals', 'uvs', 'opacity', 'color',
];

export interface LayerData {
  mesh: ParsedMesh;
  /** One RGBA image per SH coefficient, flat index order. */
  images: DecodedImage[];
}

export interface SoftRenderOptions {
  width: number;
  height: number;
  /** Per-layer visibility; omitted means all layers visible. */
  visibility?: boolean[];
  mode?: DisplayMode;
  earlyExit?: boolean;
}

/**
 * Layer indices to draw this frame: the manifest draw order with hidden
 * layers removed.  This is the only place a frame's order comes from;
 * there is no sorting anywhere in either render path.
 */
export function layerDrawList(manifest: BundleManifest, visibility?: boolean[]): number[] {
  if (visibility !== undefined && visibility.length !== manifest.layerCount) {
    throw new Error('visibility list length must equal the layer count');
  }
  return manifest.drawOrder.filter((layer) => visibility === undefined || visibility[layer]);
}

interface Hit {
  t: number;
  tri: number;
  u: number;
  v: number;
}

/**
 * Nearest triangle intersection along one ray; ties on t resolve to the
 * lowest triangle id.  Intersections at t <= tMin are ignored.
 */
export function nearestHit(
  mesh: ParsedMesh,
  ox: number, oy: number, oz: number,
  dx: number, dy: number, dz: number,
  tMin = 1e-7,
): Hit | null {
  const pos = mesh.positions;
  const faces = mesh.faces;
  let bestT = Infinity;
  let bestTri = -1;
  let bestU = 0.0;
  let bestV = 0.0;
  for (let tri = 0; tri < mesh.triangleCount; tri++) {
    const i0 = faces[tri * 3] * 3;
    const i1 = faces[tri * 3 + 1] * 3;
    const i2 = faces[tri * 3 + 2] * 3;
    const ax = pos[i0];
    const ay = pos[i0 + 1];
    const az = pos[i0 + 2];
    const e1x = pos[i1] - ax;
    const e1y = pos[i1 + 1] - ay;
    const e1z = pos[i1 + 2] - az;
    const e2x = pos[i2] - ax;
    const e2y = pos[i2 + 1] - ay;
    const e2z = pos[i2 + 2] - az;
    const px = dy * e2z - dz * e2y;
    const py = dz * e2x - dx * e2z;
    const pz = dx * e2y - dy * e2x;
    const det = e1x * px + e1y * py + e1z * pz;
    if (det > -1e-13 && det < 1e-13) {
      continue;
    }
    const invDet = 1.0 / det;
    const tvx = ox - ax;
    const tvy = oy - ay;
    const tvz = oz - az;
    const u = (tvx * px + tvy * py + tvz * pz) * invDet;
    if (u < 0.0 || u > 1.0) {
      continue;
    }
    const qx = tvy * e1z - tvz * e1y;
    const qy = tvz * e1x - tvx * e1z;
    const qz = tvx * e1y - tvy * e1x;
    const v = (dx * qx + dy * qy + dz * qz) * invDet;
    if (v < 0.0 || u + v > 1.0) {
      continue;
    }
    const t = (e2x * qx + e2y * qy + e2z * qz) * invDet;
    if (t <= tMin || t > bestT) {
      continue;
    }
    if (t < bestT || tri < bestTri) {
      bestT = t;
      bestTri = tri;
      bestU = u;
      bestV = v;
    }
  }
  return bestTri < 0 ? null : { t: bestT, tri: bestTri, u: bestU, v: bestV };
}

/**
 * Bilinear sample of one channel with texel centers at (i+0.5)/W and
 * clamp-to-edge, on 8-bit data scaled to [0, 1].
 */
export function sampleBilinear(img: DecodedImage, u: number, v: number, channel: number): number {
  const w = img.width;
  const h = img.height;
  let x = u * w - 0.5;
  let y = v * h - 0.5;
  x = x < 0.0 ? 0.0 : (x > w - 1 ? w - 1 : x);
  y = y < 0.0 ? 0.0 : (y > h - 1 ? h - 1 : y);
  const x0 = Math.floor(x);
  const y0 = Math.floor(y);
  const x1 = Math.min(x0 + 1, w - 1);
  const y1 = Math.min(y0 + 1, h - 1);
  const fx = x - x0;
  const fy = y - y0;
  const d = img.data;
  const d00 = d[(y0 * w + x0) * 4 + channel] / 255.0;
  const d10 = d[(y0 * w + x1) * 4 + channel] / 255.0;
  const d01 = d[(y1 * w + x0) * 4 + channel] / 255.0;
  const d11 = d[(y1 * w + x1) * 4 + channel] / 255.0;
  const top = d00 * (1.0 - fx) + d10 * fx;
  const bot = d01 * (1.0 - fx) + d11 * fx;
  return top * (1.0 - fy) + bot * fy;
}

/**
 * Decode RGBA in [0, 1] at surface uv for a unit view direction: bilinear
 * coefficient fetch, rescale to the manifest value range, dot with the SH
 * basis, final sigmoid.  Writes into `out` (length 4).
 */
export function decodeRgba(
  images: DecodedImage[],
  degree: number,
  vMin: number,
  vMax: number,
  u: number,
  v: number,
  basis: Float64Array,
  out: Float64Array,
): void {
  const span = vMax - vMin;
  let accR = 0.0;
  let accG = 0.0;
  let accB = 0.0;
  let accA = 0.0;
  const count = (degree + 1) * (degree + 1);
  for (let i = 0; i < count; i++) {
    const img = images[i];
    const b = basis[i];
    accR += (vMin + span * sampleBilinear(img, u, v, 0)) * b;
    accG += (vMin + span * sampleBilinear(img, u, v, 1)) * b;
    accB += (vMin + span * sampleBilinear(img, u, v, 2)) * b;
    accA += (vMin + span * sampleBilinear(img, u, v, 3)) * b;
  }
  out[0] = sigmoid(accR);
  out[1] = sigmoid(accG);
  out[2] = sigmoid(accB);
  out[3] = sigmoid(accA);
}

/** Grazing-angle opacity factor 2*sigmoid(c*|v.n|) - 1. */
export function alphaAttenuation(facing: number, constant: number): number {
  return 2.0 * sigmoid(constant * facing) - 1.0;
}

/**
 * Render a frame on the CPU.  Output is tightly packed float RGBA in
 * [0, 1], row 0 at the top, premultiplied like the frame the GPU path
 * composites (color over background, alpha is accumulated coverage).
 */
export function renderSoftware(
  manifest: BundleManifest,
  layers: LayerData[],
  camera: PinholeCamera,
  options: SoftRenderOptions,
): Float64Array {
  const { width, height } = options;
  const mode = options.mode ?? 'composite';
  const earlyExit = options.earlyExit ?? true;
  const order = layerDrawList(manifest, options.visibility);
  const vMin = manifest.valueRange.min;
  const vMax = manifest.valueRange.max;
  const attenC = manifest.attenuation.constant;
  const degree = manifest.shDegree;
  const bg = manifest.background;

  const out = new Float64Array(width * height * 4);
  const dir = new Float64Array(3);
  const basis = new Float64Array(16);
  const rgba = new Float64Array(4);
  const [ox, oy, oz] = camera.position;

  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      pixelRayDirection(camera, x, y, dir);
      const dx = dir[0];
      const dy = dir[1];
      const dz = dir[2];
      let accR = 0.0;
      let accG = 0.0;
      let accB = 0.0;
      let trans = 1.0;
      let debugDone = false;
      for (const layerIndex of order) {
        if (mode === 'composite' && earlyExit && trans < EARLY_EXIT_TRANSMITTANCE) {
          break;
        }
        if (mode !== 'composite' && debugDone) {
          break;
        }
        const layer = layers[layerIndex];
        const hit = nearestHit(layer.mesh, ox, oy, oz, dx, dy, dz);
        if (hit === null) {
          continue;
        }
        const mesh = layer.mesh;
        const f0 = mesh.faces[hit.tri * 3];
        const f1 = mesh.faces[hit.tri * 3 + 1];
        const f2 = mesh.faces[hit.tri * 3 + 2];
        const w0 = 1.0 - hit.u - hit.v;
        const w1 = hit.u;
        const w2 = hit.v;
        const u = w0 * mesh.uvs[f0 * 2] + w1 * mesh.uvs[f1 * 2] + w2 * mesh.uvs[f2 * 2];
        const v = w0 * mesh.uvs[f0 * 2 + 1] + w1 * mesh.uvs[f1 * 2 + 1] + w2 * mesh.uvs[f2 * 2 + 1];
        let nx = w0 * mesh.normals[f0 * 3] + w1 * mesh.normals[f1 * 3] + w2 * mesh.normals[f2 * 3];
        let ny = w0 * mesh.normals[f0 * 3 + 1] + w1 * mesh.normals[f1 * 3 + 1] + w2 * mesh.normals[f2 * 3 + 1];
        let nz = w0 * mesh.normals[f0 * 3 + 2] + w1 * mesh.normals[f1 * 3 + 2] + w2 * mesh.normals[f2 * 3 + 2];
        const nLen = Math.max(Math.hypot(nx, ny, nz), 1e-12);
        nx /= nLen;
        ny /= nLen;
        nz /= nLen;

        shBasis(degree, dx, dy, dz, basis);
        decodeRgba(layer.images, degree, vMin, vMax, u, v, basis, rgba);
        const facing = Math.abs(dx * nx + dy * ny + dz * nz);
        const alpha = rgba[3] * alphaAttenuation(facing, attenC);

        if (mode === 'composite') {
          const contrib = trans * alpha;
          accR += contrib * rgba[0];
          accG += contrib * rgba[1];
          accB += contrib * rgba[2];
          trans *= 1.0 - alpha;
        } else {
          // Inspection modes show the first visible layer hit, opaque.
          if (mode === 'normals') {
            accR = nx * 0.5 + 0.5;
            accG = ny * 0.5 + 0.5;
            accB = nz * 0.5 + 0.5;
          } else if (mode === 'uvs') {
            accR = u;
            accG = v;
            accB = 0.0;
          } else if (mode === 'opacity') {
            accR = alpha;
            accG = alpha;
            accB = alpha;
          } else {
            accR = alpha * rgba[0];
            accG = alpha * rgba[1];
            accB = alpha * rgba[2];
          }
          trans = 0.0;
          debugDone = true;
        }
      }
      const p = (y * width + x) * 4;
      if (mode === 'composite') {
        out[p] = accR + trans * bg[0];
        out[p + 1] = accG + trans * bg[1];
        out[p + 2] = accB + trans * bg[2];
        out[p + 3] = 1.0 - trans;
      } else {
        out[p] = accR;
        out[p + 1] = accG;
        out[p + 2] = accB;
        out[p + 3] = 1.0 - trans;
      }
    }
  }
  return out;
}
