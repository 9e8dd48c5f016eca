/**
 * Bundle manifest schema and validation.
 *
 * A bundle directory holds manifest.json, one OBJ mesh per layer, and one
 * RGBA PNG per spherical-harmonics coefficient per layer.  Validation
 * mirrors the exporter's invariants and reports the offending field by
 * name so load failures can be shown to the person driving the viewer.
 */

export const FORMAT_TAG = 'sdfshells-bundle';
export const FORMAT_VERSION = 1;
export const ROUNDING_TAG = 'half-away-from-zero';

/** Coefficients contributed by each spherical-harmonics band. */
export const BAND_SIZES = [1, 3, 5, 7] as const;

export class BundleFormatError extends Error {
  constructor(field: string, message: string) {
    super(`${field}: ${message}`);
    this.name = 'BundleFormatError';
  }
}

export interface BandEntry {
  resolution: number;
  images: string[];
}

export interface LayerEntry {
  mesh: string;
  bands: BandEntry[];
}

export interface ValueRange {
  min: number;
  max: number;
}

export interface AttenuationSpec {
  constant: number;
  formula: string;
}

export interface CameraSpec {
  target: [number, number, number];
  distance: number;
  yawDeg: number;
  pitchDeg: number;
  fovYDeg: number;
}

export interface BundleManifest {
  format: string;
  version: number;
  name: string;
  layerCount: number;
  drawOrder: number[];
  shDegree: number;
  valueRange: ValueRange;
  rounding: string;
  attenuation: AttenuationSpec;
  background: [number, number, number];
  camera: CameraSpec;
  layers: LayerEntry[];
}

function expect(cond: boolean, field: string, message: string): asserts cond {
  if (!cond) {
    throw new BundleFormatError(field, message);
  }
}

function isRecord(value: unknown): value is Record<string, unknown> {
  return typeof value === 'object' && value !== null && !Array.isArray(value);
}

function getField(obj: Record<string, unknown>, key: string, field: string): unknown {
  const path = field ? `${field}.${key}` : key;
  expect(key in obj, path, 'missing field');
  return obj[key];
}

function getNumber(obj: Record<string, unknown>, key: string, field: string): number {
  const value = getField(obj, key, field);
  const path = field ? `${field}.${key}` : key;
  expect(typeof value === 'number' && Number.isFinite(value), path, 'must be a number');
  return value;
}

function getInt(obj: Record<string, unknown>, key: string, field: string): number {
  const value = getNumber(obj, key, field);
  const path = field ? `${field}.${key}` : key;
  expect(Number.isInteger(value), path, 'must be an integer');
  return value;
}

function getString(obj: Record<string, unknown>, key: string, field: string): string {
  const value = getField(obj, key, field);
  const path = field ? `${field}.${key}` : key;
  expect(typeof value === 'string', path, 'must be a string');
  return value;
}

function getArray(obj: Record<string, unknown>, key: string, field: string): unknown[] {
  const value = getField(obj, key, field);
  const path = field ? `${field}.${key}` : key;
  expect(Array.isArray(value), path, 'must be an array');
  return value;
}

function getObject(obj: Record<string, unknown>, key: string, field: string): Record<string, unknown> {
  const value = getField(obj, key, field);
  const path = field ? `${field}.${key}` : key;
  expect(isRecord(value), path, 'must be an object');
  return value;
}

function getColor3(obj: Record<string, unknown>, key: string, field: string): [number, number, number] {
  const raw = getArray(obj, key, field);
  const path = field ? `${field}.${key}` : key;
  expect(raw.length === 3, path, 'must have three components');
  expect(raw.every((c) => typeof c === 'number' && Number.isFinite(c)), path,
    'components must be numbers');
  return [raw[0] as number, raw[1] as number, raw[2] as number];
}

/**
 * Validate a parsed manifest.json value and return the typed manifest.
 * Throws BundleFormatError naming the offending field on any violation.
 */
export function validateManifest(raw: unknown): BundleManifest {
  expect(isRecord(raw), 'manifest', 'must be an object');

  const format = getString(raw, 'format', '');
  expect(format === FORMAT_TAG, 'format', `unknown format '${format}'`);
  const version = getInt(raw, 'version', '');
  if (version !== FORMAT_VERSION) {
    throw new BundleFormatError(
      'version',
      `unsupported bundle version ${version} (supported: ${FORMAT_VERSION})`,
    );
  }
  const name = getString(raw, 'name', '');
  const layerCount = getInt(raw, 'layer_count', '');
  expect(layerCount >= 1 && layerCount <= 9, 'layer_count', 'must be in [1,9]');

  const drawOrderRaw = getArray(raw, 'draw_order', '');
  const drawOrder = drawOrderRaw.map((v) => v as number);
  const identity = drawOrder.length === layerCount
    && drawOrder.every((v, i) => v === i);
  expect(identity, 'draw_order', 'must list every layer exactly once, outermost first');

  const shDegree = getInt(raw, 'sh_degree', '');
  expect(shDegree >= 0 && shDegree <= 3, 'sh_degree', 'must be in [0,3]');

  const vrange = getObject(raw, 'value_range', '');
  const vMin = getNumber(vrange, 'min', 'value_range');
  const vMax = getNumber(vrange, 'max', 'value_range');
  expect(vMin < vMax, 'value_range', 'min must be below max');

  const rounding = getString(raw, 'rounding', '');
  expect(rounding === ROUNDING_TAG, 'rounding', `unsupported rounding mode '${rounding}'`);

  const atten = getObject(raw, 'attenuation', '');
  const constant = getNumber(atten, 'constant', 'attenuation');
  expect(constant > 0, 'attenuation.constant', 'must be positive');
  const formula = getString(atten, 'formula', 'attenuation');

  const background = getColor3(raw, 'background', '');

  const cam = getObject(raw, 'camera', '');
  const camera: CameraSpec = {
    target: getColor3(cam, 'target', 'camera'),
    distance: getNumber(cam, 'distance', 'camera'),
    yawDeg: getNumber(cam, 'yaw_deg', 'camera'),
    pitchDeg: getNumber(cam, 'pitch_deg', 'camera'),
    fovYDeg: getNumber(cam, 'fov_y_deg', 'camera'),
  };
  expect(camera.distance > 0, 'camera.distance', 'must be positive');

  const layersRaw = getArray(raw, 'layers', '');
  expect(layersRaw.length === layerCount, 'layers', 'must have layer_count entries');
  const layers: LayerEntry[] = layersRaw.map((entry, j) => {
    const field = `layers[${j}]`;
    expect(isRecord(entry), field, 'must be an object');
    const mesh = getString(entry, 'mesh', field);
    const bandsRaw = getArray(entry, 'bands', field);
    expect(bandsRaw.length === shDegree + 1, `${field}.bands`,
      'must have one entry per SH band');
    let prevRes = Infinity;
    const bands: BandEntry[] = bandsRaw.map((bandEntry, b) => {
      const bfield = `${field}.bands[${b}]`;
      expect(isRecord(bandEntry), bfield, 'must be an object');
      const resolution = getInt(bandEntry, 'resolution', bfield);
      expect(resolution >= 1, `${bfield}.resolution`, 'must be positive');
      expect(resolution <= prevRes, `${bfield}.resolution`,
        'band resolutions must be non-increasing');
      prevRes = resolution;
      const imagesRaw = getArray(bandEntry, 'images', bfield);
      expect(imagesRaw.length === BAND_SIZES[b], `${bfield}.images`,
        `band ${b} needs ${BAND_SIZES[b]} images`);
      const images = imagesRaw.map((nameValue) => {
        expect(typeof nameValue === 'string', `${bfield}.images`,
          'filenames must be strings');
        return nameValue;
      });
      return { resolution, images };
    });
    return { mesh, bands };
  });

  return {
    format,
    version,
    name,
    layerCount,
    drawOrder,
    shDegree,
    valueRange: { min: vMin, max: vMax },
    rounding,
    attenuation: { constant, formula },
    background,
    camera,
    layers,
  };
}
