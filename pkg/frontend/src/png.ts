/**
 * Minimal PNG decoding for coefficient images.
 *
 * Handles the subset the bundle exporter writes: 8-bit non-interlaced
 * grayscale, RGB, or RGBA, any scanline filter.  Decompression is
 * injected so the decoder runs both under node (zlib) and in the browser
 * (DecompressionStream) without bundling an inflate implementation.
 */

export interface DecodedImage {
  width: number;
  height: number;
  /** Tightly packed RGBA, 4 bytes per pixel, row 0 at the top. */
  data: Uint8Array;
}

export type Inflate = (compressed: Uint8Array) => Uint8Array | Promise<Uint8Array>;

const PNG_SIGNATURE = [137, 80, 78, 71, 13, 10, 26, 10];

const CHANNELS_BY_COLOR_TYPE: Record<number, number> = {
  0: 1, // grayscale
  2: 3, // rgb
  4: 2, // grayscale + alpha
  6: 4, // rgba
};

function paeth(a: number, b: number, c: number): number {
  const p = a + b - c;
  const pa = Math.abs(p - a);
  const pb = Math.abs(p - b);
  const pc = Math.abs(p - c);
  if (pa <= pb && pa <= pc) {
    return a;
  }
  return pb <= pc ? b : c;
}

function unfilter(raw: Uint8Array, width: number, height: number, channels: number): Uint8Array {
  const stride = width * channels;
  const out = new Uint8Array(stride * height);
  for (let y = 0; y < height; y++) {
    const filter = raw[y * (stride + 1)];
    const src = y * (stride + 1) + 1;
    const dst = y * stride;
    const prev = dst - stride;
    for (let x = 0; x < stride; x++) {
      const left = x >= channels ? out[dst + x - channels] : 0;
      const up = y > 0 ? out[prev + x] : 0;
      const upLeft = y > 0 && x >= channels ? out[prev + x - channels] : 0;
      const value = raw[src + x];
      let recon: number;
      switch (filter) {
        case 0:
          recon = value;
          break;
        case 1:
          recon = value + left;
          break;
        case 2:
          recon = value + up;
          break;
        case 3:
          recon = value + ((left + up) >> 1);
          break;
        case 4:
          recon = value + paeth(left, up, upLeft);
          break;
        default:
          throw new Error(`unsupported PNG filter type ${filter}`);
      }
      out[dst + x] = recon & 0xff;
    }
  }
  return out;
}

function toRgba(pixels: Uint8Array, count: number, channels: number): Uint8Array {
  if (channels === 4) {
    return pixels;
  }
  const out = new Uint8Array(count * 4);
  for (let i = 0; i < count; i++) {
    const s = i * channels;
    const d = i * 4;
    if (channels === 1) {
      out[d] = out[d + 1] = out[d + 2] = pixels[s];
      out[d + 3] = 255;
    } else if (channels === 2) {
      out[d] = out[d + 1] = out[d + 2] = pixels[s];
      out[d + 3] = pixels[s + 1];
    } else {
      out[d] = pixels[s];
      out[d + 1] = pixels[s + 1];
      out[d + 2] = pixels[s + 2];
      out[d + 3] = 255;
    }
  }
  return out;
}

function readU32(bytes: Uint8Array, at: number): number {
  return ((bytes[at] << 24) | (bytes[at + 1] << 16) | (bytes[at + 2] << 8) | bytes[at + 3]) >>> 0;
}

export async function decodePng(bytes: Uint8Array, inflate: Inflate): Promise<DecodedImage> {
  if (bytes.length < 8 || PNG_SIGNATURE.some((b, i) => bytes[i] !== b)) {
    throw new Error('not a PNG file');
  }
  let width = 0;
  let height = 0;
  let bitDepth = 0;
  let colorType = -1;
  const idat: Uint8Array[] = [];
  let at = 8;
  while (at + 8 <= bytes.length) {
    const length = readU32(bytes, at);
    const type = String.fromCharCode(bytes[at + 4], bytes[at + 5], bytes[at + 6], bytes[at + 7]);
    const body = bytes.subarray(at + 8, at + 8 + length);
    if (type === 'IHDR') {
      width = readU32(body, 0);
      height = readU32(body, 4);
      bitDepth = body[8];
      colorType = body[9];
      if (body[12] !== 0) {
        throw new Error('interlaced PNG images are not supported');
      }
    } else if (type === 'IDAT') {
      idat.push(body);
    } else if (type === 'IEND') {
      break;
    }
    at += 12 + length;
  }
  if (width === 0 || height === 0) {
    throw new Error('PNG is missing its header');
  }
  if (bitDepth !== 8) {
    throw new Error(`unsupported PNG bit depth ${bitDepth}`);
  }
  const channels = CHANNELS_BY_COLOR_TYPE[colorType];
  if (channels === undefined) {
    throw new Error(`unsupported PNG color type ${colorType}`);
  }
  let total = 0;
  for (const part of idat) {
    total += part.length;
  }
  const compressed = new Uint8Array(total);
  let offset = 0;
  for (const part of idat) {
    compressed.set(part, offset);
    offset += part.length;
  }
  const raw = await inflate(compressed);
  const expected = height * (width * channels + 1);
  if (raw.length < expected) {
    throw new Error('PNG pixel data is truncated');
  }
  const pixels = unfilter(raw, width, height, channels);
  return { width, height, data: toRgba(pixels, width * height, channels) };
}
