import { describe, expect, it } from 'vitest';

import { shBasis } from '../src/sh.js';
import {
  alphaAttenuation,
  decodeRgba,
  sampleBilinear,
} from '../src/softrender.js';
import { fixtureBundle, readJson } from './helpers.js';

interface DecodeCase {
  layer: number;
  uv: [number, number];
  dir: [number, number, number];
  rgba: [number, number, number, number];
}

describe('decodeRgba', () => {
  it('matches the reference decode on sampled coordinates', async () => {
    const bundle = await fixtureBundle();
    const cases = await readJson<DecodeCase[]>('decode_cases.json');
    expect(cases).toHaveLength(12);
    const { min, max } = bundle.manifest.valueRange;
    const out = new Float64Array(4);
    for (const c of cases) {
      const basis = shBasis(3, c.dir[0], c.dir[1], c.dir[2]);
      decodeRgba(
        bundle.layers[c.layer].images, 3, min, max, c.uv[0], c.uv[1], basis, out,
      );
      for (let i = 0; i < 4; i++) {
        expect(Math.abs(out[i] - c.rgba[i])).toBeLessThan(1e-9);
      }
    }
  });
});

describe('sampleBilinear', () => {
  const image = {
    width: 2,
    height: 2,
    // R channel: 0, 255 / 510*0.5=..., values chosen per texel.
    data: new Uint8Array([
      0, 0, 0, 0, /* */ 255, 0, 0, 0,
      102, 0, 0, 0, /* */ 204, 0, 0, 0,
    ]),
  };

  it('returns texel values exactly at texel centers', () => {
    expect(sampleBilinear(image, 0.25, 0.25, 0)).toBeCloseTo(0.0, 12);
    expect(sampleBilinear(image, 0.75, 0.25, 0)).toBeCloseTo(1.0, 12);
    expect(sampleBilinear(image, 0.25, 0.75, 0)).toBeCloseTo(102 / 255, 12);
  });

  it('interpolates midway between texel centers', () => {
    expect(sampleBilinear(image, 0.5, 0.25, 0)).toBeCloseTo(0.5, 12);
    expect(sampleBilinear(image, 0.25, 0.5, 0)).toBeCloseTo(51 / 255, 12);
  });

  it('clamps to the edge texels outside the center grid', () => {
    expect(sampleBilinear(image, 0.0, 0.0, 0)).toBeCloseTo(0.0, 12);
    expect(sampleBilinear(image, 1.0, 0.0, 0)).toBeCloseTo(1.0, 12);
    expect(sampleBilinear(image, 1.0, 1.0, 0)).toBeCloseTo(204 / 255, 12);
  });
});

describe('alphaAttenuation', () => {
  it('hits its endpoints', () => {
    expect(alphaAttenuation(0.0, 10.0)).toBeCloseTo(0.0, 12);
    expect(alphaAttenuation(1.0, 10.0)).toBeCloseTo(Math.tanh(5.0), 9);
  });

  it('scales with the manifest constant, not a baked-in value', () => {
    expect(alphaAttenuation(1.0, 2.0)).toBeCloseTo(Math.tanh(1.0), 9);
    expect(alphaAttenuation(0.5, 4.0)).toBeCloseTo(Math.tanh(1.0), 9);
  });
});
