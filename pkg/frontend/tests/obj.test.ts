import { describe, expect, it } from 'vitest';

import { parseObj } from '../src/obj.js';
import { fixtureBundle } from './helpers.js';

const TWO_TRIANGLES = `
v 0 0 0
v 1 0 0
v 0 1 0
v 1 1 0
vt 0 0
vt 1 0
vt 0 1
vt 1 1
vn 0 0 1
vn 0 0 1
vn 0 0 1
vn 0 0 1
f 1/1/1 2/2/2 3/3/3
f 2/2/2 4/4/4 3/3/3
`;

describe('parseObj', () => {
  it('parses vertices, uvs, normals, and shared corners', () => {
    const mesh = parseObj(TWO_TRIANGLES);
    expect(mesh.vertexCount).toBe(4);
    expect(mesh.triangleCount).toBe(2);
    expect(Array.from(mesh.faces)).toEqual([0, 1, 2, 1, 3, 2]);
    expect(mesh.positions[3]).toBe(1);
    expect(mesh.uvs[7]).toBe(1);
    expect(mesh.normals[2]).toBe(1);
  });

  it('splits corners that disagree on any index', () => {
    const text = [
      'v 0 0 0', 'v 1 0 0', 'v 0 1 0',
      'vt 0 0', 'vt 1 0', 'vt 0 1', 'vt 0.5 0.5',
      'vn 0 0 1', 'vn 0 0 1', 'vn 0 0 1',
      'f 1/1/1 2/2/2 3/3/3',
      'f 1/4/1 2/2/2 3/3/3',
    ].join('\n');
    const mesh = parseObj(text);
    expect(mesh.vertexCount).toBe(4);
    expect(mesh.faces[3]).toBe(3);
  });

  it('rejects non-triangle faces', () => {
    expect(() => parseObj('v 0 0 0\nf 1 1 1 1')).toThrowError(/triangle/);
  });

  it('parses every fixture layer with attributes in range', async () => {
    const bundle = await fixtureBundle();
    expect(bundle.layers).toHaveLength(3);
    for (const layer of bundle.layers) {
      const mesh = layer.mesh;
      expect(mesh.triangleCount).toBeGreaterThan(100);
      expect(mesh.uvs).toHaveLength(mesh.vertexCount * 2);
      expect(mesh.normals).toHaveLength(mesh.vertexCount * 3);
      for (let i = 0; i < mesh.uvs.length; i++) {
        expect(mesh.uvs[i]).toBeGreaterThanOrEqual(0.0);
        expect(mesh.uvs[i]).toBeLessThanOrEqual(1.0);
      }
      for (let v = 0; v < mesh.vertexCount; v++) {
        const len = Math.hypot(
          mesh.normals[v * 3], mesh.normals[v * 3 + 1], mesh.normals[v * 3 + 2],
        );
        expect(len).toBeGreaterThan(0.5);
        expect(len).toBeLessThan(1.5);
      }
      for (let i = 0; i < mesh.faces.length; i++) {
        expect(mesh.faces[i]).toBeLessThan(mesh.vertexCount);
      }
    }
  });
});
