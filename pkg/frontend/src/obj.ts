/**
 * Wavefront OBJ parsing for layer meshes.
 *
 * Bundles store triangle meshes with per-vertex positions, texture
 * coordinates, and normals, faces written as `f v/vt/vn` triplets.
 * Parsing splits corners on distinct index triplets (first-use order),
 * matching how the exporter indexes vertices, so a parsed mesh uses the
 * same vertex order the exporter wrote.
 */

export interface ParsedMesh {
  /** xyz per vertex. */
  positions: Float64Array;
  /** uv per vertex; zero length when the file carries no texcoords. */
  uvs: Float64Array;
  /** xyz per vertex; zero length when the file carries no normals. */
  normals: Float64Array;
  /** Three vertex ids per triangle. */
  faces: Uint32Array;
  vertexCount: number;
  triangleCount: number;
}

export function parseObj(text: string): ParsedMesh {
  const vs: number[] = [];
  const vts: number[] = [];
  const vns: number[] = [];
  const cornerIds = new Map<string, number>();
  const cornerV: number[] = [];
  const cornerT: number[] = [];
  const cornerN: number[] = [];
  const faces: number[] = [];

  const lines = text.split('\n');
  for (const line of lines) {
    const parts = line.trim().split(/\s+/);
    if (parts.length === 0 || parts[0] === '') {
      continue;
    }
    const tag = parts[0];
    if (tag === 'v') {
      vs.push(Number(parts[1]), Number(parts[2]), Number(parts[3]));
    } else if (tag === 'vt') {
      vts.push(Number(parts[1]), Number(parts[2]));
    } else if (tag === 'vn') {
      vns.push(Number(parts[1]), Number(parts[2]), Number(parts[3]));
    } else if (tag === 'f') {
      if (parts.length !== 4) {
        throw new Error('only triangle faces are supported');
      }
      for (let c = 1; c <= 3; c++) {
        const toks = parts[c].split('/');
        const vi = parseInt(toks[0], 10) - 1;
        const ti = toks.length > 1 && toks[1] !== '' ? parseInt(toks[1], 10) - 1 : vi;
        const ni = toks.length > 2 && toks[2] !== '' ? parseInt(toks[2], 10) - 1 : vi;
        const key = `${vi}/${ti}/${ni}`;
        let id = cornerIds.get(key);
        if (id === undefined) {
          id = cornerIds.size;
          cornerIds.set(key, id);
          cornerV.push(vi);
          cornerT.push(ti);
          cornerN.push(ni);
        }
        faces.push(id);
      }
    }
  }

  const vertexCount = cornerIds.size;
  const positions = new Float64Array(vertexCount * 3);
  const uvs = new Float64Array(vts.length > 0 ? vertexCount * 2 : 0);
  const normals = new Float64Array(vns.length > 0 ? vertexCount * 3 : 0);
  for (let i = 0; i < vertexCount; i++) {
    const vi = cornerV[i];
    positions[i * 3] = vs[vi * 3];
    positions[i * 3 + 1] = vs[vi * 3 + 1];
    positions[i * 3 + 2] = vs[vi * 3 + 2];
    if (uvs.length > 0) {
      const ti = cornerT[i];
      uvs[i * 2] = vts[ti * 2];
      uvs[i * 2 + 1] = vts[ti * 2 + 1];
    }
    if (normals.length > 0) {
      const ni = cornerN[i];
      normals[i * 3] = vns[ni * 3];
      normals[i * 3 + 1] = vns[ni * 3 + 1];
      normals[i * 3 + 2] = vns[ni * 3 + 2];
    }
  }
  return {
    positions,
    uvs,
    normals,
    faces: Uint32Array.from(faces),
    vertexCount,
    triangleCount: faces.length / 3,
  };
}
