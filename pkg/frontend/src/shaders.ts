/**
 * GLSL ES 3.00 shader sources for the shell renderer.
 *
 * The fragment shader is generated per bundle (one sampler per SH
 * coefficient) and interpolates its basis constants from the same values
 * the software renderer uses, so the two decode paths cannot drift.
 * Decode parameters that belong to the bundle (value range, attenuation
 * constant) arrive as uniforms filled from the manifest; only the
 * mathematical basis constants are compiled in.
 */

import { BAND_SIZES } from './manifest.js';
import { SH_C0, SH_C1, SH_C2, SH_C3 } from './sh.js';

/** Display mode integers shared between the shader and the UI. */
export const MODE_COMPOSITE = 0;
export const MODE_NORMALS = 1;
export const MODE_UVS = 2;
export const MODE_OPACITY = 3;
export const MODE_COLOR = 4;

export const VERTEX_SHADER = /* glsl */ `#version 300 es
layout(location = 0) in vec3 a_position;
layout(location = 1) in vec2 a_uv;
layout(location = 2) in vec3 a_normal;

uniform mat4 u_viewProj;

out vec2 v_uv;
out vec3 v_normal;
out vec3 v_world;

void main() {
  v_uv = a_uv;
  v_normal = a_normal;
  v_world = a_position;
  gl_Position = u_viewProj * vec4(a_position, 1.0);
}
`;

export const BACKGROUND_VERTEX_SHADER = /* glsl */ `#version 300 es
void main() {
  // Fullscreen triangle from the vertex id alone.
  vec2 corner = vec2(float((gl_VertexID << 1) & 2), float(gl_VertexID & 2));
  gl_Position = vec4(corner * 2.0 - 1.0, 0.0, 1.0);
}
`;

export const BACKGROUND_FRAGMENT_SHADER = /* glsl */ `#version 300 es
precision highp float;

uniform vec3 u_background;

out vec4 outColor;

void main() {
  outColor = vec4(u_background, 1.0);
}
`;

function shBasisGlsl(degree: number): string {
  const lines: string[] = [
    `  basis[0] = ${glFloat(SH_C0)};`,
  ];
  if (degree >= 1) {
    lines.push(
      `  basis[1] = ${glFloat(-SH_C1)} * d.y;`,
      `  basis[2] = ${glFloat(SH_C1)} * d.z;`,
      `  basis[3] = ${glFloat(-SH_C1)} * d.x;`,
    );
  }
  if (degree >= 2) {
    lines.push(
      '  float xx = d.x * d.x;',
      '  float yy = d.y * d.y;',
      '  float zz = d.z * d.z;',
      `  basis[4] = ${glFloat(SH_C2[0])} * d.x * d.y;`,
      `  basis[5] = ${glFloat(SH_C2[1])} * d.y * d.z;`,
      `  basis[6] = ${glFloat(SH_C2[2])} * (2.0 * zz - xx - yy);`,
      `  basis[7] = ${glFloat(SH_C2[3])} * d.x * d.z;`,
      `  basis[8] = ${glFloat(SH_C2[4])} * (xx - yy);`,
    );
  }
  if (degree >= 3) {
    lines.push(
      `  basis[9] = ${glFloat(SH_C3[0])} * d.y * (3.0 * xx - yy);`,
      `  basis[10] = ${glFloat(SH_C3[1])} * d.x * d.y * d.z;`,
      `  basis[11] = ${glFloat(SH_C3[2])} * d.y * (4.0 * zz - xx - yy);`,
      `  basis[12] = ${glFloat(SH_C3[3])} * d.z * (2.0 * zz - 3.0 * xx - 3.0 * yy);`,
      `  basis[13] = ${glFloat(SH_C3[4])} * d.x * (4.0 * zz - xx - yy);`,
      `  basis[14] = ${glFloat(SH_C3[5])} * d.z * (xx - yy);`,
      `  basis[15] = ${glFloat(SH_C3[6])} * d.x * (xx - 3.0 * yy);`,
    );
  }
  return lines.join('\n');
}

function glFloat(x: number): string {
  const s = String(x);
  return s.includes('.') || s.includes('e') || s.includes('E') ? s : `${s}.0`;
}

/** Number of SH coefficients (and sampler uniforms) for a degree. */
export function coefficientCount(degree: number): number {
  return (degree + 1) * (degree + 1);
}

/**
 * Fragment shader for a bundle of the given SH degree.  One sampler per
 * coefficient image; the value range and attenuation constant are
 * uniforms so the decode follows the manifest, never compiled-in values.
 */
export function buildFragmentShader(degree: number): string {
  if (!(degree >= 0 && degree <= 3)) {
    throw new Error('degree must be in [0,3]');
  }
  const n = coefficientCount(degree);
  const samplers = Array.from(
    { length: n },
    (_, i) => `uniform sampler2D u_coef${i};`,
  ).join('\n');
  const taps = Array.from(
    { length: n },
    (_, i) => `  acc += (u_valueMin + u_valueSpan * texture(u_coef${i}, v_uv)) * basis[${i}];`,
  ).join('\n');
  return /* glsl */ `#version 300 es
precision highp float;

in vec2 v_uv;
in vec3 v_normal;
in vec3 v_world;

uniform vec3 u_cameraPos;
uniform float u_valueMin;
uniform float u_valueSpan;
uniform float u_attenuation;
uniform int u_mode;
${samplers}

out vec4 outColor;

void main() {
  vec3 d = normalize(v_world - u_cameraPos);
  float basis[${n}];
${shBasisGlsl(degree)}
  vec4 acc = vec4(0.0);
${taps}
  vec4 rgba = 1.0 / (1.0 + exp(-acc));
  vec3 n = normalize(v_normal);
  float facing = abs(dot(d, n));
  float atten = 2.0 / (1.0 + exp(-u_attenuation * facing)) - 1.0;
  float alpha = rgba.a * atten;
  if (u_mode == ${MODE_COMPOSITE}) {
    outColor = vec4(rgba.rgb * alpha, alpha);
  } else if (u_mode == ${MODE_NORMALS}) {
    outColor = vec4(n * 0.5 + 0.5, 1.0);
  } else if (u_mode == ${MODE_UVS}) {
    outColor = vec4(v_uv, 0.0, 1.0);
  } else if (u_mode == ${MODE_OPACITY}) {
    outColor = vec4(vec3(alpha), 1.0);
  } else {
    outColor = vec4(rgba.rgb * alpha, 1.0);
  }
}
`;
}

/** Flat coefficient index range [start, end) covered by one band. */
export function bandCoefficientRange(band: number): [number, number] {
  const start = band * band;
  return [start, start + BAND_SIZES[band]];
}
