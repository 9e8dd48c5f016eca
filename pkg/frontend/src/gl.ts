/**
 * WebGL2 shell renderer.
 *
 * One draw batch per layer: vertex buffers from the layer mesh and one
 * bilinear texture per SH coefficient.  Every frame draws the batches in
 * the manifest order (hidden layers skipped, nothing ever sorted) with
 * front-to-back under-compositing: premultiplied fragments blended with
 * ONE_MINUS_DST_ALPHA/ONE into a transparent frame, then a background
 * quad fills the remaining transmittance.  Each layer gets its own depth
 * pass so only the nearest fragment of that layer contributes, matching
 * the one-hit-per-layer ray tracer.
 *
 * The context is typed structurally so tests can drive the renderer with
 * a recording fake; a real WebGL2RenderingContext satisfies the interface.
 */

import type { OrbitPose } from './camera.js';
import { cameraFromOrbit, viewProjectionMatrix } from './camera.js';
import type { LoadedBundle } from './loader.js';
import { layerDrawList } from './softrender.js';
import type { ViewerState } from './state.js';
import {
  BACKGROUND_FRAGMENT_SHADER,
  BACKGROUND_VERTEX_SHADER,
  MODE_COLOR,
  MODE_COMPOSITE,
  MODE_NORMALS,
  MODE_OPACITY,
  MODE_UVS,
  VERTEX_SHADER,
  buildFragmentShader,
  coefficientCount,
} from './shaders.js';

export interface MinimalGl {
  readonly VERTEX_SHADER: number;
  readonly FRAGMENT_SHADER: number;
  readonly COMPILE_STATUS: number;
  readonly LINK_STATUS: number;
  readonly ARRAY_BUFFER: number;
  readonly ELEMENT_ARRAY_BUFFER: number;
  readonly STATIC_DRAW: number;
  readonly FLOAT: number;
  readonly UNSIGNED_INT: number;
  readonly UNSIGNED_BYTE: number;
  readonly TRIANGLES: number;
  readonly TEXTURE_2D: number;
  readonly TEXTURE0: number;
  readonly RGBA8: number;
  readonly RGBA: number;
  readonly TEXTURE_MIN_FILTER: number;
  readonly TEXTURE_MAG_FILTER: number;
  readonly TEXTURE_WRAP_S: number;
  readonly TEXTURE_WRAP_T: number;
  readonly LINEAR: number;
  readonly CLAMP_TO_EDGE: number;
  readonly BLEND: number;
  readonly DEPTH_TEST: number;
  readonly LESS: number;
  readonly EQUAL: number;
  readonly ONE: number;
  readonly ONE_MINUS_DST_ALPHA: number;
  readonly COLOR_BUFFER_BIT: number;
  readonly DEPTH_BUFFER_BIT: number;

  createShader(type: number): object | null;
  shaderSource(shader: object, source: string): void;
  compileShader(shader: object): void;
  getShaderParameter(shader: object, pname: number): unknown;
  getShaderInfoLog(shader: object): string | null;
  deleteShader(shader: object | null): void;
  createProgram(): object | null;
  attachShader(program: object, shader: object): void;
  linkProgram(program: object): void;
  getProgramParameter(program: object, pname: number): unknown;
  getProgramInfoLog(program: object): string | null;
  deleteProgram(program: object | null): void;
  useProgram(program: object | null): void;
  getUniformLocation(program: object, name: string): object | null;
  uniform1i(location: object | null, x: number): void;
  uniform1f(location: object | null, x: number): void;
  uniform3f(location: object | null, x: number, y: number, z: number): void;
  uniformMatrix4fv(location: object | null, transpose: boolean, value: Float32Array): void;
  createBuffer(): object | null;
  bindBuffer(target: number, buffer: object | null): void;
  bufferData(target: number, data: ArrayBufferView, usage: number): void;
  deleteBuffer(buffer: object | null): void;
  createVertexArray(): object | null;
  bindVertexArray(vao: object | null): void;
  deleteVertexArray(vao: object | null): void;
  enableVertexAttribArray(index: number): void;
  vertexAttribPointer(
    index: number, size: number, type: number, normalized: boolean,
    stride: number, offset: number,
  ): void;
  createTexture(): object | null;
  bindTexture(target: number, texture: object | null): void;
  activeTexture(unit: number): void;
  texImage2D(
    target: number, level: number, internalformat: number, width: number,
    height: number, border: number, format: number, type: number,
    pixels: ArrayBufferView | null,
  ): void;
  texParameteri(target: number, pname: number, param: number): void;
  deleteTexture(texture: object | null): void;
  enable(cap: number): void;
  disable(cap: number): void;
  blendFuncSeparate(srcRGB: number, dstRGB: number, srcAlpha: number, dstAlpha: number): void;
  depthFunc(func: number): void;
  depthMask(flag: boolean): void;
  colorMask(r: boolean, g: boolean, b: boolean, a: boolean): void;
  viewport(x: number, y: number, width: number, height: number): void;
  clearColor(r: number, g: number, b: number, a: number): void;
  clearDepth(depth: number): void;
  clear(mask: number): void;
  drawElements(mode: number, count: number, type: number, offset: number): void;
  drawArrays(mode: number, first: number, count: number): void;
}

export class ShaderCompileError extends Error {
  constructor(stage: string, log: string) {
    super(`${stage} shader failed to compile:\n${log}`);
    this.name = 'ShaderCompileError';
  }
}

export interface LayerBatch {
  layerIndex: number;
  vao: object;
  indexCount: number;
  textures: object[];
  buffers: object[];
}

function compileShader(gl: MinimalGl, type: number, source: string, stage: string): object {
  const shader = gl.createShader(type);
  if (shader === null) {
    throw new ShaderCompileError(stage, 'context returned no shader object');
  }
  gl.shaderSource(shader, source);
  gl.compileShader(shader);
  if (!gl.getShaderParameter(shader, gl.COMPILE_STATUS)) {
    const log = gl.getShaderInfoLog(shader) ?? '(no log)';
    gl.deleteShader(shader);
    throw new ShaderCompileError(stage, log);
  }
  return shader;
}

function linkProgram(gl: MinimalGl, vertexSrc: string, fragmentSrc: string): object {
  const vs = compileShader(gl, gl.VERTEX_SHADER, vertexSrc, 'vertex');
  const fs = compileShader(gl, gl.FRAGMENT_SHADER, fragmentSrc, 'fragment');
  const program = gl.createProgram();
  if (program === null) {
    throw new ShaderCompileError('program', 'context returned no program object');
  }
  gl.attachShader(program, vs);
  gl.attachShader(program, fs);
  gl.linkProgram(program);
  gl.deleteShader(vs);
  gl.deleteShader(fs);
  if (!gl.getProgramParameter(program, gl.LINK_STATUS)) {
    const log = gl.getProgramInfoLog(program) ?? '(no log)';
    gl.deleteProgram(program);
    throw new ShaderCompileError('program link', log);
  }
  return program;
}

function uploadLayer(gl: MinimalGl, bundle: LoadedBundle, layerIndex: number): LayerBatch {
  const layer = bundle.layers[layerIndex];
  const mesh = layer.mesh;
  const vao = gl.createVertexArray();
  if (vao === null) {
    throw new Error('context returned no vertex array object');
  }
  gl.bindVertexArray(vao);
  const buffers: object[] = [];
  const attribs: Array<[number, number, Float64Array]> = [
    [0, 3, mesh.positions],
    [1, 2, mesh.uvs],
    [2, 3, mesh.normals],
  ];
  for (const [location, size, data] of attribs) {
    const buffer = gl.createBuffer();
    if (buffer === null) {
      throw new Error('context returned no buffer object');
    }
    gl.bindBuffer(gl.ARRAY_BUFFER, buffer);
    gl.bufferData(gl.ARRAY_BUFFER, new Float32Array(data), gl.STATIC_DRAW);
    gl.enableVertexAttribArray(location);
    gl.vertexAttribPointer(location, size, gl.FLOAT, false, 0, 0);
    buffers.push(buffer);
  }
  const indexBuffer = gl.createBuffer();
  if (indexBuffer === null) {
    throw new Error('context returned no buffer object');
  }
  gl.bindBuffer(gl.ELEMENT_ARRAY_BUFFER, indexBuffer);
  gl.bufferData(gl.ELEMENT_ARRAY_BUFFER, mesh.faces, gl.STATIC_DRAW);
  buffers.push(indexBuffer);
  gl.bindVertexArray(null);

  const textures: object[] = [];
  for (const img of layer.images) {
    const texture = gl.createTexture();
    if (texture === null) {
      throw new Error('context returned no texture object');
    }
    gl.bindTexture(gl.TEXTURE_2D, texture);
    gl.texImage2D(
      gl.TEXTURE_2D, 0, gl.RGBA8, img.width, img.height, 0,
      gl.RGBA, gl.UNSIGNED_BYTE, img.data,
    );
    gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_MIN_FILTER, gl.LINEAR);
    gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_MAG_FILTER, gl.LINEAR);
    gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_WRAP_S, gl.CLAMP_TO_EDGE);
    gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_WRAP_T, gl.CLAMP_TO_EDGE);
    textures.push(texture);
  }
  return {
    layerIndex,
    vao,
    indexCount: mesh.faces.length,
    textures,
    buffers,
  };
}

const MODE_INTS = {
  composite: MODE_COMPOSITE,
  normals: MODE_NORMALS,
  uvs: MODE_UVS,
  opacity: MODE_OPACITY,
  color: MODE_COLOR,
} as const;

export class ShellRenderer {
  readonly batches: LayerBatch[];
  readonly textureCount: number;
  private readonly gl: MinimalGl;
  private readonly bundle: LoadedBundle;
  private readonly program: object;
  private readonly backgroundProgram: object;
  private readonly backgroundVao: object;
  private readonly uViewProj: object | null;
  private readonly uCameraPos: object | null;
  private readonly uValueMin: object | null;
  private readonly uValueSpan: object | null;
  private readonly uAttenuation: object | null;
  private readonly uMode: object | null;
  private readonly uBackground: object | null;

  constructor(gl: MinimalGl, bundle: LoadedBundle) {
    this.gl = gl;
    this.bundle = bundle;
    const degree = bundle.manifest.shDegree;
    this.program = linkProgram(gl, VERTEX_SHADER, buildFragmentShader(degree));
    this.backgroundProgram = linkProgram(
      gl, BACKGROUND_VERTEX_SHADER, BACKGROUND_FRAGMENT_SHADER,
    );
    const backgroundVao = gl.createVertexArray();
    if (backgroundVao === null) {
      throw new Error('context returned no vertex array object');
    }
    this.backgroundVao = backgroundVao;

    this.uViewProj = gl.getUniformLocation(this.program, 'u_viewProj');
    this.uCameraPos = gl.getUniformLocation(this.program, 'u_cameraPos');
    this.uValueMin = gl.getUniformLocation(this.program, 'u_valueMin');
    this.uValueSpan = gl.getUniformLocation(this.program, 'u_valueSpan');
    this.uAttenuation = gl.getUniformLocation(this.program, 'u_attenuation');
    this.uMode = gl.getUniformLocation(this.program, 'u_mode');
    this.uBackground = gl.getUniformLocation(this.backgroundProgram, 'u_background');

    gl.useProgram(this.program);
    for (let i = 0; i < coefficientCount(degree); i++) {
      gl.uniform1i(gl.getUniformLocation(this.program, `u_coef${i}`), i);
    }
    gl.useProgram(null);

    this.batches = bundle.manifest.drawOrder.map((layer) => uploadLayer(gl, bundle, layer));
    this.textureCount = this.batches.reduce((acc, b) => acc + b.textures.length, 0);
  }

  /**
   * Draw one frame.  Returns the layer indices that were drawn, in the
   * order they were drawn: always a subsequence of the manifest order.
   */
  render(state: ViewerState, pose: OrbitPose, width: number, height: number): number[] {
    const gl = this.gl;
    const manifest = this.bundle.manifest;
    const order = layerDrawList(manifest, state.visibility);
    const camera = cameraFromOrbit(pose, width, height);
    const near = Math.max(pose.distance * 0.02, 1e-3);
    const far = pose.distance * 50.0;
    const viewProj = viewProjectionMatrix(camera, near, far);

    gl.viewport(0, 0, width, height);
    gl.clearColor(0.0, 0.0, 0.0, 0.0);
    gl.clearDepth(1.0);
    gl.clear(gl.COLOR_BUFFER_BIT | gl.DEPTH_BUFFER_BIT);

    gl.enable(gl.BLEND);
    gl.blendFuncSeparate(gl.ONE_MINUS_DST_ALPHA, gl.ONE, gl.ONE_MINUS_DST_ALPHA, gl.ONE);

    gl.useProgram(this.program);
    gl.uniformMatrix4fv(this.uViewProj, false, viewProj);
    gl.uniform3f(
      this.uCameraPos, camera.position[0], camera.position[1], camera.position[2],
    );
    gl.uniform1f(this.uValueMin, manifest.valueRange.min);
    gl.uniform1f(
      this.uValueSpan, manifest.valueRange.max - manifest.valueRange.min,
    );
    gl.uniform1f(this.uAttenuation, manifest.attenuation.constant);
    gl.uniform1i(this.uMode, MODE_INTS[state.mode]);

    gl.enable(gl.DEPTH_TEST);
    for (const layerIndex of order) {
      const batch = this.batches[layerIndex];
      for (let i = 0; i < batch.textures.length; i++) {
        gl.activeTexture(gl.TEXTURE0 + i);
        gl.bindTexture(gl.TEXTURE_2D, batch.textures[i]);
      }
      gl.bindVertexArray(batch.vao);
      // Depth prepass: nearest fragment of this layer wins the pixel.
      gl.clear(gl.DEPTH_BUFFER_BIT);
      gl.colorMask(false, false, false, false);
      gl.depthMask(true);
      gl.depthFunc(gl.LESS);
      gl.drawElements(gl.TRIANGLES, batch.indexCount, gl.UNSIGNED_INT, 0);
      // Color pass: blend exactly the surviving fragments.
      gl.colorMask(true, true, true, true);
      gl.depthMask(false);
      gl.depthFunc(gl.EQUAL);
      gl.drawElements(gl.TRIANGLES, batch.indexCount, gl.UNSIGNED_INT, 0);
      gl.depthMask(true);
    }
    gl.bindVertexArray(null);

    // Remaining transmittance shows the background.
    gl.disable(gl.DEPTH_TEST);
    gl.useProgram(this.backgroundProgram);
    const bg = manifest.background;
    gl.uniform3f(this.uBackground, bg[0], bg[1], bg[2]);
    gl.bindVertexArray(this.backgroundVao);
    gl.drawArrays(gl.TRIANGLES, 0, 3);
    gl.bindVertexArray(null);
    gl.useProgram(null);
    gl.disable(gl.BLEND);
    return order;
  }

  dispose(): void {
    const gl = this.gl;
    for (const batch of this.batches) {
      for (const texture of batch.textures) {
        gl.deleteTexture(texture);
      }
      for (const buffer of batch.buffers) {
        gl.deleteBuffer(buffer);
      }
      gl.deleteVertexArray(batch.vao);
    }
    gl.deleteVertexArray(this.backgroundVao);
    gl.deleteProgram(this.program);
    gl.deleteProgram(this.backgroundProgram);
  }
}
