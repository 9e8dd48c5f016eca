/**
 * Drives the WebGL renderer with a recording fake context: resource
 * counts at load, manifest-ordered draws with no sorting, per-layer
 * depth passes, under-compositing blend factors, manifest-fed decode
 * uniforms, and loud shader compile failures.
 */

import { describe, expect, it } from 'vitest';

import type { MinimalGl } from '../src/gl.js';
import { ShaderCompileError, ShellRenderer } from '../src/gl.js';
import { ViewerState } from '../src/state.js';
import { fixtureBundle } from './helpers.js';

interface DrawRecord {
  kind: 'elements' | 'arrays';
  vao: object | null;
  program: object | null;
  depthFunc: number;
  colorMask: boolean;
  blend: boolean;
  blendFactors: number[];
  uniforms: Map<string, unknown>;
  textures: Array<object | null>;
}

class FakeGl implements MinimalGl {
  readonly VERTEX_SHADER = 0x8b31;
  readonly FRAGMENT_SHADER = 0x8b30;
  readonly COMPILE_STATUS = 0x8b81;
  readonly LINK_STATUS = 0x8b82;
  readonly ARRAY_BUFFER = 0x8892;
  readonly ELEMENT_ARRAY_BUFFER = 0x8893;
  readonly STATIC_DRAW = 0x88e4;
  readonly FLOAT = 0x1406;
  readonly UNSIGNED_INT = 0x1405;
  readonly UNSIGNED_BYTE = 0x1401;
  readonly TRIANGLES = 0x0004;
  readonly TEXTURE_2D = 0x0de1;
  readonly TEXTURE0 = 0x84c0;
  readonly RGBA8 = 0x8058;
  readonly RGBA = 0x1908;
  readonly TEXTURE_MIN_FILTER = 0x2801;
  readonly TEXTURE_MAG_FILTER = 0x2800;
  readonly TEXTURE_WRAP_S = 0x2802;
  readonly TEXTURE_WRAP_T = 0x2803;
  readonly LINEAR = 0x2601;
  readonly CLAMP_TO_EDGE = 0x812f;
  readonly BLEND = 0x0be2;
  readonly DEPTH_TEST = 0x0b71;
  readonly LESS = 0x0201;
  readonly EQUAL = 0x0202;
  readonly ONE = 1;
  readonly ONE_MINUS_DST_ALPHA = 0x0305;
  readonly COLOR_BUFFER_BIT = 0x4000;
  readonly DEPTH_BUFFER_BIT = 0x0100;

  failFragmentCompile = false;

  shaders = new Map<object, { type: number; source: string }>();
  programs: object[] = [];
  texturesCreated: object[] = [];
  buffersCreated: object[] = [];
  vaosCreated: object[] = [];
  texParams = new Map<object, Map<number, number>>();
  draws: DrawRecord[] = [];
  deleted = { textures: 0, buffers: 0, vaos: 0, programs: 0 };

  private uniformNames = new Map<object, string>();
  private uniformValues = new Map<string, unknown>();
  private currentProgram: object | null = null;
  private currentVao: object | null = null;
  private boundTexture: object | null = null;
  private activeUnit = 0;
  private units: Array<object | null> = new Array(16).fill(null);
  private depthFuncValue = 0x0201;
  private colorMaskValue = true;
  private blendOn = false;
  private blendFactors: number[] = [];
  private capabilities = new Set<number>();

  createShader(type: number): object {
    const shader = { type };
    this.shaders.set(shader, { type, source: '' });
    return shader;
  }

  shaderSource(shader: object, source: string): void {
    const entry = this.shaders.get(shader);
    if (entry !== undefined) {
      entry.source = source;
    }
  }

  compileShader(): void {}

  getShaderParameter(shader: object, pname: number): unknown {
    if (pname !== this.COMPILE_STATUS) {
      return null;
    }
    const entry = this.shaders.get(shader);
    if (entry === undefined) {
      return false;
    }
    return !(this.failFragmentCompile && entry.type === this.FRAGMENT_SHADER);
  }

  getShaderInfoLog(): string {
    return 'forced failure: token soup at line 1';
  }

  deleteShader(): void {}

  createProgram(): object {
    const program = {};
    this.programs.push(program);
    return program;
  }

  attachShader(): void {}
  linkProgram(): void {}

  getProgramParameter(_program: object, pname: number): unknown {
    return pname === this.LINK_STATUS ? true : null;
  }

  getProgramInfoLog(): string {
    return '';
  }

  deleteProgram(): void {
    this.deleted.programs += 1;
  }

  useProgram(program: object | null): void {
    this.currentProgram = program;
  }

  getUniformLocation(program: object, name: string): object {
    const key = `${this.programs.indexOf(program)}:${name}`;
    const location = { key };
    this.uniformNames.set(location, key);
    return location;
  }

  private setUniform(location: object | null, value: unknown): void {
    if (location === null) {
      return;
    }
    const name = this.uniformNames.get(location);
    if (name !== undefined) {
      this.uniformValues.set(name, value);
    }
  }

  uniform1i(location: object | null, x: number): void {
    this.setUniform(location, x);
  }

  uniform1f(location: object | null, x: number): void {
    this.setUniform(location, x);
  }

  uniform3f(location: object | null, x: number, y: number, z: number): void {
    this.setUniform(location, [x, y, z]);
  }

  uniformMatrix4fv(location: object | null, _t: boolean, value: Float32Array): void {
    this.setUniform(location, Array.from(value));
  }

  createBuffer(): object {
    const buffer = {};
    this.buffersCreated.push(buffer);
    return buffer;
  }

  bindBuffer(): void {}
  bufferData(): void {}

  deleteBuffer(): void {
    this.deleted.buffers += 1;
  }

  createVertexArray(): object {
    const vao = {};
    this.vaosCreated.push(vao);
    return vao;
  }

  bindVertexArray(vao: object | null): void {
    this.currentVao = vao;
  }

  deleteVertexArray(): void {
    this.deleted.vaos += 1;
  }

  enableVertexAttribArray(): void {}
  vertexAttribPointer(): void {}

  createTexture(): object {
    const texture = {};
    this.texturesCreated.push(texture);
    return texture;
  }

  bindTexture(_target: number, texture: object | null): void {
    this.boundTexture = texture;
    this.units[this.activeUnit] = texture;
  }

  activeTexture(unit: number): void {
    this.activeUnit = unit - this.TEXTURE0;
  }

  texImage2D(): void {}

  texParameteri(_target: number, pname: number, param: number): void {
    if (this.boundTexture === null) {
      return;
    }
    let params = this.texParams.get(this.boundTexture);
    if (params === undefined) {
      params = new Map();
      this.texParams.set(this.boundTexture, params);
    }
    params.set(pname, param);
  }

  deleteTexture(): void {
    this.deleted.textures += 1;
  }

  enable(cap: number): void {
    this.capabilities.add(cap);
    if (cap === this.BLEND) {
      this.blendOn = true;
    }
  }

  disable(cap: number): void {
    this.capabilities.delete(cap);
    if (cap === this.BLEND) {
      this.blendOn = false;
    }
  }

  blendFuncSeparate(a: number, b: number, c: number, d: number): void {
    this.blendFactors = [a, b, c, d];
  }

  depthFunc(func: number): void {
    this.depthFuncValue = func;
  }

  depthMask(): void {}

  colorMask(r: boolean): void {
    this.colorMaskValue = r;
  }

  viewport(): void {}
  clearColor(): void {}
  clearDepth(): void {}
  clear(): void {}

  private record(kind: 'elements' | 'arrays'): void {
    this.draws.push({
      kind,
      vao: this.currentVao,
      program: this.currentProgram,
      depthFunc: this.depthFuncValue,
      colorMask: this.colorMaskValue,
      blend: this.blendOn,
      blendFactors: [...this.blendFactors],
      uniforms: new Map(this.uniformValues),
      textures: [...this.units],
    });
  }

  drawElements(): void {
    this.record('elements');
  }

  drawArrays(): void {
    this.record('arrays');
  }
}

describe('ShellRenderer', () => {
  it('uploads one batch per layer and 48 bilinear textures for k=3', async () => {
    const bundle = await fixtureBundle();
    const gl = new FakeGl();
    const renderer = new ShellRenderer(gl, bundle);
    expect(renderer.batches).toHaveLength(3);
    expect(renderer.textureCount).toBe(48);
    expect(gl.texturesCreated).toHaveLength(48);
    for (const params of gl.texParams.values()) {
      expect(params.get(gl.TEXTURE_MIN_FILTER)).toBe(gl.LINEAR);
      expect(params.get(gl.TEXTURE_MAG_FILTER)).toBe(gl.LINEAR);
      expect(params.get(gl.TEXTURE_WRAP_S)).toBe(gl.CLAMP_TO_EDGE);
      expect(params.get(gl.TEXTURE_WRAP_T)).toBe(gl.CLAMP_TO_EDGE);
    }
  });

  it('fails loud when a shader does not compile', async () => {
    const bundle = await fixtureBundle();
    const gl = new FakeGl();
    gl.failFragmentCompile = true;
    expect(() => new ShellRenderer(gl, bundle)).toThrowError(ShaderCompileError);
    expect(() => new ShellRenderer(gl, bundle)).toThrowError(/token soup/);
  });

  it('draws layers in manifest order with prepass and color pass each', async () => {
    const bundle = await fixtureBundle();
    const gl = new FakeGl();
    const renderer = new ShellRenderer(gl, bundle);
    const state = new ViewerState(bundle.manifest);
    const pose = {
      target: [0, 0, 0] as [number, number, number],
      distance: 2.0,
      yawDeg: 30.0,
      pitchDeg: 20.0,
      fovYDeg: 45.0,
    };
    const drawn = renderer.render(state, pose, 128, 128);
    expect(drawn).toEqual(bundle.manifest.drawOrder);

    const layerDraws = gl.draws.filter((d) => d.kind === 'elements');
    expect(layerDraws).toHaveLength(6);
    const vaoSequence = layerDraws.map((d) => d.vao);
    expect(vaoSequence).toEqual([
      renderer.batches[0].vao, renderer.batches[0].vao,
      renderer.batches[1].vao, renderer.batches[1].vao,
      renderer.batches[2].vao, renderer.batches[2].vao,
    ]);
    for (let i = 0; i < layerDraws.length; i += 2) {
      expect(layerDraws[i].colorMask).toBe(false);
      expect(layerDraws[i].depthFunc).toBe(gl.LESS);
      expect(layerDraws[i + 1].colorMask).toBe(true);
      expect(layerDraws[i + 1].depthFunc).toBe(gl.EQUAL);
    }

    // Under-compositing blend factors on every color draw.
    for (const d of gl.draws) {
      expect(d.blend).toBe(true);
      expect(d.blendFactors).toEqual([
        gl.ONE_MINUS_DST_ALPHA, gl.ONE, gl.ONE_MINUS_DST_ALPHA, gl.ONE,
      ]);
    }

    // The background fill comes last.
    expect(gl.draws[gl.draws.length - 1].kind).toBe('arrays');
  });

  it('binds each batch texture to its own unit at draw time', async () => {
    const bundle = await fixtureBundle();
    const gl = new FakeGl();
    const renderer = new ShellRenderer(gl, bundle);
    const state = new ViewerState(bundle.manifest);
    renderer.render(state, {
      target: [0, 0, 0], distance: 2, yawDeg: 0, pitchDeg: 0, fovYDeg: 45,
    }, 64, 64);
    const colorDraws = gl.draws.filter((d) => d.kind === 'elements' && d.colorMask);
    for (let j = 0; j < 3; j++) {
      expect(colorDraws[j].textures.slice(0, 16))
        .toEqual(renderer.batches[j].textures);
    }
  });

  it('skips hidden layers without reordering the rest', async () => {
    const bundle = await fixtureBundle();
    const gl = new FakeGl();
    const renderer = new ShellRenderer(gl, bundle);
    const state = new ViewerState(bundle.manifest);
    state.setLayerVisible(1, false);
    const drawn = renderer.render(state, {
      target: [0, 0, 0], distance: 2, yawDeg: 0, pitchDeg: 0, fovYDeg: 45,
    }, 64, 64);
    expect(drawn).toEqual([0, 2]);
    const vaoSequence = gl.draws
      .filter((d) => d.kind === 'elements')
      .map((d) => d.vao);
    expect(vaoSequence).toEqual([
      renderer.batches[0].vao, renderer.batches[0].vao,
      renderer.batches[2].vao, renderer.batches[2].vao,
    ]);
  });

  it('feeds decode constants from the manifest as uniforms', async () => {
    const bundle = await fixtureBundle();
    const gl = new FakeGl();
    const renderer = new ShellRenderer(gl, bundle);
    const state = new ViewerState(bundle.manifest);
    renderer.render(state, {
      target: [0, 0, 0], distance: 2, yawDeg: 0, pitchDeg: 0, fovYDeg: 45,
    }, 64, 64);
    const last = gl.draws[gl.draws.length - 1];
    expect(last.uniforms.get('0:u_valueMin')).toBe(bundle.manifest.valueRange.min);
    expect(last.uniforms.get('0:u_valueSpan')).toBe(
      bundle.manifest.valueRange.max - bundle.manifest.valueRange.min,
    );
    expect(last.uniforms.get('0:u_attenuation')).toBe(
      bundle.manifest.attenuation.constant,
    );
    expect(last.uniforms.get('1:u_background')).toEqual(
      Array.from(bundle.manifest.background),
    );
  });

  it('maps display modes to distinct shader mode ints', async () => {
    const bundle = await fixtureBundle();
    const gl = new FakeGl();
    const renderer = new ShellRenderer(gl, bundle);
    const state = new ViewerState(bundle.manifest);
    const seen = new Set<unknown>();
    for (const mode of ['composite', 'normals', 'uvs', 'opacity', 'color'] as const) {
      state.setMode(mode);
      renderer.render(state, {
        target: [0, 0, 0], distance: 2, yawDeg: 0, pitchDeg: 0, fovYDeg: 45,
      }, 16, 16);
      const last = gl.draws[gl.draws.length - 1];
      seen.add(last.uniforms.get('0:u_mode'));
    }
    expect(seen.size).toBe(5);
  });

  it('releases every resource on dispose', async () => {
    const bundle = await fixtureBundle();
    const gl = new FakeGl();
    const renderer = new ShellRenderer(gl, bundle);
    renderer.dispose();
    expect(gl.deleted.textures).toBe(48);
    expect(gl.deleted.vaos).toBe(4);
    expect(gl.deleted.programs).toBe(2);
    expect(gl.deleted.buffers).toBe(12);
  });
});
