import { describe, expect, it } from 'vitest';

import { ShaderCompileError } from '../src/gl.js';
import { BundleFormatError } from '../src/manifest.js';
import {
  clearBanner,
  describeLoadError,
  displayModes,
  formatFps,
  layerLabel,
  showBanner,
} from '../src/ui.js';

describe('describeLoadError', () => {
  it('names bundle schema problems', () => {
    const err = new BundleFormatError('layers[1].mesh', 'missing file layer1.obj');
    expect(describeLoadError(err)).toBe(
      'Bundle rejected - layers[1].mesh: missing file layer1.obj',
    );
  });

  it('names shader failures', () => {
    const err = new ShaderCompileError('fragment', 'bad token');
    expect(describeLoadError(err)).toMatch(/^Renderer setup failed - /);
  });

  it('falls back for plain errors and non-errors', () => {
    expect(describeLoadError(new Error('HTTP 404'))).toBe('Load failed - HTTP 404');
    expect(describeLoadError('boom')).toBe('Load failed - boom');
  });
});

describe('banner', () => {
  it('shows and clears through the element contract', () => {
    const el = { textContent: null as string | null, hidden: true };
    showBanner(el, 'Bundle rejected - version: unsupported bundle version 2');
    expect(el.hidden).toBe(false);
    expect(el.textContent).toContain('unsupported bundle version');
    clearBanner(el);
    expect(el.hidden).toBe(true);
    expect(el.textContent).toBe('');
  });
});

describe('labels', () => {
  it('formats fps and layer names', () => {
    expect(formatFps(0)).toBe('-- fps');
    expect(formatFps(59.6)).toBe('60 fps');
    expect(layerLabel(0, 3)).toBe('layer 0 (outermost)');
    expect(layerLabel(1, 3)).toBe('layer 1');
    expect(layerLabel(2, 3)).toBe('layer 2 (core)');
  });

  it('lists the five display modes in order', () => {
    expect(displayModes()).toEqual(['composite', 'normals', 'uvs', 'opacity', 'color']);
  });
});
