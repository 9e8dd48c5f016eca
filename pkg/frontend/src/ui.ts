/**
 * Small presentation helpers kept free of page wiring so they can be
 * exercised in tests: error banner text, FPS formatting, and the control
 * labels for layers and display modes.
 */

import { BundleFormatError } from './manifest.js';
import { ShaderCompileError } from './gl.js';
import { DISPLAY_MODES, type DisplayMode } from './softrender.js';

/** Human-readable message for anything thrown during load or setup. */
export function describeLoadError(err: unknown): string {
  if (err instanceof BundleFormatError) {
    return `Bundle rejected - ${err.message}`;
  }
  if (err instanceof ShaderCompileError) {
    return `Renderer setup failed - ${err.message}`;
  }
  if (err instanceof Error) {
    return `Load failed - ${err.message}`;
  }
  return `Load failed - ${String(err)}`;
}

export function formatFps(fps: number): string {
  return fps <= 0 ? '-- fps' : `${fps.toFixed(0)} fps`;
}

export function layerLabel(layer: number, layerCount: number): string {
  if (layer === 0) {
    return `layer 0 (outermost)`;
  }
  if (layer === layerCount - 1) {
    return `layer ${layer} (core)`;
  }
  return `layer ${layer}`;
}

export function displayModes(): DisplayMode[] {
  return [...DISPLAY_MODES];
}

export interface BannerLike {
  textContent: string | null;
  hidden: boolean;
}

export function showBanner(el: BannerLike, message: string): void {
  el.textContent = message;
  el.hidden = false;
}

export function clearBanner(el: BannerLike): void {
  el.textContent = '';
  el.hidden = true;
}
