/**
 * Viewer state: which layers draw, how fragments are displayed, and the
 * frame-rate readout.  State changes are plain method calls; the render
 * loop reads the record each frame.
 */

import type { BundleManifest } from './manifest.js';
import type { DisplayMode } from './softrender.js';

export class FpsCounter {
  private window: number[] = [];
  private lastMs: number | null = null;
  private readonly capacity: number;

  constructor(capacity = 30) {
    this.capacity = capacity;
  }

  /** Record one frame timestamp in milliseconds; returns the current FPS. */
  update(nowMs: number): number {
    if (this.lastMs !== null) {
      const dt = nowMs - this.lastMs;
      if (dt > 0) {
        this.window.push(dt);
        if (this.window.length > this.capacity) {
          this.window.shift();
        }
      }
    }
    this.lastMs = nowMs;
    return this.fps;
  }

  get fps(): number {
    if (this.window.length === 0) {
      return 0;
    }
    const mean = this.window.reduce((a, b) => a + b, 0) / this.window.length;
    return 1000.0 / mean;
  }
}

export class ViewerState {
  readonly manifest: BundleManifest;
  visibility: boolean[];
  mode: DisplayMode;
  readonly fpsCounter: FpsCounter;

  constructor(manifest: BundleManifest) {
    this.manifest = manifest;
    this.visibility = new Array(manifest.layerCount).fill(true);
    this.mode = 'composite';
    this.fpsCounter = new FpsCounter();
  }

  setLayerVisible(layer: number, visible: boolean): void {
    if (layer < 0 || layer >= this.visibility.length) {
      throw new Error(`layer ${layer} out of range`);
    }
    this.visibility[layer] = visible;
  }

  setMode(mode: DisplayMode): void {
    this.mode = mode;
  }
}
