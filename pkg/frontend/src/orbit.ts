/**
 * Orbit camera controller: drag rotates yaw and pitch, the wheel moves the
 * camera along the view axis, and the pose serializes to the URL hash so a
 * view can be shared by copying the address.  Pitch stays inside
 * (-89, 89) degrees and the distance stays strictly positive.
 */

import type { OrbitPose, Vec3 } from './camera.js';
import { PITCH_LIMIT_DEG } from './camera.js';

export interface OrbitOptions {
  /** Degrees of yaw per pixel of horizontal drag. */
  degreesPerPixel?: number;
  /** Multiplicative zoom per wheel notch of 100 units. */
  zoomRate?: number;
  minDistance?: number;
  maxDistance?: number;
}

const HASH_PRECISION = 4;

export class OrbitController {
  readonly target: Vec3;
  readonly fovYDeg: number;
  yawDeg: number;
  pitchDeg: number;
  distance: number;
  private readonly degreesPerPixel: number;
  private readonly zoomRate: number;
  private readonly minDistance: number;
  private readonly maxDistance: number;

  constructor(initial: OrbitPose, options: OrbitOptions = {}) {
    if (initial.distance <= 0) {
      throw new Error('orbit distance must be positive');
    }
    this.target = [...initial.target];
    this.fovYDeg = initial.fovYDeg;
    this.yawDeg = initial.yawDeg;
    this.pitchDeg = clampPitch(initial.pitchDeg);
    this.distance = initial.distance;
    this.degreesPerPixel = options.degreesPerPixel ?? 0.4;
    this.zoomRate = options.zoomRate ?? 1.1;
    this.minDistance = options.minDistance ?? 1e-3;
    this.maxDistance = options.maxDistance ?? 1e3;
    if (this.minDistance <= 0) {
      throw new Error('minimum distance must be positive');
    }
    this.distance = this.clampDistance(this.distance);
  }

  get pose(): OrbitPose {
    return {
      target: [...this.target],
      distance: this.distance,
      yawDeg: this.yawDeg,
      pitchDeg: this.pitchDeg,
      fovYDeg: this.fovYDeg,
    };
  }

  /** Apply a drag of (dx, dy) pixels: horizontal is yaw, vertical pitch. */
  drag(dx: number, dy: number): void {
    this.yawDeg += dx * this.degreesPerPixel;
    this.pitchDeg = clampPitch(this.pitchDeg + dy * this.degreesPerPixel);
  }

  /** Apply a wheel scroll; positive deltaY zooms out. */
  wheel(deltaY: number): void {
    const factor = Math.pow(this.zoomRate, deltaY / 100.0);
    this.distance = this.clampDistance(this.distance * factor);
  }

  private clampDistance(d: number): number {
    return Math.min(this.maxDistance, Math.max(this.minDistance, d));
  }

  /** Pose as a `yaw,pitch,distance` hash payload. */
  toHash(): string {
    const y = this.yawDeg.toFixed(HASH_PRECISION);
    const p = this.pitchDeg.toFixed(HASH_PRECISION);
    const d = this.distance.toFixed(HASH_PRECISION);
    return `cam=${y},${p},${d}`;
  }

  /** Restore yaw/pitch/distance from a hash payload; ignores junk. */
  applyHash(hash: string): boolean {
    const match = /(?:^|[#&])cam=([^&]+)/.exec(hash);
    if (match === null) {
      return false;
    }
    const parts = match[1].split(',').map(Number);
    if (parts.length !== 3 || parts.some((v) => !Number.isFinite(v))) {
      return false;
    }
    this.yawDeg = parts[0];
    this.pitchDeg = clampPitch(parts[1]);
    this.distance = this.clampDistance(parts[2]);
    return true;
  }

  /**
   * Bind pointer and wheel events on an element.  Returns an unbind
   * function.  All state still lives on the controller, so the pure
   * methods above stay testable without a DOM.
   */
  attach(element: HTMLElement, onChange: () => void): () => void {
    let dragging = false;
    let lastX = 0;
    let lastY = 0;
    const down = (ev: PointerEvent) => {
      dragging = true;
      lastX = ev.clientX;
      lastY = ev.clientY;
      element.setPointerCapture(ev.pointerId);
    };
    const move = (ev: PointerEvent) => {
      if (!dragging) {
        return;
      }
      this.drag(ev.clientX - lastX, ev.clientY - lastY);
      lastX = ev.clientX;
      lastY = ev.clientY;
      onChange();
    };
    const up = (ev: PointerEvent) => {
      dragging = false;
      element.releasePointerCapture(ev.pointerId);
    };
    const wheel = (ev: WheelEvent) => {
      ev.preventDefault();
      this.wheel(ev.deltaY);
      onChange();
    };
    element.addEventListener('pointerdown', down);
    element.addEventListener('pointermove', move);
    element.addEventListener('pointerup', up);
    element.addEventListener('wheel', wheel, { passive: false });
    return () => {
      element.removeEventListener('pointerdown', down);
      element.removeEventListener('pointermove', move);
      element.removeEventListener('pointerup', up);
      element.removeEventListener('wheel', wheel);
    };
  }
}

function clampPitch(pitchDeg: number): number {
  const limit = PITCH_LIMIT_DEG - 1e-6;
  return Math.max(-limit, Math.min(limit, pitchDeg));
}
