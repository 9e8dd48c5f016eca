/**
 * Page entry point: resolve the bundle URL from the query string, load
 * and validate the bundle, build the WebGL renderer, and wire the orbit
 * controls, layer toggles, display modes, and FPS readout.  Every load
 * or setup failure lands in the visible error banner.
 */

import { OrbitController } from './orbit.js';
import { ShellRenderer } from './gl.js';
import type { MinimalGl } from './gl.js';
import type { BundleIo } from './loader.js';
import { loadBundle } from './loader.js';
import { decodePng } from './png.js';
import type { DisplayMode } from './softrender.js';
import { ViewerState } from './state.js';
import {
  clearBanner,
  describeLoadError,
  displayModes,
  formatFps,
  layerLabel,
  showBanner,
} from './ui.js';

async function inflate(compressed: Uint8Array): Promise<Uint8Array> {
  const stream = new Blob([compressed as BlobPart]).stream()
    .pipeThrough(new DecompressionStream('deflate'));
  const buffer = await new Response(stream).arrayBuffer();
  return new Uint8Array(buffer);
}

function httpIo(baseUrl: string): BundleIo {
  const base = baseUrl.endsWith('/') ? baseUrl : `${baseUrl}/`;
  const fetchBytes = async (path: string): Promise<Uint8Array> => {
    const response = await fetch(new URL(path, new URL(base, window.location.href)));
    if (!response.ok) {
      throw new Error(`${path}: HTTP ${response.status}`);
    }
    return new Uint8Array(await response.arrayBuffer());
  };
  return {
    async text(path: string): Promise<string> {
      return new TextDecoder().decode(await fetchBytes(path));
    },
    async image(path: string) {
      return decodePng(await fetchBytes(path), inflate);
    },
  };
}

function must<T>(value: T | null, what: string): T {
  if (value === null) {
    throw new Error(`page is missing its ${what}`);
  }
  return value;
}

async function start(): Promise<void> {
  const banner = must(document.getElementById('banner'), 'banner element');
  const canvas = must(document.getElementById('view'), 'canvas') as HTMLCanvasElement;
  const layersBox = must(document.getElementById('layers'), 'layer toggle box');
  const modeSelect = must(document.getElementById('mode'), 'mode select') as HTMLSelectElement;
  const fpsLabel = must(document.getElementById('fps'), 'fps label');
  const progress = must(document.getElementById('progress'), 'progress label');
  clearBanner(banner);

  try {
    const params = new URLSearchParams(window.location.search);
    const bundleUrl = params.get('bundle') ?? 'bundle/';
    const bundle = await loadBundle(httpIo(bundleUrl), (done, total) => {
      progress.textContent = `loading ${done}/${total}`;
    });
    progress.textContent = '';

    const gl = canvas.getContext('webgl2', { alpha: false, antialias: false });
    if (gl === null) {
      throw new Error('WebGL2 is not available in this browser');
    }
    const renderer = new ShellRenderer(gl as unknown as MinimalGl, bundle);
    const state = new ViewerState(bundle.manifest);
    const cam = bundle.manifest.camera;
    const orbit = new OrbitController({
      target: cam.target,
      distance: cam.distance,
      yawDeg: cam.yawDeg,
      pitchDeg: cam.pitchDeg,
      fovYDeg: cam.fovYDeg,
    });
    orbit.applyHash(window.location.hash);

    for (const mode of displayModes()) {
      const option = document.createElement('option');
      option.value = mode;
      option.textContent = mode;
      modeSelect.appendChild(option);
    }
    modeSelect.value = state.mode;
    modeSelect.addEventListener('change', () => {
      state.setMode(modeSelect.value as DisplayMode);
    });

    for (let layer = 0; layer < bundle.manifest.layerCount; layer++) {
      const label = document.createElement('label');
      const box = document.createElement('input');
      box.type = 'checkbox';
      box.checked = true;
      box.addEventListener('change', () => {
        state.setLayerVisible(layer, box.checked);
      });
      label.appendChild(box);
      label.appendChild(
        document.createTextNode(layerLabel(layer, bundle.manifest.layerCount)),
      );
      layersBox.appendChild(label);
    }

    orbit.attach(canvas, () => {
      history.replaceState(null, '', `#${orbit.toHash()}`);
    });

    const frame = (nowMs: number) => {
      const width = canvas.clientWidth;
      const height = canvas.clientHeight;
      if (canvas.width !== width || canvas.height !== height) {
        canvas.width = width;
        canvas.height = height;
      }
      renderer.render(state, orbit.pose, canvas.width, canvas.height);
      fpsLabel.textContent = formatFps(state.fpsCounter.update(nowMs));
      requestAnimationFrame(frame);
    };
    requestAnimationFrame(frame);
  } catch (err) {
    showBanner(banner, describeLoadError(err));
  }
}

void start();
