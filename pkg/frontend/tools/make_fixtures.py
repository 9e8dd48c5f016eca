"""Generate the viewer test fixtures from the native renderer.

Builds a small three-layer bundle with random textures, renders reference
frames with the native renderer, and records spherical-harmonics and
texture-decode oracle values.  The vitest suite compares the TypeScript
implementation against these files, so the two renderers are checked
against each other without needing a GPU in CI.

Run from the repository root with the package installed:

    python3 frontend/tools/make_fixtures.py
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

from sdfshells.appearance import ShTextureSet, decode_rgba
from sdfshells.assets import BundleMeta, export_bundle, import_bundle
from sdfshells.camera import Camera
from sdfshells.meshing import AtlasConfig, SimplifyConfig, extract_shells
from sdfshells.scene import canonical_scene
from sdfshells.shellrender import render_debug_buffers, render_shells
from sdfshells.shmath import sh_basis

IMAGE_SIZE = 64
FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def save_rgb_png(path: Path, rgb: np.ndarray) -> None:
    data = np.rint(np.clip(rgb, 0.0, 1.0) * 255.0).astype(np.uint8)
    Image.fromarray(data, mode="RGB").save(path, format="PNG")


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    native = FIXTURES / "native"
    native.mkdir(exist_ok=True)

    scene = canonical_scene("fuzzy-sphere", k=3)
    shells = extract_shells(
        scene.ksdf, scene.bbox_min, scene.bbox_max, resolution=48,
        simplify=SimplifyConfig(target_ratio=0.3),
        atlas=AtlasConfig(resolution=64),
    )
    texset = ShTextureSet.random(3, seed=7, scale=1.5, resolutions=(16, 8, 8, 8))
    meta = BundleMeta(
        name="viewer-parity",
        background=(0.10, 0.15, 0.20),
        camera_target=(0.0, 0.0, 0.0),
        camera_distance=2.0,
        camera_yaw_deg=30.0,
        camera_pitch_deg=20.0,
        camera_fov_y_deg=45.0,
    )
    bundle_dir = FIXTURES / "bundle"
    export_bundle(shells, texset, meta, bundle_dir)

    # Re-import so every reference render uses the quantized textures the
    # bundle actually carries.
    loaded_shells, loaded_texset, loaded_meta = import_bundle(bundle_dir)
    meshes = list(loaded_shells)

    cases = []

    def orbit_camera(yaw: float, pitch: float, distance: float) -> Camera:
        return Camera.from_orbit(
            loaded_meta.camera_target, distance, yaw, pitch,
            fov_y_deg=loaded_meta.camera_fov_y_deg,
            width=IMAGE_SIZE, height=IMAGE_SIZE,
        )

    def add_composite(name: str, yaw: float, pitch: float, distance: float,
                      visibility: list[bool]) -> None:
        drawn = [m for m, keep in zip(meshes, visibility) if keep]
        frame = render_shells(
            orbit_camera(yaw, pitch, distance), drawn, loaded_texset,
            background=loaded_meta.background,
        )
        filename = f"{name}.png"
        save_rgb_png(native / filename, frame.rgb)
        cases.append({
            "name": name,
            "mode": "composite",
            "file": f"native/{filename}",
            "yaw_deg": yaw,
            "pitch_deg": pitch,
            "distance": distance,
            "visibility": visibility,
        })

    add_composite("composite_default", loaded_meta.camera_yaw_deg,
                  loaded_meta.camera_pitch_deg, loaded_meta.camera_distance,
                  [True, True, True])
    add_composite("composite_alt", -40.0, -15.0, 2.4, [True, True, True])
    add_composite("composite_toggle", loaded_meta.camera_yaw_deg,
                  loaded_meta.camera_pitch_deg, loaded_meta.camera_distance,
                  [True, False, True])

    # Per-layer inspection buffers for the outermost layer: the viewer
    # reproduces these with one layer visible in each inspection mode.
    buffers = render_debug_buffers(
        orbit_camera(loaded_meta.camera_yaw_deg, loaded_meta.camera_pitch_deg,
                     loaded_meta.camera_distance),
        meshes, loaded_texset, background=loaded_meta.background,
    )
    mode_images = {
        "normals": buffers.layer_buffers["normal"][0],
        "uvs": np.concatenate([
            buffers.layer_buffers["uv"][0],
            np.zeros(buffers.layer_buffers["uv"][0].shape[:2] + (1,)),
        ], axis=-1),
        "opacity": np.repeat(buffers.layer_buffers["opacity"][0], 3, axis=-1),
        "color": buffers.layer_buffers["color"][0],
    }
    for mode, image in mode_images.items():
        filename = f"buffer_{mode}_layer0.png"
        save_rgb_png(native / filename, image)
        cases.append({
            "name": f"buffer_{mode}_layer0",
            "mode": mode,
            "file": f"native/{filename}",
            "yaw_deg": loaded_meta.camera_yaw_deg,
            "pitch_deg": loaded_meta.camera_pitch_deg,
            "distance": loaded_meta.camera_distance,
            "visibility": [True, False, False],
        })

    (FIXTURES / "cases.json").write_text(json.dumps({
        "image_size": IMAGE_SIZE,
        "target": list(loaded_meta.camera_target),
        "fov_y_deg": loaded_meta.camera_fov_y_deg,
        "background": list(loaded_meta.background),
        "cases": cases,
    }, indent=2) + "\n", encoding="utf-8")

    # Spherical-harmonics basis oracle values.
    rng = np.random.default_rng(3)
    dirs = rng.normal(size=(8, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    axis_dirs = np.array([
        [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0],
        [-1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0],
    ])
    all_dirs = np.concatenate([axis_dirs, dirs], axis=0)
    basis = sh_basis(3, all_dirs)
    (FIXTURES / "sh_cases.json").write_text(json.dumps([
        {"dir": d.tolist(), "basis": b.tolist()}
        for d, b in zip(all_dirs, basis)
    ], indent=2) + "\n", encoding="utf-8")

    # Texture decode oracle: rgba at sampled surface coordinates.
    rng = np.random.default_rng(4)
    decode_cases = []
    for layer in range(3):
        uv = rng.uniform(0.0, 1.0, size=(4, 2))
        d = rng.normal(size=(4, 3))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        rgba = decode_rgba(loaded_texset, layer, uv, d)
        for row_uv, row_d, row_rgba in zip(uv, d, rgba):
            decode_cases.append({
                "layer": layer,
                "uv": row_uv.tolist(),
                "dir": row_d.tolist(),
                "rgba": row_rgba.tolist(),
            })
    (FIXTURES / "decode_cases.json").write_text(
        json.dumps(decode_cases, indent=2) + "\n", encoding="utf-8")

    print(f"fixtures written to {FIXTURES}")
    for mesh in meshes:
        print(f"layer {mesh.layer_index}: {mesh.faces.shape[0]} triangles")


if __name__ == "__main__":
    main()
