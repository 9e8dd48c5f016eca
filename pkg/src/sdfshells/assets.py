"""On-disk asset bundles: manifest, layer meshes, coefficient images.

One directory holds everything a renderer needs: `manifest.json` with the
layer draw order and decode parameters, `layer{L}.obj` meshes, and
`layer{L}_coef{I}.png` images, one per SH coefficient per layer.  Export is
deterministic byte for byte, and import validates the manifest before
reconstructing the renderer inputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .appearance import (
    BAND_SIZES,
    ShTextureSet,
    bake_textures,
    texture_set_from_baked,
)
from .meshing import ShellSet, TriMesh, load_obj, save_obj

Array = np.ndarray

FORMAT_TAG = "sdfshells-bundle"
FORMAT_VERSION = 1
ROUNDING_TAG = "half-away-from-zero"
ATTENUATION_CONSTANT = 10.0
ATTENUATION_FORMULA = "2*sigmoid(c*abs(dot(view,normal)))-1"
MANIFEST_NAME = "manifest.json"


class BundleFormatError(ValueError):
    """A bundle violates the manifest schema or its invariants."""


@dataclass
class BundleMeta:
    """Presentation metadata carried alongside the render data."""

    name: str = "scene"
    background: tuple = (1.0, 1.0, 1.0)
    camera_target: tuple = (0.0, 0.0, 0.0)
    camera_distance: float = 2.0
    camera_yaw_deg: float = 30.0
    camera_pitch_deg: float = 20.0
    camera_fov_y_deg: float = 45.0

    def __post_init__(self):
        self.background = tuple(float(c) for c in self.background)
        self.camera_target = tuple(float(c) for c in self.camera_target)
        if len(self.background) != 3 or len(self.camera_target) != 3:
            raise ValueError("background and camera target must be RGB/XYZ")
        if self.camera_distance <= 0.0:
            raise ValueError("camera distance must be positive")


def mesh_filename(layer: int) -> str:
    return f"layer{layer}.obj"


def coefficient_filename(layer: int, coefficient: int) -> str:
    return f"layer{layer}_coef{coefficient}.png"


def _canonical_vertex_order(mesh: TriMesh) -> TriMesh:
    """Reindex vertices to first-use order so OBJ round trips are stable.

    The OBJ loader assigns indices in face-visit order; exporting in that
    same order (and dropping unreferenced vertices) makes a second export
    of an imported mesh byte-identical to the first.
    """
    flat = mesh.faces.ravel()
    _, first = np.unique(flat, return_index=True)
    old_ids = flat[np.sort(first)]
    remap = np.empty(mesh.vertex_count, dtype=np.int64)
    remap[old_ids] = np.arange(old_ids.size)
    return TriMesh(positions=mesh.positions[old_ids],
                   faces=remap[mesh.faces],
                   normals=None if mesh.normals is None else mesh.normals[old_ids],
                   uvs=None if mesh.uvs is None else mesh.uvs[old_ids],
                   layer_index=mesh.layer_index)


def _save_coefficient_png(path: Path, img: Array) -> None:
    img = np.asarray(img)
    if img.dtype != np.uint8 or img.ndim != 3 or img.shape[-1] != 4:
        raise ValueError("coefficient images must be (H, W, 4) uint8")
    Image.fromarray(img, mode="RGBA").save(path, format="PNG")


def _load_coefficient_png(path: Path, field: str) -> Array:
    try:
        with Image.open(path) as im:
            if im.mode != "RGBA":
                raise BundleFormatError(
                    f"{field}: image {path.name} must be RGBA")
            arr = np.asarray(im)
    except FileNotFoundError:
        raise BundleFormatError(f"{field}: missing file {path.name}") from None
    if arr.dtype != np.uint8:
        raise BundleFormatError(f"{field}: image {path.name} must be 8-bit")
    return arr


def export_bundle(shells, texset: ShTextureSet, meta: BundleMeta,
                  out_dir) -> Path:
    """Write manifest, meshes, and coefficient images; returns the directory.

    Output bytes are a pure function of the inputs, so re-exporting an
    imported bundle reproduces it exactly.
    """
    meshes = list(shells)
    if len(meshes) != texset.k:
        raise ValueError("texture set layer count does not match shells")
    for mesh in meshes:
        if mesh.uvs is None or mesh.normals is None:
            raise ValueError("bundle meshes need normals and uv coordinates")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    baked = bake_textures(texset)
    layers = []
    for j, mesh in enumerate(meshes):
        save_obj(out / mesh_filename(j), _canonical_vertex_order(mesh))
        bands = []
        for band in range(texset.degree + 1):
            names = []
            for local in range(BAND_SIZES[band]):
                i = band * band + local
                name = coefficient_filename(j, i)
                _save_coefficient_png(out / name, baked[j][i])
                names.append(name)
            bands.append({
                "resolution": int(baked[j][band * band].shape[0]),
                "images": names,
            })
        layers.append({"mesh": mesh_filename(j), "bands": bands})

    manifest = {
        "format": FORMAT_TAG,
        "version": FORMAT_VERSION,
        "name": meta.name,
        "layer_count": len(meshes),
        "draw_order": list(range(len(meshes))),
        "sh_degree": texset.degree,
        "value_range": {"min": float(texset.v_min),
                        "max": float(texset.v_max)},
        "rounding": ROUNDING_TAG,
        "attenuation": {"constant": ATTENUATION_CONSTANT,
                        "formula": ATTENUATION_FORMULA},
        "background": list(meta.background),
        "camera": {
            "target": list(meta.camera_target),
            "distance": float(meta.camera_distance),
            "yaw_deg": float(meta.camera_yaw_deg),
            "pitch_deg": float(meta.camera_pitch_deg),
            "fov_y_deg": float(meta.camera_fov_y_deg),
        },
        "layers": layers,
    }
    text = json.dumps(manifest, indent=2) + "\n"
    (out / MANIFEST_NAME).write_text(text, encoding="utf-8")
    return out


def _expect(cond: bool, field: str, message: str) -> None:
    if not cond:
        raise BundleFormatError(f"{field}: {message}")


def _get(obj: dict, key: str, kind, field: str):
    _expect(isinstance(obj, dict), field, "must be an object")
    _expect(key in obj, f"{field}.{key}" if field else key, "missing field")
    value = obj[key]
    path = f"{field}.{key}" if field else key
    if kind is float:
        _expect(isinstance(value, (int, float)) and not isinstance(value, bool),
                path, "must be a number")
        return float(value)
    _expect(isinstance(value, kind), path, f"must be {kind.__name__}")
    return value


def _color3(obj: dict, key: str, field: str) -> tuple:
    raw = _get(obj, key, list, field)
    path = f"{field}.{key}" if field else key
    _expect(len(raw) == 3, path, "must have three components")
    _expect(all(isinstance(c, (int, float)) and not isinstance(c, bool)
                for c in raw), path, "components must be numbers")
    return tuple(float(c) for c in raw)


def import_bundle(path) -> tuple:
    """Load and validate a bundle; returns (ShellSet, ShTextureSet, meta).

    Raises BundleFormatError naming the offending manifest field on any
    schema or invariant violation, and a version error on bundles written
    by a newer format.
    """
    root = Path(path)
    mpath = root / MANIFEST_NAME
    if not mpath.is_file():
        raise BundleFormatError(f"{MANIFEST_NAME}: missing file")
    try:
        manifest = json.loads(mpath.read_text(encoding="utf-8"))
    except json.JSONDecodeError as err:
        raise BundleFormatError(f"{MANIFEST_NAME}: invalid JSON ({err})") from None
    _expect(isinstance(manifest, dict), "manifest", "must be an object")

    fmt = _get(manifest, "format", str, "")
    _expect(fmt == FORMAT_TAG, "format", f"unknown format {fmt!r}")
    version = _get(manifest, "version", int, "")
    if version != FORMAT_VERSION:
        raise BundleFormatError(
            f"version: unsupported bundle version {version} "
            f"(supported: {FORMAT_VERSION})")
    name = _get(manifest, "name", str, "")
    k = _get(manifest, "layer_count", int, "")
    _expect(1 <= k <= 9, "layer_count", "must be in [1,9]")
    draw_order = _get(manifest, "draw_order", list, "")
    _expect(draw_order == list(range(k)), "draw_order",
            "must list every layer exactly once, outermost first")
    degree = _get(manifest, "sh_degree", int, "")
    _expect(0 <= degree <= 3, "sh_degree", "must be in [0,3]")

    vrange = _get(manifest, "value_range", dict, "")
    v_min = _get(vrange, "min", float, "value_range")
    v_max = _get(vrange, "max", float, "value_range")
    _expect(v_min < v_max, "value_range", "min must be below max")
    rounding = _get(manifest, "rounding", str, "")
    _expect(rounding == ROUNDING_TAG, "rounding",
            f"unsupported rounding mode {rounding!r}")
    atten = _get(manifest, "attenuation", dict, "")
    constant = _get(atten, "constant", float, "attenuation")
    _expect(constant > 0.0, "attenuation.constant", "must be positive")
    _get(atten, "formula", str, "attenuation")
    background = _color3(manifest, "background", "")

    cam = _get(manifest, "camera", dict, "")
    meta = BundleMeta(
        name=name,
        background=background,
        camera_target=_color3(cam, "target", "camera"),
        camera_distance=_get(cam, "distance", float, "camera"),
        camera_yaw_deg=_get(cam, "yaw_deg", float, "camera"),
        camera_pitch_deg=_get(cam, "pitch_deg", float, "camera"),
        camera_fov_y_deg=_get(cam, "fov_y_deg", float, "camera"),
    )

    layers = _get(manifest, "layers", list, "")
    _expect(len(layers) == k, "layers", "must have layer_count entries")
    meshes = []
    images_per_layer = []
    for j, layer in enumerate(layers):
        field = f"layers[{j}]"
        mesh_name = _get(layer, "mesh", str, field)
        mesh_path = root / mesh_name
        _expect(mesh_path.is_file(), f"{field}.mesh",
                f"missing file {mesh_name}")
        mesh = load_obj(mesh_path)
        _expect(mesh.uvs is not None and mesh.normals is not None,
                f"{field}.mesh", "mesh must carry normals and uvs")
        mesh.layer_index = j
        meshes.append(mesh)

        bands = _get(layer, "bands", list, field)
        _expect(len(bands) == degree + 1, f"{field}.bands",
                "must have one entry per SH band")
        images = []
        prev_res = None
        for b, band in enumerate(bands):
            bfield = f"{field}.bands[{b}]"
            res = _get(band, "resolution", int, bfield)
            _expect(res >= 1, f"{bfield}.resolution", "must be positive")
            if prev_res is not None:
                _expect(res <= prev_res, f"{bfield}.resolution",
                        "band resolutions must be non-increasing")
            prev_res = res
            names = _get(band, "images", list, bfield)
            _expect(len(names) == BAND_SIZES[b], f"{bfield}.images",
                    f"band {b} needs {BAND_SIZES[b]} images")
            for name in names:
                _expect(isinstance(name, str), f"{bfield}.images",
                        "filenames must be strings")
                img = _load_coefficient_png(root / name, f"{bfield}.images")
                _expect(img.shape[0] == res and img.shape[1] == res,
                        f"{bfield}.resolution",
                        f"{name} is {img.shape[1]}x{img.shape[0]}, "
                        f"manifest says {res}")
                images.append(img)
        images_per_layer.append(images)

    texset = texture_set_from_baked(images_per_layer, degree,
                                    v_min=v_min, v_max=v_max)
    return ShellSet(meshes=meshes), texset, meta
