"""Scene descriptions: a shell field plus procedural appearance.

Scenes serialize to a YAML file carrying the primitive/CSG tree, raw offset
parameters with their signs, the sharpness schedule, and per-layer
appearance specs.  Three canonical scenes are built in: fuzzy-sphere,
torus-with-halo, and csg-blob.
"""

from __future__ import annotations

import colorsys
import math
from dataclasses import dataclass

import numpy as np
import yaml

from .fields import (
    Box,
    Capsule,
    ConstantOffset,
    Difference,
    DirectionalOffset,
    Intersection,
    KSdf,
    Offset,
    SdfField,
    SmoothUnion,
    Sphere,
    Torus,
    Union,
    delta_o_init,
    softplus_inv,
)
from .volren import AppearanceField, LayerAppearance

CANONICAL_SCENES = ("fuzzy-sphere", "torus-with-halo", "csg-blob")

DEFAULT_BETAS = (30.0, 512.0, 4096.0)


@dataclass
class Scene:
    name: str
    ksdf: KSdf
    appearance: AppearanceField
    betas: tuple  # (beta_1, beta_2, beta_3) schedule endpoints
    bbox_min: np.ndarray
    bbox_max: np.ndarray
    background: tuple = (1.0, 1.0, 1.0)

    def __post_init__(self):
        self.bbox_min = np.asarray(self.bbox_min, dtype=np.float64)
        self.bbox_max = np.asarray(self.bbox_max, dtype=np.float64)
        if len(self.betas) != 3 or any(b <= 0 for b in self.betas):
            raise ValueError("betas must be three positive schedule endpoints")
        if self.appearance.k != self.ksdf.k:
            raise ValueError("appearance layer count must match k")

    @property
    def k(self) -> int:
        return self.ksdf.k


# ---------------------------------------------------------------------------
# Field (de)serialization
# ---------------------------------------------------------------------------

def field_to_dict(f: SdfField) -> dict:
    if isinstance(f, Sphere):
        return {"type": "sphere", "radius": f.radius, "center": list(f.center)}
    if isinstance(f, Box):
        return {"type": "box", "half_extents": list(f.half_extents), "center": list(f.center)}
    if isinstance(f, Torus):
        return {"type": "torus", "major_radius": f.major_radius,
                "minor_radius": f.minor_radius, "center": list(f.center)}
    if isinstance(f, Capsule):
        return {"type": "capsule", "point_a": list(f.point_a),
                "point_b": list(f.point_b), "radius": f.radius}
    if isinstance(f, SmoothUnion):
        return {"type": "smooth_union", "blend": f.k,
                "children": [field_to_dict(f.a), field_to_dict(f.b)]}
    if isinstance(f, Union):
        return {"type": "union", "children": [field_to_dict(c) for c in f.children]}
    if isinstance(f, Intersection):
        return {"type": "intersection", "children": [field_to_dict(c) for c in f.children]}
    if isinstance(f, Difference):
        return {"type": "difference", "children": [field_to_dict(f.a), field_to_dict(f.b)]}
    if isinstance(f, Offset):
        return {"type": "offset", "amount": f.amount, "children": [field_to_dict(f.child)]}
    raise TypeError(f"cannot serialize field type {type(f).__name__}")


def field_from_dict(d: dict) -> SdfField:
    t = d.get("type")
    if t == "sphere":
        return Sphere(radius=float(d["radius"]), center=tuple(d.get("center", (0, 0, 0))))
    if t == "box":
        return Box(half_extents=tuple(d["half_extents"]), center=tuple(d.get("center", (0, 0, 0))))
    if t == "torus":
        return Torus(major_radius=float(d["major_radius"]), minor_radius=float(d["minor_radius"]),
                     center=tuple(d.get("center", (0, 0, 0))))
    if t == "capsule":
        return Capsule(point_a=tuple(d["point_a"]), point_b=tuple(d["point_b"]),
                       radius=float(d["radius"]))
    if t in ("union", "intersection", "difference", "smooth_union", "offset"):
        kids = [field_from_dict(c) for c in d.get("children", [])]
        if t == "union":
            return Union(*kids)
        if t == "intersection":
            return Intersection(*kids)
        if t == "difference":
            if len(kids) != 2:
                raise ValueError("difference needs exactly two children")
            return Difference(*kids)
        if t == "smooth_union":
            if len(kids) != 2:
                raise ValueError("smooth_union needs exactly two children")
            return SmoothUnion(kids[0], kids[1], float(d["blend"]))
        if len(kids) != 1:
            raise ValueError("offset needs exactly one child")
        return Offset(kids[0], float(d["amount"]))
    raise ValueError(f"unknown field type {t!r}")


def _offset_to_dict(o) -> dict:
    if isinstance(o, ConstantOffset):
        return {"type": "constant", "raw": float(o.raw)}
    if isinstance(o, DirectionalOffset):
        return {"type": "directional", "raw": float(o.raw),
                "sh_raw": [float(v) for v in o.sh_raw], "center": list(o.center)}
    raise TypeError(f"cannot serialize offset type {type(o).__name__}")


def _offset_from_dict(d: dict):
    t = d.get("type")
    if t == "constant":
        return ConstantOffset(raw=float(d["raw"]))
    if t == "directional":
        return DirectionalOffset(raw=float(d["raw"]), sh_raw=tuple(d["sh_raw"]),
                                 center=tuple(d.get("center", (0, 0, 0))))
    raise ValueError(f"unknown offset type {t!r}")


# ---------------------------------------------------------------------------
# Scene (de)serialization
# ---------------------------------------------------------------------------

def scene_to_dict(scene: Scene) -> dict:
    return {
        "name": scene.name,
        "betas": [float(b) for b in scene.betas],
        "background": [float(c) for c in scene.background],
        "bbox": {"min": scene.bbox_min.tolist(), "max": scene.bbox_max.tolist()},
        "field": field_to_dict(scene.ksdf.main),
        "offsets": {
            "inner": [_offset_to_dict(o) for o in scene.ksdf.inner_offsets],
            "outer": [_offset_to_dict(o) for o in scene.ksdf.outer_offsets],
        },
        "appearance": [la.to_spec() for la in scene.appearance.layers],
    }


def scene_from_dict(d: dict) -> Scene:
    betas = tuple(float(b) for b in d["betas"])
    ksdf = KSdf(
        main=field_from_dict(d["field"]),
        inner_offsets=[_offset_from_dict(o) for o in d.get("offsets", {}).get("inner", [])],
        outer_offsets=[_offset_from_dict(o) for o in d.get("offsets", {}).get("outer", [])],
        beta=betas[-1],
    )
    layers = [LayerAppearance.from_spec(s) for s in d["appearance"]]
    return Scene(
        name=str(d["name"]),
        ksdf=ksdf,
        appearance=AppearanceField(layers, ksdf.k),
        betas=betas,
        bbox_min=np.asarray(d["bbox"]["min"], dtype=np.float64),
        bbox_max=np.asarray(d["bbox"]["max"], dtype=np.float64),
        background=tuple(float(c) for c in d.get("background", (1.0, 1.0, 1.0))),
    )


def save_scene(path, scene: Scene) -> None:
    with open(path, "w", encoding="utf-8") as f:
        yaml.safe_dump(scene_to_dict(scene), f, sort_keys=False)


def load_scene(path) -> Scene:
    with open(path, "r", encoding="utf-8") as f:
        d = yaml.safe_load(f)
    return scene_from_dict(d)


# ---------------------------------------------------------------------------
# Canonical scenes
# ---------------------------------------------------------------------------

def _layer_colors(k: int) -> list:
    cols = []
    for j in range(k):
        h = (j * 137.50776405) % 360.0
        cols.append([round(c, 4) for c in colorsys.hsv_to_rgb(h / 360.0, 0.62, 0.86)])
    return cols


def _default_appearance(k: int, outer_halo: bool = False) -> list:
    """Per-layer specs: translucent outer layers, near-opaque core."""
    cols = _layer_colors(k)
    layers = []
    for j in range(k):
        color = {"pattern": "solid", "rgb": cols[j]}
        if j == k - 1:
            alpha = {"pattern": "constant", "value": 0.95}
        elif outer_halo and j == 0:
            alpha = {"pattern": "fresnel", "base": 0.08, "scale": 0.55}
            color = {"pattern": "solid", "rgb": [0.85, 0.9, 1.0]}
        else:
            alpha = {"pattern": "facing", "base": 0.2 + 0.05 * (j % 3), "scale": 0.45}
        layers.append(LayerAppearance(color, alpha))
    return layers


def canonical_scene(name: str, k: int = 3) -> Scene:
    """Build one of the built-in test scenes with k nested layers."""
    if not 1 <= k <= 9:
        raise ValueError("k must be in [1,9]")
    bbox = 0.8
    if name == "fuzzy-sphere":
        betas = (30.0, 40.0, 4096.0)
        gap = delta_o_init(betas[1])
        inner = [ConstantOffset.from_value(gap) for _ in range(k - 1)]
        ksdf = KSdf(Sphere(radius=0.5), inner_offsets=inner, beta=betas[-1])
        app = AppearanceField(_default_appearance(k), k)
    elif name == "torus-with-halo":
        betas = (30.0, 40.0, 4096.0)
        main = Torus(major_radius=0.35, minor_radius=0.15)
        outer = [ConstantOffset.from_value(0.05)] if k >= 2 else []
        inner = [ConstantOffset.from_value(0.045) for _ in range(k - 1 - len(outer))]
        ksdf = KSdf(main, inner_offsets=inner, outer_offsets=outer, beta=betas[-1])
        app = AppearanceField(_default_appearance(k, outer_halo=k >= 2), k)
    elif name == "csg-blob":
        betas = (30.0, 40.0, 4096.0)
        main = SmoothUnion(
            Sphere(radius=0.3, center=(-0.22, 0.0, 0.0)),
            Sphere(radius=0.3, center=(0.22, 0.05, 0.0)),
            0.18,
        )
        inner = []
        if k >= 2:
            inner.append(DirectionalOffset(raw=float(softplus_inv(0.05)),
                                           sh_raw=(0.0, 0.25, -0.2, 0.15)))
        inner += [ConstantOffset.from_value(0.045) for _ in range(k - 1 - len(inner))]
        ksdf = KSdf(main, inner_offsets=inner, beta=betas[-1])
        layers = _default_appearance(k)
        if k >= 1:
            layers[0] = LayerAppearance(
                {"pattern": "view_tint", "rgb": [0.7, 0.35, 0.25], "tint": [0.2, 0.25, 0.5],
                 "strength": 0.6},
                {"pattern": "facing", "base": 0.25, "scale": 0.4},
            )
        app = AppearanceField(layers, k)
    else:
        raise ValueError(f"unknown scene {name!r}; known: {', '.join(CANONICAL_SCENES)}")
    return Scene(name=name, ksdf=ksdf, appearance=app, betas=betas,
                 bbox_min=np.array([-bbox] * 3), bbox_max=np.array([bbox] * 3))
