"""Sorting-free shell renderer.

Casts one nearest-hit ray query per layer in the fixed outermost to
innermost order, shades hits from SH textures (or an analytic appearance
for cross-checks), attenuates opacity at grazing angles, and composites
front to back without any depth sorting.  A sorted-order oracle blend is
provided for the equivalence tests.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from numba import njit

from .appearance import FitSamples, ShTextureSet, decode_rgba
from .buffers import FrameBuffer
from .camera import Camera
from .fields import Ray, sigmoid

Array = np.ndarray

# transmittance below one 8-bit quantum cannot change the output visibly
EARLY_EXIT_TRANSMITTANCE = 1.0 / 512.0

PSNR_CAP = 99.0

_LEAF_SIZE = 4


# ---------------------------------------------------------------------------
# Bounding volume hierarchy
# ---------------------------------------------------------------------------

@dataclass
class Bvh:
    """Median-split BVH over triangles, flattened for the traversal kernel.

    Leaves own disjoint ranges of `order`, a permutation of triangle ids;
    `v0`, `e1`, `e2` hold the triangles in their original id order so hit
    records and tie-breaking always refer to input triangle ids.
    """

    node_min: Array
    node_max: Array
    left: Array
    right: Array
    leaf_start: Array
    leaf_count: Array
    order: Array
    v0: Array
    e1: Array
    e2: Array
    mesh: object = None

    @classmethod
    def from_triangles(cls, positions: Array, faces: Array,
                       leaf_size: int = _LEAF_SIZE, mesh=None) -> "Bvh":
        positions = np.asarray(positions, dtype=np.float64)
        faces = np.asarray(faces, dtype=np.int64)
        nf = faces.shape[0]
        if nf == 0:
            raise ValueError("cannot build a hierarchy over zero triangles")
        p0 = positions[faces[:, 0]]
        p1 = positions[faces[:, 1]]
        p2 = positions[faces[:, 2]]
        tri_min = np.minimum(np.minimum(p0, p1), p2)
        tri_max = np.maximum(np.maximum(p0, p1), p2)
        centroid = (p0 + p1 + p2) / 3.0

        order = np.arange(nf, dtype=np.int64)
        node_min, node_max = [], []
        left, right, leaf_start, leaf_count = [], [], [], []

        def build(s: int, e: int) -> int:
            node = len(node_min)
            sel = order[s:e]
            node_min.append(tri_min[sel].min(axis=0))
            node_max.append(tri_max[sel].max(axis=0))
            left.append(-1)
            right.append(-1)
            leaf_start.append(s)
            leaf_count.append(e - s)
            if e - s > leaf_size:
                cent = centroid[sel]
                axis = int(np.argmax(cent.max(axis=0) - cent.min(axis=0)))
                mid = (e - s) // 2
                part = np.argpartition(cent[:, axis], mid)
                order[s:e] = sel[part]
                li = build(s, s + mid)
                ri = build(s + mid, e)
                left[node] = li
                right[node] = ri
                leaf_count[node] = 0
            return node

        build(0, nf)
        return cls(
            node_min=np.asarray(node_min, dtype=np.float64),
            node_max=np.asarray(node_max, dtype=np.float64),
            left=np.asarray(left, dtype=np.int64),
            right=np.asarray(right, dtype=np.int64),
            leaf_start=np.asarray(leaf_start, dtype=np.int64),
            leaf_count=np.asarray(leaf_count, dtype=np.int64),
            order=order,
            v0=np.ascontiguousarray(p0),
            e1=np.ascontiguousarray(p1 - p0),
            e2=np.ascontiguousarray(p2 - p0),
            mesh=mesh,
        )

    @classmethod
    def from_mesh(cls, mesh, leaf_size: int = _LEAF_SIZE) -> "Bvh":
        return cls.from_triangles(mesh.positions, mesh.faces,
                                  leaf_size=leaf_size, mesh=mesh)

    @property
    def node_count(self) -> int:
        return self.node_min.shape[0]


@dataclass
class LayerHit:
    """Nearest intersection of one ray with one shell layer."""

    t: float
    triangle: int
    bary: Array
    uv: Array | None
    normal: Array | None


@njit(cache=True)
def _hits_kernel(node_min, node_max, left, right, leaf_start, leaf_count,
                 order, v0, e1, e2, origins, dirs, active, t_min, t_max,
                 out_t, out_tri, out_u, out_v):
    stack = np.empty(128, np.int64)
    for r in range(origins.shape[0]):
        out_t[r] = np.inf
        out_tri[r] = -1
        out_u[r] = 0.0
        out_v[r] = 0.0
        if not active[r]:
            continue
        ox, oy, oz = origins[r, 0], origins[r, 1], origins[r, 2]
        dx, dy, dz = dirs[r, 0], dirs[r, 1], dirs[r, 2]
        best_t = t_max
        best_tri = -1
        best_u = 0.0
        best_v = 0.0
        sp = 0
        stack[0] = 0
        sp = 1
        while sp > 0:
            sp -= 1
            node = stack[sp]
            lo = t_min
            hi = best_t
            inside = True
            for ax in range(3):
                if ax == 0:
                    oa, da = ox, dx
                elif ax == 1:
                    oa, da = oy, dy
                else:
                    oa, da = oz, dz
                bmn = node_min[node, ax]
                bmx = node_max[node, ax]
                if da > 1e-300 or da < -1e-300:
                    inv = 1.0 / da
                    ta = (bmn - oa) * inv
                    tb = (bmx - oa) * inv
                    if ta > tb:
                        ta, tb = tb, ta
                    if ta > lo:
                        lo = ta
                    if tb < hi:
                        hi = tb
                    if lo > hi:
                        inside = False
                        break
                elif oa < bmn or oa > bmx:
                    inside = False
                    break
            if not inside:
                continue
            if left[node] < 0:
                s0 = leaf_start[node]
                for ii in range(s0, s0 + leaf_count[node]):
                    tri = order[ii]
                    e1x, e1y, e1z = e1[tri, 0], e1[tri, 1], e1[tri, 2]
                    e2x, e2y, e2z = e2[tri, 0], e2[tri, 1], e2[tri, 2]
                    px = dy * e2z - dz * e2y
                    py = dz * e2x - dx * e2z
                    pz = dx * e2y - dy * e2x
                    det = e1x * px + e1y * py + e1z * pz
                    if -1e-13 < det < 1e-13:
                        continue
                    inv_det = 1.0 / det
                    tvx = ox - v0[tri, 0]
                    tvy = oy - v0[tri, 1]
                    tvz = oz - v0[tri, 2]
                    u = (tvx * px + tvy * py + tvz * pz) * inv_det
                    if u < 0.0 or u > 1.0:
                        continue
                    qx = tvy * e1z - tvz * e1y
                    qy = tvz * e1x - tvx * e1z
                    qz = tvx * e1y - tvy * e1x
                    v = (dx * qx + dy * qy + dz * qz) * inv_det
                    if v < 0.0 or u + v > 1.0:
                        continue
                    t = (e2x * qx + e2y * qy + e2z * qz) * inv_det
                    if t <= t_min or t > best_t:
                        continue
                    if t < best_t or tri < best_tri:
                        best_t = t
                        best_tri = tri
                        best_u = u
                        best_v = v
            else:
                stack[sp] = left[node]
                sp += 1
                stack[sp] = right[node]
                sp += 1
        if best_tri >= 0:
            out_t[r] = best_t
            out_tri[r] = best_tri
            out_u[r] = best_u
            out_v[r] = best_v


def cast_first_hits(bvh: Bvh, origins: Array, dirs: Array,
                    active: Array | None = None, t_min: float = 1e-7,
                    t_max: float = math.inf):
    """Nearest hits for a batch of rays: (t, triangle id, bary u, bary v).

    Misses report t=inf and triangle -1; `active=False` rays are skipped.
    """
    origins = np.ascontiguousarray(origins, dtype=np.float64)
    dirs = np.ascontiguousarray(dirs, dtype=np.float64)
    n = origins.shape[0]
    if active is None:
        active = np.ones(n, dtype=np.bool_)
    out_t = np.empty(n)
    out_tri = np.empty(n, dtype=np.int64)
    out_u = np.empty(n)
    out_v = np.empty(n)
    _hits_kernel(bvh.node_min, bvh.node_max, bvh.left, bvh.right,
                 bvh.leaf_start, bvh.leaf_count, bvh.order,
                 bvh.v0, bvh.e1, bvh.e2, origins, dirs,
                 np.ascontiguousarray(active, dtype=np.bool_),
                 float(t_min), float(t_max), out_t, out_tri, out_u, out_v)
    return out_t, out_tri, out_u, out_v


def interpolate_hit_attributes(mesh, tri: Array, u: Array, v: Array):
    """Barycentric uv and renormalized normal at hit points, vectorized."""
    f = mesh.faces[tri]
    w = np.stack([1.0 - u - v, u, v], axis=-1)
    uv = None
    if mesh.uvs is not None:
        corner = mesh.uvs[f]  # (n, 3, 2)
        uv = np.einsum("nc,ncj->nj", w, corner)
    normal = None
    if mesh.normals is not None:
        vn = mesh.normals[f]  # (n, 3, 3)
        normal = np.einsum("nc,ncj->nj", w, vn)
        length = np.linalg.norm(normal, axis=-1, keepdims=True)
        normal = normal / np.maximum(length, 1e-12)
    return uv, normal


def first_hit(bvh: Bvh, ray: Ray) -> LayerHit | None:
    """Nearest intersection along one ray, or None on a miss."""
    t, tri, u, v = cast_first_hits(bvh, ray.origin[None, :],
                                   ray.direction[None, :],
                                   t_min=ray.t_min, t_max=ray.t_max)
    if tri[0] < 0:
        return None
    uv = normal = None
    if bvh.mesh is not None:
        uv, normal = interpolate_hit_attributes(bvh.mesh, tri[:1], u[:1], v[:1])
        uv = None if uv is None else uv[0]
        normal = None if normal is None else normal[0]
    bary = np.array([1.0 - u[0] - v[0], u[0], v[0]])
    return LayerHit(t=float(t[0]), triangle=int(tri[0]), bary=bary,
                    uv=uv, normal=normal)


# ---------------------------------------------------------------------------
# Shading and blending
# ---------------------------------------------------------------------------

def alpha_attenuation(v: Array, n: Array) -> Array:
    """Grazing-angle opacity factor 2*sigmoid(10|v.n|) - 1."""
    facing = np.abs(np.sum(np.asarray(v) * np.asarray(n), axis=-1))
    return 2.0 * sigmoid(10.0 * facing) - 1.0


def blend_fixed_order(layers) -> Array:
    """Front-to-back composite of ordered (rgb, alpha) layers, as RGBA."""
    rgbs = [np.asarray(rgb, dtype=np.float64) for rgb, _ in layers]
    alphas = [np.asarray(a, dtype=np.float64) for _, a in layers]
    if not rgbs:
        raise ValueError("need at least one layer")
    shape = np.broadcast_shapes(*[r.shape[:-1] for r in rgbs],
                                *[a.shape for a in alphas])
    accum = np.zeros(shape + (3,))
    trans = np.ones(shape)
    for rgb, a in zip(rgbs, alphas):
        accum = accum + (trans * a)[..., None] * rgb
        trans = trans * (1.0 - a)
    return np.concatenate([accum, 1.0 - trans[..., None]], axis=-1)


def _blend_step(accum: Array, trans: Array, idx: Array, a: Array, rgb: Array):
    # shared by the fixed-order and sorted-oracle paths so their
    # floating-point evaluation order is identical per pixel
    contrib = trans[idx] * a
    accum[idx] += contrib[:, None] * rgb
    trans[idx] = trans[idx] * (1.0 - a)


def texture_shader(texset: ShTextureSet):
    """Shade hits by SH texture decode times grazing attenuation."""

    def shade(layer_index, points, uv, dirs, normals):
        rgba = decode_rgba(texset, layer_index, uv, dirs)
        alpha = rgba[:, 3] * alpha_attenuation(dirs, normals)
        return rgba[:, :3], alpha

    return shade


def analytic_shader(appearance, attenuate: bool = False):
    """Shade hits directly from a procedural appearance field.

    Defaults to no grazing attenuation: the volumetric reference drives a
    layer's opacity to the appearance alpha itself as beta grows, at any
    incidence angle, so the converging cross-check must not add the
    view-dependent fade that the baked texture path applies.
    """

    def shade(layer_index, points, uv, dirs, normals):
        rgb = appearance.color(layer_index, points, dirs, normals)
        alpha = appearance.alpha(layer_index, points, dirs, normals)
        if attenuate:
            alpha = alpha * alpha_attenuation(dirs, normals)
        return rgb, alpha

    return shade


# ---------------------------------------------------------------------------
# Frame rendering
# ---------------------------------------------------------------------------

def _shell_bvhs(meshes, bvhs):
    if bvhs is None:
        return [Bvh.from_mesh(m) for m in meshes]
    if len(bvhs) != len(meshes):
        raise ValueError("one hierarchy per shell required")
    return list(bvhs)


def _require_attributes(meshes, need_uv: bool):
    for mesh in meshes:
        if mesh.normals is None or (need_uv and mesh.uvs is None):
            raise ValueError("shell meshes need normals and uv coordinates")


def _render_fixed(camera: Camera, meshes, bvhs, shade, background,
                  early_exit: bool, stats: dict | None) -> FrameBuffer:
    origins, dirs = camera.pixel_rays()
    h, w = dirs.shape[:2]
    o = origins.reshape(-1, 3)
    d = dirs.reshape(-1, 3)
    npx = h * w
    accum = np.zeros((npx, 3))
    trans = np.ones(npx)
    rays_cast = 0
    for mesh, bvh in zip(meshes, bvhs):
        if early_exit:
            active = trans >= EARLY_EXIT_TRANSMITTANCE
            if not np.any(active):
                break
        else:
            active = np.ones(npx, dtype=np.bool_)
        rays_cast += int(np.count_nonzero(active))
        t, tri, u, v = cast_first_hits(bvh, o, d, active)
        idx = np.nonzero(tri >= 0)[0]
        if idx.size:
            uv, normal = interpolate_hit_attributes(mesh, tri[idx], u[idx],
                                                    v[idx])
            points = o[idx] + t[idx, None] * d[idx]
            rgb, a = shade(mesh.layer_index, points, uv, d[idx], normal)
            _blend_step(accum, trans, idx, a, rgb)
    if stats is not None:
        stats["rays_cast"] = rays_cast
        stats["pixels"] = npx
    bg = np.asarray(background, dtype=np.float64)
    rgba = np.concatenate([accum + trans[:, None] * bg,
                           1.0 - trans[:, None]], axis=1)
    return FrameBuffer(rgba=rgba.reshape(h, w, 4))


def render_shells(camera: Camera, shells, texset: ShTextureSet,
                  background=(0.0, 0.0, 0.0), *, early_exit: bool = True,
                  bvhs=None, stats: dict | None = None) -> FrameBuffer:
    """Fixed-order textured shell render composited over a background."""
    meshes = list(shells)
    _require_attributes(meshes, need_uv=True)
    return _render_fixed(camera, meshes, _shell_bvhs(meshes, bvhs),
                         texture_shader(texset), background, early_exit, stats)


def render_shells_analytic(camera: Camera, shells, appearance,
                           background=(0.0, 0.0, 0.0), *,
                           attenuate: bool = False, early_exit: bool = True,
                           bvhs=None, stats: dict | None = None) -> FrameBuffer:
    """Fixed-order shell render shaded by a procedural appearance field."""
    meshes = list(shells)
    _require_attributes(meshes, need_uv=False)
    return _render_fixed(camera, meshes, _shell_bvhs(meshes, bvhs),
                         analytic_shader(appearance, attenuate), background,
                         early_exit, stats)


def _gather_layer_shading(camera: Camera, meshes, bvhs, shade):
    """Hit distance, opacity, and color for every layer at every pixel."""
    origins, dirs = camera.pixel_rays()
    h, w = dirs.shape[:2]
    o = origins.reshape(-1, 3)
    d = dirs.reshape(-1, 3)
    npx = h * w
    k = len(meshes)
    t_all = np.full((npx, k), np.inf)
    a_all = np.zeros((npx, k))
    rgb_all = np.zeros((npx, k, 3))
    for j, (mesh, bvh) in enumerate(zip(meshes, bvhs)):
        t, tri, u, v = cast_first_hits(bvh, o, d)
        idx = np.nonzero(tri >= 0)[0]
        if idx.size:
            uv, normal = interpolate_hit_attributes(mesh, tri[idx], u[idx],
                                                    v[idx])
            points = o[idx] + t[idx, None] * d[idx]
            rgb, a = shade(mesh.layer_index, points, uv, d[idx], normal)
            t_all[idx, j] = t[idx]
            a_all[idx, j] = a
            rgb_all[idx, j, :] = rgb
    return (h, w), t_all, a_all, rgb_all


def oracle_sorted_blend(camera: Camera, shells, texset: ShTextureSet,
                        background=(0.0, 0.0, 0.0), *, early_exit: bool = True,
                        bvhs=None) -> FrameBuffer:
    """Depth-sorted reference blend; proves fixed order needs no sorting."""
    meshes = list(shells)
    _require_attributes(meshes, need_uv=True)
    (h, w), t_all, a_all, rgb_all = _gather_layer_shading(
        camera, meshes, _shell_bvhs(meshes, bvhs), texture_shader(texset))
    npx, k = t_all.shape
    order = np.argsort(t_all, axis=1, kind="stable")
    rows = np.arange(npx)
    accum = np.zeros((npx, 3))
    trans = np.ones(npx)
    for step in range(k):
        sel = order[:, step]
        hit = np.isfinite(t_all[rows, sel])
        if early_exit:
            hit &= trans >= EARLY_EXIT_TRANSMITTANCE
        idx = np.nonzero(hit)[0]
        if idx.size:
            pick = sel[idx]
            _blend_step(accum, trans, idx, a_all[idx, pick],
                        rgb_all[idx, pick, :])
    bg = np.asarray(background, dtype=np.float64)
    rgba = np.concatenate([accum + trans[:, None] * bg,
                           1.0 - trans[:, None]], axis=1)
    return FrameBuffer(rgba=rgba.reshape(h, w, 4))


def render_debug_buffers(camera: Camera, shells, texset: ShTextureSet,
                         background=(0.0, 0.0, 0.0), *,
                         bvhs=None) -> FrameBuffer:
    """Per-layer normal, uv, opacity, and premultiplied color buffers."""
    meshes = list(shells)
    _require_attributes(meshes, need_uv=True)
    bvhs = _shell_bvhs(meshes, bvhs)
    shade = texture_shader(texset)
    origins, dirs = camera.pixel_rays()
    h, w = dirs.shape[:2]
    o = origins.reshape(-1, 3)
    d = dirs.reshape(-1, 3)
    npx = h * w
    buffers = {"normal": [], "uv": [], "opacity": [], "color": []}
    accum = np.zeros((npx, 3))
    trans = np.ones(npx)
    for mesh, bvh in zip(meshes, bvhs):
        t, tri, u, v = cast_first_hits(bvh, o, d)
        normal_img = np.zeros((npx, 3))
        uv_img = np.zeros((npx, 2))
        opacity_img = np.zeros((npx, 1))
        color_img = np.zeros((npx, 3))
        idx = np.nonzero(tri >= 0)[0]
        if idx.size:
            uv_i, normal = interpolate_hit_attributes(mesh, tri[idx], u[idx],
                                                      v[idx])
            points = o[idx] + t[idx, None] * d[idx]
            rgb, a = shade(mesh.layer_index, points, uv_i, d[idx], normal)
            normal_img[idx] = normal * 0.5 + 0.5
            uv_img[idx] = uv_i
            opacity_img[idx, 0] = a
            color_img[idx] = a[:, None] * rgb
            _blend_step(accum, trans, idx, a, rgb)
        buffers["normal"].append(normal_img.reshape(h, w, 3))
        buffers["uv"].append(uv_img.reshape(h, w, 2))
        buffers["opacity"].append(opacity_img.reshape(h, w, 1))
        buffers["color"].append(color_img.reshape(h, w, 3))
    bg = np.asarray(background, dtype=np.float64)
    rgba = np.concatenate([accum + trans[:, None] * bg,
                           1.0 - trans[:, None]], axis=1)
    return FrameBuffer(rgba=rgba.reshape(h, w, 4), layer_buffers=buffers)


def build_hit_records(shells, cameras, background=(0.0, 0.0, 0.0),
                      bvhs=None) -> FitSamples:
    """Per-pixel layer hits for fitting: uv, mask, attenuation, view dirs.

    Rows cover every pixel of every camera in order; targets start at zero
    and are filled in by the caller from matching images.
    """
    meshes = list(shells)
    _require_attributes(meshes, need_uv=True)
    bvhs = _shell_bvhs(meshes, bvhs)
    k = len(meshes)
    uv_rows, mask_rows, att_rows, dir_rows = [], [], [], []
    for camera in cameras:
        origins, dirs = camera.pixel_rays()
        o = origins.reshape(-1, 3)
        d = dirs.reshape(-1, 3)
        npx = o.shape[0]
        uv_c = np.zeros((npx, k, 2))
        mask_c = np.zeros((npx, k), dtype=bool)
        att_c = np.zeros((npx, k))
        for j, (mesh, bvh) in enumerate(zip(meshes, bvhs)):
            t, tri, u, v = cast_first_hits(bvh, o, d)
            idx = np.nonzero(tri >= 0)[0]
            if idx.size:
                uv_i, normal = interpolate_hit_attributes(mesh, tri[idx],
                                                          u[idx], v[idx])
                uv_c[idx, j, :] = uv_i
                mask_c[idx, j] = True
                att_c[idx, j] = alpha_attenuation(d[idx], normal)
        uv_rows.append(uv_c)
        mask_rows.append(mask_c)
        att_rows.append(att_c)
        dir_rows.append(d)
    uv = np.concatenate(uv_rows, axis=0)
    mask = np.concatenate(mask_rows, axis=0)
    att = np.concatenate(att_rows, axis=0)
    dirs = np.concatenate(dir_rows, axis=0)
    return FitSamples(uv=uv, mask=mask, attenuation=att, dirs=dirs,
                      target=np.zeros((uv.shape[0], 3)),
                      background=np.asarray(background, dtype=np.float64))


# ---------------------------------------------------------------------------
# Metrics and benchmarking
# ---------------------------------------------------------------------------

def image_metrics(a: Array, b: Array) -> tuple[float, float]:
    """(PSNR in dB over RGB, mean absolute error); PSNR capped at 99."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("image dimensions do not match")
    if a.ndim != 3 or a.shape[-1] < 3:
        raise ValueError("images must be (H, W, C) with at least RGB")
    diff = a[..., :3] - b[..., :3]
    mae = float(np.mean(np.abs(diff)))
    mse = float(np.mean(diff * diff))
    if mse <= 0.0:
        return PSNR_CAP, mae
    return min(PSNR_CAP, -10.0 * math.log10(mse)), mae


@dataclass
class BenchResult:
    frame_ms: float
    rays_per_s: float
    rays: int
    frames: int


def benchmark_render(camera: Camera, shells, texset: ShTextureSet,
                     background=(0.0, 0.0, 0.0), frames: int = 3,
                     warmup: int = 1, bvhs=None) -> BenchResult:
    """Steady-state frame timing; hierarchy build and JIT warmup excluded."""
    if frames < 1:
        raise ValueError("need at least one timed frame")
    meshes = list(shells)
    bvhs = _shell_bvhs(meshes, bvhs)
    for _ in range(warmup):
        render_shells(camera, meshes, texset, background, bvhs=bvhs)
    total = 0.0
    rays = 0
    for _ in range(frames):
        stats: dict = {}
        start = time.perf_counter()
        render_shells(camera, meshes, texset, background, bvhs=bvhs,
                      stats=stats)
        total += time.perf_counter() - start
        rays += stats["rays_cast"]
    frame_ms = total / frames * 1000.0
    rays_per_s = rays / total if total > 0.0 else float("inf")
    return BenchResult(frame_ms=frame_ms, rays_per_s=rays_per_s, rays=rays,
                       frames=frames)


def benchmark_sweep(camera: Camera, cases, frames: int = 5,
                    warmup: int = 1) -> list:
    """Round-interleaved timing across cases so clock drift cancels out.

    cases: sequence of (shells, texset, background) triples. Every round
    renders each case once and the per-case frame time is the median over
    rounds, which keeps slow machine phases from biasing whichever case
    happens to run during them.
    """
    if frames < 1:
        raise ValueError("need at least one timed frame")
    prepared = []
    for shells, texset, background in cases:
        meshes = list(shells)
        prepared.append((meshes, _shell_bvhs(meshes, None), texset,
                         background))
    for meshes, bvhs, texset, background in prepared:
        for _ in range(warmup):
            render_shells(camera, meshes, texset, background, bvhs=bvhs)
    seconds = [[] for _ in prepared]
    rays = [0] * len(prepared)
    for _ in range(frames):
        for i, (meshes, bvhs, texset, background) in enumerate(prepared):
            stats: dict = {}
            start = time.perf_counter()
            render_shells(camera, meshes, texset, background, bvhs=bvhs,
                          stats=stats)
            seconds[i].append(time.perf_counter() - start)
            rays[i] += stats["rays_cast"]
    results = []
    for i in range(len(prepared)):
        total = sum(seconds[i])
        results.append(BenchResult(
            frame_ms=float(np.median(seconds[i])) * 1000.0,
            rays_per_s=rays[i] / total if total > 0.0 else float("inf"),
            rays=rays[i], frames=frames))
    return results


def format_bench_line(result: BenchResult) -> str:
    return (f"bench frame_ms={result.frame_ms:.3f} "
            f"rays_per_s={result.rays_per_s:.1f}")
