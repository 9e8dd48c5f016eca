"""Reference volumetric renderer for nested shell fields.

Pipeline per ray: DDA over a binary occupancy grid collects occupied
intervals, n samples are placed uniformly over their union, two rounds of
inverse-CDF importance sampling (m/2 each; round 1 at beta/2, round 2 at
beta) refine them, then per-layer discrete quadrature weights turn layer
distances into color and transparency which are composited front to back:

    R = sum_j C_j * A_j * prod_{l<j} (1 - A_l)

with layers ordered outermost to innermost.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np
from numba import njit

from .buffers import FrameBuffer
from .camera import Camera
from .fields import KSdf, Ray, logistic_density, sigmoid
from .rng import stateless_uniform

Array = np.ndarray

MAX_INTERVALS = 96

# jitter stream tags
_STAGE_UNIFORM = 0
_STAGE_IMPORTANCE_1 = 1
_STAGE_IMPORTANCE_2 = 2


# ---------------------------------------------------------------------------
# Appearance
# ---------------------------------------------------------------------------

class LayerAppearance:
    """Procedural color and opacity for one layer.

    Color patterns: solid, stripes, view_tint.  Alpha patterns: constant,
    facing (more opaque head-on), fresnel (more opaque at grazing).
    Outputs are clipped to [0,1].
    """

    def __init__(self, color_spec: dict, alpha_spec: dict):
        self.color_spec = dict(color_spec)
        self.alpha_spec = dict(alpha_spec)
        if self.color_spec.get("pattern") not in ("solid", "stripes", "view_tint"):
            raise ValueError(f"unknown color pattern {self.color_spec.get('pattern')!r}")
        if self.alpha_spec.get("pattern") not in ("constant", "facing", "fresnel"):
            raise ValueError(f"unknown alpha pattern {self.alpha_spec.get('pattern')!r}")

    def color(self, x: Array, v: Array, n: Array) -> Array:
        s = self.color_spec
        pat = s["pattern"]
        if pat == "solid":
            rgb = np.asarray(s["rgb"], dtype=np.float64)
            out = np.broadcast_to(rgb, x.shape).copy()
        elif pat == "stripes":
            a = np.asarray(s["rgb_a"], dtype=np.float64)
            b = np.asarray(s["rgb_b"], dtype=np.float64)
            axis = int(s.get("axis", 1))
            freq = float(s.get("frequency", 4.0))
            m = 0.5 + 0.5 * np.sin(2.0 * np.pi * freq * x[..., axis])
            out = a + (b - a) * m[..., None]
        else:  # view_tint
            rgb = np.asarray(s["rgb"], dtype=np.float64)
            tint = np.asarray(s["tint"], dtype=np.float64)
            strength = float(s.get("strength", 0.5))
            fac = strength * np.abs(np.sum(v * n, axis=-1))
            out = rgb + tint * fac[..., None]
        return np.clip(out, 0.0, 1.0)

    def alpha(self, x: Array, v: Array, n: Array) -> Array:
        s = self.alpha_spec
        pat = s["pattern"]
        if pat == "constant":
            out = np.full(x.shape[:-1], float(s["value"]))
        elif pat == "facing":
            out = float(s["base"]) + float(s["scale"]) * np.abs(np.sum(v * n, axis=-1))
        else:  # fresnel
            g = (1.0 - np.abs(np.sum(v * n, axis=-1))) ** 5
            out = float(s["base"]) + float(s["scale"]) * g
        return np.clip(out, 0.0, 1.0)

    def to_spec(self) -> dict:
        return {"color": dict(self.color_spec), "alpha": dict(self.alpha_spec)}

    @classmethod
    def from_spec(cls, spec: dict) -> "LayerAppearance":
        return cls(spec["color"], spec["alpha"])


class AppearanceField:
    """Per-layer procedural appearance; a single LayerAppearance may be shared."""

    def __init__(self, layers, k: int):
        if isinstance(layers, LayerAppearance):
            layers = [layers] * k
        layers = list(layers)
        if len(layers) != k:
            raise ValueError("appearance layer count must match k")
        self.layers = layers
        self.k = k

    def color(self, j: int, x: Array, v: Array, n: Array) -> Array:
        return self.layers[j].color(x, v, n)

    def alpha(self, j: int, x: Array, v: Array, n: Array) -> Array:
        return self.layers[j].alpha(x, v, n)


# ---------------------------------------------------------------------------
# Config and sample containers
# ---------------------------------------------------------------------------

@dataclass
class RenderConfig:
    n: int = 64
    m: int = 32
    beta: float | None = None  # None: use the field's own beta
    background: tuple = (1.0, 1.0, 1.0)
    width: int = 256
    height: int = 256
    tau: float = 1e-4
    grid_resolution: int = 256
    seed: int = 0
    jitter: bool = True

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if self.m < 0 or self.m % 2 != 0:
            raise ValueError("m must be even and >= 0")
        if not 0.0 < self.tau < 1.0:
            raise ValueError("tau must be in (0,1)")


@dataclass
class SampleSet:
    """Ordered samples along one ray."""

    t: Array
    positions: Array
    n_uniform: int
    n_importance: int = 0

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=np.float64)
        if self.t.size > 1 and not np.all(np.diff(self.t) > 0):
            raise ValueError("sample distances must be strictly increasing")

    def __len__(self) -> int:
        return int(self.t.size)


# ---------------------------------------------------------------------------
# Occupancy grid
# ---------------------------------------------------------------------------

@dataclass
class OccupancyGrid:
    bits: Array  # (nx, ny, nz) uint8
    bbox_min: Array
    bbox_max: Array
    beta: float
    tau: float

    def __post_init__(self):
        self.bits = np.ascontiguousarray(self.bits, dtype=np.uint8)
        self.bbox_min = np.asarray(self.bbox_min, dtype=np.float64)
        self.bbox_max = np.asarray(self.bbox_max, dtype=np.float64)

    @property
    def resolution(self) -> tuple:
        return self.bits.shape

    @property
    def cell(self) -> Array:
        return (self.bbox_max - self.bbox_min) / np.array(self.bits.shape)

    def occupied_at(self, points: Array) -> Array:
        """Whether each point's containing voxel is occupied (clamped at edges)."""
        p = np.asarray(points, dtype=np.float64)
        idx = np.floor((p - self.bbox_min) / self.cell).astype(np.int64)
        idx = np.clip(idx, 0, np.array(self.bits.shape) - 1)
        return self.bits[idx[..., 0], idx[..., 1], idx[..., 2]].astype(bool)

    def occupancy_fraction(self) -> float:
        return float(np.mean(self.bits))


def build_occupancy(ksdf: KSdf, beta: float, resolution: int, tau: float,
                    bbox_min, bbox_max) -> OccupancyGrid:
    """Mark voxels where any layer's density can reach tau.

    A voxel is occupied iff for some layer j the density of the distance
    shrunk by half the voxel diagonal reaches tau; since layer distances are
    1-Lipschitz this covers every point in the voxel volume.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must be in (0,1)")
    bbox_min = np.asarray(bbox_min, dtype=np.float64)
    bbox_max = np.asarray(bbox_max, dtype=np.float64)
    res = int(resolution)
    cell = (bbox_max - bbox_min) / res
    halfdiag = 0.5 * float(np.linalg.norm(cell))
    centers = [bbox_min[i] + (np.arange(res) + 0.5) * cell[i] for i in range(3)]
    bits = np.zeros((res, res, res), dtype=np.uint8)
    # slab over x to bound memory
    slab = max(1, int(2e6 / (res * res)))
    for x0 in range(0, res, slab):
        x1 = min(res, x0 + slab)
        gx, gy, gz = np.meshgrid(centers[0][x0:x1], centers[1], centers[2], indexing="ij")
        pts = np.stack([gx, gy, gz], axis=-1)
        d = ksdf.layer_distances(pts)
        shrunk = np.maximum(0.0, np.abs(d) - halfdiag)
        occ = np.any(logistic_density(beta, shrunk) >= tau, axis=-1)
        bits[x0:x1] = occ.astype(np.uint8)
    return OccupancyGrid(bits=bits, bbox_min=bbox_min, bbox_max=bbox_max, beta=beta, tau=tau)


# ---------------------------------------------------------------------------
# DDA interval collection (numba kernel)
# ---------------------------------------------------------------------------

@njit(cache=True)
def _dda_kernel(orig, dirn, t_lo, t_hi, bbox_min, cell, bits, out_iv, out_cnt):
    B = orig.shape[0]
    nx, ny, nz = bits.shape
    maxi = out_iv.shape[1]
    for r in range(B):
        out_cnt[r] = 0
        t0 = t_lo[r]
        t1 = t_hi[r]
        miss = False
        for ax in range(3):
            o = orig[r, ax]
            d = dirn[r, ax]
            lo = bbox_min[ax]
            hi = lo + cell[ax] * bits.shape[ax]
            if abs(d) < 1e-300:
                if o < lo or o > hi:
                    miss = True
                    break
            else:
                ta = (lo - o) / d
                tb = (hi - o) / d
                if ta > tb:
                    ta, tb = tb, ta
                if ta > t0:
                    t0 = ta
                if tb < t1:
                    t1 = tb
        if miss or t0 >= t1:
            continue
        # entry voxel (nudge inside)
        eps = 1e-9 * (1.0 if abs(t0) < 1.0 else abs(t0)) + 1e-12
        te = t0 + eps
        ix = int((orig[r, 0] + dirn[r, 0] * te - bbox_min[0]) / cell[0])
        iy = int((orig[r, 1] + dirn[r, 1] * te - bbox_min[1]) / cell[1])
        iz = int((orig[r, 2] + dirn[r, 2] * te - bbox_min[2]) / cell[2])
        if ix < 0:
            ix = 0
        if iy < 0:
            iy = 0
        if iz < 0:
            iz = 0
        if ix > nx - 1:
            ix = nx - 1
        if iy > ny - 1:
            iy = ny - 1
        if iz > nz - 1:
            iz = nz - 1
        step_x = 1 if dirn[r, 0] > 0 else (-1 if dirn[r, 0] < 0 else 0)
        step_y = 1 if dirn[r, 1] > 0 else (-1 if dirn[r, 1] < 0 else 0)
        step_z = 1 if dirn[r, 2] > 0 else (-1 if dirn[r, 2] < 0 else 0)
        big = 1e300
        if step_x != 0:
            nxt = bbox_min[0] + (ix + (1 if step_x > 0 else 0)) * cell[0]
            tmax_x = (nxt - orig[r, 0]) / dirn[r, 0]
            tdel_x = cell[0] / abs(dirn[r, 0])
        else:
            tmax_x = big
            tdel_x = big
        if step_y != 0:
            nxt = bbox_min[1] + (iy + (1 if step_y > 0 else 0)) * cell[1]
            tmax_y = (nxt - orig[r, 1]) / dirn[r, 1]
            tdel_y = cell[1] / abs(dirn[r, 1])
        else:
            tmax_y = big
            tdel_y = big
        if step_z != 0:
            nxt = bbox_min[2] + (iz + (1 if step_z > 0 else 0)) * cell[2]
            tmax_z = (nxt - orig[r, 2]) / dirn[r, 2]
            tdel_z = cell[2] / abs(dirn[r, 2])
        else:
            tmax_z = big
            tdel_z = big
        cur = t0
        cnt = 0
        run_open = False
        run_start = 0.0
        while cur < t1:
            if tmax_x <= tmax_y and tmax_x <= tmax_z:
                nxt_t = tmax_x
                adv = 0
            elif tmax_y <= tmax_z:
                nxt_t = tmax_y
                adv = 1
            else:
                nxt_t = tmax_z
                adv = 2
            if nxt_t > t1:
                nxt_t = t1
            occ = bits[ix, iy, iz] != 0
            if occ and not run_open:
                run_open = True
                run_start = cur
            elif (not occ) and run_open:
                if cnt < maxi:
                    out_iv[r, cnt, 0] = run_start
                    out_iv[r, cnt, 1] = cur
                    cnt += 1
                else:
                    out_iv[r, maxi - 1, 1] = cur
                run_open = False
            cur = nxt_t
            if cur >= t1:
                break
            if adv == 0:
                ix += step_x
                if ix < 0 or ix >= nx:
                    break
                tmax_x += tdel_x
            elif adv == 1:
                iy += step_y
                if iy < 0 or iy >= ny:
                    break
                tmax_y += tdel_y
            else:
                iz += step_z
                if iz < 0 or iz >= nz:
                    break
                tmax_z += tdel_z
        if run_open:
            if cnt < maxi:
                out_iv[r, cnt, 0] = run_start
                out_iv[r, cnt, 1] = cur
                cnt += 1
            else:
                out_iv[r, maxi - 1, 1] = cur
        out_cnt[r] = cnt


def ray_intervals(grid: OccupancyGrid, origins: Array, dirs: Array,
                  t_min=0.0, t_max=np.inf) -> tuple[Array, Array]:
    """Occupied (t_enter, t_exit) runs per ray: (B, MAX_INTERVALS, 2) and counts."""
    origins = np.ascontiguousarray(origins, dtype=np.float64)
    dirs = np.ascontiguousarray(dirs, dtype=np.float64)
    B = origins.shape[0]
    t_lo = np.broadcast_to(np.asarray(t_min, dtype=np.float64), (B,)).copy()
    t_hi = np.broadcast_to(np.asarray(t_max, dtype=np.float64), (B,)).copy()
    out_iv = np.zeros((B, MAX_INTERVALS, 2), dtype=np.float64)
    out_cnt = np.zeros(B, dtype=np.int64)
    _dda_kernel(origins, dirs, t_lo, t_hi, grid.bbox_min, grid.cell, grid.bits, out_iv, out_cnt)
    return out_iv, out_cnt


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def _uniform_from_intervals(iv: Array, cnt: Array, n: int, u: Array) -> tuple[Array, Array]:
    """Map arc-length fractions into the interval union; returns (t, valid)."""
    B, maxi, _ = iv.shape
    lens = np.maximum(iv[:, :, 1] - iv[:, :, 0], 0.0)
    lens *= (np.arange(maxi)[None, :] < cnt[:, None])
    cum = np.cumsum(lens, axis=1)
    total = cum[:, -1]
    valid = total > 0.0
    frac = (np.arange(n)[None, :] + u) / n
    s = frac * total[:, None]
    idx = np.sum(s[:, :, None] >= cum[:, None, :], axis=-1)
    idx = np.minimum(idx, np.maximum(cnt - 1, 0)[:, None])
    start = np.take_along_axis(iv[:, :, 0], idx, axis=1)
    seg_cum = np.take_along_axis(cum, idx, axis=1)
    seg_len = np.take_along_axis(lens, idx, axis=1)
    t = start + (s - (seg_cum - seg_len))
    return t, valid


def neus_weights(layer_d: Array, beta: float) -> Array:
    """Discrete occlusion-aware weights per sample and layer.

    layer_d: (..., S, k) signed distances at ordered samples.  The per-layer
    alpha is clamp((S(bd_i) - S(bd_{i+1})) / S(bd_i), 0, 1) with S = sigmoid
    (zero at the last sample); weights multiply in accumulated transmittance.
    """
    sig = sigmoid(beta * layer_d)
    num = sig[..., :-1, :] - sig[..., 1:, :]
    a = np.clip(num / np.maximum(sig[..., :-1, :], 1e-300), 0.0, 1.0)
    a = np.concatenate([a, np.zeros_like(a[..., :1, :])], axis=-2)
    trans = np.cumprod(1.0 - a, axis=-2)
    shifted = np.concatenate([np.ones_like(trans[..., :1, :]), trans[..., :-1, :]], axis=-2)
    return a * shifted


def _importance_round(t: Array, origins: Array, dirs: Array, ksdf: KSdf,
                      beta_round: float, half_m: int, u: Array) -> Array:
    """One inverse-CDF round: summed per-layer weights define segment masses."""
    pos = origins[:, None, :] + t[..., None] * dirs[:, None, :]
    w = neus_weights(ksdf.layer_distances(pos), beta_round)
    seg = np.sum(w[:, :-1, :], axis=-1)
    seg_len = np.diff(t, axis=1)
    tot = np.sum(seg, axis=1, keepdims=True)
    flat = tot[:, 0] <= 0.0
    # fallback: uniform over the current span (mass proportional to length)
    pdf = np.where(flat[:, None],
                   seg_len / np.maximum(np.sum(seg_len, axis=1, keepdims=True), 1e-300),
                   seg / np.maximum(tot, 1e-300))
    cdf = np.cumsum(pdf, axis=1)
    frac = (np.arange(half_m)[None, :] + u) / half_m
    idx = np.sum(frac[:, :, None] >= cdf[:, None, :], axis=-1)
    idx = np.minimum(idx, seg.shape[1] - 1)
    cdf_lo = np.take_along_axis(cdf, idx, axis=1) - np.take_along_axis(pdf, idx, axis=1)
    within = (frac - cdf_lo) / np.maximum(np.take_along_axis(pdf, idx, axis=1), 1e-300)
    within = np.clip(within, 0.0, 1.0)
    return np.take_along_axis(t, idx, axis=1) + within * np.take_along_axis(seg_len, idx, axis=1)


def _merge_sorted(t: Array, t_new: Array) -> Array:
    out = np.sort(np.concatenate([t, t_new], axis=1), axis=1)
    # enforce strict monotonicity with a negligible ramp where samples collide
    span = np.maximum(out[:, -1] - out[:, 0], 1.0)
    ramp = np.arange(out.shape[1])[None, :] * (1e-12 * span[:, None])
    return out + ramp


def _jitter(cfg: RenderConfig, stage: int, pix: Array, count: int) -> Array:
    if not cfg.jitter:
        return np.full((pix.size, count), 0.5)
    return stateless_uniform(np.int64(cfg.seed), np.int64(stage), pix[:, None].astype(np.int64),
                             np.arange(count, dtype=np.int64)[None, :])


def _gather_samples(origins: Array, dirs: Array, pix: Array, ksdf: KSdf,
                    grid: OccupancyGrid, cfg: RenderConfig, beta: float) -> tuple[Array, Array]:
    """Full sampling pipeline; returns (t (B,S), valid (B,))."""
    iv, cnt = ray_intervals(grid, origins, dirs)
    t, valid = _uniform_from_intervals(iv, cnt, cfg.n, _jitter(cfg, _STAGE_UNIFORM, pix, cfg.n))
    if cfg.m > 0:
        half = cfg.m // 2
        vi = np.where(valid)[0]
        if vi.size:
            tv = t[vi]
            for stage, beta_round in ((_STAGE_IMPORTANCE_1, beta * 0.5), (_STAGE_IMPORTANCE_2, beta)):
                u = _jitter(cfg, stage, pix[vi], half)
                t_new = _importance_round(tv, origins[vi], dirs[vi], ksdf, beta_round, half, u)
                tv = _merge_sorted(tv, t_new)
            full = np.empty((t.shape[0], cfg.n + cfg.m))
            full[:] = np.nan
            full[vi] = tv
            return full, valid
        return np.pad(t, ((0, 0), (0, cfg.m))), valid
    return t, valid


# ---------------------------------------------------------------------------
# Shading and compositing
# ---------------------------------------------------------------------------

def _shade_rays(t: Array, origins: Array, dirs: Array, ksdf: KSdf,
                app: AppearanceField, beta: float) -> tuple[Array, Array, Array]:
    """Per-layer C_j, A_j and blended (premultiplied rgb, alpha) for valid rays."""
    pos = origins[:, None, :] + t[..., None] * dirs[:, None, :]
    w = neus_weights(ksdf.layer_distances(pos), beta)
    normals = ksdf.all_layer_normals(pos)
    v = dirs[:, None, :]
    B, _, k = w.shape
    C = np.empty((B, k, 3))
    A = np.empty((B, k))
    for j in range(ksdf.k):
        n_j = normals[..., j, :]
        C[:, j, :] = np.sum(w[..., j, None] * app.color(j, pos, v, n_j), axis=1)
        A[:, j] = np.sum(w[..., j] * app.alpha(j, pos, v, n_j), axis=1)
    rgb = np.zeros((B, 3))
    trans = np.ones(B)
    for j in range(ksdf.k):
        rgb += C[:, j, :] * (A[:, j] * trans)[:, None]
        trans *= 1.0 - A[:, j]
    return rgb, 1.0 - trans, (C, A)


def render_rays(origins: Array, dirs: Array, pix: Array, ksdf: KSdf, app: AppearanceField,
                cfg: RenderConfig, grid: OccupancyGrid) -> Array:
    """Batched volumetric render; returns (B, 4) RGBA composited over background."""
    beta = float(cfg.beta if cfg.beta is not None else ksdf.beta)
    bg = np.asarray(cfg.background, dtype=np.float64)
    out = np.empty((origins.shape[0], 4))
    out[:, :3] = bg
    out[:, 3] = 0.0
    t, valid = _gather_samples(origins, dirs, pix, ksdf, grid, cfg, beta)
    vi = np.where(valid)[0]
    if vi.size:
        rgb, alpha, _ = _shade_rays(t[vi], origins[vi], dirs[vi], ksdf, app, beta)
        out[vi, :3] = rgb + (1.0 - alpha)[:, None] * bg
        out[vi, 3] = alpha
    return out


# ---------------------------------------------------------------------------
# Spec-level single-ray operations
# ---------------------------------------------------------------------------

def sample_uniform(ray: Ray, grid: OccupancyGrid, n: int, seed: int | None = None) -> SampleSet:
    """n samples uniformly covering the ray's occupied-interval union.

    With seed None the samples are evenly spaced (deterministic midpoints);
    otherwise they are jittered within their strata.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    o = ray.origin[None, :]
    d = ray.direction[None, :]
    iv, cnt = ray_intervals(grid, o, d, ray.t_min, ray.t_max)
    if seed is None:
        u = np.full((1, n), 0.5)
    else:
        u = stateless_uniform(np.int64(seed), np.int64(_STAGE_UNIFORM),
                              np.zeros((1, 1), dtype=np.int64), np.arange(n, dtype=np.int64)[None, :])
    t, valid = _uniform_from_intervals(iv, cnt, n, u)
    if not valid[0]:
        return SampleSet(t=np.empty(0), positions=np.empty((0, 3)), n_uniform=0)
    return SampleSet(t=t[0], positions=ray.at(t[0]), n_uniform=n)


def importance_resample(ray: Ray, ksdf: KSdf, base: SampleSet, m: int, beta: float,
                        seed: int | None = None) -> SampleSet:
    """Two rounds of m/2 importance samples merged into the base set."""
    if m % 2 != 0 or m <= 0:
        raise ValueError("m must be positive and even")
    if len(base) == 0:
        raise ValueError("base sample set is empty")
    half = m // 2
    t = base.t[None, :]
    o = ray.origin[None, :]
    d = ray.direction[None, :]
    for stage, beta_round in ((_STAGE_IMPORTANCE_1, beta * 0.5), (_STAGE_IMPORTANCE_2, beta)):
        if seed is None:
            u = np.full((1, half), 0.5)
        else:
            u = stateless_uniform(np.int64(seed), np.int64(stage),
                                  np.zeros((1, 1), dtype=np.int64), np.arange(half, dtype=np.int64)[None, :])
        t_new = _importance_round(t, o, d, ksdf, beta_round, half, u)
        t = _merge_sorted(t, t_new)
    return SampleSet(t=t[0], positions=ray.at(t[0]), n_uniform=base.n_uniform, n_importance=m)


def surface_weights(ray: Ray, samples: SampleSet, layer_d: Array, beta: float) -> Array:
    """Per-sample, per-layer quadrature weights, shape (S, k)."""
    layer_d = np.asarray(layer_d, dtype=np.float64)
    if layer_d.ndim == 1:
        layer_d = layer_d[:, None]
    if layer_d.shape[0] != len(samples):
        raise ValueError("layer distances must align with samples")
    return neus_weights(layer_d[None, ...], beta)[0]


def render_layer(ray: Ray, ksdf: KSdf, j: int, app: AppearanceField,
                 cfg: RenderConfig, grid: OccupancyGrid) -> tuple[Array, float]:
    """(C_j, A_j) for a single layer along one ray."""
    if not 0 <= j < ksdf.k:
        raise IndexError("layer index out of range")
    beta = float(cfg.beta if cfg.beta is not None else ksdf.beta)
    base = sample_uniform(ray, grid, cfg.n, seed=None if not cfg.jitter else cfg.seed)
    if len(base) == 0:
        return np.zeros(3), 0.0
    s = importance_resample(ray, ksdf, base, cfg.m, beta,
                            seed=None if not cfg.jitter else cfg.seed) if cfg.m else base
    w = surface_weights(ray, s, ksdf.layer_distances(s.positions), beta)[:, j]
    n_j = ksdf.all_layer_normals(s.positions)[:, j, :]
    v = np.broadcast_to(ray.direction, s.positions.shape)
    c = np.sum(w[:, None] * app.color(j, s.positions, v, n_j), axis=0)
    a = float(np.sum(w * app.alpha(j, s.positions, v, n_j)))
    return c, a


def render_volumetric(ray: Ray, ksdf: KSdf, app: AppearanceField,
                      cfg: RenderConfig, grid: OccupancyGrid) -> Array:
    """RGBA along one ray, composited over cfg.background."""
    pix = np.zeros(1, dtype=np.int64)
    return render_rays(ray.origin[None, :], ray.direction[None, :], pix, ksdf, app, cfg, grid)[0]


def render_image_volumetric(camera: Camera, scene, cfg: RenderConfig,
                            grid: OccupancyGrid | None = None) -> FrameBuffer:
    """Per-pixel volumetric render of a scene; deterministic under cfg.seed."""
    ksdf, app = scene.ksdf, scene.appearance
    beta = float(cfg.beta if cfg.beta is not None else ksdf.beta)
    if grid is None:
        grid = build_occupancy(ksdf, beta, cfg.grid_resolution, cfg.tau,
                               scene.bbox_min, scene.bbox_max)
    origins, dirs = camera.pixel_rays()
    h, w = dirs.shape[:2]
    flat_o = origins.reshape(-1, 3)
    flat_d = dirs.reshape(-1, 3)
    rgba = np.empty((h * w, 4))
    tile = 8192
    for s0 in range(0, h * w, tile):
        s1 = min(h * w, s0 + tile)
        pix = np.arange(s0, s1, dtype=np.int64)
        rgba[s0:s1] = render_rays(flat_o[s0:s1], flat_d[s0:s1], pix, ksdf, app, cfg, grid)
    return FrameBuffer(rgba=rgba.reshape(h, w, 4))
