"""Signed distance fields, nested shell composition, and the logistic density kernel.

Geometry is analytic: primitive SDFs (sphere, box, torus, capsule), plain and
smooth CSG combinations, constant offsets, and dense trilinear grids.  A
:class:`KSdf` bundles a main field with ordered signed offset fields whose
softplus-activated magnitudes are cumulatively summed, yielding k strictly
nested layer distance functions (outermost first).

All evaluation is batched: a point array ``p`` has shape ``(..., 3)`` and
distances come back with shape ``(...,)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .shmath import sh_basis

Array = np.ndarray

MAX_LAYERS = 9


class DegenerateNormalError(ValueError):
    """Raised when a normal is requested at a zero-gradient point."""


# ---------------------------------------------------------------------------
# Scalar helpers
# ---------------------------------------------------------------------------

def normalize(v: Array, eps: float = 0.0) -> Array:
    """Normalize along the last axis; zero vectors stay zero when eps > 0."""
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    if eps > 0.0:
        n = np.maximum(n, eps)
    return v / n


def sigmoid(x: Array) -> Array:
    """Numerically stable logistic sigmoid."""
    x = np.asarray(x, dtype=np.float64)
    s = 1.0 / (1.0 + np.exp(-np.abs(x)))
    return np.where(x >= 0.0, s, 1.0 - s)


def softplus(x: Array) -> Array:
    """Stable softplus; returns x directly above 20 to avoid overflow."""
    x = np.asarray(x, dtype=np.float64)
    return np.where(x > 20.0, x, np.log1p(np.exp(np.minimum(x, 20.0))))


def softplus_inv(y: Array) -> Array:
    """Inverse of :func:`softplus` for y > 0."""
    y = np.asarray(y, dtype=np.float64)
    return np.where(y > 20.0, y, np.log(np.expm1(np.minimum(np.maximum(y, 1e-300), 20.0))))


def logistic_density(beta: float, d: Array) -> Array:
    """Logistic density beta*e^(-beta*d) / (1+e^(-beta*d))^2.

    Evaluated through the symmetric form in -beta*|d| so it stays finite
    for |beta*d| up to at least 1e4 (underflows cleanly to 0).
    """
    if beta <= 0.0:
        raise ValueError("beta must be positive")
    z = beta * np.abs(np.asarray(d, dtype=np.float64))
    e = np.exp(-z)
    return beta * e / (1.0 + e) ** 2


def logistic_cdf(beta: float, d: Array) -> Array:
    """Antiderivative of :func:`logistic_density`: sigmoid(beta*d)."""
    return sigmoid(beta * np.asarray(d, dtype=np.float64))


def delta_o_init(beta: float) -> float:
    """Standard deviation of the logistic density: (1/beta) * pi / sqrt(3).

    Used as the default spacing when initializing support shells.
    """
    if beta <= 0.0:
        raise ValueError("beta must be positive")
    return (1.0 / beta) * math.pi / math.sqrt(3.0)


def beta_schedule(beta_start: float, beta_end: float, num: int) -> Array:
    """Exponential sharpness schedule from beta_start to beta_end, inclusive."""
    if beta_start <= 0.0 or beta_end <= 0.0:
        raise ValueError("beta endpoints must be positive")
    if num < 1:
        raise ValueError("num must be >= 1")
    if num == 1:
        return np.array([beta_end], dtype=np.float64)
    return np.exp(np.linspace(math.log(beta_start), math.log(beta_end), num))


@dataclass(frozen=True)
class LogisticKernel:
    """Density profile around a level set; beta controls sharpness."""

    beta: float

    def __post_init__(self):
        if self.beta <= 0.0:
            raise ValueError("beta must be positive")

    def density(self, d: Array) -> Array:
        return logistic_density(self.beta, d)

    def cdf(self, d: Array) -> Array:
        return logistic_cdf(self.beta, d)

    @property
    def std(self) -> float:
        return delta_o_init(self.beta)


@dataclass(frozen=True)
class Ray:
    """A ray origin + unit direction with a valid parameter interval."""

    origin: Array
    direction: Array
    t_min: float = 0.0
    t_max: float = np.inf

    def __post_init__(self):
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=np.float64))
        d = np.asarray(self.direction, dtype=np.float64)
        n = np.linalg.norm(d)
        if n == 0.0:
            raise ValueError("ray direction must be nonzero")
        if abs(n - 1.0) > 1e-6:
            d = d / n
        object.__setattr__(self, "direction", d)
        if not self.t_min < self.t_max:
            raise ValueError("t_min must be < t_max")

    def at(self, t) -> Array:
        t = np.asanyarray(t, dtype=np.float64)
        return self.origin + t[..., None] * self.direction if t.ndim else self.origin + t * self.direction


# ---------------------------------------------------------------------------
# SDF fields
# ---------------------------------------------------------------------------

class SdfField:
    """Base signed distance field: negative inside, positive outside."""

    def eval(self, p: Array) -> Array:
        raise NotImplementedError

    def gradient(self, p: Array, h: float = 1e-4) -> Array:
        """Closed-form gradient where available, else central differences."""
        return self._fd_gradient(p, h)

    def _fd_gradient(self, p: Array, h: float) -> Array:
        p = np.asarray(p, dtype=np.float64)
        g = np.empty_like(p)
        for ax in range(3):
            dp = np.zeros(3)
            dp[ax] = h
            g[..., ax] = (self.eval(p + dp) - self.eval(p - dp)) / (2.0 * h)
        return g

    def normal(self, p: Array, h: float = 1e-4) -> Array:
        """Unit outward normal; raises on zero gradient."""
        g = self.gradient(p, h)
        n = np.linalg.norm(g, axis=-1)
        if np.any(n < 1e-12):
            raise DegenerateNormalError("zero gradient encountered")
        return g / n[..., None]


@dataclass(frozen=True)
class Sphere(SdfField):
    radius: float
    center: tuple = (0.0, 0.0, 0.0)

    def eval(self, p: Array) -> Array:
        q = np.asarray(p, dtype=np.float64) - np.asarray(self.center)
        return np.linalg.norm(q, axis=-1) - self.radius

    def gradient(self, p: Array, h: float = 1e-4) -> Array:
        q = np.asarray(p, dtype=np.float64) - np.asarray(self.center)
        return normalize(q, eps=1e-300)


@dataclass(frozen=True)
class Box(SdfField):
    half_extents: tuple
    center: tuple = (0.0, 0.0, 0.0)

    def eval(self, p: Array) -> Array:
        q = np.abs(np.asarray(p, dtype=np.float64) - np.asarray(self.center)) - np.asarray(self.half_extents)
        outside = np.linalg.norm(np.maximum(q, 0.0), axis=-1)
        inside = np.minimum(np.max(q, axis=-1), 0.0)
        return outside + inside

    def gradient(self, p: Array, h: float = 1e-4) -> Array:
        rel = np.asarray(p, dtype=np.float64) - np.asarray(self.center)
        q = np.abs(rel) - np.asarray(self.half_extents)
        sgn = np.where(rel >= 0.0, 1.0, -1.0)
        qpos = np.maximum(q, 0.0)
        out_norm = np.linalg.norm(qpos, axis=-1, keepdims=True)
        outside_mask = out_norm[..., 0] > 0.0
        g_out = sgn * qpos / np.maximum(out_norm, 1e-300)
        # inside: push along the axis closest to a face
        one_hot = (q == np.max(q, axis=-1, keepdims=True)).astype(np.float64)
        one_hot /= np.sum(one_hot, axis=-1, keepdims=True)
        g_in = sgn * one_hot
        return np.where(outside_mask[..., None], g_out, g_in)


@dataclass(frozen=True)
class Torus(SdfField):
    """Torus in the xz-plane: major radius R, tube radius r."""

    major_radius: float
    minor_radius: float
    center: tuple = (0.0, 0.0, 0.0)

    def eval(self, p: Array) -> Array:
        q = np.asarray(p, dtype=np.float64) - np.asarray(self.center)
        ring = np.hypot(q[..., 0], q[..., 2]) - self.major_radius
        return np.hypot(ring, q[..., 1]) - self.minor_radius

    def gradient(self, p: Array, h: float = 1e-4) -> Array:
        q = np.asarray(p, dtype=np.float64) - np.asarray(self.center)
        lxz = np.maximum(np.hypot(q[..., 0], q[..., 2]), 1e-300)
        ring = lxz - self.major_radius
        denom = np.maximum(np.hypot(ring, q[..., 1]), 1e-300)
        g = np.empty_like(q)
        g[..., 0] = (ring / denom) * (q[..., 0] / lxz)
        g[..., 1] = q[..., 1] / denom
        g[..., 2] = (ring / denom) * (q[..., 2] / lxz)
        return g


@dataclass(frozen=True)
class Capsule(SdfField):
    point_a: tuple
    point_b: tuple
    radius: float

    def _closest_offset(self, p: Array) -> Array:
        a = np.asarray(self.point_a, dtype=np.float64)
        b = np.asarray(self.point_b, dtype=np.float64)
        pa = np.asarray(p, dtype=np.float64) - a
        ba = b - a
        t = np.clip(np.sum(pa * ba, axis=-1) / np.dot(ba, ba), 0.0, 1.0)
        return pa - t[..., None] * ba

    def eval(self, p: Array) -> Array:
        return np.linalg.norm(self._closest_offset(p), axis=-1) - self.radius

    def gradient(self, p: Array, h: float = 1e-4) -> Array:
        return normalize(self._closest_offset(p), eps=1e-300)


class Union(SdfField):
    def __init__(self, *children: SdfField):
        if not children:
            raise ValueError("Union needs at least one child")
        self.children = children

    def eval(self, p: Array) -> Array:
        return np.min(np.stack([c.eval(p) for c in self.children]), axis=0)

    def gradient(self, p: Array, h: float = 1e-4) -> Array:
        d = np.stack([c.eval(p) for c in self.children])
        g = np.stack([c.gradient(p, h) for c in self.children])
        pick = np.argmin(d, axis=0)
        return np.take_along_axis(g, pick[None, ..., None], axis=0)[0]


class Intersection(SdfField):
    def __init__(self, *children: SdfField):
        if not children:
            raise ValueError("Intersection needs at least one child")
        self.children = children

    def eval(self, p: Array) -> Array:
        return np.max(np.stack([c.eval(p) for c in self.children]), axis=0)

    def gradient(self, p: Array, h: float = 1e-4) -> Array:
        d = np.stack([c.eval(p) for c in self.children])
        g = np.stack([c.gradient(p, h) for c in self.children])
        pick = np.argmax(d, axis=0)
        return np.take_along_axis(g, pick[None, ..., None], axis=0)[0]


class Difference(SdfField):
    """a minus b: max(d_a, -d_b)."""

    def __init__(self, a: SdfField, b: SdfField):
        self.a, self.b = a, b

    def eval(self, p: Array) -> Array:
        return np.maximum(self.a.eval(p), -self.b.eval(p))

    def gradient(self, p: Array, h: float = 1e-4) -> Array:
        da, db = self.a.eval(p), -self.b.eval(p)
        ga, gb = self.a.gradient(p, h), -self.b.gradient(p, h)
        return np.where((da >= db)[..., None], ga, gb)


class SmoothUnion(SdfField):
    """Polynomial smooth minimum of two fields with blend radius k."""

    def __init__(self, a: SdfField, b: SdfField, k: float):
        if k <= 0.0:
            raise ValueError("blend radius k must be positive")
        self.a, self.b, self.k = a, b, k

    def _h(self, da: Array, db: Array) -> Array:
        return np.clip(0.5 + 0.5 * (db - da) / self.k, 0.0, 1.0)

    def eval(self, p: Array) -> Array:
        da, db = self.a.eval(p), self.b.eval(p)
        hmix = self._h(da, db)
        return db * (1.0 - hmix) + da * hmix - self.k * hmix * (1.0 - hmix)

    def gradient(self, p: Array, h: float = 1e-4) -> Array:
        # d(smin)/d(da) = h and d(smin)/d(db) = 1-h; the blend-correction
        # terms cancel exactly, so the gradient is the convex mix.
        da, db = self.a.eval(p), self.b.eval(p)
        hmix = self._h(da, db)[..., None]
        return hmix * self.a.gradient(p, h) + (1.0 - hmix) * self.b.gradient(p, h)


class Offset(SdfField):
    """Level-set offset: eval = child - amount (positive amount inflates)."""

    def __init__(self, child: SdfField, amount: float):
        self.child, self.amount = child, float(amount)

    def eval(self, p: Array) -> Array:
        return self.child.eval(p) - self.amount

    def gradient(self, p: Array, h: float = 1e-4) -> Array:
        return self.child.gradient(p, h)


class ScaledDistance(SdfField):
    """Multiplies distance values by a constant; breaks the eikonal property."""

    def __init__(self, child: SdfField, scale: float):
        self.child, self.scale = child, float(scale)

    def eval(self, p: Array) -> Array:
        return self.scale * self.child.eval(p)

    def gradient(self, p: Array, h: float = 1e-4) -> Array:
        return self.scale * self.child.gradient(p, h)


class GridField(SdfField):
    """Dense SDF samples on a regular lattice, trilinearly interpolated.

    Queries outside the bounding box are clamped to the boundary;
    :meth:`eval_with_clamp` reports which queries were clamped.
    """

    def __init__(self, values: Array, bbox_min, bbox_max):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 3 or min(values.shape) < 2:
            raise ValueError("grid values must be 3-D with at least 2 samples per axis")
        if not np.all(np.isfinite(values)):
            raise ValueError("grid values must be finite")
        self.values = values
        self.bbox_min = np.asarray(bbox_min, dtype=np.float64)
        self.bbox_max = np.asarray(bbox_max, dtype=np.float64)
        self.shape = np.array(values.shape)
        self.cell = (self.bbox_max - self.bbox_min) / (self.shape - 1)

    @classmethod
    def from_field(cls, field: SdfField, bbox_min, bbox_max, resolution: int) -> "GridField":
        bbox_min = np.asarray(bbox_min, dtype=np.float64)
        bbox_max = np.asarray(bbox_max, dtype=np.float64)
        axes = [np.linspace(bbox_min[i], bbox_max[i], resolution) for i in range(3)]
        gx, gy, gz = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([gx, gy, gz], axis=-1)
        return cls(field.eval(pts), bbox_min, bbox_max)

    def eval_with_clamp(self, p: Array) -> tuple[Array, Array]:
        p = np.asarray(p, dtype=np.float64)
        u = (p - self.bbox_min) / self.cell
        clamped = np.any((u < 0.0) | (u > self.shape - 1), axis=-1)
        u = np.clip(u, 0.0, self.shape - 1)
        i0 = np.minimum(u.astype(np.int64), self.shape - 2)
        f = u - i0
        ix, iy, iz = i0[..., 0], i0[..., 1], i0[..., 2]
        fx, fy, fz = f[..., 0], f[..., 1], f[..., 2]
        v = self.values
        c00 = v[ix, iy, iz] * (1 - fx) + v[ix + 1, iy, iz] * fx
        c10 = v[ix, iy + 1, iz] * (1 - fx) + v[ix + 1, iy + 1, iz] * fx
        c01 = v[ix, iy, iz + 1] * (1 - fx) + v[ix + 1, iy, iz + 1] * fx
        c11 = v[ix, iy + 1, iz + 1] * (1 - fx) + v[ix + 1, iy + 1, iz + 1] * fx
        c0 = c00 * (1 - fy) + c10 * fy
        c1 = c01 * (1 - fy) + c11 * fy
        return c0 * (1 - fz) + c1 * fz, clamped

    def eval(self, p: Array) -> Array:
        return self.eval_with_clamp(p)[0]

    def gradient(self, p: Array, h: float | None = None) -> Array:
        step = float(np.min(self.cell)) if h is None else h
        return self._fd_gradient(np.asarray(p, dtype=np.float64), step)


# ---------------------------------------------------------------------------
# Layer offset fields
# ---------------------------------------------------------------------------

class LayerOffset:
    """Positive offset magnitude field: softplus of raw parameters.

    The shell side (inside / outside of the main surface) is fixed at
    construction through the owning :class:`KSdf` list it is placed in.
    """

    def activated(self, p: Array) -> Array:
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantOffset(LayerOffset):
    raw: float

    @classmethod
    def from_value(cls, value: float) -> "ConstantOffset":
        """Build from the desired activated magnitude (> 0)."""
        if value <= 0.0:
            raise ValueError("offset magnitude must be positive")
        return cls(float(softplus_inv(value)))

    def activated(self, p: Array) -> Array:
        p = np.asarray(p, dtype=np.float64)
        return np.full(p.shape[:-1], float(softplus(self.raw)))


@dataclass(frozen=True)
class DirectionalOffset(LayerOffset):
    """Constant plus spherical-harmonic modulation over direction from a center."""

    raw: float
    sh_raw: tuple
    center: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        n = len(self.sh_raw)
        deg = int(math.isqrt(n)) - 1
        if (deg + 1) ** 2 != n or not 0 <= deg <= 3:
            raise ValueError("sh_raw length must be (deg+1)^2 for deg in [0,3]")

    def raw_field(self, p: Array) -> Array:
        q = np.asarray(p, dtype=np.float64) - np.asarray(self.center)
        u = normalize(q, eps=1e-12)
        deg = int(math.isqrt(len(self.sh_raw))) - 1
        basis = sh_basis(deg, u)
        return self.raw + basis @ np.asarray(self.sh_raw, dtype=np.float64)

    def activated(self, p: Array) -> Array:
        return softplus(self.raw_field(p))


# ---------------------------------------------------------------------------
# k-SDF
# ---------------------------------------------------------------------------

class KSdf:
    """A main SDF plus ordered signed offset fields defining k nested shells.

    Layer distance functions are built by cumulatively summing activated
    offsets: outer offsets are subtracted (shells containing the main
    surface), inner offsets added (shells contained by it).  Layers are
    indexed outermost first; index ``n_outer`` is the main surface.
    """

    def __init__(self, main: SdfField, inner_offsets=(), outer_offsets=(), beta: float = 4096.0):
        k = 1 + len(inner_offsets) + len(outer_offsets)
        if not 1 <= k <= MAX_LAYERS:
            raise ValueError(f"k must be in [1,{MAX_LAYERS}]")
        if beta <= 0.0:
            raise ValueError("beta must be positive")
        self.main = main
        self.inner_offsets = tuple(inner_offsets)
        self.outer_offsets = tuple(outer_offsets)
        self.beta = float(beta)

    @property
    def k(self) -> int:
        return 1 + len(self.inner_offsets) + len(self.outer_offsets)

    @property
    def main_index(self) -> int:
        return len(self.outer_offsets)

    def _signed_cumulative(self, p: Array) -> Array:
        """(..., k) signed cumulative offsets, outermost first (main = 0)."""
        p = np.asarray(p, dtype=np.float64)
        base = p.shape[:-1]
        cols = []
        if self.outer_offsets:
            acts = np.stack([o.activated(p) for o in self.outer_offsets], axis=-1)
            cum = np.cumsum(acts, axis=-1)
            cols.append(-cum[..., ::-1])
        cols.append(np.zeros(base + (1,)))
        if self.inner_offsets:
            acts = np.stack([o.activated(p) for o in self.inner_offsets], axis=-1)
            cols.append(np.cumsum(acts, axis=-1))
        return np.concatenate(cols, axis=-1)

    def layer_distances(self, p: Array) -> Array:
        """Signed distances of all k layers at p, shape (..., k), outermost first."""
        return self.main.eval(p)[..., None] + self._signed_cumulative(p)

    def layer_field(self, j: int) -> SdfField:
        if not 0 <= j < self.k:
            raise IndexError(f"layer index {j} out of range for k={self.k}")
        return _LayerField(self, j)

    def layer_gradient(self, p: Array, j: int, h: float = 1e-4) -> Array:
        """Gradient of layer j's distance: main gradient plus offset variation."""
        g = self.main.gradient(p, h)
        offs = self._layer_offset_terms(j)
        if any(not isinstance(o, ConstantOffset) for _, o in offs):
            p = np.asarray(p, dtype=np.float64)
            for ax in range(3):
                dp = np.zeros(3)
                dp[ax] = h
                hi = sum(s * o.activated(p + dp) for s, o in offs if not isinstance(o, ConstantOffset))
                lo = sum(s * o.activated(p - dp) for s, o in offs if not isinstance(o, ConstantOffset))
                g = g.copy() if ax == 0 else g
                g[..., ax] += (hi - lo) / (2.0 * h)
        return g

    def layer_normals(self, p: Array, j: int, h: float = 1e-4) -> Array:
        return normalize(self.layer_gradient(p, j, h), eps=1e-300)

    def all_layer_normals(self, p: Array, h: float = 1e-4) -> Array:
        """Unit normals of every layer at p, shape (..., k, 3).

        Constant offsets share the main gradient, so it is computed once;
        spatially varying offsets add their finite-difference term per layer.
        """
        p = np.asarray(p, dtype=np.float64)
        g = self.main.gradient(p, h)
        varying = any(
            not isinstance(o, ConstantOffset)
            for o in self.inner_offsets + self.outer_offsets
        )
        if not varying:
            n = normalize(g, eps=1e-300)
            return np.broadcast_to(n[..., None, :], p.shape[:-1] + (self.k, 3)).copy()
        out = np.empty(p.shape[:-1] + (self.k, 3))
        for j in range(self.k):
            offs = self._layer_offset_terms(j)
            gj = g
            if any(not isinstance(o, ConstantOffset) for _, o in offs):
                gj = self.layer_gradient(p, j, h)
            out[..., j, :] = normalize(gj, eps=1e-300)
        return out

    def _layer_offset_terms(self, j: int):
        """(sign, offset) pairs contributing to layer j."""
        m = self.main_index
        if j < m:
            return [(-1.0, o) for o in self.outer_offsets[: m - j]]
        return [(+1.0, o) for o in self.inner_offsets[: j - m]]

    def bounding_radius_hint(self, p_samples: Array) -> float:
        """Max activated outer offset total, for padding bounding boxes."""
        if not self.outer_offsets:
            return 0.0
        total = sum(o.activated(p_samples) for o in self.outer_offsets)
        return float(np.max(total))


class _LayerField(SdfField):
    def __init__(self, ksdf: KSdf, j: int):
        self.ksdf, self.j = ksdf, j

    def eval(self, p: Array) -> Array:
        return self.ksdf.layer_distances(p)[..., self.j]

    def gradient(self, p: Array, h: float = 1e-4) -> Array:
        return self.ksdf.layer_gradient(p, self.j, h)


# ---------------------------------------------------------------------------
# Spec-level operations
# ---------------------------------------------------------------------------

def default_fd_step(field: SdfField) -> float:
    """Finite-difference step suited to the field: cell size for grids."""
    if isinstance(field, GridField):
        return float(np.min(field.cell))
    return 1e-4


def sdf_eval(field: SdfField, x: Array) -> Array:
    return field.eval(x)


def sdf_gradient(field: SdfField, x: Array, h: float | None = None) -> Array:
    return field.gradient(x, default_fd_step(field) if h is None else h)


def ksdf_layer_distances(ksdf: KSdf, x: Array) -> Array:
    return ksdf.layer_distances(x)


def eikonal_residual(field: SdfField, points: Array, h: float | None = None) -> float:
    """Mean squared deviation of |grad d| from 1 over the given points.

    A degenerate (zero) gradient contributes residual 1 rather than erroring.
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if points.size == 0:
        raise ValueError("points must be nonempty")
    step = default_fd_step(field) if h is None else h
    norms = np.linalg.norm(field.gradient(points, step), axis=-1)
    return float(np.mean((norms - 1.0) ** 2))


def curvature_residual(field: SdfField, points: Array, eps: float, rng=None, h: float = 1e-4) -> float:
    """Mean normal deviation 1 - <n(x), n(x + eps*t)> for random tangents t.

    Points are expected near the zero level set.  Degenerate normals are
    skipped; raises if every point is degenerate.
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    rng = np.random.default_rng(0) if rng is None else rng
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    g = field.gradient(points, h)
    gn = np.linalg.norm(g, axis=-1)
    ok = gn > 1e-12
    if not np.any(ok):
        raise DegenerateNormalError("all points have degenerate normals")
    pts, n = points[ok], g[ok] / gn[ok, None]
    r = rng.standard_normal(pts.shape)
    t = r - np.sum(r * n, axis=-1, keepdims=True) * n
    tn = np.linalg.norm(t, axis=-1)
    # resample nearly-parallel draws deterministically
    bad = tn < 1e-8
    if np.any(bad):
        alt = np.cross(n[bad], np.array([1.0, 0.577, -0.21]))
        t[bad] = alt
        tn = np.linalg.norm(t, axis=-1)
    t /= tn[..., None]
    g2 = field.gradient(pts + eps * t, h)
    g2n = np.linalg.norm(g2, axis=-1)
    ok2 = g2n > 1e-12
    if not np.any(ok2):
        raise DegenerateNormalError("all perturbed points have degenerate normals")
    n2 = g2[ok2] / g2n[ok2, None]
    return float(np.mean(1.0 - np.sum(n[ok2] * n2, axis=-1)))
