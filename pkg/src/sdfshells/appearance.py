"""View-dependent appearance as quantized spherical-harmonics textures.

Each layer carries one texture per SH band at mixed resolutions (band 0
highest).  Texels store raw pre-sigmoid values during fitting and quantized
unit-range values after baking.  Decoding converts texels to unit range
(sigmoid, then optional 8-bit quantization), bilinearly samples them,
rescales to [v_min, v_max], takes the per-channel dot product with the SH
basis for the view direction, and squashes through a final sigmoid.  The
per-texel unit conversion happens before bilinear filtering so that decoding
baked 8-bit images reproduces the in-memory result bit for bit.

Fitting is plain gradient descent with hand-derived gradients through the
full chain (fixed-order blend, attenuation, sigmoids, SH dot, rescale,
straight-through quantization, bilinear taps).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fields import sigmoid
from .shmath import sh_band_of, sh_basis

Array = np.ndarray

V_MIN_DEFAULT = -15.0
V_MAX_DEFAULT = 15.0
DESK_RESOLUTIONS = (256, 128, 64, 32)
PAPER_RESOLUTIONS = (2048, 1024, 512, 256)
BAND_SIZES = (1, 3, 5, 7)


class FitDivergedError(RuntimeError):
    """Fitting hit a non-finite loss."""


def quantize(x: Array) -> Array:
    """Snap unit-range values to 1/255 steps, halves rounded away from zero."""
    x = np.asarray(x, dtype=np.float64)
    return np.floor(x * 255.0 + 0.5) / 255.0


def decode_coefficients(raw: Array, quantized: bool = True,
                        v_min: float = V_MIN_DEFAULT,
                        v_max: float = V_MAX_DEFAULT) -> Array:
    """Raw texel values to ranged coefficients: sigmoid, quantize, rescale."""
    unit = sigmoid(raw)
    if quantized:
        unit = quantize(unit)
    return v_min + (v_max - v_min) * unit


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass
class ShTexture:
    """One band's texel grid for one layer: (H, W, 4 channels, band size)."""

    band: int
    data: Array

    def __post_init__(self):
        if not 0 <= self.band <= 3:
            raise ValueError("band must be in [0,3]")
        self.data = np.asarray(self.data, dtype=np.float64)
        c = BAND_SIZES[self.band]
        if self.data.ndim != 4 or self.data.shape[2] != 4 or self.data.shape[3] != c:
            raise ValueError(f"band {self.band} texture must have shape (H, W, 4, {c})")
        h, w = self.data.shape[:2]
        if not (_is_pow2(w) and _is_pow2(h)):
            raise ValueError("texture sides must be powers of two")

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


def _bilinear(data: Array, uv: Array) -> Array:
    """Bilinear sample with texel centers at (i+0.5)/W and clamp-to-edge."""
    h, w = data.shape[:2]
    uv = np.asarray(uv, dtype=np.float64)
    x = np.clip(uv[..., 0] * w - 0.5, 0.0, w - 1.0)
    y = np.clip(uv[..., 1] * h - 0.5, 0.0, h - 1.0)
    x0 = np.floor(x).astype(np.int64)
    y0 = np.floor(y).astype(np.int64)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    extra = (1,) * (data.ndim - 2)
    fx = (x - x0).reshape(x.shape + extra)
    fy = (y - y0).reshape(y.shape + extra)
    d00 = data[y0, x0]
    d10 = data[y0, x1]
    d01 = data[y1, x0]
    d11 = data[y1, x1]
    top = d00 * (1.0 - fx) + d10 * fx
    bot = d01 * (1.0 - fx) + d11 * fx
    return top * (1.0 - fy) + bot * fy


def sample_bilinear(tex: ShTexture, uv: Array) -> Array:
    """Sample stored texel values as-is; output shape (..., 4, band size)."""
    return _bilinear(tex.data, uv)


@dataclass
class ShTextureSet:
    """Per-layer, per-band textures plus the shared decode parameters.

    storage == "raw": texels are pre-sigmoid reals (the fitting parameterization).
    storage == "unit": texels are quantized unit-range values (post-bake).
    """

    layers: list
    degree: int
    v_min: float = V_MIN_DEFAULT
    v_max: float = V_MAX_DEFAULT
    storage: str = "raw"
    quantized_decode: bool = True
    loss_history: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        if not 0 <= self.degree <= 3:
            raise ValueError("degree must be in [0,3]")
        if self.storage not in ("raw", "unit"):
            raise ValueError("storage must be 'raw' or 'unit'")
        if self.v_min >= self.v_max:
            raise ValueError("v_min must be below v_max")
        for textures in self.layers:
            if len(textures) != self.degree + 1:
                raise ValueError("each layer needs one texture per band")
            res = [t.width for t in textures]
            for b, tex in enumerate(textures):
                if tex.band != b:
                    raise ValueError("textures must be ordered by band")
            if any(res[i] < res[i + 1] for i in range(len(res) - 1)):
                raise ValueError("resolutions must be non-increasing with band")
        self._unit_cache = {}

    @property
    def k(self) -> int:
        return len(self.layers)

    @property
    def coefficient_count(self) -> int:
        return (self.degree + 1) ** 2

    @classmethod
    def zeros(cls, k: int, degree: int = 3,
              resolutions=DESK_RESOLUTIONS, **kwargs) -> "ShTextureSet":
        layers = [[ShTexture(b, np.zeros((resolutions[b], resolutions[b], 4, BAND_SIZES[b])))
                   for b in range(degree + 1)] for _ in range(k)]
        return cls(layers=layers, degree=degree, **kwargs)

    @classmethod
    def random(cls, k: int, degree: int = 3, resolutions=DESK_RESOLUTIONS,
               seed: int = 0, scale: float = 1.5, **kwargs) -> "ShTextureSet":
        rng = np.random.default_rng(seed)
        layers = [[ShTexture(b, rng.normal(0.0, scale,
                                           (resolutions[b], resolutions[b], 4, BAND_SIZES[b])))
                   for b in range(degree + 1)] for _ in range(k)]
        return cls(layers=layers, degree=degree, **kwargs)

    def invalidate(self) -> None:
        self._unit_cache.clear()

    def unit_texels(self, layer: int, band: int, quantized: bool) -> Array:
        """Texels in unit range; raw storage passes through sigmoid (+quantize)."""
        tex = self.layers[layer][band]
        if self.storage == "unit":
            return tex.data
        key = (layer, band, quantized)
        got = self._unit_cache.get(key)
        if got is None:
            got = sigmoid(tex.data)
            if quantized:
                got = quantize(got)
            self._unit_cache[key] = got
        return got


def decode_rgba(texset: ShTextureSet, layer: int, uv: Array, dirs: Array,
                quantized: bool | None = None) -> Array:
    """RGBA in [0,1] at surface uv for view direction dirs; shape (..., 4)."""
    if quantized is None:
        quantized = texset.quantized_decode
    basis = sh_basis(texset.degree, dirs)  # (..., n)
    span = texset.v_max - texset.v_min
    acc = None
    i0 = 0
    for band in range(texset.degree + 1):
        c = BAND_SIZES[band]
        unit = texset.unit_texels(layer, band, quantized)
        coef = texset.v_min + span * _bilinear(unit, uv)  # (..., 4, c)
        term = np.sum(coef * basis[..., None, i0:i0 + c], axis=-1)
        acc = term if acc is None else acc + term
        i0 += c
    return sigmoid(acc)


# ---------------------------------------------------------------------------
# Baking
# ---------------------------------------------------------------------------

def bake_textures(texset: ShTextureSet) -> list:
    """Quantized 8-bit RGBA images, one per SH coefficient per layer.

    Returns, per layer, a list of (degree+1)**2 uint8 arrays of shape
    (H, W, 4) at each band's native resolution; image i holds coefficient i.
    """
    out = []
    for layer in range(texset.k):
        images = []
        for i in range(texset.coefficient_count):
            band = sh_band_of(i)
            unit = texset.unit_texels(layer, band, quantized=True)
            local = i - band * band
            img = np.rint(unit[:, :, :, local] * 255.0).astype(np.uint8)
            images.append(img)
        out.append(images)
    return out


def texture_set_from_baked(images_per_layer: list, degree: int,
                           v_min: float = V_MIN_DEFAULT,
                           v_max: float = V_MAX_DEFAULT) -> ShTextureSet:
    """Rebuild a unit-storage texture set from baked coefficient images."""
    layers = []
    for images in images_per_layer:
        if len(images) != (degree + 1) ** 2:
            raise ValueError("wrong number of coefficient images")
        textures = []
        for band in range(degree + 1):
            c = BAND_SIZES[band]
            stack = [np.asarray(images[band * band + j], dtype=np.float64) / 255.0
                     for j in range(c)]
            textures.append(ShTexture(band, np.stack(stack, axis=-1)))
        layers.append(textures)
    return ShTextureSet(layers=layers, degree=degree, v_min=v_min, v_max=v_max,
                        storage="unit")


# ---------------------------------------------------------------------------
# Fitting
# ---------------------------------------------------------------------------

@dataclass
class FitConfig:
    iterations: int = 2000
    learning_rate: float = 400.0
    batch_size: int = 4096
    quantization_aware: bool = True
    seed: int = 0
    clip_norm: float = 10.0

    def __post_init__(self):
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.learning_rate <= 0 or self.batch_size < 1 or self.clip_norm <= 0:
            raise ValueError("invalid fit configuration")


@dataclass
class FitSamples:
    """Per-ray fitting inputs: where each layer was hit and what to match.

    uv: (N, k, 2); mask: (N, k) hit flags; attenuation: (N, k) in [0,1];
    dirs: (N, 3) unit view directions; target: (N, 3) RGB composited over
    background; background: (3,).
    """

    uv: Array
    mask: Array
    attenuation: Array
    dirs: Array
    target: Array
    background: Array

    def __post_init__(self):
        self.uv = np.asarray(self.uv, dtype=np.float64)
        self.mask = np.asarray(self.mask, dtype=bool)
        self.attenuation = np.asarray(self.attenuation, dtype=np.float64)
        self.dirs = np.asarray(self.dirs, dtype=np.float64)
        self.target = np.asarray(self.target, dtype=np.float64)
        self.background = np.asarray(self.background, dtype=np.float64).reshape(3)
        n, k = self.mask.shape
        if self.uv.shape != (n, k, 2) or self.attenuation.shape != (n, k):
            raise ValueError("inconsistent sample shapes")
        if self.dirs.shape != (n, 3) or self.target.shape != (n, 3):
            raise ValueError("inconsistent sample shapes")

    def __len__(self) -> int:
        return len(self.mask)


class _TapPlan:
    """Precomputed bilinear taps and SH basis for a fixed sample set."""

    def __init__(self, texset: ShTextureSet, samples: FitSamples):
        self.basis = sh_basis(texset.degree, samples.dirs)  # (N, n)
        self.taps = []  # [layer][band] -> (flat_idx (N,4), weights (N,4))
        for layer in range(texset.k):
            per_band = []
            uv = samples.uv[:, layer, :]
            for band in range(texset.degree + 1):
                tex = texset.layers[layer][band]
                h, w = tex.height, tex.width
                x = np.clip(uv[:, 0] * w - 0.5, 0.0, w - 1.0)
                y = np.clip(uv[:, 1] * h - 0.5, 0.0, h - 1.0)
                x0 = np.floor(x).astype(np.int64)
                y0 = np.floor(y).astype(np.int64)
                x1 = np.minimum(x0 + 1, w - 1)
                y1 = np.minimum(y0 + 1, h - 1)
                fx = x - x0
                fy = y - y0
                idx = np.stack([y0 * w + x0, y0 * w + x1,
                                y1 * w + x0, y1 * w + x1], axis=1)
                wgt = np.stack([(1 - fx) * (1 - fy), fx * (1 - fy),
                                (1 - fx) * fy, fx * fy], axis=1)
                per_band.append((idx, wgt))
            self.taps.append(per_band)


def composite_samples(texset: ShTextureSet, samples: FitSamples,
                      quantized: bool | None = None) -> Array:
    """Fixed-order composite of decoded layers over the background, (N, 3)."""
    if quantized is None:
        quantized = texset.quantized_decode
    n = len(samples)
    out = np.zeros((n, 3))
    trans = np.ones(n)
    for layer in range(texset.k):
        m = samples.mask[:, layer]
        if not np.any(m):
            continue
        rgba = decode_rgba(texset, layer, samples.uv[m, layer, :], samples.dirs[m],
                           quantized=quantized)
        alpha = rgba[:, 3] * samples.attenuation[m, layer]
        out[m] += (trans[m] * alpha)[:, None] * rgba[:, :3]
        trans[m] *= 1.0 - alpha
    return out + trans[:, None] * samples.background[None, :]


def fit_loss_and_gradient(texset: ShTextureSet, samples: FitSamples,
                          quantized: bool, batch: Array | None = None,
                          plan: _TapPlan | None = None):
    """Mean-L1 loss and gradients w.r.t. raw texels (straight-through quantize).

    Returns (loss, grads) with grads[layer][band] shaped like the texture data.
    """
    if texset.storage != "raw":
        raise ValueError("fitting requires raw storage")
    if plan is None:
        plan = _TapPlan(texset, samples)
    if batch is None:
        batch = np.arange(len(samples))
    nb = len(batch)
    k = texset.k
    nbands = texset.degree + 1
    span = texset.v_max - texset.v_min
    basis = plan.basis[batch]  # (nb, n)

    # forward, keeping tap-level intermediates for the backward pass;
    # sigmoid runs once per texel (cached) instead of once per gathered tap
    unit_taps = [[None] * nbands for _ in range(k)]
    tap_rows = [[None] * nbands for _ in range(k)]
    rgba = np.zeros((nb, k, 4))
    for layer in range(k):
        s = np.zeros((nb, 4))
        i0 = 0
        for band in range(nbands):
            c = BAND_SIZES[band]
            idx, wgt = plan.taps[layer][band]
            rows = idx[batch]
            ut = texset.unit_texels(layer, band, False).reshape(-1, 4, c)[rows]
            unit_taps[layer][band] = ut
            tap_rows[layer][band] = rows
            if quantized:  # straight-through: quantized forward, smooth backward
                fwd = texset.unit_texels(layer, band, True).reshape(-1, 4, c)[rows]
            else:
                fwd = ut
            sampled = np.einsum("ntij,nt->nij", fwd, wgt[batch])
            coef = texset.v_min + span * sampled
            s += np.einsum("nij,nj->ni", coef, basis[:, i0:i0 + c])
            i0 += c
        rgba[:, layer, :] = sigmoid(s)

    mask = samples.mask[batch]
    att = samples.attenuation[batch]
    alpha = np.where(mask, rgba[:, :, 3] * att, 0.0)  # (nb, k)
    rgb = rgba[:, :, :3]

    one_minus = 1.0 - alpha
    trans = np.concatenate([np.ones((nb, 1)),
                            np.cumprod(one_minus, axis=1)], axis=1)  # (nb, k+1)
    out = np.einsum("nk,nkc->nc", alpha * trans[:, :-1], rgb)
    out = out + trans[:, -1:] * samples.background[None, :]

    target = samples.target[batch]
    diff = out - target
    loss = float(np.mean(np.abs(diff)))
    d_out = np.sign(diff) / diff.size  # (nb, 3)

    # suffix composites: what lies behind each layer, over the background
    behind = np.empty((nb, k, 3))
    acc = np.broadcast_to(samples.background, (nb, 3)).copy()
    for layer in range(k - 1, -1, -1):
        behind[:, layer, :] = acc
        a = alpha[:, layer:layer + 1]
        acc = a * rgb[:, layer, :] + (1.0 - a) * acc

    grads = [[np.zeros_like(texset.layers[l][b].data) for b in range(nbands)]
             for l in range(k)]
    for layer in range(k):
        t_here = trans[:, layer]
        d_rgb = d_out * (alpha[:, layer] * t_here)[:, None]  # (nb, 3)
        d_alpha = np.sum(d_out * (rgb[:, layer] - behind[:, layer]), axis=1) * t_here
        d_alpha = np.where(mask[:, layer], d_alpha, 0.0)
        d_a_channel = d_alpha * att[:, layer]
        d_rgba = np.concatenate([np.where(mask[:, layer, None], d_rgb, 0.0),
                                 d_a_channel[:, None]], axis=1)  # (nb, 4)
        d_s = d_rgba * rgba[:, layer] * (1.0 - rgba[:, layer])
        i0 = 0
        for band in range(nbands):
            c = BAND_SIZES[band]
            _, wgt = plan.taps[layer][band]
            # d coef = d_s x basis; d sampled = span * d coef
            d_coef = d_s[:, :, None] * basis[:, None, i0:i0 + c]  # (nb, 4, c)
            d_sampled = span * d_coef
            d_taps = d_sampled[:, None, :, :] * wgt[batch][:, :, None, None]
            ut = unit_taps[layer][band]
            d_raw = d_taps * ut * (1.0 - ut)  # quantize passes gradient through
            flat_grad = grads[layer][band].reshape(-1, 4 * c)
            contrib = d_raw.reshape(nb * 4, 4 * c)
            rows = tap_rows[layer][band].ravel()
            for j in range(4 * c):
                flat_grad[:, j] += np.bincount(rows, weights=contrib[:, j],
                                               minlength=flat_grad.shape[0])
            i0 += c
    return loss, grads


def fit_samples(texset: ShTextureSet, samples: FitSamples,
                cfg: FitConfig) -> ShTextureSet:
    """Gradient descent on raw texels against a fixed sample set."""
    work = ShTextureSet(
        layers=[[ShTexture(t.band, t.data.copy()) for t in layer]
                for layer in texset.layers],
        degree=texset.degree, v_min=texset.v_min, v_max=texset.v_max,
        storage="raw", quantized_decode=cfg.quantization_aware)
    plan = _TapPlan(work, samples)
    rng = np.random.default_rng(cfg.seed)
    n = len(samples)
    history = []
    for it in range(cfg.iterations):
        if cfg.batch_size < n:
            batch = rng.choice(n, size=cfg.batch_size, replace=False)
        else:
            batch = np.arange(n)
        loss, grads = fit_loss_and_gradient(work, samples, cfg.quantization_aware,
                                            batch=batch, plan=plan)
        if not np.isfinite(loss):
            raise FitDivergedError(f"non-finite loss at iteration {it}")
        total = 0.0
        for per_layer in grads:
            for g in per_layer:
                total += float(np.sum(g * g))
        norm = np.sqrt(total)
        step = cfg.learning_rate * (cfg.clip_norm / norm if norm > cfg.clip_norm else 1.0)
        for layer in range(work.k):
            for band in range(work.degree + 1):
                work.layers[layer][band].data -= step * grads[layer][band]
        work.invalidate()
        history.append(loss)
    work.loss_history = history
    return work


def fit_textures(shells, targets, cfg: FitConfig,
                 background=(0.0, 0.0, 0.0),
                 init: ShTextureSet | None = None,
                 degree: int = 3,
                 resolutions=DESK_RESOLUTIONS) -> ShTextureSet:
    """Fit textures so fixed-order shell renders match target images.

    targets: list of (camera, image) pairs; image is (H, W, 3) or (H, W, 4)
    float RGB(A) already composited over `background`.
    """
    from .shellrender import build_hit_records  # local import, cycle-free

    samples = build_hit_records(shells, [c for c, _ in targets], background)
    imgs = []
    for _, img in targets:
        arr = np.asarray(img, dtype=np.float64)
        imgs.append(arr[..., :3].reshape(-1, 3))
    samples.target = np.concatenate(imgs, axis=0)
    if samples.target.shape[0] != len(samples):
        raise ValueError("targets do not match camera resolutions")
    texset = init if init is not None else ShTextureSet.zeros(
        len(shells.meshes), degree=degree, resolutions=resolutions)
    return fit_samples(texset, samples, cfg)
