"""Framebuffers and image IO: 8-bit PNG export and a raw float dump."""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np
from PIL import Image

Array = np.ndarray

RAW_MAGIC = b"SDFSRAW1"


@dataclass
class FrameBuffer:
    """RGBA float image plus optional per-layer debug buffers."""

    rgba: Array  # (H, W, 4) float
    layer_buffers: dict = field(default_factory=dict)  # name -> list of (H, W, C) per layer

    def __post_init__(self):
        self.rgba = np.asarray(self.rgba, dtype=np.float64)
        if self.rgba.ndim != 3 or self.rgba.shape[-1] != 4:
            raise ValueError("rgba must be (H, W, 4)")
        if not np.all(np.isfinite(self.rgba)):
            raise ValueError("framebuffer channels must be finite")

    @property
    def rgb(self) -> Array:
        return self.rgba[..., :3]


def to_uint8(img: Array) -> Array:
    """Quantize floats in [0,1] to 8-bit, rounding halves away from zero."""
    x = np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0)
    return np.floor(x * 255.0 + 0.5).astype(np.uint8)


def save_png(path, img: Array) -> None:
    """Write an (H, W, {1,3,4}) float image in [0,1] as an 8-bit PNG."""
    arr = to_uint8(img)
    if arr.ndim == 2:
        mode = "L"
    elif arr.shape[-1] == 1:
        arr, mode = arr[..., 0], "L"
    elif arr.shape[-1] == 3:
        mode = "RGB"
    elif arr.shape[-1] == 4:
        mode = "RGBA"
    else:
        raise ValueError("unsupported channel count")
    Image.fromarray(arr, mode=mode).save(path, format="PNG")


def load_png(path) -> Array:
    """Read a PNG to float [0,1], shape (H, W, C)."""
    with Image.open(path) as im:
        arr = np.asarray(im)
    if arr.ndim == 2:
        arr = arr[..., None]
    if arr.dtype != np.uint8:
        raise ValueError("only 8-bit PNGs are supported")
    return arr.astype(np.float64) / 255.0


def save_raw(path, img: Array) -> None:
    """Raw float dump: magic, width, height, channels, then little-endian
    float32 samples in row-major order."""
    img = np.asarray(img, dtype=np.float32)
    if img.ndim == 2:
        img = img[..., None]
    if img.ndim != 3:
        raise ValueError("image must be (H, W, C)")
    h, w, c = img.shape
    with open(path, "wb") as f:
        f.write(RAW_MAGIC)
        f.write(struct.pack("<III", w, h, c))
        f.write(np.ascontiguousarray(img, dtype="<f4").tobytes())


def load_raw(path) -> Array:
    with open(path, "rb") as f:
        magic = f.read(8)
        if magic != RAW_MAGIC:
            raise ValueError("not a raw float dump (bad magic)")
        w, h, c = struct.unpack("<III", f.read(12))
        data = np.frombuffer(f.read(), dtype="<f4")
    if data.size != w * h * c:
        raise ValueError("raw dump truncated")
    return data.reshape(h, w, c).astype(np.float64)
