"""Pinhole cameras and ray generation.

Convention: camera-to-world rotation columns are (right, down, forward);
pixel (x, y) centers sit at (x+0.5, y+0.5), y growing downward.  Ray
directions are unit length so ray t equals metric distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import Ray

Array = np.ndarray


@dataclass(frozen=True)
class Camera:
    fx: float
    fy: float
    cx: float
    cy: float
    rotation: Array  # (3,3) camera-to-world
    position: Array  # (3,)
    width: int
    height: int

    def __post_init__(self):
        if self.fx <= 0.0 or self.fy <= 0.0:
            raise ValueError("focal lengths must be positive")
        if self.width < 1 or self.height < 1:
            raise ValueError("image size must be positive")
        r = np.asarray(self.rotation, dtype=np.float64)
        if r.shape != (3, 3) or not np.allclose(r @ r.T, np.eye(3), atol=1e-6):
            raise ValueError("rotation must be a 3x3 orthonormal matrix")
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "position", np.asarray(self.position, dtype=np.float64))

    @classmethod
    def look_at(cls, eye, target, up=(0.0, 1.0, 0.0), fov_y_deg: float = 45.0,
                width: int = 256, height: int = 256) -> "Camera":
        eye = np.asarray(eye, dtype=np.float64)
        target = np.asarray(target, dtype=np.float64)
        forward = target - eye
        fn = np.linalg.norm(forward)
        if fn < 1e-12:
            raise ValueError("eye and target coincide")
        forward = forward / fn
        right = np.cross(np.asarray(up, dtype=np.float64), forward)
        rn = np.linalg.norm(right)
        if rn < 1e-9:
            raise ValueError("view direction parallel to up vector")
        right = right / rn
        down = np.cross(forward, right)
        rot = np.column_stack([right, down, forward])
        fy = 0.5 * height / math.tan(math.radians(fov_y_deg) * 0.5)
        return cls(fx=fy, fy=fy, cx=width * 0.5, cy=height * 0.5,
                   rotation=rot, position=eye, width=width, height=height)

    @classmethod
    def from_orbit(cls, target, distance: float, yaw_deg: float, pitch_deg: float,
                   fov_y_deg: float = 45.0, width: int = 256, height: int = 256) -> "Camera":
        """Orbit pose: yaw around +y, pitch toward +y, looking at the target."""
        if distance <= 0.0:
            raise ValueError("orbit distance must be positive")
        pitch = math.radians(max(-89.0, min(89.0, pitch_deg)))
        yaw = math.radians(yaw_deg)
        target = np.asarray(target, dtype=np.float64)
        eye = target + distance * np.array([
            math.cos(pitch) * math.sin(yaw),
            math.sin(pitch),
            math.cos(pitch) * math.cos(yaw),
        ])
        return cls.look_at(eye, target, fov_y_deg=fov_y_deg, width=width, height=height)

    def pixel_rays(self) -> tuple[Array, Array]:
        """Origins and unit directions for every pixel center, shape (H, W, 3)."""
        xs = (np.arange(self.width) + 0.5 - self.cx) / self.fx
        ys = (np.arange(self.height) + 0.5 - self.cy) / self.fy
        gx, gy = np.meshgrid(xs, ys)
        d_cam = np.stack([gx, gy, np.ones_like(gx)], axis=-1)
        d_world = d_cam @ self.rotation.T
        d_world /= np.linalg.norm(d_world, axis=-1, keepdims=True)
        origins = np.broadcast_to(self.position, d_world.shape)
        return origins, d_world

    def ray_for_pixel(self, x: float, y: float) -> Ray:
        d_cam = np.array([(x + 0.5 - self.cx) / self.fx, (y + 0.5 - self.cy) / self.fy, 1.0])
        return Ray(origin=self.position, direction=self.rotation @ d_cam)


def fibonacci_orbit(count: int, target, distance: float, fov_y_deg: float = 45.0,
                    width: int = 256, height: int = 256) -> list[Camera]:
    """Cameras on a Fibonacci sphere lattice around the target, all looking in."""
    if count < 1:
        raise ValueError("need at least one camera")
    target = np.asarray(target, dtype=np.float64)
    cams = []
    golden = math.pi * (3.0 - math.sqrt(5.0))
    for i in range(count):
        # avoid the exact poles where the up vector degenerates
        y = 1.0 - 2.0 * (i + 0.5) / count
        y = max(-0.995, min(0.995, y))
        r = math.sqrt(1.0 - y * y)
        th = golden * i
        eye = target + distance * np.array([math.cos(th) * r, y, math.sin(th) * r])
        cams.append(Camera.look_at(eye, target, fov_y_deg=fov_y_deg, width=width, height=height))
    return cams
