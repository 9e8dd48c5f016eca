/**
 * Pinhole camera math shared by the software renderer and the GPU path.
 *
 * Convention: camera-to-world rotation columns are (right, down, forward);
 * pixel (x, y) centers sit at (x+0.5, y+0.5) with y growing downward; ray
 * directions are unit length so ray t equals metric distance.
 */

export type Vec3 = [number, number, number];

export interface OrbitPose {
  target: Vec3;
  distance: number;
  yawDeg: number;
  pitchDeg: number;
  fovYDeg: number;
}

export interface PinholeCamera {
  fx: number;
  fy: number;
  cx: number;
  cy: number;
  /** Camera-to-world rotation, row-major 3x3. */
  rotation: Float64Array;
  position: Vec3;
  width: number;
  height: number;
}

export const PITCH_LIMIT_DEG = 89.0;

function cross(a: Vec3, b: Vec3): Vec3 {
  return [
    a[1] * b[2] - a[2] * b[1],
    a[2] * b[0] - a[0] * b[2],
    a[0] * b[1] - a[1] * b[0],
  ];
}

function norm(a: Vec3): number {
  return Math.hypot(a[0], a[1], a[2]);
}

export function lookAtCamera(
  eye: Vec3,
  target: Vec3,
  width: number,
  height: number,
  fovYDeg: number,
): PinholeCamera {
  const up: Vec3 = [0.0, 1.0, 0.0];
  const forward: Vec3 = [target[0] - eye[0], target[1] - eye[1], target[2] - eye[2]];
  const fn = norm(forward);
  if (fn < 1e-12) {
    throw new Error('eye and target coincide');
  }
  forward[0] /= fn;
  forward[1] /= fn;
  forward[2] /= fn;
  const right = cross(up, forward);
  const rn = norm(right);
  if (rn < 1e-9) {
    throw new Error('view direction parallel to up vector');
  }
  right[0] /= rn;
  right[1] /= rn;
  right[2] /= rn;
  const down = cross(forward, right);
  const fy = 0.5 * height / Math.tan((fovYDeg * Math.PI / 180.0) * 0.5);
  const rotation = new Float64Array([
    right[0], down[0], forward[0],
    right[1], down[1], forward[1],
    right[2], down[2], forward[2],
  ]);
  return {
    fx: fy,
    fy,
    cx: width * 0.5,
    cy: height * 0.5,
    rotation,
    position: [eye[0], eye[1], eye[2]],
    width,
    height,
  };
}

export function orbitEye(pose: OrbitPose): Vec3 {
  const pitchDeg = Math.max(-PITCH_LIMIT_DEG, Math.min(PITCH_LIMIT_DEG, pose.pitchDeg));
  const pitch = pitchDeg * Math.PI / 180.0;
  const yaw = pose.yawDeg * Math.PI / 180.0;
  return [
    pose.target[0] + pose.distance * Math.cos(pitch) * Math.sin(yaw),
    pose.target[1] + pose.distance * Math.sin(pitch),
    pose.target[2] + pose.distance * Math.cos(pitch) * Math.cos(yaw),
  ];
}

export function cameraFromOrbit(pose: OrbitPose, width: number, height: number): PinholeCamera {
  if (pose.distance <= 0) {
    throw new Error('orbit distance must be positive');
  }
  return lookAtCamera(orbitEye(pose), pose.target, width, height, pose.fovYDeg);
}

/**
 * Unit world-space ray direction through the center of pixel (x, y),
 * written into `out`.
 */
export function pixelRayDirection(
  cam: PinholeCamera,
  x: number,
  y: number,
  out: Float64Array,
): void {
  const cx = (x + 0.5 - cam.cx) / cam.fx;
  const cy = (y + 0.5 - cam.cy) / cam.fy;
  const r = cam.rotation;
  const dx = r[0] * cx + r[1] * cy + r[2];
  const dy = r[3] * cx + r[4] * cy + r[5];
  const dz = r[6] * cx + r[7] * cy + r[8];
  const len = Math.hypot(dx, dy, dz);
  out[0] = dx / len;
  out[1] = dy / len;
  out[2] = dz / len;
}

/**
 * Column-major 4x4 view-projection matrix for the rasterized path,
 * matching the pinhole convention above (NDC y up, depth into [-1, 1]).
 */
export function viewProjectionMatrix(
  cam: PinholeCamera,
  near: number,
  far: number,
): Float32Array {
  const r = cam.rotation;
  const p = cam.position;
  // World-to-camera: transpose of the camera-to-world rotation, with the
  // camera basis (right, down, forward) mapped to clip axes (x, -y, z).
  const rows = [
    [r[0], r[3], r[6]], // right
    [r[1], r[4], r[7]], // down
    [r[2], r[5], r[8]], // forward
  ];
  const tx = -(rows[0][0] * p[0] + rows[0][1] * p[1] + rows[0][2] * p[2]);
  const ty = -(rows[1][0] * p[0] + rows[1][1] * p[1] + rows[1][2] * p[2]);
  const tz = -(rows[2][0] * p[0] + rows[2][1] * p[1] + rows[2][2] * p[2]);
  // Perspective terms from the pinhole intrinsics.
  const sx = 2.0 * cam.fx / cam.width;
  const sy = 2.0 * cam.fy / cam.height;
  const a = (far + near) / (far - near);
  const b = -2.0 * far * near / (far - near);
  // clip.x = sx * cam.x, clip.y = -sy * cam.y (pixel y grows downward),
  // clip.z = a * cam.z + b, clip.w = cam.z.
  const m = new Float32Array(16);
  m[0] = sx * rows[0][0];
  m[1] = -sy * rows[1][0];
  m[2] = a * rows[2][0];
  m[3] = rows[2][0];
  m[4] = sx * rows[0][1];
  m[5] = -sy * rows[1][1];
  m[6] = a * rows[2][1];
  m[7] = rows[2][1];
  m[8] = sx * rows[0][2];
  m[9] = -sy * rows[1][2];
  m[10] = a * rows[2][2];
  m[11] = rows[2][2];
  m[12] = sx * tx;
  m[13] = -sy * ty;
  m[14] = a * tz + b;
  m[15] = tz;
  return m;
}
