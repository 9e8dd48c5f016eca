/**
 * Real spherical harmonics basis up to degree 3, hard-coded polynomial
 * forms in the unit direction (x, y, z) with the standard real-basis
 * constants.  Band l contributes 2l+1 values; a degree-n basis stacks
 * bands 0..n for (n+1)^2 values per direction.
 */

export const SH_C0 = 0.28209479177387814;
export const SH_C1 = 0.4886025119029199;
export const SH_C2 = [
  1.0925484305920792,
  -1.0925484305920792,
  0.31539156525252005,
  -1.0925484305920792,
  0.5462742152960396,
] as const;
export const SH_C3 = [
  -0.5900435899266435,
  2.890611442640554,
  -0.4570457994644658,
  0.3731763325901154,
  -0.4570457994644658,
  1.445305721320277,
  -0.5900435899266435,
] as const;

/** Band index l of flat coefficient i: floor(sqrt(i)). */
export function shBandOf(i: number): number {
  if (i < 0) {
    throw new Error('coefficient index must be >= 0');
  }
  return Math.floor(Math.sqrt(i));
}

/**
 * Evaluate the basis for one unit direction into `out` (length (degree+1)^2).
 * Returns `out` for chaining; allocates when `out` is omitted.
 */
export function shBasis(
  degree: number,
  x: number,
  y: number,
  z: number,
  out?: Float64Array,
): Float64Array {
  if (!(degree >= 0 && degree <= 3)) {
    throw new Error('degree must be in [0,3]');
  }
  const n = (degree + 1) * (degree + 1);
  const basis = out ?? new Float64Array(n);
  basis[0] = SH_C0;
  if (degree >= 1) {
    basis[1] = -SH_C1 * y;
    basis[2] = SH_C1 * z;
    basis[3] = -SH_C1 * x;
  }
  if (degree >= 2) {
    const xx = x * x;
    const yy = y * y;
    const zz = z * z;
    basis[4] = SH_C2[0] * x * y;
    basis[5] = SH_C2[1] * y * z;
    basis[6] = SH_C2[2] * (2.0 * zz - xx - yy);
    basis[7] = SH_C2[3] * x * z;
    basis[8] = SH_C2[4] * (xx - yy);
    if (degree >= 3) {
      basis[9] = SH_C3[0] * y * (3.0 * xx - yy);
      basis[10] = SH_C3[1] * x * y * z;
      basis[11] = SH_C3[2] * y * (4.0 * zz - xx - yy);
      basis[12] = SH_C3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy);
      basis[13] = SH_C3[4] * x * (4.0 * zz - xx - yy);
      basis[14] = SH_C3[5] * z * (xx - yy);
      basis[15] = SH_C3[6] * x * (xx - 3.0 * yy);
    }
  }
  return basis;
}

export function sigmoid(x: number): number {
  const s = 1.0 / (1.0 + Math.exp(-Math.abs(x)));
  return x >= 0.0 ? s : 1.0 - s;
}
