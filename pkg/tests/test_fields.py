"""Distance fields, nested layer composition, and the logistic kernel."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from sdfshells.fields import (
    Box,
    Capsule,
    ConstantOffset,
    DegenerateNormalError,
    Difference,
    DirectionalOffset,
    GridField,
    Intersection,
    KSdf,
    LogisticKernel,
    Offset,
    Ray,
    ScaledDistance,
    SdfField,
    SmoothUnion,
    Sphere,
    Torus,
    Union,
    beta_schedule,
    curvature_residual,
    delta_o_init,
    eikonal_residual,
    logistic_density,
    sdf_eval,
    sdf_gradient,
    softplus,
    softplus_inv,
)

from conftest import random_points


class PlaneField(SdfField):
    """Half-space distance, used as a zero-curvature oracle."""

    def __init__(self, normal, offset=0.0):
        self.n = np.asarray(normal, dtype=np.float64)
        self.n /= np.linalg.norm(self.n)
        self.offset = offset

    def eval(self, p):
        return np.asarray(p, dtype=np.float64) @ self.n - self.offset

    def gradient(self, p, h=1e-4):
        p = np.asarray(p, dtype=np.float64)
        return np.broadcast_to(self.n, p.shape).copy()


# ---------------------------------------------------------------------------
# sdf_eval
# ---------------------------------------------------------------------------

def test_sphere_eval_center_and_outside():
    s = Sphere(radius=1.0)
    assert sdf_eval(s, np.array([0.0, 0.0, 0.0])) == -1.0
    assert sdf_eval(s, np.array([2.0, 0.0, 0.0])) == 1.0


def test_primitive_eval_hand_values():
    b = Box(half_extents=(1.0, 2.0, 3.0))
    assert b.eval(np.array([3.0, 0.0, 0.0])) == pytest.approx(2.0)
    assert b.eval(np.array([0.0, 0.0, 0.0])) == pytest.approx(-1.0)
    t = Torus(major_radius=1.0, minor_radius=0.25)
    assert t.eval(np.array([1.0, 0.0, 0.0])) == pytest.approx(-0.25)
    assert t.eval(np.array([2.0, 0.0, 0.0])) == pytest.approx(0.75)
    c = Capsule(point_a=(0, -1, 0), point_b=(0, 1, 0), radius=0.5)
    assert c.eval(np.array([0.0, 0.0, 1.0])) == pytest.approx(0.5)
    assert c.eval(np.array([0.0, 2.0, 0.0])) == pytest.approx(0.5)


def test_csg_eval_matches_min_max(rng):
    a, b = Sphere(radius=0.7), Box(half_extents=(0.5, 0.4, 0.6), center=(0.3, 0, 0))
    p = random_points(rng, 500)
    da, db = a.eval(p), b.eval(p)
    assert np.allclose(Union(a, b).eval(p), np.minimum(da, db))
    assert np.allclose(Intersection(a, b).eval(p), np.maximum(da, db))
    assert np.allclose(Difference(a, b).eval(p), np.maximum(da, -db))
    assert np.allclose(Offset(a, 0.1).eval(p), da - 0.1)


def test_smooth_union_reference_formula(rng):
    a, b = Sphere(radius=0.6), Sphere(radius=0.5, center=(0.5, 0.1, -0.2))
    k = 0.2
    p = random_points(rng, 500)
    da, db = a.eval(p), b.eval(p)
    h = np.clip(0.5 + 0.5 * (db - da) / k, 0.0, 1.0)
    ref = db * (1 - h) + da * h - k * h * (1 - h)
    assert np.allclose(SmoothUnion(a, b, k).eval(p), ref)
    # never above the plain min, at most k/4 below it
    smin = SmoothUnion(a, b, k).eval(p)
    assert np.all(smin <= np.minimum(da, db) + 1e-12)
    assert np.all(smin >= np.minimum(da, db) - k / 4 - 1e-12)


def test_smooth_union_lipschitz(rng):
    f = SmoothUnion(Sphere(radius=0.6), Sphere(radius=0.5, center=(0.4, 0, 0)), 0.15)
    p = random_points(rng, 400)
    q = random_points(rng, 400)
    lhs = np.abs(f.eval(p) - f.eval(q))
    rhs = np.linalg.norm(p - q, axis=-1)
    assert np.all(lhs <= rhs + 1e-9)


def test_grid_trilinear_matches_analytic():
    s = Sphere(radius=0.5)
    g = GridField.from_field(s, (-0.8, -0.8, -0.8), (0.8, 0.8, 0.8), 64)
    v, clamped = g.eval_with_clamp(np.array([0.25, 0.0, 0.0]))
    assert not clamped
    assert abs(v - (-0.25)) < 1e-3


def test_grid_reproduces_trilinear_polynomial(rng):
    # trilinear interpolation is exact on functions linear per axis
    def f(p):
        x, y, z = p[..., 0], p[..., 1], p[..., 2]
        return 2 + x - 3 * y + 0.5 * z + x * y - y * z + 2 * x * z + x * y * z

    axes = [np.linspace(-1, 1, 9)] * 3
    gx, gy, gz = np.meshgrid(*axes, indexing="ij")
    vals = f(np.stack([gx, gy, gz], axis=-1))
    g = GridField(vals, (-1, -1, -1), (1, 1, 1))
    p = random_points(rng, 300, -0.99, 0.99)
    assert np.allclose(g.eval(p), f(p), atol=1e-12)


def test_grid_clamps_outside_queries():
    g = GridField.from_field(Sphere(radius=0.5), (-1, -1, -1), (1, 1, 1), 16)
    v, clamped = g.eval_with_clamp(np.array([[0.0, 0.0, 0.0], [5.0, 0.0, 0.0]]))
    assert list(clamped) == [False, True]
    assert np.all(np.isfinite(v))
    # clamped query equals the boundary value
    vb, _ = g.eval_with_clamp(np.array([1.0, 0.0, 0.0]))
    assert v[1] == pytest.approx(vb)


def test_grid_rejects_bad_values():
    with pytest.raises(ValueError):
        GridField(np.zeros((4, 4)), (-1, -1, -1), (1, 1, 1))
    bad = np.zeros((4, 4, 4))
    bad[0, 0, 0] = np.nan
    with pytest.raises(ValueError):
        GridField(bad, (-1, -1, -1), (1, 1, 1))


# ---------------------------------------------------------------------------
# sdf_gradient
# ---------------------------------------------------------------------------

def test_sphere_gradient_trivial():
    s = Sphere(radius=1.0)
    assert np.allclose(sdf_gradient(s, np.array([2.0, 0.0, 0.0])), [1, 0, 0])
    assert np.allclose(sdf_gradient(s, np.array([0.0, 3.0, 0.0])), [0, 1, 0])


def _fd(field, p, h=1e-4):
    g = np.empty_like(p)
    for ax in range(3):
        dp = np.zeros(3)
        dp[ax] = h
        g[..., ax] = (field.eval(p + dp) - field.eval(p - dp)) / (2 * h)
    return g


def _safe_mask(field, p, margin=5e-3):
    """Exclude points near CSG decision boundaries where FD straddles a crease."""
    if isinstance(field, (Union, Intersection)):
        d = np.stack([c.eval(p) for c in field.children])
        d.sort(axis=0)
        return (d[1] - d[0]) > margin
    if isinstance(field, Difference):
        return np.abs(field.a.eval(p) + field.b.eval(p)) > margin
    return np.ones(p.shape[:-1], dtype=bool)


@pytest.mark.parametrize(
    "field",
    [
        Sphere(radius=0.7, center=(0.1, -0.2, 0.05)),
        Box(half_extents=(0.5, 0.3, 0.4), center=(0.05, 0.1, -0.07)),
        Torus(major_radius=0.6, minor_radius=0.2),
        Capsule(point_a=(-0.3, -0.2, 0.0), point_b=(0.3, 0.4, 0.1), radius=0.25),
        Union(Sphere(radius=0.5), Box(half_extents=(0.3, 0.6, 0.3), center=(0.4, 0, 0))),
        Intersection(Sphere(radius=0.7), Box(half_extents=(0.5, 0.5, 0.5))),
        Difference(Sphere(radius=0.7), Sphere(radius=0.4, center=(0.3, 0, 0))),
        SmoothUnion(Sphere(radius=0.5), Sphere(radius=0.4, center=(0.45, 0.1, 0)), 0.2),
        Offset(Torus(major_radius=0.6, minor_radius=0.2), 0.05),
        ScaledDistance(Sphere(radius=0.5), 2.0),
    ],
)
def test_closed_form_gradient_matches_central_differences(field, rng):
    p = random_points(rng, 800, -0.9, 0.9)
    # stay away from medial axes: keep points where |d| is not tiny relative
    # to nothing in particular but gradients are stable under jitter
    keep = _safe_mask(field, p)
    p = p[keep]
    assert len(p) > 400
    g = field.gradient(p)
    fd = _fd(field, p)
    denom = np.maximum(np.linalg.norm(fd, axis=-1), 1e-9)
    rel = np.linalg.norm(g - fd, axis=-1) / denom
    # tolerate a few FD points landing on curvature extremes
    assert np.quantile(rel, 0.99) < 1e-5
    assert np.median(rel) < 1e-6


def test_grid_gradient_norm_near_surface(rng):
    s = Sphere(radius=0.5)
    g = GridField.from_field(s, (-0.8, -0.8, -0.8), (0.8, 0.8, 0.8), 64)
    # points near the surface
    u = rng.standard_normal((500, 3))
    u /= np.linalg.norm(u, axis=-1, keepdims=True)
    p = u * rng.uniform(0.45, 0.55, size=(500, 1))
    norms = np.linalg.norm(sdf_gradient(g, p), axis=-1)
    assert np.all(np.abs(norms - 1.0) < 2e-2)


def test_degenerate_normal_raises():
    with pytest.raises(DegenerateNormalError):
        Sphere(radius=1.0).normal(np.array([0.0, 0.0, 0.0]))


# ---------------------------------------------------------------------------
# layer distances and nesting
# ---------------------------------------------------------------------------

def test_layer_distances_single_inner():
    k = KSdf(Sphere(radius=1.0), inner_offsets=[ConstantOffset.from_value(0.1)])
    d = k.layer_distances(np.array([2.0, 0.0, 0.0]))
    assert np.allclose(d, [1.0, 1.1])


def test_layer_distances_outer_and_inner():
    k = KSdf(
        Sphere(radius=1.0),
        inner_offsets=[ConstantOffset.from_value(0.1)],
        outer_offsets=[ConstantOffset.from_value(0.05)],
    )
    d = k.layer_distances(np.array([2.0, 0.0, 0.0]))
    assert np.allclose(d, [0.95, 1.0, 1.1])
    assert k.main_index == 1
    assert k.k == 3


def test_layer_distances_cumulative_inner():
    k = KSdf(
        Sphere(radius=1.0),
        inner_offsets=[ConstantOffset.from_value(0.1), ConstantOffset.from_value(0.2)],
    )
    d = k.layer_distances(np.array([1.0, 0.0, 0.0]))  # on the main surface
    assert np.allclose(d, [0.0, 0.1, 0.3])


def test_layer_field_matches_column(rng):
    k = KSdf(
        Sphere(radius=0.6),
        inner_offsets=[ConstantOffset.from_value(0.07)],
        outer_offsets=[ConstantOffset.from_value(0.05), ConstantOffset.from_value(0.03)],
    )
    p = random_points(rng, 200)
    d = k.layer_distances(p)
    for j in range(k.k):
        assert np.allclose(k.layer_field(j).eval(p), d[:, j])
    with pytest.raises(IndexError):
        k.layer_field(k.k)


def test_nesting_strict_with_directional_offsets(rng):
    inner = [
        DirectionalOffset(raw=softplus_inv(0.08), sh_raw=(0.0, 0.3, -0.2, 0.1)),
        ConstantOffset.from_value(0.05),
    ]
    outer = [DirectionalOffset(raw=softplus_inv(0.06), sh_raw=(0.1, -0.1, 0.2, 0.0))]
    k = KSdf(Sphere(radius=0.5), inner_offsets=inner, outer_offsets=outer)
    p = random_points(rng, 2000)
    d = k.layer_distances(p)
    gaps = np.diff(d, axis=-1)
    assert np.all(gaps > 0.0)
    # each gap equals the activated offset magnitude at that point
    assert np.allclose(gaps[:, 0], outer[0].activated(p))
    assert np.allclose(gaps[:, 1], inner[0].activated(p))
    assert np.allclose(gaps[:, 2], inner[1].activated(p))


def test_layer_count_validation():
    nine_inner = [ConstantOffset.from_value(0.01)] * 9
    with pytest.raises(ValueError, match=r"k must be in \[1,9\]"):
        KSdf(Sphere(radius=1.0), inner_offsets=nine_inner)
    # k = 9 is the maximum allowed
    k = KSdf(Sphere(radius=1.0), inner_offsets=nine_inner[:8])
    assert k.k == 9
    with pytest.raises(ValueError):
        KSdf(Sphere(radius=1.0), beta=-1.0)


def test_layer_gradient_directional_vs_fd(rng):
    inner = [DirectionalOffset(raw=softplus_inv(0.08), sh_raw=(0.0, 0.3, -0.2, 0.1))]
    k = KSdf(Sphere(radius=0.5), inner_offsets=inner)
    p = random_points(rng, 100, -0.9, 0.9)
    p = p[np.linalg.norm(p, axis=-1) > 0.2]
    field = k.layer_field(1)
    fd = _fd(field, p)
    g = field.gradient(p)
    assert np.allclose(g, fd, atol=1e-6)


# ---------------------------------------------------------------------------
# logistic kernel
# ---------------------------------------------------------------------------

def test_logistic_density_mode():
    assert logistic_density(4.0, 0.0) == pytest.approx(1.0, abs=1e-15)
    assert LogisticKernel(4.0).density(0.0) == pytest.approx(1.0)


def test_logistic_density_tail_stable():
    v = logistic_density(100.0, 1.0)
    assert 0.0 < v < 1e-40
    # no overflow out to |beta*d| = 1e4
    with np.errstate(over="raise"):
        assert logistic_density(1e4, 1.0) == 0.0
        assert np.isfinite(logistic_density(1.0, 1e4))


@given(st.floats(-50.0, 50.0), st.floats(0.01, 1e4))
def test_logistic_density_symmetric(d, beta):
    assert logistic_density(beta, d) == logistic_density(beta, -d)


def test_logistic_density_max_at_zero(rng):
    beta = 7.3
    d = rng.uniform(-2, 2, 1000)
    assert np.all(logistic_density(beta, d) <= beta / 4 + 1e-15)


@pytest.mark.parametrize("beta", [1.0, 30.0, 512.0, 4096.0])
def test_logistic_density_integrates_to_one(beta):
    # quadrature oracle over +-25/beta, where the analytic tail mass < 3e-11
    val, err = quad(lambda d: logistic_density(beta, d), -25.0 / beta, 25.0 / beta, limit=200)
    assert err < 1e-7
    assert abs(val - 1.0) < 1e-6


def test_logistic_density_is_cdf_derivative():
    beta = 37.0
    h = 1e-7
    for d in (-0.05, 0.0, 0.013, 0.2):
        k = LogisticKernel(beta)
        fd = (k.cdf(d + h) - k.cdf(d - h)) / (2 * h)
        assert fd == pytest.approx(logistic_density(beta, d), rel=1e-5)


def test_logistic_kernel_validates():
    with pytest.raises(ValueError):
        LogisticKernel(0.0)
    with pytest.raises(ValueError):
        logistic_density(-1.0, 0.0)


# ---------------------------------------------------------------------------
# delta_o_init and schedules
# ---------------------------------------------------------------------------

def test_delta_o_init_values():
    assert delta_o_init(math.pi / math.sqrt(3.0)) == pytest.approx(1.0, abs=1e-15)
    assert delta_o_init(30.0) == pytest.approx(0.060459978, abs=1e-8)
    betas = np.array([1.0, 10.0, 100.0, 1e4, 1e8])
    vals = [delta_o_init(b) for b in betas]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1e-7


def test_beta_schedule_geometric():
    s = beta_schedule(30.0, 4096.0, 7)
    assert s[0] == pytest.approx(30.0)
    assert s[-1] == pytest.approx(4096.0)
    ratios = s[1:] / s[:-1]
    assert np.allclose(ratios, ratios[0])
    assert np.all(np.diff(s) > 0)
    assert beta_schedule(10.0, 20.0, 1).tolist() == [20.0]
    with pytest.raises(ValueError):
        beta_schedule(-1.0, 10.0, 3)


# ---------------------------------------------------------------------------
# softplus offsets
# ---------------------------------------------------------------------------

def test_softplus_positive_for_large_negative_raw():
    raws = np.array([-30.0, -25.0, -10.0, 0.0, 5.0, 25.0, 700.0])
    acts = softplus(raws)
    assert np.all(acts > 0.0)
    assert acts[-1] == pytest.approx(700.0)


@given(st.floats(1e-6, 1e3))
def test_softplus_inverse_roundtrip(value):
    assert float(softplus(softplus_inv(value))) == pytest.approx(value, rel=1e-9)


def test_constant_offset_from_value():
    off = ConstantOffset.from_value(0.1)
    assert off.activated(np.zeros((4, 3))) == pytest.approx(np.full(4, 0.1))
    with pytest.raises(ValueError):
        ConstantOffset.from_value(-0.1)


def test_directional_offset_positive_everywhere(rng):
    off = DirectionalOffset(raw=-2.0, sh_raw=tuple(rng.uniform(-1, 1, 9)))
    p = random_points(rng, 3000, -2, 2)
    assert np.all(off.activated(p) > 0.0)
    with pytest.raises(ValueError):
        DirectionalOffset(raw=0.0, sh_raw=(0.0, 0.0))


# ---------------------------------------------------------------------------
# regularizer residuals
# ---------------------------------------------------------------------------

def test_eikonal_analytic_sphere(rng):
    s = Sphere(radius=0.8)
    p = random_points(rng, 1000)
    p = p[np.linalg.norm(p, axis=-1) > 0.05]
    assert eikonal_residual(s, p) < 1e-10


def test_eikonal_scaled_field(rng):
    f = ScaledDistance(Sphere(radius=0.5), 2.0)
    p = random_points(rng, 500)
    p = p[np.linalg.norm(p, axis=-1) > 0.05]
    assert eikonal_residual(f, p) == pytest.approx(1.0, abs=1e-9)


def test_eikonal_degenerate_gradient_counts_as_one():
    f = ScaledDistance(Sphere(radius=0.5), 0.0)
    assert eikonal_residual(f, np.array([[0.3, 0.1, 0.2]])) == pytest.approx(1.0)


def test_eikonal_grid_sphere(rng):
    g = GridField.from_field(Sphere(radius=0.5), (-0.8,) * 3, (0.8,) * 3, 64)
    u = rng.standard_normal((500, 3))
    u /= np.linalg.norm(u, axis=-1, keepdims=True)
    p = u * rng.uniform(0.4, 0.6, size=(500, 1))
    assert eikonal_residual(g, p) < 1e-2


def test_eikonal_rejects_empty():
    with pytest.raises(ValueError):
        eikonal_residual(Sphere(radius=1.0), np.zeros((0, 3)))


def test_curvature_plane_is_zero(rng):
    f = PlaneField((0.3, 0.8, -0.5), 0.1)
    p = random_points(rng, 200)
    assert curvature_residual(f, p, eps=1e-2, rng=rng) < 1e-10


def test_curvature_sphere_small_angle(rng):
    # normals on a sphere of radius r tilt by ~eps/r, so the mean deviation
    # 1 - cos(theta) approaches eps^2 / (2 r^2)
    eps = 1e-3
    for r in (0.5, 1.0):
        s = Sphere(radius=r)
        u = rng.standard_normal((400, 3))
        u /= np.linalg.norm(u, axis=-1, keepdims=True)
        res = curvature_residual(s, u * r, eps=eps, rng=rng)
        assert res == pytest.approx(eps**2 / (2 * r**2), rel=1e-2)
    # larger radius curves less
    small = curvature_residual(Sphere(radius=0.5), u * 0.5, eps=eps, rng=rng)
    big = curvature_residual(Sphere(radius=2.0), u * 2.0, eps=eps, rng=rng)
    assert big < small


def test_curvature_box_edge_exceeds_face(rng):
    b = Box(half_extents=(0.5, 0.5, 0.5))
    face = np.column_stack(
        [np.full(200, 0.5), rng.uniform(-0.3, 0.3, 200), rng.uniform(-0.3, 0.3, 200)]
    )
    edge = np.column_stack(
        [np.full(200, 0.5), np.full(200, 0.5), rng.uniform(-0.3, 0.3, 200)]
    )
    r_face = curvature_residual(b, face, eps=1e-2, rng=rng)
    r_edge = curvature_residual(b, edge, eps=1e-2, rng=rng)
    assert r_edge > r_face


def test_curvature_validates(rng):
    with pytest.raises(ValueError):
        curvature_residual(Sphere(radius=1.0), np.zeros((1, 3)), eps=0.0)
    with pytest.raises(DegenerateNormalError):
        curvature_residual(ScaledDistance(Sphere(radius=1.0), 0.0), np.ones((5, 3)), eps=1e-2, rng=rng)


# ---------------------------------------------------------------------------
# rays
# ---------------------------------------------------------------------------

def test_ray_normalizes_direction():
    r = Ray(origin=(0, 0, 0), direction=(0, 0, 10))
    assert np.allclose(r.direction, [0, 0, 1])
    assert np.allclose(r.at(2.5), [0, 0, 2.5])


def test_ray_validation():
    with pytest.raises(ValueError):
        Ray(origin=(0, 0, 0), direction=(0, 0, 0))
    with pytest.raises(ValueError):
        Ray(origin=(0, 0, 0), direction=(1, 0, 0), t_min=2.0, t_max=1.0)
