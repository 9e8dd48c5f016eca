import math
import re

import numpy as np
import pytest

from sdfshells.appearance import ShTextureSet, composite_samples, decode_rgba
from sdfshells.camera import Camera
from sdfshells.fields import Ray, sigmoid
from sdfshells.meshing import AtlasConfig, ShellSet, SimplifyConfig, extract_shells
from sdfshells.scene import canonical_scene
from sdfshells.shellrender import (
    EARLY_EXIT_TRANSMITTANCE,
    PSNR_CAP,
    BenchResult,
    Bvh,
    alpha_attenuation,
    benchmark_render,
    benchmark_sweep,
    blend_fixed_order,
    build_hit_records,
    cast_first_hits,
    first_hit,
    format_bench_line,
    image_metrics,
    interpolate_hit_attributes,
    oracle_sorted_blend,
    render_debug_buffers,
    render_shells,
    render_shells_analytic,
)


def reference_first_hits(mesh, origins, dirs, t_min=1e-7, t_max=np.inf):
    """All-triangles nearest hit with the same inclusion and tie rules."""
    v0 = mesh.positions[mesh.faces[:, 0]]
    e1 = mesh.positions[mesh.faces[:, 1]] - v0
    e2 = mesh.positions[mesh.faces[:, 2]] - v0
    n = len(origins)
    out_t = np.full(n, np.inf)
    out_tri = np.full(n, -1, dtype=np.int64)
    out_u = np.zeros(n)
    out_v = np.zeros(n)
    for s in range(0, n, 256):
        o = origins[s:s + 256][:, None, :]
        d = dirs[s:s + 256][:, None, :]
        pvec = np.cross(d, e2[None, :, :])
        det = np.sum(e1[None, :, :] * pvec, axis=-1)
        ok = np.abs(det) >= 1e-13
        inv = 1.0 / np.where(ok, det, 1.0)
        tvec = o - v0[None, :, :]
        u = np.sum(tvec * pvec, axis=-1) * inv
        qvec = np.cross(tvec, e1[None, :, :])
        v = np.sum(d * qvec, axis=-1) * inv
        t = np.sum(e2[None, :, :] * qvec, axis=-1) * inv
        hit = ok & (u >= 0.0) & (u <= 1.0) & (v >= 0.0) & (u + v <= 1.0)
        hit &= (t > t_min) & (t <= t_max)
        t = np.where(hit, t, np.inf)
        # nearest t; exact ties resolved toward the lowest triangle id
        tb = t.min(axis=1)
        found = np.isfinite(tb)
        rows = np.nonzero(found)[0]
        for r in rows:
            ids = np.nonzero(t[r] == tb[r])[0]
            tri = ids.min()
            out_t[s + r] = tb[r]
            out_tri[s + r] = tri
            out_u[s + r] = u[r, tri]
            out_v[s + r] = v[r, tri]
    return out_t, out_tri, out_u, out_v


@pytest.fixture(scope="module")
def sphere_scene():
    scene = canonical_scene("fuzzy-sphere", k=3)
    shells = extract_shells(scene.ksdf, scene.bbox_min, scene.bbox_max,
                            resolution=48, simplify=SimplifyConfig(0.3),
                            atlas=AtlasConfig(resolution=64))
    return scene, shells


@pytest.fixture(scope="module")
def sphere_bvhs(sphere_scene):
    _, shells = sphere_scene
    return [Bvh.from_mesh(m) for m in shells]


@pytest.fixture(scope="module")
def texset():
    return ShTextureSet.random(3, seed=5, scale=1.0,
                               resolutions=(16, 8, 8, 8))


@pytest.fixture(scope="module")
def camera64():
    return Camera.from_orbit(target=(0.0, 0.0, 0.0), distance=2.0,
                             yaw_deg=30.0, pitch_deg=20.0,
                             width=64, height=64)


def single_triangle_bvh():
    pos = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    return Bvh.from_triangles(pos, np.array([[0, 1, 2]]))


class TestBvhStructure:
    def test_order_is_permutation_partitioned_by_leaves(self, sphere_scene):
        _, shells = sphere_scene
        bvh = Bvh.from_mesh(shells[0])
        nf = shells[0].face_count
        assert sorted(bvh.order.tolist()) == list(range(nf))
        leaves = np.nonzero(bvh.left < 0)[0]
        spans = []
        for n in leaves:
            s, c = int(bvh.leaf_start[n]), int(bvh.leaf_count[n])
            assert 1 <= c <= 4
            spans.append((s, s + c))
        spans.sort()
        assert spans[0][0] == 0 and spans[-1][1] == nf
        for (a, b), (c, d) in zip(spans, spans[1:]):
            assert b == c

    def test_child_boxes_nest_and_leaves_bound_triangles(self, sphere_scene):
        _, shells = sphere_scene
        mesh = shells[1]
        bvh = Bvh.from_mesh(mesh)
        for n in range(bvh.node_count):
            li, ri = int(bvh.left[n]), int(bvh.right[n])
            if li < 0:
                sel = bvh.order[bvh.leaf_start[n]:
                                bvh.leaf_start[n] + bvh.leaf_count[n]]
                tri = mesh.positions[mesh.faces[sel]].reshape(-1, 3)
                assert np.all(tri >= bvh.node_min[n] - 1e-12)
                assert np.all(tri <= bvh.node_max[n] + 1e-12)
            else:
                for c in (li, ri):
                    assert np.all(bvh.node_min[c] >= bvh.node_min[n] - 1e-12)
                    assert np.all(bvh.node_max[c] <= bvh.node_max[n] + 1e-12)

    def test_rejects_empty_mesh(self):
        with pytest.raises(ValueError, match="zero triangles"):
            Bvh.from_triangles(np.zeros((0, 3)), np.zeros((0, 3), dtype=int))


class TestFirstHit:
    def test_single_triangle_hit_and_barycentrics(self):
        bvh = single_triangle_bvh()
        t, tri, u, v = cast_first_hits(bvh, np.array([[0.2, 0.3, 1.0]]),
                                       np.array([[0.0, 0.0, -1.0]]))
        assert tri[0] == 0
        assert t[0] == pytest.approx(1.0, abs=1e-12)
        assert u[0] == pytest.approx(0.2, abs=1e-12)
        assert v[0] == pytest.approx(0.3, abs=1e-12)

    def test_miss_reports_inf_and_negative_id(self):
        bvh = single_triangle_bvh()
        t, tri, _, _ = cast_first_hits(bvh, np.array([[2.0, 2.0, 1.0]]),
                                       np.array([[0.0, 0.0, -1.0]]))
        assert tri[0] == -1 and np.isinf(t[0])

    def test_edges_are_inclusive(self):
        bvh = single_triangle_bvh()
        origins = np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 1.0],
                            [0.0, 1.0, 1.0], [0.5, 0.5, 1.0]])
        dirs = np.tile([0.0, 0.0, -1.0], (4, 1))
        _, tri, _, _ = cast_first_hits(bvh, origins, dirs)
        assert np.all(tri == 0)

    def test_t_window_excludes_hits(self):
        bvh = single_triangle_bvh()
        o = np.array([[0.2, 0.3, 1.0]])
        d = np.array([[0.0, 0.0, -1.0]])
        _, tri, _, _ = cast_first_hits(bvh, o, d, t_max=0.5)
        assert tri[0] == -1
        _, tri, _, _ = cast_first_hits(bvh, o, d, t_min=1.5)
        assert tri[0] == -1

    def test_exact_tie_goes_to_lowest_triangle_id(self):
        pos = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        pos = np.vstack([pos, pos])
        faces = np.array([[3, 4, 5], [0, 1, 2]])
        bvh = Bvh.from_triangles(pos, faces)
        _, tri, _, _ = cast_first_hits(bvh, np.array([[0.2, 0.2, 1.0]]),
                                       np.array([[0.0, 0.0, -1.0]]))
        assert tri[0] == 0

    def test_inactive_rays_are_skipped(self):
        bvh = single_triangle_bvh()
        o = np.tile([0.2, 0.3, 1.0], (2, 1))
        d = np.tile([0.0, 0.0, -1.0], (2, 1))
        t, tri, _, _ = cast_first_hits(bvh, o, d,
                                       active=np.array([True, False]))
        assert tri[0] == 0 and tri[1] == -1 and np.isinf(t[1])

    def test_sphere_mesh_distance_and_tangent_miss(self, sphere_scene,
                                                   sphere_bvhs):
        _, shells = sphere_scene
        r = float(np.linalg.norm(shells[0].positions, axis=1).mean())
        hit = first_hit(sphere_bvhs[0], Ray(origin=(0.0, 0.0, 2.0),
                                            direction=(0.0, 0.0, -1.0)))
        assert hit is not None
        assert hit.t == pytest.approx(2.0 - r, abs=0.08)
        assert hit.uv is not None and hit.normal is not None
        assert np.linalg.norm(hit.normal) == pytest.approx(1.0, abs=1e-9)
        miss = first_hit(sphere_bvhs[0], Ray(origin=(0.0, 2.0 * r, 2.0),
                                             direction=(0.0, 0.0, -1.0)))
        assert miss is None

    def test_matches_brute_force_on_random_rays(self, sphere_scene,
                                                sphere_bvhs, rng):
        _, shells = sphere_scene
        mesh, bvh = shells[0], sphere_bvhs[0]
        n = 10_000
        origins = rng.normal(size=(n, 3))
        origins *= 2.5 / np.linalg.norm(origins, axis=1, keepdims=True)
        targets = rng.uniform(-0.9, 0.9, size=(n, 3))
        dirs = targets - origins
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        t, tri, u, v = cast_first_hits(bvh, origins, dirs)
        rt, rtri, ru, rv = reference_first_hits(mesh, origins, dirs)
        assert np.array_equal(tri, rtri)
        assert np.array_equal(t, rt)
        assert np.array_equal(u, ru)
        assert np.array_equal(v, rv)
        assert np.isfinite(t).sum() > n // 5


class TestAlphaAttenuation:
    def test_perpendicular_and_aligned_endpoints(self):
        v = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 1.0]])
        n = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
        a = alpha_attenuation(v, n)
        assert a[0] == pytest.approx(0.0, abs=1e-9)
        assert a[1] == pytest.approx(math.tanh(5.0), abs=1e-9)

    def test_matches_sigmoid_form_and_sign_symmetry(self, rng):
        v = rng.normal(size=(100, 3))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        n = rng.normal(size=(100, 3))
        n /= np.linalg.norm(n, axis=1, keepdims=True)
        dot = np.abs(np.sum(v * n, axis=1))
        assert np.allclose(alpha_attenuation(v, n),
                           2.0 * sigmoid(10.0 * dot) - 1.0)
        assert np.allclose(alpha_attenuation(v, n), alpha_attenuation(v, -n))

    def test_monotone_in_facing_and_bounded(self):
        c = np.linspace(0.0, 1.0, 101)
        v = np.stack([np.sqrt(1.0 - c * c), np.zeros_like(c), c], axis=1)
        n = np.tile([0.0, 0.0, 1.0], (101, 1))
        a = alpha_attenuation(v, n)
        assert np.all(np.diff(a) > 0.0)
        assert a[0] == 0.0 and a[-1] <= math.tanh(5.0) + 1e-15
        assert a[50] == pytest.approx(math.tanh(2.5), abs=1e-9)


class TestBlendFixedOrder:
    def test_single_layer(self):
        out = blend_fixed_order([((0.2, 0.4, 0.6), 0.5)])
        assert np.allclose(out, [0.1, 0.2, 0.3, 0.5])

    def test_half_red_over_solid_blue(self):
        out = blend_fixed_order([((1.0, 0.0, 0.0), 0.5),
                                 ((0.0, 0.0, 1.0), 1.0)])
        assert np.allclose(out, [0.5, 0.0, 0.5, 1.0])

    def test_opaque_layer_hides_everything_behind_it(self, rng):
        front = [((0.3, 0.5, 0.1), 0.4), ((0.9, 0.2, 0.7), 1.0)]
        a = blend_fixed_order(front + [((0.1, 0.1, 0.1), 0.8)])
        b = blend_fixed_order(front + [(tuple(rng.uniform(0, 1, 3)), 0.2)])
        assert np.array_equal(a, b)

    def test_alpha_is_one_minus_product_of_transparencies(self, rng):
        alphas = rng.uniform(0.0, 1.0, size=5)
        layers = [(rng.uniform(0.0, 1.0, 3), a) for a in alphas]
        out = blend_fixed_order(layers)
        assert out[3] == pytest.approx(1.0 - np.prod(1.0 - alphas), abs=1e-12)
        assert np.all(out >= 0.0) and np.all(out <= 1.0)

    def test_image_shaped_inputs_broadcast(self, rng):
        rgb0 = rng.uniform(0, 1, (4, 5, 3))
        a0 = rng.uniform(0, 1, (4, 5))
        rgb1 = rng.uniform(0, 1, (4, 5, 3))
        out = blend_fixed_order([(rgb0, a0), (rgb1, 1.0)])
        assert out.shape == (4, 5, 4)
        assert np.allclose(out[..., 3], 1.0)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            blend_fixed_order([])


class TestRenderShells:
    def test_rays_away_from_shells_see_background(self, sphere_scene, texset):
        _, shells = sphere_scene
        cam = Camera.look_at(eye=(0.0, 0.0, 2.0), target=(0.0, 0.0, 4.0),
                             width=16, height=16)
        fb = render_shells(cam, shells, texset, background=(0.2, 0.5, 0.7))
        assert np.array_equal(fb.rgba[..., :3],
                              np.broadcast_to([0.2, 0.5, 0.7], (16, 16, 3)))
        assert np.all(fb.rgba[..., 3] == 0.0)

    def test_matches_sorted_oracle_exactly_on_nested_shells(
            self, sphere_scene, sphere_bvhs, texset, camera64):
        _, shells = sphere_scene
        fixed = render_shells(camera64, shells, texset,
                              background=(0.1, 0.2, 0.3), bvhs=sphere_bvhs)
        sorted_fb = oracle_sorted_blend(camera64, shells, texset,
                                        background=(0.1, 0.2, 0.3),
                                        bvhs=sphere_bvhs)
        assert np.array_equal(fixed.rgba, sorted_fb.rgba)

    def test_shuffled_layer_order_changes_the_image(self, sphere_scene,
                                                    texset, camera64):
        _, shells = sphere_scene
        shuffled = [shells[2], shells[0], shells[1]]
        fixed = render_shells(camera64, shuffled, texset,
                              background=(0.1, 0.2, 0.3))
        sorted_fb = oracle_sorted_blend(camera64, shuffled, texset,
                                        background=(0.1, 0.2, 0.3))
        assert np.max(np.abs(fixed.rgba - sorted_fb.rgba)) > 1e-3

    def test_accepts_shell_set_and_plain_list(self, sphere_scene, texset,
                                              camera64):
        _, shells = sphere_scene
        a = render_shells(camera64, shells, texset)
        b = render_shells(camera64, list(shells), texset)
        assert np.array_equal(a.rgba, b.rgba)

    def test_early_exit_error_is_below_one_quantum(self, sphere_scene,
                                                   sphere_bvhs, camera64):
        _, shells = sphere_scene
        opaque = ShTextureSet.random(3, seed=9, scale=4.0,
                                     resolutions=(8, 4, 4, 4))
        on = render_shells(camera64, shells, opaque, bvhs=sphere_bvhs,
                           early_exit=True)
        off = render_shells(camera64, shells, opaque, bvhs=sphere_bvhs,
                            early_exit=False)
        assert np.max(np.abs(on.rgba - off.rgba)) <= EARLY_EXIT_TRANSMITTANCE

    def test_early_exit_casts_fewer_rays(self, sphere_scene, sphere_bvhs,
                                         camera64):
        _, shells = sphere_scene
        opaque = ShTextureSet.random(3, seed=9, scale=4.0,
                                     resolutions=(8, 4, 4, 4))
        s_on, s_off = {}, {}
        render_shells(camera64, shells, opaque, bvhs=sphere_bvhs,
                      early_exit=True, stats=s_on)
        render_shells(camera64, shells, opaque, bvhs=sphere_bvhs,
                      early_exit=False, stats=s_off)
        assert s_off["rays_cast"] == 3 * 64 * 64
        assert s_on["rays_cast"] < s_off["rays_cast"]

    def test_matches_per_pixel_reference_composition(self, sphere_scene,
                                                     texset, camera64, rng):
        _, shells = sphere_scene
        bg = np.array([0.15, 0.25, 0.35])
        fb = render_shells(camera64, shells, texset, background=bg,
                           early_exit=False)
        origins, dirs = camera64.pixel_rays()
        flat_o = origins.reshape(-1, 3)
        flat_d = dirs.reshape(-1, 3)
        pick = rng.choice(flat_o.shape[0], size=400, replace=False)
        for p in pick:
            o = flat_o[p:p + 1]
            d = flat_d[p:p + 1]
            accum = np.zeros(3)
            trans = 1.0
            for mesh in shells:
                t, tri, u, v = reference_first_hits(mesh, o, d)
                if tri[0] < 0:
                    continue
                uv, normal = interpolate_hit_attributes(mesh, tri, u, v)
                rgba = decode_rgba(texset, mesh.layer_index, uv, d)[0]
                a = rgba[3] * alpha_attenuation(d[0], normal[0])
                accum += trans * a * rgba[:3]
                trans *= 1.0 - a
            expect = np.concatenate([accum + trans * bg, [1.0 - trans]])
            got = fb.rgba.reshape(-1, 4)[p]
            assert np.allclose(got, expect, atol=1e-12)

    def test_composite_of_hit_records_equals_render(self, sphere_scene,
                                                    sphere_bvhs, texset,
                                                    camera64):
        _, shells = sphere_scene
        bg = (0.3, 0.1, 0.6)
        samples = build_hit_records(shells, [camera64], background=bg,
                                    bvhs=sphere_bvhs)
        composed = composite_samples(texset, samples)
        fb = render_shells(camera64, shells, texset, background=bg,
                           bvhs=sphere_bvhs, early_exit=False)
        assert np.array_equal(composed.reshape(64, 64, 3), fb.rgb)

    def test_analytic_appearance_matches_scene_colors(self, sphere_scene,
                                                      sphere_bvhs, camera64):
        scene, shells = sphere_scene
        fb = render_shells_analytic(camera64, shells, scene.appearance,
                                    background=scene.background,
                                    bvhs=sphere_bvhs)
        assert fb.rgba.shape == (64, 64, 4)
        assert np.all(fb.rgba >= 0.0) and np.all(fb.rgba <= 1.0)
        center = fb.rgba[32, 32]
        edge = fb.rgba[0, 0]
        assert center[3] > 0.9
        assert edge[3] == 0.0

    def test_missing_uvs_are_rejected(self, sphere_scene, texset, camera64):
        _, shells = sphere_scene
        bare = shells[0].copy()
        bare.uvs = None
        with pytest.raises(ValueError, match="uv"):
            render_shells(camera64, [bare], texset)


class TestHitRecords:
    def test_row_order_and_masks(self, sphere_scene, sphere_bvhs):
        _, shells = sphere_scene
        cams = [Camera.from_orbit((0, 0, 0), 2.0, yaw, 15.0,
                                  width=8, height=8)
                for yaw in (0.0, 120.0)]
        samples = build_hit_records(shells, cams, bvhs=sphere_bvhs)
        assert len(samples) == 2 * 64
        assert samples.mask.shape == (128, 3)
        # outer shell contains the inner ones: any inner hit implies outer
        inner_hits = samples.mask[:, 1] | samples.mask[:, 2]
        assert np.all(samples.mask[:, 0] | ~inner_hits)
        hit = samples.mask
        assert np.all(samples.attenuation[hit] > 0.0)
        assert np.all(samples.attenuation[hit] <= math.tanh(5.0))
        assert np.all(samples.attenuation[~hit] == 0.0)
        assert np.all(samples.uv[~hit] == 0.0)
        assert np.all(samples.target == 0.0)


class TestDebugBuffers:
    def test_buffer_families_and_shapes(self, sphere_scene, sphere_bvhs,
                                        texset, camera64):
        _, shells = sphere_scene
        fb = render_debug_buffers(camera64, shells, texset,
                                  bvhs=sphere_bvhs)
        assert set(fb.layer_buffers) == {"normal", "uv", "opacity", "color"}
        for name, ch in (("normal", 3), ("uv", 2), ("opacity", 1),
                         ("color", 3)):
            assert len(fb.layer_buffers[name]) == 3
            for img in fb.layer_buffers[name]:
                assert img.shape == (64, 64, ch)

    def test_head_on_normal_points_at_camera(self, sphere_scene):
        _, shells = sphere_scene
        texset = ShTextureSet.zeros(3, resolutions=(8, 4, 4, 4))
        cam = Camera.look_at(eye=(0.0, 0.0, 2.0), target=(0.0, 0.0, 0.0),
                             width=33, height=33)
        fb = render_debug_buffers(cam, shells, texset)
        center = fb.layer_buffers["normal"][0][16, 16]
        assert np.allclose(center, [0.5, 0.5, 1.0], atol=0.05)
        uv0 = fb.layer_buffers["uv"][0]
        assert np.all(uv0 >= 0.0) and np.all(uv0 <= 1.0)

    def test_grazing_opacity_fades_relative_to_center(self, sphere_scene):
        _, shells = sphere_scene
        texset = ShTextureSet.zeros(3, resolutions=(8, 4, 4, 4))
        cam = Camera.look_at(eye=(0.0, 0.0, 2.0), target=(0.0, 0.0, 0.0),
                             width=65, height=65)
        fb = render_debug_buffers(cam, shells, texset)
        op = fb.layer_buffers["opacity"][0][32, :, 0]
        hit_cols = np.nonzero(op > 0.0)[0]
        silhouette = op[hit_cols[0]]
        center = op[32]
        assert silhouette < 0.8 * center


class TestImageMetrics:
    def test_identical_images_hit_the_cap(self, rng):
        img = rng.uniform(0, 1, (8, 8, 3))
        psnr, mae = image_metrics(img, img)
        assert psnr == PSNR_CAP and mae == 0.0

    def test_uniform_offset_mae(self, rng):
        img = rng.uniform(0.1, 0.8, (8, 8, 4))
        psnr, mae = image_metrics(img, img + 1.0 / 255.0)
        assert mae == pytest.approx(1.0 / 255.0, abs=1e-12)
        assert psnr == pytest.approx(20.0 * math.log10(255.0), abs=1e-9)

    def test_inverted_binary_images_score_zero_db(self):
        a = np.zeros((4, 4, 3))
        a[::2, ::2] = 1.0
        psnr, mae = image_metrics(a, 1.0 - a)
        assert psnr == pytest.approx(0.0, abs=1e-12)
        assert mae == 1.0

    def test_alpha_channel_is_ignored(self, rng):
        a = rng.uniform(0, 1, (6, 6, 4))
        b = a.copy()
        b[..., 3] = 0.0
        assert image_metrics(a, b) == (PSNR_CAP, 0.0)

    def test_dimension_mismatch_raises(self):
        with pytest.raises(ValueError, match="dimensions"):
            image_metrics(np.zeros((4, 4, 3)), np.zeros((4, 5, 3)))
        with pytest.raises(ValueError):
            image_metrics(np.zeros((4, 4)), np.zeros((4, 4)))


class TestBenchmark:
    def test_reports_positive_rates_and_line_format(self, sphere_scene,
                                                    sphere_bvhs, texset):
        _, shells = sphere_scene
        cam = Camera.from_orbit((0, 0, 0), 2.0, 10.0, 10.0,
                                width=32, height=32)
        result = benchmark_render(cam, shells, texset, frames=2, warmup=1,
                                  bvhs=sphere_bvhs)
        assert result.frame_ms > 0.0
        assert result.rays_per_s > 0.0
        assert result.rays >= 2 * 32 * 32
        line = format_bench_line(result)
        assert re.fullmatch(
            r"bench frame_ms=\d+\.\d{3} rays_per_s=\d+\.\d", line)

    def test_rejects_zero_frames(self, sphere_scene, texset):
        _, shells = sphere_scene
        cam = Camera.from_orbit((0, 0, 0), 2.0, 0.0, 0.0, width=8, height=8)
        with pytest.raises(ValueError):
            benchmark_render(cam, shells, texset, frames=0)

    def test_sweep_times_every_case(self, sphere_scene, texset):
        _, shells = sphere_scene
        cam = Camera.from_orbit((0, 0, 0), 2.0, 10.0, 10.0,
                                width=24, height=24)
        cases = [(shells, texset, (0.0, 0.0, 0.0)),
                 (shells[:1], texset, (0.0, 0.0, 0.0))]
        results = benchmark_sweep(cam, cases, frames=3, warmup=1)
        assert len(results) == 2
        for result in results:
            assert result.frame_ms > 0.0
            assert result.frames == 3
            assert result.rays >= 3 * 24 * 24

    def test_sweep_rejects_zero_frames(self, sphere_scene, texset):
        _, shells = sphere_scene
        cam = Camera.from_orbit((0, 0, 0), 2.0, 0.0, 0.0, width=8, height=8)
        with pytest.raises(ValueError):
            benchmark_sweep(cam, [(shells, texset, (0, 0, 0))], frames=0)
