"""Command line pipeline: scenes, renders, baking, benchmarks, validation.

Every command is deterministic under --seed and writes only below --out.
Exit codes: 0 success, 1 validation failure, 2 usage error.
"""

from __future__ import annotations

import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import click
import numpy as np

from .appearance import (
    V_MAX_DEFAULT,
    V_MIN_DEFAULT,
    FitConfig,
    FitSamples,
    ShTextureSet,
    decode_coefficients,
    fit_loss_and_gradient,
    fit_textures,
    quantize,
)
from .assets import BundleMeta, export_bundle, import_bundle
from .buffers import load_png, save_png
from .camera import Camera, fibonacci_orbit
from .fields import (
    Sphere,
    delta_o_init,
    eikonal_residual,
    ksdf_layer_distances,
    logistic_density,
    sigmoid,
)
from .meshing import AtlasConfig, SimplifyConfig, extract_shells
from .report import (
    CheckResult,
    bench_report,
    convergence_report,
    validate_report,
)
from .scene import canonical_scene, load_scene, save_scene
from .shellrender import (
    Bvh,
    alpha_attenuation,
    benchmark_render,
    benchmark_sweep,
    image_metrics,
    oracle_sorted_blend,
    render_debug_buffers,
    render_shells,
    render_shells_analytic,
)
from .volren import RenderConfig, build_occupancy, neus_weights, render_image_volumetric

CONVERGENCE_BETAS = (256.0, 1024.0, 4096.0)
CONVERGENCE_BOUND = 2.0 / 255.0


@dataclass
class PipelineConfig:
    """Knobs for the scene-to-bundle pipeline."""

    scene_path: str
    out_dir: str
    views: int = 32
    view_size: int = 64
    camera_distance: float = 2.0
    beta: float | None = None
    grid_resolution: int = 256
    samples_n: int = 64
    samples_m: int = 32
    mc_resolution: int = 96
    simplify_ratio: float = 0.08
    atlas_resolution: int = 128
    fit: FitConfig = field(default_factory=FitConfig)
    skip_fit: bool = False
    seed: int = 0

    def __post_init__(self):
        if not Path(self.scene_path).is_file():
            raise ValueError(f"scene file not readable: {self.scene_path}")
        if self.views < 1 or self.view_size < 8:
            raise ValueError("need at least one camera and 8px views")


def _thread_override() -> None:
    raw = os.environ.get("SDFSHELLS_THREADS")
    if not raw:
        return
    try:
        want = max(1, int(raw))
    except ValueError:
        raise click.UsageError("SDFSHELLS_THREADS must be an integer")
    import numba

    numba.set_num_threads(min(want, numba.config.NUMBA_NUM_THREADS))


@click.group()
def main() -> None:
    """Nested-shell baking and sorting-free rendering pipeline."""
    _thread_override()


def _out_dir(out: str) -> Path:
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _orbit_camera(target, distance, yaw, pitch, fov, size) -> Camera:
    return Camera.from_orbit(target=target, distance=distance, yaw_deg=yaw,
                             pitch_deg=pitch, fov_y_deg=fov,
                             width=size, height=size)


def _print_metrics(rendered, reference_path) -> None:
    ref = load_png(reference_path)
    if ref.shape[-1] < 3:
        raise click.ClickException("reference image must be RGB")
    psnr, mae = image_metrics(rendered[..., :3], ref[..., :3])
    click.echo(f"metrics psnr={psnr:.2f} mae={mae:.6f}")


# ---------------------------------------------------------------------------
# scene
# ---------------------------------------------------------------------------

@main.command()
@click.option("--name", required=True, help="Canonical scene name.")
@click.option("--k", default=3, show_default=True, help="Shell layer count.")
@click.option("--out", required=True, type=click.Path(file_okay=False),
              help="Output directory.")
def scene(name: str, k: int, out: str) -> None:
    """Write one of the built-in test scenes as a YAML file."""
    try:
        sc = canonical_scene(name, k=k)
    except ValueError as err:
        raise click.BadParameter(str(err))
    path = _out_dir(out) / f"{name}.yaml"
    save_scene(path, sc)
    click.echo(f"scene {path}")


# ---------------------------------------------------------------------------
# render
# ---------------------------------------------------------------------------

@main.command()
@click.option("--mode", required=True,
              type=click.Choice(["volumetric", "shells", "buffers"]))
@click.option("--scene", "scene_path",
              type=click.Path(exists=True, dir_okay=False),
              help="Scene YAML (volumetric, or shells with analytic shading).")
@click.option("--bundle", type=click.Path(exists=True, file_okay=False),
              help="Baked asset bundle (shells and buffers modes).")
@click.option("--beta", type=float, default=None,
              help="Density sharpness override for volumetric mode.")
@click.option("--size", default=256, show_default=True)
@click.option("--yaw", type=float, default=None)
@click.option("--pitch", type=float, default=None)
@click.option("--distance", type=float, default=None)
@click.option("--fov", type=float, default=None)
@click.option("--mc-resolution", default=96, show_default=True)
@click.option("--simplify", default=0.08, show_default=True)
@click.option("--atlas-resolution", default=128, show_default=True)
@click.option("--reference", type=click.Path(exists=True, dir_okay=False),
              help="PNG to compare against; prints psnr and mae.")
@click.option("--seed", default=0, show_default=True)
@click.option("--out", required=True, type=click.Path(file_okay=False))
def render(mode, scene_path, bundle, beta, size, yaw, pitch, distance, fov,
           mc_resolution, simplify, atlas_resolution, reference, seed, out):
    """Render a scene volumetrically, as shells, or as per-layer buffers."""
    outdir = _out_dir(out)
    cam_defaults = (30.0, 20.0, 2.0, 45.0)
    meta = None
    if bundle is not None:
        shells, texset, meta = import_bundle(bundle)
        cam_defaults = (meta.camera_yaw_deg, meta.camera_pitch_deg,
                        meta.camera_distance, meta.camera_fov_y_deg)
    yaw = cam_defaults[0] if yaw is None else yaw
    pitch = cam_defaults[1] if pitch is None else pitch
    distance = cam_defaults[2] if distance is None else distance
    fov = cam_defaults[3] if fov is None else fov
    target = meta.camera_target if meta is not None else (0.0, 0.0, 0.0)
    cam = _orbit_camera(target, distance, yaw, pitch, fov, size)

    if mode == "volumetric":
        if scene_path is None:
            raise click.UsageError("volumetric mode needs --scene")
        sc = load_scene(scene_path)
        cfg = RenderConfig(beta=beta, width=size, height=size,
                           background=sc.background, seed=seed)
        fb = render_image_volumetric(cam, sc, cfg)
        path = outdir / "volumetric.png"
    elif mode == "shells":
        if bundle is not None:
            fb = render_shells(cam, shells, texset,
                               background=meta.background)
        elif scene_path is not None:
            sc = load_scene(scene_path)
            sh = extract_shells(sc.ksdf, sc.bbox_min, sc.bbox_max,
                                resolution=mc_resolution,
                                simplify=SimplifyConfig(simplify),
                                atlas=AtlasConfig(resolution=atlas_resolution))
            fb = render_shells_analytic(cam, sh, sc.appearance,
                                        background=sc.background)
        else:
            raise click.UsageError("shells mode needs --bundle or --scene")
        path = outdir / "shells.png"
    else:
        if bundle is None:
            raise click.UsageError("buffers mode needs --bundle")
        fb = render_debug_buffers(cam, shells, texset,
                                  background=meta.background)
        for name, images in fb.layer_buffers.items():
            for j, img in enumerate(images):
                if img.shape[-1] == 2:  # pad two-channel data for PNG
                    img = np.concatenate([img, np.zeros_like(img[..., :1])],
                                         axis=-1)
                save_png(outdir / f"layer{j}_{name}.png", img)
        path = outdir / "composite.png"

    save_png(path, fb.rgba)
    click.echo(f"render {path}")
    if reference is not None:
        _print_metrics(fb.rgba, reference)


# ---------------------------------------------------------------------------
# bake
# ---------------------------------------------------------------------------

def _stage(name: str, start: float) -> float:
    now = time.perf_counter()
    click.echo(f"stage {name} seconds={now - start:.2f}")
    return now


@main.command()
@click.option("--scene", "scene_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(file_okay=False),
              help="Bundle output directory.")
@click.option("--views", default=32, show_default=True)
@click.option("--view-size", default=64, show_default=True)
@click.option("--camera-distance", default=2.0, show_default=True)
@click.option("--beta", type=float, default=None,
              help="Target sharpness; defaults to the scene schedule end.")
@click.option("--grid-resolution", default=256, show_default=True)
@click.option("--samples-n", default=64, show_default=True)
@click.option("--samples-m", default=32, show_default=True)
@click.option("--mc-resolution", default=96, show_default=True)
@click.option("--simplify", default=0.08, show_default=True)
@click.option("--atlas-resolution", default=128, show_default=True)
@click.option("--texture-size", default=32, show_default=True,
              help="Texture resolution, used for every band so the "
                   "per-texel update rate stays balanced across bands.")
@click.option("--iterations", default=800, show_default=True)
@click.option("--learning-rate", default=400.0, show_default=True)
@click.option("--batch-size", default=8192, show_default=True)
@click.option("--quantization-aware/--no-quantization-aware", default=True,
              show_default=True)
@click.option("--skip-fit", is_flag=True,
              help="Export zero-initialized textures without fitting.")
@click.option("--seed", default=0, show_default=True)
def bake(scene_path, out, views, view_size, camera_distance, beta,
         grid_resolution, samples_n, samples_m, mc_resolution, simplify,
         atlas_resolution, texture_size, iterations, learning_rate,
         batch_size, quantization_aware, skip_fit, seed):
    """Scene to asset bundle: mesh shells, fit textures, export."""
    cfg = PipelineConfig(
        scene_path=scene_path, out_dir=out, views=views, view_size=view_size,
        camera_distance=camera_distance, beta=beta,
        grid_resolution=grid_resolution, samples_n=samples_n,
        samples_m=samples_m, mc_resolution=mc_resolution,
        simplify_ratio=simplify, atlas_resolution=atlas_resolution,
        fit=FitConfig(iterations=iterations, learning_rate=learning_rate,
                      batch_size=batch_size,
                      quantization_aware=quantization_aware, seed=seed),
        skip_fit=skip_fit, seed=seed)
    sc = load_scene(cfg.scene_path)
    target_point = tuple((sc.bbox_min + sc.bbox_max) / 2.0)

    t0 = time.perf_counter()
    shells = extract_shells(sc.ksdf, sc.bbox_min, sc.bbox_max,
                            resolution=cfg.mc_resolution,
                            simplify=SimplifyConfig(cfg.simplify_ratio),
                            atlas=AtlasConfig(resolution=cfg.atlas_resolution))
    t0 = _stage("extract", t0)

    cams = fibonacci_orbit(cfg.views, target_point, cfg.camera_distance,
                           width=cfg.view_size, height=cfg.view_size)
    beta_value = float(cfg.beta if cfg.beta is not None else sc.betas[-1])
    rcfg = RenderConfig(beta=beta_value, width=cfg.view_size,
                        height=cfg.view_size, background=sc.background,
                        n=cfg.samples_n, m=cfg.samples_m,
                        grid_resolution=cfg.grid_resolution, seed=cfg.seed)
    grid = build_occupancy(sc.ksdf, beta_value, rcfg.grid_resolution,
                           rcfg.tau, sc.bbox_min, sc.bbox_max)
    targets = [(cam, render_image_volumetric(cam, sc, rcfg, grid=grid).rgb)
               for cam in cams]
    t0 = _stage("targets", t0)

    resolutions = (texture_size,) * 4
    if cfg.skip_fit:
        texset = ShTextureSet.zeros(sc.k, resolutions=resolutions)
    else:
        texset = fit_textures(shells, targets, cfg.fit,
                              background=sc.background,
                              resolutions=resolutions)
    t0 = _stage("fit", t0)

    bvhs = [Bvh.from_mesh(m) for m in shells]
    errs = []
    worst = math.inf
    for cam, target_img in targets:
        fb = render_shells(cam, shells, texset, background=sc.background,
                           bvhs=bvhs)
        psnr, _ = image_metrics(fb.rgb, target_img)
        worst = min(worst, psnr)
        errs.append(np.mean((fb.rgb - target_img) ** 2))
    pooled = float(np.mean(errs))
    psnr_all = 99.0 if pooled <= 0 else min(99.0, -10.0 * math.log10(pooled))
    click.echo(f"fit psnr={psnr_all:.2f} worst_view={worst:.2f}")
    t0 = _stage("verify", t0)

    meta = BundleMeta(name=sc.name, background=sc.background,
                      camera_target=target_point,
                      camera_distance=cfg.camera_distance)
    bundle_dir = export_bundle(shells, texset, meta, cfg.out_dir)
    _stage("export", t0)
    click.echo(f"bundle {bundle_dir}")


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------

@main.command()
@click.option("--ks", default="3,5,7,9", show_default=True,
              help="Comma-separated layer counts to sweep.")
@click.option("--scene-name", default="fuzzy-sphere", show_default=True)
@click.option("--size", default=128, show_default=True)
@click.option("--frames", default=5, show_default=True)
@click.option("--warmup", default=1, show_default=True)
@click.option("--mc-resolution", default=48, show_default=True)
@click.option("--simplify", default=0.3, show_default=True)
@click.option("--atlas-resolution", default=64, show_default=True)
@click.option("--compare-threads", is_flag=True,
              help="Also time a single-thread render and report the speedup.")
@click.option("--seed", default=0, show_default=True)
@click.option("--out", required=True, type=click.Path(file_okay=False))
def bench(ks, scene_name, size, frames, warmup, mc_resolution, simplify,
          atlas_resolution, compare_threads, seed, out):
    """Frame-time sweep over shell counts; fails unless cost grows with k."""
    try:
        k_list = [int(tok) for tok in ks.split(",") if tok.strip()]
    except ValueError:
        raise click.BadParameter("--ks must be comma-separated integers")
    if not k_list:
        raise click.BadParameter("--ks must name at least one layer count")
    outdir = _out_dir(out)
    cam = _orbit_camera((0.0, 0.0, 0.0), 2.0, 30.0, 20.0, 45.0, size)
    cases = []
    for k in k_list:
        try:
            sc = canonical_scene(scene_name, k=k)
        except ValueError as err:
            raise click.BadParameter(str(err))
        shells = extract_shells(sc.ksdf, sc.bbox_min, sc.bbox_max,
                                resolution=mc_resolution,
                                simplify=SimplifyConfig(simplify),
                                atlas=AtlasConfig(resolution=atlas_resolution))
        texset = ShTextureSet.random(k, seed=seed, resolutions=(16, 8, 8, 8))
        cases.append((shells, texset, sc.background))
    results = benchmark_sweep(cam, cases, frames=frames, warmup=warmup)
    for k, result in zip(k_list, results):
        click.echo(f"bench k={k} frame_ms={result.frame_ms:.3f} "
                   f"rays_per_s={result.rays_per_s:.1f}")
    if compare_threads:
        import numba

        shells, texset, background = cases[-1]
        active = numba.get_num_threads()
        numba.set_num_threads(1)
        single = benchmark_render(cam, shells, texset, background=background,
                                  frames=frames, warmup=warmup)
        numba.set_num_threads(active)
        click.echo(f"threads active={active} "
                   f"speedup={single.frame_ms / results[-1].frame_ms:.2f}")
    csv_path, fig_path = bench_report(outdir, k_list, results)
    click.echo(f"report {csv_path}")
    click.echo(f"report {fig_path}")
    times = [r.frame_ms for r in results]
    if any(b <= a for a, b in zip(times, times[1:])):
        click.echo("bench failure: frame time did not increase with k",
                   err=True)
        sys.exit(1)


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------

def _validation_shells(k: int = 3):
    sc = canonical_scene("fuzzy-sphere", k=k)
    shells = extract_shells(sc.ksdf, sc.bbox_min, sc.bbox_max,
                            resolution=48, simplify=SimplifyConfig(0.3),
                            atlas=AtlasConfig(resolution=64))
    return sc, shells


def _check_sorted_blend(bundle, size, seed) -> CheckResult:
    cam = _orbit_camera((0.0, 0.0, 0.0), 2.0, 25.0, 15.0, 45.0, min(size, 96))
    if bundle is not None:
        shells, texset, meta = import_bundle(bundle)
        meshes = list(shells)
        background = meta.background
    else:
        _, shells = _validation_shells()
        meshes = list(shells)
        texset = ShTextureSet.random(len(meshes), seed=seed,
                                     resolutions=(16, 8, 8, 8))
        background = (0.1, 0.2, 0.3)
    fixed = render_shells(cam, meshes, texset, background=background)
    sorted_fb = oracle_sorted_blend(cam, meshes, texset,
                                    background=background)
    diff = float(np.max(np.abs(fixed.rgba - sorted_fb.rgba)))
    shuffled = meshes[1:] + meshes[:1]
    neg = float(np.max(np.abs(
        render_shells(cam, shuffled, texset, background=background).rgba -
        oracle_sorted_blend(cam, shuffled, texset,
                            background=background).rgba)))
    passed = diff == 0.0 and neg > 0.0
    return CheckResult("sorted-blend", passed, diff,
                       f"max|fixed-sorted|={diff:.3g}, shuffled control="
                       f"{neg:.3g}")


def _check_occupancy(seed) -> CheckResult:
    sc = canonical_scene("fuzzy-sphere", k=3)
    beta, tau = 512.0, 1e-4
    grid = build_occupancy(sc.ksdf, beta, 128, tau, sc.bbox_min, sc.bbox_max)
    rng = np.random.default_rng(seed)
    pts = rng.uniform(sc.bbox_min, sc.bbox_max, size=(100_000, 3))
    density = logistic_density(beta, ksdf_layer_distances(sc.ksdf, pts))
    dense = density.max(axis=-1) >= tau
    violations = int(np.count_nonzero(dense & ~grid.occupied_at(pts)))
    return CheckResult("occupancy", violations == 0, float(violations),
                       f"{violations} of {int(dense.sum())} dense points "
                       f"outside the occupancy grid")


def _check_gradient(seed) -> CheckResult:
    rng = np.random.default_rng(seed)
    texset = ShTextureSet.random(2, seed=seed, scale=0.5,
                                 resolutions=(8, 4, 4, 4))
    n = 256
    dirs = rng.normal(size=(n, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    samples = FitSamples(uv=rng.uniform(0, 1, (n, 2, 2)),
                         mask=np.ones((n, 2), dtype=bool),
                         attenuation=rng.uniform(0.7, 1.0, (n, 2)),
                         dirs=dirs, target=np.full((n, 3), 0.5),
                         background=(0.2, 0.2, 0.2))
    _, grads = fit_loss_and_gradient(texset, samples, quantized=False)
    h = 1e-4
    worst = 0.0
    for _ in range(100):
        layer = int(rng.integers(2))
        band = int(rng.integers(4))
        data = texset.layers[layer][band].data
        idx = tuple(int(rng.integers(s)) for s in data.shape)
        keep = data[idx]
        data[idx] = keep + h
        texset.invalidate()
        up, _ = fit_loss_and_gradient(texset, samples, quantized=False)
        data[idx] = keep - h
        texset.invalidate()
        dn, _ = fit_loss_and_gradient(texset, samples, quantized=False)
        data[idx] = keep
        texset.invalidate()
        fd = (up - dn) / (2.0 * h)
        an = grads[layer][band][idx]
        denom = max(abs(fd), abs(an), 1e-8)
        worst = max(worst, abs(fd - an) / denom)
    return CheckResult("gradient", worst < 1e-4, worst,
                       f"max relative error {worst:.3g} over 100 parameters")


def _check_quantization(seed) -> CheckResult:
    rng = np.random.default_rng(seed)
    problems = []
    for beta in (0.5, 8.0, 512.0):
        d = np.linspace(-40.0 / beta, 40.0 / beta, 200_001)
        mass = float(np.trapezoid(logistic_density(beta, d), d))
        if abs(mass - 1.0) > 1e-6:
            problems.append(f"density mass {mass} at beta={beta}")
        expect = (1.0 / beta) * math.pi / math.sqrt(3.0)
        if delta_o_init(beta) != expect:
            problems.append(f"offset init mismatch at beta={beta}")
    a0 = float(2.0 * sigmoid(np.asarray(0.0)) - 1.0)
    a1 = float(2.0 * sigmoid(np.asarray(10.0)) - 1.0)
    if abs(a0) > 1e-6 or abs(a1 - math.tanh(5.0)) > 1e-6:
        problems.append("attenuation endpoints off")
    x = rng.uniform(-0.2, 1.2, 100_000)
    q = quantize(np.clip(x, 0.0, 1.0))
    if not np.array_equal(quantize(q), q):
        problems.append("quantization not idempotent")
    raw = rng.normal(0.0, 3.0, 100_000)
    err = np.max(np.abs(decode_coefficients(raw, quantized=True) -
                        decode_coefficients(raw, quantized=False)))
    half_step = (V_MAX_DEFAULT - V_MIN_DEFAULT) / 510.0
    if err > half_step + 1e-12:
        problems.append(f"decode error {err} above half step")
    pts = rng.uniform(-1.0, 1.0, (10_000, 3))
    eik = eikonal_residual(Sphere(radius=0.5), pts)
    if eik > 1e-10:
        problems.append(f"eikonal residual {eik}")
    sc = canonical_scene("fuzzy-sphere", k=3)
    origins = rng.normal(size=(10_000, 3))
    origins *= 2.0 / np.linalg.norm(origins, axis=1, keepdims=True)
    aims = rng.uniform(-0.3, 0.3, (10_000, 3))
    dirs = aims - origins
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    t = np.sort(rng.uniform(0.0, 4.0, (10_000, 48)), axis=1)
    pos = origins[:, None, :] + t[..., None] * dirs[:, None, :]
    w = neus_weights(ksdf_layer_distances(sc.ksdf, pos), 512.0)
    excess = float(np.max(w.sum(axis=-2)) - 1.0)
    if excess > 1e-12:
        problems.append(f"layer weights exceed unity by {excess}")
    detail = "; ".join(problems) if problems else (
        "density mass, offset init, attenuation endpoints, quantization, "
        "eikonal, weight budget all within bounds")
    return CheckResult("quantization", not problems, float(len(problems)),
                       detail)


def _check_convergence(out: Path, size, seed) -> CheckResult:
    sc = canonical_scene("fuzzy-sphere", k=3)
    cam = _orbit_camera((0.0, 0.0, 0.0), 2.0, 30.0, 20.0, 45.0, size)
    shells = extract_shells(sc.ksdf, sc.bbox_min, sc.bbox_max,
                            resolution=96, simplify=SimplifyConfig(0.08),
                            atlas=AtlasConfig(resolution=64))
    fb = render_shells_analytic(cam, shells, sc.appearance,
                                background=sc.background)
    maes = []
    for beta in CONVERGENCE_BETAS:
        cfg = RenderConfig(beta=beta, width=size, height=size,
                           background=sc.background, seed=seed)
        ref = render_image_volumetric(cam, sc, cfg)
        maes.append(image_metrics(ref.rgba, fb.rgba)[1])
    convergence_report(out, CONVERGENCE_BETAS, maes, CONVERGENCE_BOUND)
    monotone = all(b < a for a, b in zip(maes, maes[1:]))
    passed = monotone and maes[-1] < CONVERGENCE_BOUND
    trail = " -> ".join(f"{m * 255.0:.3f}" for m in maes)
    return CheckResult("convergence", passed, maes[-1],
                       f"mae/255: {trail}, monotone={monotone}")


@main.command()
@click.option("--check", "selected", multiple=True,
              help="Run only the named checks (repeatable).")
@click.option("--list", "list_only", is_flag=True,
              help="List available checks and exit.")
@click.option("--bundle", type=click.Path(exists=True, file_okay=False),
              help="Run the sorted-blend check against this bundle.")
@click.option("--size", default=128, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", type=click.Path(file_okay=False))
def validate(selected, list_only, bundle, size, seed, out):
    """Run the renderer oracle checks; nonzero exit on any failure."""
    names = ["sorted-blend", "occupancy", "gradient", "quantization",
             "convergence"]
    if list_only:
        for name in names:
            click.echo(name)
        return
    if out is None:
        raise click.UsageError("--out is required unless --list is given")
    unknown = [s for s in selected if s not in names]
    if unknown:
        raise click.BadParameter(f"unknown checks: {', '.join(unknown)}")
    outdir = _out_dir(out)
    todo = list(selected) if selected else names
    results = []
    for name in names:
        if name not in todo:
            continue
        if name == "sorted-blend":
            results.append(_check_sorted_blend(bundle, size, seed))
        elif name == "occupancy":
            results.append(_check_occupancy(seed))
        elif name == "gradient":
            results.append(_check_gradient(seed))
        elif name == "quantization":
            results.append(_check_quantization(seed))
        else:
            results.append(_check_convergence(outdir, size, seed))
        last = results[-1]
        click.echo(f"check {last.name} {last.status} value={last.value:.6g} "
                   f"({last.detail})")
    csv_path, fig_path = validate_report(outdir, results)
    click.echo(f"report {csv_path}")
    click.echo(f"report {fig_path}")
    if not all(c.passed for c in results):
        sys.exit(1)


if __name__ == "__main__":
    main()
