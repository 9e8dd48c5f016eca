"""Baking implicit shells into lightweight textured meshes.

Per layer: marching cubes on the layer's signed distance, quadric-error
edge-collapse simplification, then a UV atlas built from normal-clustered
charts that are planar-projected and shelf-packed with gutters.  Meshes
export to OBJ (v/vt/vn with f v/vt/vn faces) and binary PLY.
"""

from __future__ import annotations

import collections
import heapq
import logging
import math
from dataclasses import dataclass

import numpy as np
from skimage import measure

from .fields import KSdf, SdfField, normalize

Array = np.ndarray

log = logging.getLogger(__name__)


class EmptyLevelSetError(ValueError):
    """The zero level set does not intersect the requested volume."""


# ---------------------------------------------------------------------------
# Mesh container
# ---------------------------------------------------------------------------

@dataclass
class TriMesh:
    positions: Array  # (V, 3)
    faces: Array  # (F, 3) int
    normals: Array | None = None  # (V, 3)
    uvs: Array | None = None  # (V, 2)
    layer_index: int = 0

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=np.float64).reshape(-1, 3)
        self.faces = np.asarray(self.faces, dtype=np.int64).reshape(-1, 3)
        if self.normals is not None:
            self.normals = np.asarray(self.normals, dtype=np.float64).reshape(-1, 3)
        if self.uvs is not None:
            self.uvs = np.asarray(self.uvs, dtype=np.float64).reshape(-1, 2)
        if self.faces.size and (self.faces.min() < 0 or self.faces.max() >= len(self.positions)):
            raise ValueError("face indices out of range")

    @property
    def vertex_count(self) -> int:
        return len(self.positions)

    @property
    def face_count(self) -> int:
        return len(self.faces)

    def face_areas(self) -> Array:
        p = self.positions
        a, b, c = p[self.faces[:, 0]], p[self.faces[:, 1]], p[self.faces[:, 2]]
        return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=-1)

    def face_normals(self) -> Array:
        p = self.positions
        a, b, c = p[self.faces[:, 0]], p[self.faces[:, 1]], p[self.faces[:, 2]]
        return normalize(np.cross(b - a, c - a), eps=1e-300)

    def euler_characteristic(self) -> int:
        e = np.sort(self.faces[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2), axis=1)
        n_edges = len(np.unique(e, axis=0))
        return self.vertex_count - n_edges + self.face_count

    def copy(self) -> "TriMesh":
        return TriMesh(self.positions.copy(), self.faces.copy(),
                       None if self.normals is None else self.normals.copy(),
                       None if self.uvs is None else self.uvs.copy(),
                       self.layer_index)


@dataclass
class ShellSet:
    """Layer meshes ordered outermost to innermost."""

    meshes: list

    def __post_init__(self):
        for i, m in enumerate(self.meshes):
            if m.layer_index != i:
                raise ValueError("shell meshes must be ordered by layer index")

    @property
    def k(self) -> int:
        return len(self.meshes)

    def __iter__(self):
        return iter(self.meshes)

    def __getitem__(self, i):
        return self.meshes[i]


@dataclass
class SimplifyConfig:
    target_ratio: float = 0.02
    preserve_topology: bool = True

    def __post_init__(self):
        if not 0.0 < self.target_ratio <= 1.0:
            raise ValueError("target_ratio must be in (0,1]")


@dataclass
class AtlasConfig:
    resolution: int = 256
    gutter: int = 2
    max_charts: int = 48
    cone_angle_deg: float = 62.0

    def __post_init__(self):
        if self.gutter < 1:
            raise ValueError("gutter must be >= 1 texel")
        if self.resolution < 8:
            raise ValueError("atlas resolution too small")


# ---------------------------------------------------------------------------
# Marching cubes
# ---------------------------------------------------------------------------

def marching_cubes(field: SdfField, bbox_min, bbox_max, resolution: int) -> TriMesh:
    """Zero level set as a triangle mesh; normals from the field gradient."""
    if resolution < 8:
        raise ValueError("resolution must be >= 8")
    bbox_min = np.asarray(bbox_min, dtype=np.float64)
    bbox_max = np.asarray(bbox_max, dtype=np.float64)
    axes = [np.linspace(bbox_min[i], bbox_max[i], resolution) for i in range(3)]
    gx, gy, gz = np.meshgrid(*axes, indexing="ij")
    vol = field.eval(np.stack([gx, gy, gz], axis=-1))
    return mesh_from_volume(vol, bbox_min, bbox_max, field)


def mesh_from_volume(vol: Array, bbox_min: Array, bbox_max: Array,
                     field: SdfField | None = None) -> TriMesh:
    if vol.min() > 0.0 or vol.max() < 0.0:
        raise EmptyLevelSetError("level set absent in bounding box")
    spacing = (bbox_max - bbox_min) / (np.array(vol.shape) - 1)
    verts, faces, grad_normals, _ = measure.marching_cubes(vol, level=0.0, spacing=tuple(spacing))
    verts = verts + bbox_min
    if field is not None:
        g = field.gradient(verts)
        gn = np.linalg.norm(g, axis=-1, keepdims=True)
        normals = np.where(gn > 1e-12, g / np.maximum(gn, 1e-300), grad_normals)
    else:
        normals = grad_normals
    mesh = TriMesh(positions=verts, faces=faces, normals=normals)
    return _orient_outward(mesh)


def _orient_outward(mesh: TriMesh) -> TriMesh:
    """Flip winding so geometric face normals align with vertex (SDF) normals."""
    fn = mesh.face_normals()
    vn = mesh.normals[mesh.faces].mean(axis=1)
    agree = np.sum(fn * vn, axis=-1)
    if np.mean(agree < 0.0) > 0.5:
        mesh.faces = mesh.faces[:, ::-1].copy()
        agree = -agree
    # fix stray disagreeing faces individually (thin-feature artifacts)
    bad = agree < 0.0
    if np.any(bad):
        mesh.faces[bad] = mesh.faces[bad][:, ::-1]
    return mesh


# ---------------------------------------------------------------------------
# Quadric-error simplification
# ---------------------------------------------------------------------------

def _cross_rows(u: Array, v: Array) -> Array:
    """Row-wise cross product without np.cross axis bookkeeping (hot path)."""
    out = np.empty_like(u)
    out[..., 0] = u[..., 1] * v[..., 2] - u[..., 2] * v[..., 1]
    out[..., 1] = u[..., 2] * v[..., 0] - u[..., 0] * v[..., 2]
    out[..., 2] = u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]
    return out


def _face_quadrics(positions: Array, faces: Array) -> Array:
    a, b, c = positions[faces[:, 0]], positions[faces[:, 1]], positions[faces[:, 2]]
    n = _cross_rows(b - a, c - a)
    nrm = np.sqrt(np.sum(n * n, axis=-1, keepdims=True))
    n = n / np.maximum(nrm, 1e-300)
    d = -np.sum(n * a, axis=-1, keepdims=True)
    plane = np.concatenate([n, d], axis=-1)  # (F, 4)
    area = 0.5 * nrm  # area weighting tames sliver triangles
    return area[:, :, None] * plane[:, :, None] * plane[:, None, :]  # (F, 4, 4)


def _edge_cost(q: Array, p1: Array, p2: Array) -> tuple[float, Array]:
    """Optimal collapse position and its quadric error for a pooled quadric.

    Solves the symmetric 3x3 system by cofactors in scalar arithmetic; this
    sits on the heap hot path where array machinery dominates runtime.
    """
    a00 = float(q[0, 0]); a01 = float(q[0, 1]); a02 = float(q[0, 2])
    a11 = float(q[1, 1]); a12 = float(q[1, 2]); a22 = float(q[2, 2])
    b0 = float(q[0, 3]); b1 = float(q[1, 3]); b2 = float(q[2, 3])
    q33 = float(q[3, 3])
    x1, y1, z1 = float(p1[0]), float(p1[1]), float(p1[2])
    x2, y2, z2 = float(p2[0]), float(p2[1]), float(p2[2])
    cands = [(x1, y1, z1), (x2, y2, z2),
             (0.5 * (x1 + x2), 0.5 * (y1 + y2), 0.5 * (z1 + z2))]
    c00 = a11 * a22 - a12 * a12
    c01 = a02 * a12 - a01 * a22
    c02 = a01 * a12 - a02 * a11
    det = a00 * c00 + a01 * c01 + a02 * c02
    if abs(det) > 1e-12:
        c11 = a00 * a22 - a02 * a02
        c12 = a01 * a02 - a00 * a12
        c22 = a00 * a11 - a01 * a01
        cands.insert(0, (-(c00 * b0 + c01 * b1 + c02 * b2) / det,
                         -(c01 * b0 + c11 * b1 + c12 * b2) / det,
                         -(c02 * b0 + c12 * b1 + c22 * b2) / det))
    best_cost = math.inf
    best = cands[0]
    for p in cands:
        x, y, z = p
        cost = (a00 * x * x + a11 * y * y + a22 * z * z
                + 2.0 * (a01 * x * y + a02 * x * z + a12 * y * z)
                + 2.0 * (b0 * x + b1 * y + b2 * z) + q33)
        if cost < best_cost:
            best_cost = cost
            best = p
    return max(best_cost, 0.0), np.array(best)


def simplify_qem(mesh: TriMesh, cfg: SimplifyConfig) -> TriMesh:
    """Edge-collapse simplification to cfg.target_ratio of the input faces.

    Collapses are ordered by quadric error with deterministic tie-breaking.
    With preserve_topology, collapses that would pinch the surface (link
    condition) or flip a surviving triangle are rejected; if no legal
    collapse remains the pass stops early and logs the achieved ratio.
    """
    if cfg.target_ratio >= 1.0:
        return mesh.copy()
    f0 = mesh.face_count
    target = max(4, int(math.ceil(cfg.target_ratio * f0)))
    pos = mesh.positions.copy()
    faces = mesh.faces.copy()
    nv = len(pos)

    vertex_faces = [set() for _ in range(nv)]
    for fi, (i, j, k) in enumerate(faces):
        vertex_faces[i].add(fi)
        vertex_faces[j].add(fi)
        vertex_faces[k].add(fi)
    alive_face = np.ones(f0, dtype=bool)
    alive_vert = np.ones(nv, dtype=bool)
    stamp = np.zeros(nv, dtype=np.int64)
    face_count = f0

    def neighbors(u):
        out = set()
        for fi in vertex_faces[u]:
            if alive_face[fi]:
                out.update(faces[fi])
        out.discard(u)
        return out

    # memoryless quadrics: always reflect the current incident faces, not
    # accumulated history, which keeps placement honest after many collapses.
    # Cached per vertex and invalidated when the vertex star changes.
    quad_cache = np.zeros((nv, 4, 4))
    fq = _face_quadrics(pos, faces)
    for c in range(3):
        np.add.at(quad_cache, faces[:, c], fq)
    dirty = np.zeros(nv, dtype=bool)

    def vertex_quadric(u):
        if dirty[u]:
            fs = [fi for fi in vertex_faces[u] if alive_face[fi]]
            quad_cache[u] = _face_quadrics(pos, faces[fs]).sum(axis=0) if fs \
                else np.zeros((4, 4))
            dirty[u] = False
        return quad_cache[u]

    heap = []
    seq = 0  # monotone tiebreak so heap never compares position arrays

    def push_edge(u, v):
        nonlocal seq
        if u > v:
            u, v = v, u
        cost, p = _edge_cost(vertex_quadric(u) + vertex_quadric(v), pos[u], pos[v])
        heapq.heappush(heap, (cost, u, v, int(stamp[u]), int(stamp[v]), seq, p))
        seq += 1

    edges = np.unique(np.sort(faces[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2), axis=1), axis=0)
    for u, v in edges:
        push_edge(int(u), int(v))

    while face_count > target and heap:
        cost, u, v, su, sv, _, p_new = heapq.heappop(heap)
        if not (alive_vert[u] and alive_vert[v]):
            continue
        if stamp[u] != su or stamp[v] != sv:
            continue
        shared = {fi for fi in vertex_faces[u] if alive_face[fi] and fi in vertex_faces[v]}
        if not shared:
            continue  # no longer an edge
        # neighbors may have moved since the push: revalidate the cost and
        # demote the edge if it got worse
        cost_now, p_new = _edge_cost(vertex_quadric(u) + vertex_quadric(v), pos[u], pos[v])
        if cost_now > cost * (1.0 + 1e-9) + 1e-18:
            heapq.heappush(heap, (cost_now, u, v, su, sv, seq, p_new))
            seq += 1
            continue
        if cfg.preserve_topology:
            opposite = set()
            for fi in shared:
                for w in faces[fi]:
                    if w != u and w != v:
                        opposite.add(int(w))
            if neighbors(u) & neighbors(v) != opposite:
                continue
        # reject collapses that flip a surviving triangle
        ring = [fi for fi in vertex_faces[u] | vertex_faces[v]
                if alive_face[fi] and fi not in shared]
        tri = faces[ring]
        p_old = pos[tri]
        moving = (tri == u) | (tri == v)
        p_moved = np.where(moving[..., None], p_new[None, None, :], p_old)
        n_old = _cross_rows(p_old[:, 1] - p_old[:, 0], p_old[:, 2] - p_old[:, 0])
        n_new = _cross_rows(p_moved[:, 1] - p_moved[:, 0], p_moved[:, 2] - p_moved[:, 0])
        if np.any(np.sum(n_old * n_new, axis=-1) <= 0.0):
            continue
        # collapse v into u
        pos[u] = p_new
        alive_vert[v] = False
        for fi in list(vertex_faces[v]):
            if not alive_face[fi]:
                continue
            if fi in shared:
                alive_face[fi] = False
                face_count -= 1
                continue
            faces[fi][faces[fi] == v] = u
            vertex_faces[u].add(fi)
        vertex_faces[v].clear()
        stamp[u] += 1
        stamp[v] += 1
        ring = neighbors(u)
        dirty[u] = True
        for w in ring:
            dirty[w] = True
        for w in ring:
            push_edge(u, int(w))

    if face_count > target:
        log.warning("simplification stopped early: %d faces (target %d), achieved ratio %.4f",
                    face_count, target, face_count / f0)

    faces = faces[alive_face]
    # drop zero-area leftovers, then compact vertices
    p = pos
    areas = 0.5 * np.linalg.norm(
        np.cross(p[faces[:, 1]] - p[faces[:, 0]], p[faces[:, 2]] - p[faces[:, 0]]), axis=-1)
    faces = faces[areas > 1e-12]
    used = np.unique(faces)
    remap = np.full(nv, -1, dtype=np.int64)
    remap[used] = np.arange(len(used))
    out = TriMesh(positions=pos[used], faces=remap[faces], layer_index=mesh.layer_index)
    out.normals = _vertex_normals(out)
    return out


def _vertex_normals(mesh: TriMesh) -> Array:
    """Area-weighted vertex normals from face geometry."""
    p = mesh.positions
    f = mesh.faces
    fn = np.cross(p[f[:, 1]] - p[f[:, 0]], p[f[:, 2]] - p[f[:, 0]])  # area-weighted
    vn = np.zeros_like(p)
    for c in range(3):
        np.add.at(vn, f[:, c], fn)
    return normalize(vn, eps=1e-300)


# ---------------------------------------------------------------------------
# UV atlas
# ---------------------------------------------------------------------------

def _grow_charts(mesh: TriMesh, cone_cos: float, max_charts: int) -> list:
    """Partition faces into charts by normal-cone region growing."""
    f = mesh.faces
    fn = mesh.face_normals()
    areas = mesh.face_areas()
    # adjacency via shared edges
    edges = {}
    adj = [[] for _ in range(len(f))]
    for fi, tri in enumerate(f):
        for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            key = (min(a, b), max(a, b))
            other = edges.get(key)
            if other is None:
                edges[key] = fi
            else:
                adj[fi].append(other)
                adj[other].append(fi)
    assigned = np.full(len(f), -1, dtype=np.int64)
    order = np.argsort(-areas, kind="stable")
    charts = []
    for seed in order:
        if assigned[seed] >= 0:
            continue
        cid = len(charts)
        members = [int(seed)]
        assigned[seed] = cid
        seed_n = fn[seed]
        queue = collections.deque([int(seed)])
        while queue:
            cur = queue.popleft()  # breadth first keeps charts compact
            for nb in adj[cur]:
                if assigned[nb] < 0 and float(fn[nb] @ seed_n) >= cone_cos:
                    assigned[nb] = cid
                    members.append(nb)
                    queue.append(nb)
        charts.append((int(seed), members))
    if len(charts) > max_charts:
        return []
    return charts


def generate_uv_atlas(mesh: TriMesh, cfg: AtlasConfig) -> TriMesh:
    """Attach a UV atlas: normal-clustered charts, planar projection along the
    dominant normal, shelf packing with gutters, uniform texel density.

    Vertices shared between charts are duplicated so every corner carries the
    UV of its own chart.  On packing overflow all charts are scaled down
    uniformly (warned once).
    """
    angle = cfg.cone_angle_deg
    charts = []
    while not charts:
        charts = _grow_charts(mesh, math.cos(math.radians(angle)), cfg.max_charts)
        if not charts:
            angle += 14.0
            if angle > 180.0:
                raise RuntimeError("chart growth failed to converge")
    f = mesh.faces
    fn = mesh.face_normals()

    # project along the seed normal: every chart normal lies within the cone,
    # so projected triangle areas stay strictly positive
    projected = []  # (members, per-corner local 2d)
    for seed, members in charts:
        m = np.asarray(members)
        n = fn[seed]
        helper = np.array([0.0, 1.0, 0.0]) if abs(n[1]) < 0.9 else np.array([1.0, 0.0, 0.0])
        u_ax = normalize(np.cross(helper, n)[None, :])[0]
        v_ax = np.cross(n, u_ax)
        verts = mesh.positions[f[m]]  # (Fm, 3, 3)
        loc = np.stack([verts @ u_ax, verts @ v_ax], axis=-1)  # (Fm, 3, 2)
        loc -= loc.reshape(-1, 2).min(axis=0)
        projected.append((m, loc))

    sizes = np.array([p[1].reshape(-1, 2).max(axis=0) for p in projected])  # world units
    res, gut = cfg.resolution, cfg.gutter
    total_area = float(np.sum(np.prod(sizes, axis=1)))
    scale = math.sqrt(0.72 * res * res / max(total_area, 1e-12))

    def pack(s):
        off, height = _shelf_pack(sizes * s, res, gut)
        return off if (off is not None and height <= res) else None

    offsets = pack(scale)
    if offsets is None:
        log.warning("atlas overflow at resolution %d: scaling charts down", res)
        for _ in range(120):
            scale *= 0.93
            offsets = pack(scale)
            if offsets is not None:
                break
    else:
        for _ in range(30):  # grow while it still fits, for better texel use
            grown = pack(scale * 1.06)
            if grown is None:
                break
            scale *= 1.06
            offsets = grown
    if offsets is None:
        raise RuntimeError("atlas packing failed")

    # emit per-corner UVs, duplicating vertices so charts stay independent
    corner_uv = np.empty((len(f), 3, 2))
    for (m, loc), off in zip(projected, offsets):
        corner_uv[m] = (loc * scale + off[None, None, :]) / res
    key = {}
    new_pos, new_nrm, new_uv, new_faces = [], [], [], []
    vn = mesh.normals if mesh.normals is not None else _vertex_normals(mesh)
    for fi in range(len(f)):
        tri = []
        for c in range(3):
            vi = int(f[fi, c])
            uv = (round(corner_uv[fi, c, 0], 9), round(corner_uv[fi, c, 1], 9))
            k = (vi, uv)
            idx = key.get(k)
            if idx is None:
                idx = len(new_pos)
                key[k] = idx
                new_pos.append(mesh.positions[vi])
                new_nrm.append(vn[vi])
                new_uv.append(corner_uv[fi, c])
            tri.append(idx)
        new_faces.append(tri)
    return TriMesh(positions=np.array(new_pos), faces=np.array(new_faces),
                   normals=np.array(new_nrm), uvs=np.array(new_uv),
                   layer_index=mesh.layer_index)


def _shelf_pack(sizes: Array, res: int, gutter: int):
    """Shelf packing: charts sorted by height, rows filled left to right.

    Returns (offsets, used_height) or (None, inf) if a single chart exceeds
    the atlas width.
    """
    order = sorted(range(len(sizes)), key=lambda i: (-sizes[i][1], -sizes[i][0], i))
    offsets = np.zeros((len(sizes), 2))
    x = gutter
    y = gutter
    shelf_h = 0.0
    for i in order:
        w, h = sizes[i]
        if w + 2 * gutter > res:
            return None, math.inf
        if x + w + gutter > res:
            y += shelf_h + gutter
            x = gutter
            shelf_h = 0.0
        offsets[i] = (x, y)
        x += w + gutter
        shelf_h = max(shelf_h, h)
    return offsets, y + shelf_h + gutter


# ---------------------------------------------------------------------------
# Shell extraction
# ---------------------------------------------------------------------------

def extract_shells(ksdf: KSdf, bbox_min, bbox_max, resolution: int,
                   simplify: SimplifyConfig | None = None,
                   atlas: AtlasConfig | None = None) -> ShellSet:
    """Mesh every layer (outermost first): marching cubes, simplify, atlas.

    Normals are re-baked from the layer field gradient at the final vertex
    positions.  Raises naming the layer if its level set is absent.
    """
    simplify = simplify or SimplifyConfig()
    atlas = atlas or AtlasConfig()
    bbox_min = np.asarray(bbox_min, dtype=np.float64)
    bbox_max = np.asarray(bbox_max, dtype=np.float64)
    axes = [np.linspace(bbox_min[i], bbox_max[i], resolution) for i in range(3)]
    gx, gy, gz = np.meshgrid(*axes, indexing="ij")
    vols = ksdf.layer_distances(np.stack([gx, gy, gz], axis=-1))  # (r, r, r, k)
    meshes = []
    for j in range(ksdf.k):
        try:
            mesh = mesh_from_volume(vols[..., j], bbox_min, bbox_max, ksdf.layer_field(j))
        except EmptyLevelSetError as e:
            raise EmptyLevelSetError(f"layer {j}: {e}") from None
        mesh = simplify_qem(mesh, simplify)
        g = ksdf.layer_gradient(mesh.positions, j)
        mesh.normals = normalize(g, eps=1e-300)
        mesh = generate_uv_atlas(mesh, atlas)
        mesh.layer_index = j
        meshes.append(mesh)
    return ShellSet(meshes=meshes)


# ---------------------------------------------------------------------------
# OBJ / PLY
# ---------------------------------------------------------------------------

def save_obj(path, mesh: TriMesh) -> None:
    """OBJ with positions, UVs, normals and f v/vt/vn faces (shared indices)."""
    if mesh.uvs is None or mesh.normals is None:
        raise ValueError("OBJ export needs normals and uvs")
    lines = []
    for p in mesh.positions.tolist():  # python floats repr to shortest round trip
        lines.append(f"v {p[0]!r} {p[1]!r} {p[2]!r}")
    for t in mesh.uvs.tolist():
        lines.append(f"vt {t[0]!r} {t[1]!r}")
    for n in mesh.normals.tolist():
        lines.append(f"vn {n[0]!r} {n[1]!r} {n[2]!r}")
    for a, b, c in mesh.faces + 1:
        lines.append(f"f {a}/{a}/{a} {b}/{b}/{b} {c}/{c}/{c}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_obj(path) -> TriMesh:
    vs, vts, vns, corners, tris = [], [], [], {}, []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            tag = parts[0]
            if tag == "v":
                vs.append([float(x) for x in parts[1:4]])
            elif tag == "vt":
                vts.append([float(x) for x in parts[1:3]])
            elif tag == "vn":
                vns.append([float(x) for x in parts[1:4]])
            elif tag == "f":
                if len(parts) != 4:
                    raise ValueError("only triangle faces are supported")
                tri = []
                for corner in parts[1:]:
                    toks = corner.split("/")
                    vi = int(toks[0]) - 1
                    ti = int(toks[1]) - 1 if len(toks) > 1 and toks[1] else vi
                    ni = int(toks[2]) - 1 if len(toks) > 2 and toks[2] else vi
                    k = (vi, ti, ni)
                    idx = corners.get(k)
                    if idx is None:
                        idx = len(corners)
                        corners[k] = idx
                    tri.append(idx)
                tris.append(tri)
    order = sorted(corners, key=corners.get)
    pos = np.array([vs[vi] for vi, _, _ in order])
    uv = np.array([vts[ti] for _, ti, _ in order]) if vts else None
    nrm = np.array([vns[ni] for _, _, ni in order]) if vns else None
    return TriMesh(positions=pos, faces=np.array(tris), normals=nrm, uvs=uv)


def save_ply(path, mesh: TriMesh) -> None:
    """Binary little-endian PLY with double-precision attributes."""
    has_uv = mesh.uvs is not None
    has_n = mesh.normals is not None
    props = ["property double x", "property double y", "property double z"]
    if has_n:
        props += ["property double nx", "property double ny", "property double nz"]
    if has_uv:
        props += ["property double u", "property double v"]
    header = "\n".join([
        "ply",
        "format binary_little_endian 1.0",
        f"element vertex {mesh.vertex_count}",
        *props,
        f"element face {mesh.face_count}",
        "property list uchar uint vertex_indices",
        "end_header",
    ]) + "\n"
    cols = [mesh.positions]
    if has_n:
        cols.append(mesh.normals)
    if has_uv:
        cols.append(mesh.uvs)
    vdata = np.ascontiguousarray(np.concatenate(cols, axis=1), dtype="<f8")
    fcount = np.full((mesh.face_count, 1), 3, dtype=np.uint8)
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(vdata.tobytes())
        faces = np.ascontiguousarray(mesh.faces, dtype="<u4")
        for i in range(mesh.face_count):
            fh.write(fcount[i].tobytes())
            fh.write(faces[i].tobytes())


def load_ply(path) -> TriMesh:
    with open(path, "rb") as fh:
        data = fh.read()
    head_end = data.index(b"end_header\n") + len(b"end_header\n")
    header = data[:head_end].decode("ascii").splitlines()
    if header[0] != "ply" or "format binary_little_endian 1.0" not in header[1]:
        raise ValueError("unsupported PLY header")
    nv = nf = 0
    props = []
    cur = None
    for line in header[2:]:
        parts = line.split()
        if parts[0] == "element":
            cur = parts[1]
            if cur == "vertex":
                nv = int(parts[2])
            elif cur == "face":
                nf = int(parts[2])
        elif parts[0] == "property" and cur == "vertex":
            props.append(parts[2])
    off = head_end
    vdata = np.frombuffer(data, dtype="<f8", count=nv * len(props), offset=off)
    vdata = vdata.reshape(nv, len(props))
    off += vdata.nbytes
    faces = np.empty((nf, 3), dtype=np.int64)
    for i in range(nf):
        cnt = data[off]
        off += 1
        if cnt != 3:
            raise ValueError("only triangle faces are supported")
        faces[i] = np.frombuffer(data, dtype="<u4", count=3, offset=off)
        off += 12
    def col(name):
        return vdata[:, props.index(name)] if name in props else None
    pos = np.stack([col("x"), col("y"), col("z")], axis=1)
    nrm = None
    if "nx" in props:
        nrm = np.stack([col("nx"), col("ny"), col("nz")], axis=1)
    uv = None
    if "u" in props:
        uv = np.stack([col("u"), col("v")], axis=1)
    return TriMesh(positions=pos, faces=faces, normals=nrm, uvs=uv)
