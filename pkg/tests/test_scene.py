"""Scene construction and file round-trips."""

import numpy as np
import pytest

from sdfshells.fields import delta_o_init
from sdfshells.scene import (
    CANONICAL_SCENES,
    canonical_scene,
    field_from_dict,
    field_to_dict,
    load_scene,
    save_scene,
    scene_from_dict,
    scene_to_dict,
)

from conftest import random_points


@pytest.mark.parametrize("name", CANONICAL_SCENES)
def test_canonical_scenes_build(name):
    s = canonical_scene(name, k=3)
    assert s.k == 3
    assert s.appearance.k == 3
    assert len(s.betas) == 3


def test_fuzzy_sphere_offsets_match_schedule_width():
    s = canonical_scene("fuzzy-sphere", k=3)
    gap = delta_o_init(s.betas[1])
    d = s.ksdf.layer_distances(np.array([2.0, 0.0, 0.0]))
    assert np.allclose(np.diff(d), gap)
    assert len(s.ksdf.inner_offsets) == 2
    assert len(s.ksdf.outer_offsets) == 0


def test_single_layer_scene():
    s = canonical_scene("fuzzy-sphere", k=1)
    assert s.k == 1


def test_unknown_scene_rejected():
    with pytest.raises(ValueError, match="unknown scene"):
        canonical_scene("mystery-orb")


def test_k_range_enforced():
    with pytest.raises(ValueError, match=r"k must be in \[1,9\]"):
        canonical_scene("fuzzy-sphere", k=12)


@pytest.mark.parametrize("name", CANONICAL_SCENES)
def test_scene_dict_roundtrip(name, rng):
    s = canonical_scene(name, k=3)
    s2 = scene_from_dict(scene_to_dict(s))
    p = random_points(rng, 300)
    assert np.allclose(s.ksdf.layer_distances(p), s2.ksdf.layer_distances(p))
    assert s2.betas == s.betas
    v = np.array([0.0, 0.0, 1.0])
    n = np.array([0.0, 1.0, 0.0])
    for j in range(s.k):
        assert np.allclose(s.appearance.color(j, p, v, n), s2.appearance.color(j, p, v, n))
        assert np.allclose(s.appearance.alpha(j, p, v, n), s2.appearance.alpha(j, p, v, n))


def test_scene_file_roundtrip(tmp_path, rng):
    s = canonical_scene("csg-blob", k=4)
    path = tmp_path / "scene.yaml"
    save_scene(path, s)
    s2 = load_scene(path)
    p = random_points(rng, 200)
    assert np.allclose(s.ksdf.layer_distances(p), s2.ksdf.layer_distances(p))
    assert s2.name == "csg-blob"


def test_field_dict_roundtrip_csg(rng):
    s = canonical_scene("csg-blob", k=2)
    f = s.ksdf.main
    f2 = field_from_dict(field_to_dict(f))
    p = random_points(rng, 400)
    assert np.allclose(f.eval(p), f2.eval(p))


def test_bad_field_type_rejected():
    with pytest.raises(ValueError, match="unknown field type"):
        field_from_dict({"type": "dodecahedron"})
