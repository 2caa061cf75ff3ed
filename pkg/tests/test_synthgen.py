import json
from pathlib import Path

import numpy as np
import pytest

from gallerysync.collection import load_collection, load_ground_truth
from gallerysync.errors import GallerySyncError
from gallerysync.features import read_region_features, similarity_matrix, VladDescriptor
from gallerysync.synthgen import ScenarioConfig, generate


def tree_bytes(root: Path) -> dict:
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_same_seed_byte_identical(tmp_path):
    cfg = ScenarioConfig(galleries=3, photos_per_gallery=6, noise_sigma=0.02, jitter_s=10, seed=5)
    generate(cfg, tmp_path / "a")
    generate(cfg, tmp_path / "b")
    assert tree_bytes(tmp_path / "a") == tree_bytes(tmp_path / "b")


def test_different_seed_differs(tmp_path):
    cfg1 = ScenarioConfig(galleries=3, photos_per_gallery=6, seed=1)
    cfg2 = ScenarioConfig(galleries=3, photos_per_gallery=6, seed=2)
    generate(cfg1, tmp_path / "a")
    generate(cfg2, tmp_path / "b")
    assert tree_bytes(tmp_path / "a") != tree_bytes(tmp_path / "b")


def test_noiseless_planted_pairs_have_identical_descriptors(tmp_path):
    cfg = ScenarioConfig(galleries=2, photos_per_gallery=4, planted_rate=0.5,
                         noise_sigma=0.0, jitter_s=0, seed=3)
    sc = generate(cfg, tmp_path)
    # moment j is photo number j+1 in every gallery
    f1 = read_region_features(sc.features_dir / "g01_p0001.gsft")
    f2 = read_region_features(sc.features_dir / "g02_p0001.gsft")
    np.testing.assert_array_equal(f1.vectors, f2.vectors)
    w = similarity_matrix([
        VladDescriptor(photo_id="a", values=f1.vectors.reshape(-1).astype(float)),
        VladDescriptor(photo_id="b", values=f2.vectors.reshape(-1).astype(float)),
    ])
    assert w.sim("a", "b") == 1.0


def test_device_timestamps_encode_true_offsets(tmp_path):
    cfg = ScenarioConfig(galleries=3, photos_per_gallery=5, planted_rate=0.4,
                         noise_sigma=0.0, jitter_s=0, offset_range_s=5000, seed=9)
    sc = generate(cfg, tmp_path)
    coll = load_collection(sc.manifest_path)
    by_id = {p.id: p for p in coll.iter_photos()}
    m = cfg.planted_moments
    for j in range(1, m + 1):
        a = by_id[f"g01_p{j:04d}"]
        b = by_id[f"g02_p{j:04d}"]
        # device clocks differ by exactly offset_a - offset_b when jitter is 0
        assert a.timestamp - b.timestamp == sc.offsets["g02"] - sc.offsets["g01"]


def test_jitter_bounds_planted_time_differences(tmp_path):
    cfg = ScenarioConfig(galleries=2, photos_per_gallery=10, planted_rate=0.5,
                         jitter_s=30, seed=4)
    sc = generate(cfg, tmp_path)
    coll = load_collection(sc.manifest_path)
    by_id = {p.id: p for p in coll.iter_photos()}
    for j in range(1, cfg.planted_moments + 1):
        a = by_id[f"g01_p{j:04d}"]
        b = by_id[f"g02_p{j:04d}"]
        true_a = a.timestamp + sc.offsets["g01"]
        true_b = b.timestamp + sc.offsets["g02"]
        assert abs(true_a - true_b) <= cfg.jitter_s


def test_ground_truth_file_contents(tmp_path):
    cfg = ScenarioConfig(galleries=2, photos_per_gallery=3, planted_rate=0.4, seed=8)
    sc = generate(cfg, tmp_path)
    truth = load_ground_truth(sc.ground_truth_path)
    assert set(truth.offsets) == {"g02"}
    assert truth.offsets["g02"] == sc.offsets["g02"]
    assert sc.offsets["g01"] == 0


def test_manifest_loads_and_counts(tmp_path):
    cfg = ScenarioConfig(galleries=4, photos_per_gallery=7, seed=2)
    sc = generate(cfg, tmp_path)
    coll = load_collection(sc.manifest_path)
    assert len(coll.galleries) == 4
    assert coll.photo_count == 28
    assert coll.reference_gallery_id == "g01"


def test_geo_modes(tmp_path):
    for mode in ("venue", "track"):
        cfg = ScenarioConfig(galleries=2, photos_per_gallery=4, geo_mode=mode, seed=1)
        sc = generate(cfg, tmp_path / mode)
        coll = load_collection(sc.manifest_path)
        assert all(p.geo is not None for p in coll.iter_photos())
    cfg = ScenarioConfig(galleries=2, photos_per_gallery=4, geo_mode="none", seed=1)
    sc = generate(cfg, tmp_path / "none")
    coll = load_collection(sc.manifest_path)
    assert all(p.geo is None for p in coll.iter_photos())


def test_impossible_configs_rejected():
    with pytest.raises(GallerySyncError, match="at least 2 galleries"):
        ScenarioConfig(galleries=1, planted_rate=0.5)
    with pytest.raises(GallerySyncError, match="planted_rate"):
        ScenarioConfig(galleries=3, planted_rate=1.5)
    with pytest.raises(GallerySyncError, match="geo mode"):
        ScenarioConfig(galleries=3, geo_mode="moon")


def test_feature_files_cover_every_photo(tmp_path):
    cfg = ScenarioConfig(galleries=3, photos_per_gallery=5, seed=6)
    sc = generate(cfg, tmp_path)
    coll = load_collection(sc.manifest_path)
    for p in coll.iter_photos():
        rfs = read_region_features(sc.features_dir / f"{p.id}.gsft")
        assert rfs.layer == "synth/flat"
        assert rfs.vectors.shape == (1, cfg.descriptor_dim)
