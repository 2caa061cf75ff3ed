"""Synthetic multi-gallery scenarios with known ground truth.

The generator plants shared event moments photographed by every gallery:
photos of the same moment get near-identical descriptors and near-identical
true capture times, so they become links, while all other photos get
descriptors far enough apart that the similarity ranking is unambiguous.
Device timestamps are the true times minus each gallery's true offset,
making the planted offsets recoverable by construction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import GallerySyncError
from .features import RegionFeatureSet, write_region_features
from .ioutil import write_atomic_text

SYNTH_LAYER = "synth/flat"


@dataclass(frozen=True)
class ScenarioConfig:
    galleries: int = 5
    photos_per_gallery: int = 20
    duration_s: int = 28800
    offset_range_s: int = 21600
    planted_rate: float = 0.5
    descriptor_dim: int = 16
    noise_sigma: float = 0.0
    jitter_s: int = 0
    geo_mode: str = "none"  # none | venue | track
    seed: int = 0

    def __post_init__(self):
        if self.galleries < 2:
            raise GallerySyncError("scenario needs at least 2 galleries")
        for name in ("photos_per_gallery", "duration_s", "descriptor_dim"):
            if getattr(self, name) <= 0:
                raise GallerySyncError(f"{name} must be positive")
        if self.offset_range_s < 0 or self.jitter_s < 0 or self.noise_sigma < 0:
            raise GallerySyncError("offset range, jitter, and noise must be non-negative")
        if not (0.0 <= self.planted_rate <= 1.0):
            raise GallerySyncError(f"planted_rate must be in [0, 1], got {self.planted_rate}")
        if self.geo_mode not in ("none", "venue", "track"):
            raise GallerySyncError(f"unknown geo mode {self.geo_mode!r}")

    @property
    def planted_moments(self) -> int:
        return min(self.photos_per_gallery, round(self.planted_rate * self.photos_per_gallery))


@dataclass(frozen=True)
class GeneratedScenario:
    manifest_path: Path
    features_dir: Path
    ground_truth_path: Path
    offsets: dict[str, int]  # true offset per gallery, reference included at 0


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def _geo_for(config: ScenarioConfig, rng: np.random.Generator, true_time: int):
    if config.geo_mode == "none":
        return None
    if config.geo_mode == "venue":
        lat, lon = 49.28, -123.12
    else:  # track: the event moves across town over its duration
        frac = min(max(true_time / config.duration_s, 0.0), 1.0)
        lat = 49.0 + 0.5 * frac
        lon = -123.5 + 1.0 * frac
    scatter = 0.001 if config.geo_mode == "venue" else 0.0005
    lat += float(rng.normal(0.0, scatter))
    lon += float(rng.normal(0.0, scatter))
    return round(lat, 6), round(lon, 6)


def generate(config: ScenarioConfig, out_dir: Path | str) -> GeneratedScenario:
    """Write manifest.json, features/, and ground_truth.json under *out_dir*.

    Deterministic under the config seed: identical configs produce
    byte-identical outputs.
    """
    out = Path(out_dir)
    features_dir = out / "features"
    features_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(config.seed)

    k = config.galleries
    nper = config.photos_per_gallery
    dim = config.descriptor_dim
    width = max(2, len(str(k)))
    gallery_ids = [f"g{i + 1:0{width}d}" for i in range(k)]

    offsets = {gallery_ids[0]: 0}
    for gid in gallery_ids[1:]:
        offsets[gid] = int(rng.integers(-config.offset_range_s, config.offset_range_s + 1))

    m = config.planted_moments
    # irregular spacing: an evenly spaced grid would let a whole-grid-step
    # shift align almost every planted pair, aliasing the true offset
    spacing = config.duration_s / m if m else 0.0
    moment_times = [
        round((j + 0.5) * spacing + rng.uniform(-0.3 * spacing, 0.3 * spacing))
        for j in range(m)
    ]
    # far-apart base descriptors keep accidental similarities below planted ones
    scale = max(1.0, 20.0 * config.noise_sigma * math.sqrt(dim))
    moment_base = [scale * _unit(rng.standard_normal(dim)) for _ in range(m)]

    jitter_half = config.jitter_s // 2
    galleries_json = []
    for gid in gallery_ids:
        photos = []
        vectors: dict[str, np.ndarray] = {}
        serial = 0
        for j, t_moment in enumerate(moment_times):
            serial += 1
            pid = f"{gid}_p{serial:04d}"
            jit = int(rng.integers(-jitter_half, jitter_half + 1)) if jitter_half else 0
            true_time = t_moment + jit
            vec = moment_base[j]
            if config.noise_sigma > 0.0:
                vec = vec + rng.normal(0.0, config.noise_sigma, dim)
            photos.append((pid, true_time))
            vectors[pid] = vec
        for _ in range(nper - m):
            serial += 1
            pid = f"{gid}_p{serial:04d}"
            true_time = int(rng.integers(0, config.duration_s + 1))
            photos.append((pid, true_time))
            vectors[pid] = scale * _unit(rng.standard_normal(dim))

        entries = []
        for pid, true_time in photos:
            device_ts = true_time - offsets[gid]
            entry = {"id": pid, "timestamp": device_ts}
            geo = _geo_for(config, rng, true_time)
            if geo is not None:
                entry["lat"], entry["lon"] = geo
            entries.append(entry)
            write_region_features(
                features_dir / f"{pid}.gsft",
                RegionFeatureSet(
                    photo_id=pid,
                    layer=SYNTH_LAYER,
                    vectors=vectors[pid].reshape(1, dim).astype(np.float32),
                ),
            )
        galleries_json.append({"id": gid, "photos": entries})

    manifest = {"reference": gallery_ids[0], "galleries": galleries_json}
    manifest_path = out / "manifest.json"
    write_atomic_text(manifest_path, json.dumps(manifest, sort_keys=True, indent=2) + "\n")

    truth = {gid: off for gid, off in offsets.items() if gid != gallery_ids[0]}
    gt_path = out / "ground_truth.json"
    write_atomic_text(gt_path, json.dumps(truth, sort_keys=True, indent=2) + "\n")

    return GeneratedScenario(
        manifest_path=manifest_path,
        features_dir=features_dir,
        ground_truth_path=gt_path,
        offsets=offsets,
    )
