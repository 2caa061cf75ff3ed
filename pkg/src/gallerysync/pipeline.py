"""End-to-end synchronization: features -> similarity -> links -> tree -> offsets.

Per spanning-tree edge the parent gallery acts as the local reference; the
estimated edge offset converts the child's clock into the parent's. Walking
the tree breadth-first from the reference gallery accumulates each gallery's
global offset as parent offset + edge offset. Galleries outside the
reference's connected component are reported as unreachable.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .collection import Collection, Gallery, apply_offset
from .errors import PipelineError
from .features import (
    RegionFeatureSet,
    SimilarityMatrix,
    VladDescriptor,
    Vocabulary,
    build_vocabulary,
    encode_vlad,
    feature_file,
    fuse_similarities,
    normalize_regions,
    read_region_features,
    similarity_matrix,
)
from .graph import build_graph, spanning_tree, unreachable_galleries
from .links import Link, LinkSet, discover_links_coverage, discover_links_exact
from .mrf import EdgeSyncResult, PotentialParams, estimate_offset

STATUS_SYNCHRONIZED = "synchronized"
STATUS_UNREACHABLE = "unreachable"


@dataclass(frozen=True)
class SyncConfig:
    approach: str = "exact"  # exact | coverage
    alpha: float = 0.1
    layers: tuple[str, ...] = ("inception3a",)
    encoding: str = "vlad"  # vlad | raw
    vocab_size: int = 256
    seed: int = 0
    params: PotentialParams = field(default_factory=PotentialParams)
    adjusted_timestamps: bool = True
    threads: int = 1

    def __post_init__(self):
        if self.approach not in ("exact", "coverage"):
            raise PipelineError(f"unknown link approach {self.approach!r}")
        if self.encoding not in ("vlad", "raw"):
            raise PipelineError(f"unknown encoding {self.encoding!r}")
        if not self.layers:
            raise PipelineError("at least one layer is required")


@dataclass(frozen=True)
class EdgeEstimate:
    parent: str
    child: str
    result: EdgeSyncResult


@dataclass(frozen=True)
class SyncResult:
    reference: str
    offsets: Mapping[str, int | None]
    status: Mapping[str, str]
    edges: tuple[EdgeEstimate, ...] = ()

    def to_json(self) -> str:
        payload = {
            "reference": self.reference,
            "offsets": dict(self.offsets),
            "status": dict(self.status),
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"

    @staticmethod
    def from_json(text: str) -> "SyncResult":
        raw = json.loads(text)
        return SyncResult(
            reference=raw["reference"], offsets=raw["offsets"], status=raw["status"]
        )


def load_layer_features(
    collection: Collection, features_dir: Path | str, layer: str
) -> dict[str, RegionFeatureSet]:
    """Read the per-photo region features of one layer for the whole collection."""
    out = {}
    for photo in collection.iter_photos():
        path = feature_file(features_dir, layer, photo.id)
        if not path.exists():
            raise PipelineError(f"missing feature file for photo {photo.id!r}: {path}")
        out[photo.id] = read_region_features(path)
    return out


def layer_descriptors(
    collection: Collection,
    feature_sets: Mapping[str, RegionFeatureSet],
    config: SyncConfig,
    vocabulary: Vocabulary | None = None,
) -> list[VladDescriptor]:
    """Encode one layer's region features into per-photo descriptors, in collection order."""
    order = [p.id for p in collection.iter_photos()]
    if config.encoding == "raw":
        return [
            VladDescriptor(
                photo_id=pid,
                values=np.asarray(feature_sets[pid].vectors, dtype=np.float64).reshape(-1),
            )
            for pid in order
        ]
    normalized = {pid: normalize_regions(feature_sets[pid]) for pid in order}
    vocab = vocabulary or build_vocabulary(
        list(normalized.values()), k=config.vocab_size, seed=config.seed
    )
    return [encode_vlad(normalized[pid], vocab) for pid in order]


def compute_similarity(
    collection: Collection,
    features_dir: Path | str,
    config: SyncConfig,
    vocabulary: Vocabulary | None = None,
) -> SimilarityMatrix:
    """Similarity matrix for the configured layers, late-fused by averaging."""
    matrices = []
    for layer in config.layers:
        feature_sets = load_layer_features(collection, features_dir, layer)
        descriptors = layer_descriptors(collection, feature_sets, config, vocabulary)
        matrices.append(similarity_matrix(descriptors))
    return matrices[0] if len(matrices) == 1 else fuse_similarities(matrices)


def discover_links(collection: Collection, w: SimilarityMatrix, config: SyncConfig) -> LinkSet:
    if config.approach == "exact":
        return discover_links_exact(w, collection, config.alpha)
    return discover_links_coverage(w, collection, config.alpha)


def edge_inputs(
    collection: Collection, links: LinkSet, parent: str, child: str
) -> tuple[tuple, tuple, tuple[Link, ...]]:
    """Photos of the parent (local reference) and child galleries plus their links."""
    pair_links = links.links(parent, child)
    if not pair_links:
        raise PipelineError(f"no links between galleries {parent!r} and {child!r}")
    return collection.gallery(parent).photos, collection.gallery(child).photos, pair_links


def synchronize_matrix(
    collection: Collection, w: SimilarityMatrix, config: SyncConfig
) -> SyncResult:
    """Run link discovery, tree construction, and per-edge offset estimation."""
    links = discover_links(collection, w, config)
    graph = build_graph(links)
    root = collection.reference_gallery_id
    tree = spanning_tree(graph, root)

    def estimate(edge: tuple[str, str, tuple[str, str]]) -> EdgeEstimate:
        parent, child, _ = edge
        ref_photos, sync_photos, pair_links = edge_inputs(collection, links, parent, child)
        result = estimate_offset(
            ref_photos, sync_photos, pair_links, config.params, config.adjusted_timestamps
        )
        return EdgeEstimate(parent=parent, child=child, result=result)

    if config.threads > 1 and len(tree.traversal) > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            estimates = list(pool.map(estimate, tree.traversal))
    else:
        estimates = [estimate(e) for e in tree.traversal]

    offsets: dict[str, int | None] = {root: 0}
    status: dict[str, str] = {root: STATUS_SYNCHRONIZED}
    # traversal lists parents before children, so parent offsets are always ready
    for est in estimates:
        offsets[est.child] = offsets[est.parent] + est.result.best_offset
        status[est.child] = STATUS_SYNCHRONIZED
    for gid in unreachable_galleries(graph, root):
        offsets[gid] = None
        status[gid] = STATUS_UNREACHABLE
    return SyncResult(
        reference=root,
        offsets={g: offsets[g] for g in sorted(offsets)},
        status={g: status[g] for g in sorted(status)},
        edges=tuple(estimates),
    )


def synchronize(
    collection: Collection, features_dir: Path | str, config: SyncConfig | None = None
) -> SyncResult:
    """Full pipeline from a collection and its feature directory."""
    config = config or SyncConfig()
    w = compute_similarity(collection, features_dir, config)
    return synchronize_matrix(collection, w, config)


def corrected_timestamps(collection: Collection, result: SyncResult) -> Collection:
    """Shift every synchronized gallery into the reference clock.

    Unreachable galleries keep their original timestamps; their status stays
    flagged in *result*.
    """
    galleries: list[Gallery] = []
    for g in collection.galleries:
        if g.id not in result.offsets:
            raise PipelineError(f"sync result does not cover gallery {g.id!r}")
        offset = result.offsets[g.id]
        galleries.append(g if offset is None else apply_offset(g, offset))
    return Collection(
        galleries=tuple(galleries), reference_gallery_id=collection.reference_gallery_id
    )
