"""Visual features: region responses, vocabulary, VLAD encoding, similarity.

Photos are described by per-region response vectors pulled from a
convolutional network (or synthesized). The pipeline L2-normalizes the
region vectors, clusters them into a visual vocabulary, aggregates each
photo's residuals into an intra-normalized VLAD descriptor, and turns
pairwise descriptor distances into similarities ``exp(-distance)``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial.distance import cdist, pdist, squareform

from .errors import FeatureError
from .ioutil import write_atomic_bytes

GSFT_MAGIC = b"GSFT"
GSFT_VERSION = 1

DEFAULT_VOCAB_SIZE = 256
KMEANS_MAX_ITER = 100

# (region_count, dim) of each supported extraction layer of the 224x224 network.
LAYER_GEOMETRY = {
    "conv2/norm2": (28 * 28, 192),
    "inception3a/output": (28 * 28, 256),
    "inception4a/output": (14 * 14, 512),
    "inception5a/output": (7 * 7, 832),
    "loss3/classifier": (1, 1000),
}

_LAYER_ALIASES = {
    "conv2": "conv2/norm2",
    "inception3a": "inception3a/output",
    "inception4a": "inception4a/output",
    "inception5a": "inception5a/output",
    "loss3": "loss3/classifier",
}


def canonical_layer(name: str) -> str:
    """Resolve a layer name or its short alias to its canonical form.

    Unknown names pass through unchanged (custom layers carry free geometry).
    """
    if name in LAYER_GEOMETRY:
        return name
    return _LAYER_ALIASES.get(name, name)


def sanitize_layer(name: str) -> str:
    """Directory-safe spelling of a layer name."""
    return canonical_layer(name).replace("/", "_")


@dataclass(frozen=True)
class RegionFeatureSet:
    """Per-region response vectors of one photo for one layer."""

    photo_id: str
    layer: str
    vectors: np.ndarray  # (region_count, dim)

    def __post_init__(self):
        v = np.asarray(self.vectors)
        if v.ndim != 2:
            raise FeatureError(f"photo {self.photo_id!r}: region vectors must be 2-D")
        object.__setattr__(self, "vectors", v)
        expected = LAYER_GEOMETRY.get(canonical_layer(self.layer))
        if expected is not None and v.shape != expected:
            raise FeatureError(
                f"photo {self.photo_id!r}: layer {self.layer!r} expects shape {expected}, "
                f"got {v.shape}"
            )

    @property
    def region_count(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


@dataclass(frozen=True)
class Vocabulary:
    """K cluster centers over region vectors."""

    centers: np.ndarray  # (K, dim)

    def __post_init__(self):
        c = np.asarray(self.centers, dtype=np.float64)
        if c.ndim != 2 or c.shape[0] < 1:
            raise FeatureError("vocabulary needs at least one center")
        if len({row.tobytes() for row in c}) != c.shape[0]:
            raise FeatureError("vocabulary centers must be pairwise distinct")
        object.__setattr__(self, "centers", c)

    @property
    def k(self) -> int:
        return self.centers.shape[0]

    @property
    def dim(self) -> int:
        return self.centers.shape[1]


@dataclass(frozen=True)
class VladDescriptor:
    """Concatenated per-word residual sums, one unit-norm block per word."""

    photo_id: str
    values: np.ndarray  # length K*dim


@dataclass(frozen=True)
class SimilarityMatrix:
    """Symmetric photo-by-photo similarity, entries in (0, 1], unit diagonal."""

    ids: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        n = len(self.ids)
        if v.shape != (n, n):
            raise FeatureError(f"similarity matrix shape {v.shape} does not match {n} ids")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return len(self.ids)

    def index(self, photo_id: str) -> int:
        try:
            return self.ids.index(photo_id)
        except ValueError as exc:
            raise KeyError(photo_id) from exc

    def sim(self, id_a: str, id_b: str) -> float:
        return float(self.values[self.index(id_a), self.index(id_b)])


def normalize_regions(raw: RegionFeatureSet) -> RegionFeatureSet:
    """L2-normalize each region row; all-zero rows stay zero."""
    v = np.asarray(raw.vectors, dtype=np.float64)
    norms = np.linalg.norm(v, axis=1, keepdims=True)
    safe = np.where(norms == 0.0, 1.0, norms)
    return RegionFeatureSet(photo_id=raw.photo_id, layer=raw.layer, vectors=v / safe)


def _kmeans_pp_seed(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]), dtype=np.float64)
    centers[0] = x[rng.integers(n)]
    d2 = cdist(x, centers[:1], "sqeuclidean")[:, 0]
    for j in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            raise FeatureError(f"need at least {k} distinct rows to seed {k} clusters")
        centers[j] = x[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, cdist(x, centers[j : j + 1], "sqeuclidean")[:, 0])
    return centers


def build_vocabulary(
    all_regions: Iterable[RegionFeatureSet],
    k: int = DEFAULT_VOCAB_SIZE,
    seed: int = 0,
    max_iter: int = KMEANS_MAX_ITER,
) -> Vocabulary:
    """k-means over the pooled region vectors of all photos.

    Seeded with k-means++ under a fixed RNG seed; iterates until the
    assignments stop changing or *max_iter* Lloyd steps. Empty clusters are
    re-seeded to the point farthest from its current center.
    """
    rows = [np.asarray(r.vectors, dtype=np.float64) for r in all_regions]
    if not rows:
        raise FeatureError("no region features supplied")
    dims = {r.shape[1] for r in rows}
    if len(dims) != 1:
        raise FeatureError(f"mixed region dims {sorted(dims)}; one vocabulary per layer")
    x = np.vstack(rows)
    n = x.shape[0]
    if n < k:
        raise FeatureError(f"{n} region rows is fewer than k={k}")

    rng = np.random.default_rng(seed)
    centers = _kmeans_pp_seed(x, k, rng)

    prev_labels = None
    prev_distortion = np.inf
    for _ in range(max_iter):
        d2 = cdist(x, centers, "sqeuclidean")
        labels = d2.argmin(axis=1)  # ties resolve to the lowest center index
        distortion = float(d2[np.arange(n), labels].sum())
        # Lloyd steps (and farthest-point re-seeds) never increase distortion.
        assert distortion <= prev_distortion * (1.0 + 1e-9) + 1e-12, (
            f"k-means distortion increased: {prev_distortion} -> {distortion}"
        )
        prev_distortion = distortion
        if prev_labels is not None and np.array_equal(labels, prev_labels):
            break
        prev_labels = labels

        empties = [j for j in range(k) if not np.any(labels == j)]
        if empties:
            point_cost = d2[np.arange(n), labels]
            far_order = np.argsort(-point_cost, kind="stable")
            for slot, j in enumerate(empties):
                centers[j] = x[far_order[slot]]
            continue  # re-assign against the repaired centers before averaging
        for j in range(k):
            centers[j] = x[labels == j].mean(axis=0)

    return Vocabulary(centers=centers)


def encode_vlad(regions: RegionFeatureSet, vocab: Vocabulary) -> VladDescriptor:
    """Aggregate region residuals against their nearest vocabulary word.

    Each region row is assigned to the nearest center (ties to the lowest
    index); the residual row-center is summed into that word's block, and
    every non-zero block is L2-normalized (intra-normalization). No global
    normalization is applied afterwards.
    """
    x = np.asarray(regions.vectors, dtype=np.float64)
    if x.shape[1] != vocab.dim:
        raise FeatureError(
            f"photo {regions.photo_id!r}: region dim {x.shape[1]} != vocabulary dim {vocab.dim}"
        )
    labels = cdist(x, vocab.centers, "sqeuclidean").argmin(axis=1)
    blocks = np.zeros((vocab.k, vocab.dim), dtype=np.float64)
    for j in range(vocab.k):
        mask = labels == j
        if mask.any():
            blocks[j] = (x[mask] - vocab.centers[j]).sum(axis=0)
    norms = np.linalg.norm(blocks, axis=1, keepdims=True)
    blocks = blocks / np.where(norms == 0.0, 1.0, norms)
    return VladDescriptor(photo_id=regions.photo_id, values=blocks.reshape(-1))


def similarity_matrix(descriptors: Sequence[VladDescriptor]) -> SimilarityMatrix:
    """Pairwise similarity W(i,j) = exp(-||V_i - V_j||_2).

    Exactly symmetric with a unit diagonal; entries stay in (0, 1].
    """
    if not descriptors:
        raise FeatureError("no descriptors supplied")
    lengths = {np.asarray(d.values).shape for d in descriptors}
    if len(lengths) != 1:
        raise FeatureError(f"descriptor length mismatch: {sorted(lengths)}")
    x = np.vstack([np.asarray(d.values, dtype=np.float64) for d in descriptors])
    w = np.exp(-squareform(pdist(x)))
    w = np.maximum(w, np.finfo(np.float64).tiny)  # keep entries strictly positive
    return SimilarityMatrix(ids=tuple(d.photo_id for d in descriptors), values=w)


def fuse_similarities(matrices: Sequence[SimilarityMatrix]) -> SimilarityMatrix:
    """Element-wise mean of similarity matrices over the same photo ordering."""
    if not matrices:
        raise FeatureError("no similarity matrices to fuse")
    ids = matrices[0].ids
    for m in matrices[1:]:
        if m.ids != ids:
            raise FeatureError("similarity matrices cover different photos or orderings")
    values = np.mean(np.stack([m.values for m in matrices]), axis=0)
    return SimilarityMatrix(ids=ids, values=values)


# --- region-feature file format -------------------------------------------
#
# One binary file per photo: magic "GSFT", u16 version, u16 layer-name length
# followed by the UTF-8 name, u32 region_count, u32 dim, then
# region_count * dim little-endian float32 values, row-major.


def write_region_features(path: Path | str, features: RegionFeatureSet) -> None:
    name = features.layer.encode("utf-8")
    if len(name) > 0xFFFF:
        raise FeatureError("layer name too long")
    header = GSFT_MAGIC + struct.pack(
        "<HH", GSFT_VERSION, len(name)
    ) + name + struct.pack("<II", features.region_count, features.dim)
    body = np.ascontiguousarray(features.vectors, dtype="<f4").tobytes()
    write_atomic_bytes(path, header + body)


def read_region_features(path: Path | str) -> RegionFeatureSet:
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise FeatureError(f"cannot read feature file {path}: {exc}") from exc
    if len(blob) < 8 or blob[:4] != GSFT_MAGIC:
        raise FeatureError(f"{path}: not a region-feature file (bad magic)")
    version, name_len = struct.unpack_from("<HH", blob, 4)
    if version != GSFT_VERSION:
        raise FeatureError(f"{path}: unsupported format version {version}")
    offset = 8
    if len(blob) < offset + name_len + 8:
        raise FeatureError(f"{path}: truncated header")
    layer = blob[offset : offset + name_len].decode("utf-8")
    offset += name_len
    region_count, dim = struct.unpack_from("<II", blob, offset)
    offset += 8
    expected = offset + region_count * dim * 4
    if len(blob) != expected:
        raise FeatureError(
            f"{path}: body size {len(blob) - offset} does not match "
            f"{region_count}x{dim} float32 values"
        )
    vectors = np.frombuffer(blob, dtype="<f4", offset=offset).reshape(region_count, dim)
    return RegionFeatureSet(photo_id=path.stem, layer=layer, vectors=vectors)


def feature_file(features_dir: Path | str, layer: str, photo_id: str) -> Path:
    """Locate the feature file for a photo.

    Multi-layer extractions live in per-layer subdirectories named after the
    sanitized layer; single-layer directories may keep files at the top level.
    """
    root = Path(features_dir)
    nested = root / sanitize_layer(layer) / f"{photo_id}.gsft"
    if nested.exists():
        return nested
    return root / f"{photo_id}.gsft"
