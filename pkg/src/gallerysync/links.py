"""Selection of cross-gallery photo pairs (links) from the similarity matrix.

Two strategies are provided: *exact* keeps the floor(alpha*N) most similar
pairs for every gallery pair; *coverage* scans all cross pairs by descending
similarity and freezes gallery pairs that already hold enough links whenever
the fraction of connected gallery pairs crosses a 10%..100% milestone, so
weakly-linked pairs keep collecting links while strong ones stop early.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .collection import Collection, Photo
from .errors import GallerySyncError
from .features import SimilarityMatrix

GalleryPair = tuple[str, str]


@dataclass(frozen=True)
class Link:
    """A visually similar photo pair across two galleries.

    ``implied_offset = timestamp(photo_a) - timestamp(photo_b)`` converts the
    clock of photo_b's gallery into photo_a's: ``t_b + offset ~ t_a``.
    """

    photo_a: str
    photo_b: str
    similarity: float
    implied_offset: int

    def reversed(self) -> "Link":
        return Link(
            photo_a=self.photo_b,
            photo_b=self.photo_a,
            similarity=self.similarity,
            implied_offset=-self.implied_offset,
        )


@dataclass(frozen=True)
class LinkSet:
    """Links grouped by unordered gallery pair, each list sorted by descending similarity."""

    gallery_ids: tuple[str, ...]
    by_pair: Mapping[GalleryPair, tuple[Link, ...]]

    def links(self, gallery_a: str, gallery_b: str) -> tuple[Link, ...]:
        return self.by_pair.get(_pair_key(gallery_a, gallery_b), ())

    @property
    def total_links(self) -> int:
        return sum(len(v) for v in self.by_pair.values())

    def dump_jsonl(self) -> str:
        lines = []
        for pair in sorted(self.by_pair):
            for ln in self.by_pair[pair]:
                lines.append(
                    json.dumps(
                        {"a": ln.photo_a, "b": ln.photo_b, "sim": ln.similarity,
                         "offset": ln.implied_offset},
                        sort_keys=True,
                    )
                )
        return "\n".join(lines) + ("\n" if lines else "")


def _pair_key(gallery_a: str, gallery_b: str) -> GalleryPair:
    return (gallery_a, gallery_b) if gallery_a <= gallery_b else (gallery_b, gallery_a)


def _cross_candidates(
    w: SimilarityMatrix, collection: Collection
) -> list[tuple[GalleryPair, Link]]:
    """All cross-gallery photo pairs as links, photo_a from the lexicographically first gallery."""
    photos: dict[str, Photo] = {p.id: p for p in collection.iter_photos()}
    by_gallery: dict[str, list[str]] = {g.id: [p.id for p in g.photos] for g in collection.galleries}
    gallery_ids = sorted(by_gallery)
    idx = {pid: i for i, pid in enumerate(w.ids)}
    out: list[tuple[GalleryPair, Link]] = []
    for i, ga in enumerate(gallery_ids):
        for gb in gallery_ids[i + 1 :]:
            for pa in by_gallery[ga]:
                ia = idx[pa]
                for pb in by_gallery[gb]:
                    sim = float(w.values[ia, idx[pb]])
                    out.append(
                        (
                            (ga, gb),
                            Link(
                                photo_a=pa,
                                photo_b=pb,
                                similarity=sim,
                                implied_offset=photos[pa].timestamp - photos[pb].timestamp,
                            ),
                        )
                    )
    return out


def _link_sort_key(item: tuple[GalleryPair, Link]):
    _, ln = item
    return (-ln.similarity, ln.photo_a, ln.photo_b)


def _quota(alpha: float, n: int) -> int:
    if not (0.0 < alpha <= 1.0):
        raise GallerySyncError(f"alpha must be in (0, 1], got {alpha}")
    return math.floor(alpha * n)


def discover_links_exact(
    w: SimilarityMatrix, collection: Collection, alpha: float
) -> LinkSet:
    """Keep the floor(alpha*N) most similar cross pairs for every gallery pair."""
    quota = _quota(alpha, collection.photo_count)
    per_pair: dict[GalleryPair, list[Link]] = {}
    for pair, ln in _cross_candidates(w, collection):
        per_pair.setdefault(pair, []).append(ln)
    kept: dict[GalleryPair, tuple[Link, ...]] = {}
    for pair, lns in per_pair.items():
        lns.sort(key=lambda l: (-l.similarity, l.photo_a, l.photo_b))
        if quota > 0:
            kept[pair] = tuple(lns[:quota])
    return LinkSet(gallery_ids=tuple(sorted(collection.gallery_ids)), by_pair=kept)


def discover_links_coverage(
    w: SimilarityMatrix, collection: Collection, alpha: float
) -> LinkSet:
    """Milestone-freeze scan over all cross pairs in descending similarity.

    Coverage is the fraction of gallery pairs holding at least one link. Each
    time coverage first reaches a 10% milestone, every pair that already has
    floor(alpha*N) links is frozen; once the 100% milestone has fired the
    freeze check applies after every append. Frozen pairs gain no more links.
    """
    quota = _quota(alpha, collection.photo_count)
    gallery_ids = tuple(sorted(collection.gallery_ids))
    k = len(gallery_ids)
    all_pairs = [
        (gallery_ids[i], gallery_ids[j]) for i in range(k) for j in range(i + 1, k)
    ]
    total_pairs = len(all_pairs)

    candidates = sorted(_cross_candidates(w, collection), key=_link_sort_key)
    collected: dict[GalleryPair, list[Link]] = {p: [] for p in all_pairs}
    frozen: set[GalleryPair] = set()
    connected = 0
    next_milestone = 1  # milestones are next_milestone/10 of total_pairs

    def freeze_ready():
        nonlocal frozen
        for p in all_pairs:
            if p not in frozen and len(collected[p]) >= quota:
                frozen.add(p)

    for pair, ln in candidates:
        if pair in frozen:
            continue
        bucket = collected[pair]
        if not bucket:
            connected += 1
        bucket.append(ln)
        # exact integer test for coverage >= next_milestone/10
        while next_milestone <= 10 and 10 * connected >= next_milestone * total_pairs:
            freeze_ready()
            next_milestone += 1
        if next_milestone > 10:
            # past the final milestone the quota check stays active
            if len(bucket) >= quota:
                frozen.add(pair)
        if len(frozen) == total_pairs:
            break

    kept = {p: tuple(lns) for p, lns in collected.items() if lns}
    return LinkSet(gallery_ids=gallery_ids, by_pair=kept)


def candidate_offsets(links: Iterable[Link]) -> list[int]:
    """Deduplicated implied offsets, ordered by the best similarity vouching for each."""
    best: dict[int, float] = {}
    for ln in links:
        prev = best.get(ln.implied_offset)
        if prev is None or ln.similarity > prev:
            best[ln.implied_offset] = ln.similarity
    return sorted(best, key=lambda off: (-best[off], off))
