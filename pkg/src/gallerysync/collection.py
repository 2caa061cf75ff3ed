"""Domain model for photos, galleries, and collections, plus manifest ingestion.

A collection groups the photo galleries captured at one event. Each gallery
comes from a single device, so timestamps are internally consistent but the
clocks of different galleries disagree by unknown offsets. Timestamps are
integer seconds (EXIF granularity); geo coordinates are optional.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping

from .errors import ManifestError

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1


@dataclass(frozen=True)
class Photo:
    id: str
    gallery_id: str
    timestamp: int  # seconds on the capturing device's clock
    geo: tuple[float, float] | None = None  # (latitude, longitude) degrees

    def __post_init__(self):
        if self.geo is not None:
            lat, lon = self.geo
            if not (-90.0 <= lat <= 90.0) or not (-180.0 <= lon <= 180.0):
                raise ManifestError(
                    f"photo {self.id!r}: coordinate out of range (lat={lat}, lon={lon})"
                )


@dataclass(frozen=True)
class Gallery:
    """Photos of one device, sorted by timestamp (ties broken by photo id)."""

    id: str
    photos: tuple[Photo, ...]

    def __post_init__(self):
        for p in self.photos:
            if p.gallery_id != self.id:
                raise ManifestError(
                    f"photo {p.id!r} carries gallery_id {p.gallery_id!r}, expected {self.id!r}"
                )
        ordered = tuple(sorted(self.photos, key=lambda p: (p.timestamp, p.id)))
        object.__setattr__(self, "photos", ordered)

    def __len__(self) -> int:
        return len(self.photos)


@dataclass(frozen=True)
class Collection:
    galleries: tuple[Gallery, ...]
    reference_gallery_id: str

    def __post_init__(self):
        if len(self.galleries) < 2:
            raise ManifestError("a collection needs at least 2 galleries")
        gallery_ids = [g.id for g in self.galleries]
        if len(set(gallery_ids)) != len(gallery_ids):
            raise ManifestError("duplicate gallery id in collection")
        if self.reference_gallery_id not in gallery_ids:
            raise ManifestError(
                f"reference gallery {self.reference_gallery_id!r} not in collection"
            )
        seen: set[str] = set()
        for p in self.iter_photos():
            if p.id in seen:
                raise ManifestError(f"duplicate photo id {p.id!r}")
            seen.add(p.id)

    @property
    def gallery_ids(self) -> tuple[str, ...]:
        return tuple(g.id for g in self.galleries)

    @property
    def photo_count(self) -> int:
        return sum(len(g) for g in self.galleries)

    def gallery(self, gallery_id: str) -> Gallery:
        for g in self.galleries:
            if g.id == gallery_id:
                return g
        raise KeyError(gallery_id)

    def iter_photos(self) -> Iterator[Photo]:
        for g in self.galleries:
            yield from g.photos


@dataclass(frozen=True)
class GroundTruth:
    """True offsets (seconds) of each gallery relative to the reference gallery."""

    offsets: Mapping[str, int] = field(default_factory=dict)


def _require_int_seconds(value, photo_id: str) -> int:
    # EXIF timestamps have 1 s granularity; sub-second values are a format error.
    if isinstance(value, bool) or not isinstance(value, int):
        raise ManifestError(
            f"photo {photo_id!r}: timestamp must be an integer number of seconds, got {value!r}"
        )
    return value


def _parse_photo(obj: dict, gallery_id: str) -> Photo:
    try:
        pid = obj["id"]
        ts = obj["timestamp"]
    except (KeyError, TypeError) as exc:
        raise ManifestError(f"photo entry missing field in gallery {gallery_id!r}: {exc}") from exc
    if not isinstance(pid, str) or not pid:
        raise ManifestError(f"photo id must be a non-empty string, got {pid!r}")
    if any(ch in pid for ch in "/\\\x00") or pid in (".", ".."):
        raise ManifestError(f"photo id {pid!r} contains path separators")
    ts = _require_int_seconds(ts, pid)
    lat, lon = obj.get("lat"), obj.get("lon")
    if (lat is None) != (lon is None):
        raise ManifestError(f"photo {pid!r}: lat and lon must both be present or both absent")
    geo = None
    if lat is not None:
        for name, v in (("lat", lat), ("lon", lon)):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ManifestError(f"photo {pid!r}: {name} must be a number, got {v!r}")
        geo = (float(lat), float(lon))
    return Photo(id=pid, gallery_id=gallery_id, timestamp=ts, geo=geo)


def load_collection(manifest_path: Path | str, reference: str | None = None) -> Collection:
    """Load a collection manifest (JSON).

    *reference* overrides the manifest's reference gallery; when neither is
    given, the first gallery in the manifest is the reference.
    """
    path = Path(manifest_path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ManifestError(f"manifest {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict) or not isinstance(raw.get("galleries"), list):
        raise ManifestError(f"manifest {path}: expected an object with a 'galleries' list")

    galleries = []
    for gobj in raw["galleries"]:
        if not isinstance(gobj, dict) or not isinstance(gobj.get("id"), str):
            raise ManifestError("each gallery entry needs a string 'id'")
        gid = gobj["id"]
        photos = tuple(_parse_photo(p, gid) for p in gobj.get("photos", []))
        galleries.append(Gallery(id=gid, photos=photos))
    if not galleries:
        raise ManifestError("manifest contains no galleries")

    ref = reference or raw.get("reference") or galleries[0].id
    return Collection(galleries=tuple(galleries), reference_gallery_id=ref)


def load_ground_truth(path: Path | str) -> GroundTruth:
    """Load a ground-truth offsets file: a JSON map gallery id -> offset seconds."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ManifestError(f"cannot read ground truth {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ManifestError(f"ground truth {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ManifestError("ground truth must be a JSON object mapping gallery id to seconds")
    offsets: dict[str, int] = {}
    for gid, off in raw.items():
        if isinstance(off, bool) or not isinstance(off, int):
            raise ManifestError(f"ground-truth offset for {gid!r} must be an integer, got {off!r}")
        offsets[str(gid)] = off
    return GroundTruth(offsets=offsets)


def apply_offset(gallery: Gallery, offset: int) -> Gallery:
    """Shift every timestamp in *gallery* by +offset seconds.

    Order-preserving and invertible; raises OverflowError if a shifted
    timestamp leaves the signed 64-bit range the file formats assume.
    """
    shifted = []
    for p in gallery.photos:
        ts = p.timestamp + offset
        if not (INT64_MIN <= ts <= INT64_MAX):
            raise OverflowError(f"timestamp overflow shifting photo {p.id!r} by {offset}")
        shifted.append(Photo(id=p.id, gallery_id=p.gallery_id, timestamp=ts, geo=p.geo))
    return Gallery(id=gallery.id, photos=tuple(shifted))
