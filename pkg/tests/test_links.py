import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gallerysync.collection import Collection, Gallery, Photo
from gallerysync.features import SimilarityMatrix
from gallerysync.links import (
    Link,
    candidate_offsets,
    discover_links_coverage,
    discover_links_exact,
)


def make_collection(spec):
    """spec: {gallery_id: [(photo_id, timestamp), ...]}"""
    galleries = tuple(
        Gallery(
            id=gid,
            photos=tuple(Photo(id=pid, gallery_id=gid, timestamp=ts) for pid, ts in photos),
        )
        for gid, photos in spec.items()
    )
    return Collection(galleries=galleries, reference_gallery_id=galleries[0].id)


def matrix_from(ids, sims):
    """Symmetric similarity matrix from a {(id_a, id_b): sim} mapping; unset cross entries 0.01."""
    n = len(ids)
    idx = {p: i for i, p in enumerate(ids)}
    w = np.full((n, n), 0.01)
    np.fill_diagonal(w, 1.0)
    for (a, b), s in sims.items():
        w[idx[a], idx[b]] = s
        w[idx[b], idx[a]] = s
    return SimilarityMatrix(ids=tuple(ids), values=w)


def collection_ids(coll):
    return [p.id for p in coll.iter_photos()]


def test_exact_two_galleries_single_link():
    coll = make_collection(
        {
            "gA": [(f"a{i}", 100 * i) for i in range(5)],
            "gB": [(f"b{i}", 100 * i) for i in range(5)],
        }
    )
    w = matrix_from(collection_ids(coll), {("a2", "b3"): 0.9})
    links = discover_links_exact(w, coll, alpha=0.1)  # floor(0.1*10) = 1
    got = links.links("gA", "gB")
    assert len(got) == 1
    assert (got[0].photo_a, got[0].photo_b) == ("a2", "b3")
    assert got[0].implied_offset == 200 - 300


def brute_force_top_links(w, coll, alpha):
    """Independent oracle: full sort of all cross pairs, per-pair head."""
    quota = math.floor(alpha * coll.photo_count)
    gallery_of = {p.id: p.gallery_id for p in coll.iter_photos()}
    idx = {p: i for i, p in enumerate(w.ids)}
    per_pair = {}
    for a in w.ids:
        for b in w.ids:
            if gallery_of[a] == gallery_of[b] or gallery_of[a] > gallery_of[b]:
                continue
            pair = (gallery_of[a], gallery_of[b])
            per_pair.setdefault(pair, []).append((a, b, float(w.values[idx[a], idx[b]])))
    out = {}
    for pair, cands in per_pair.items():
        cands.sort(key=lambda t: (-t[2], t[0], t[1]))
        if quota:
            out[pair] = [(a, b) for a, b, _ in cands[:quota]]
    return out


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=10, deadline=None)
def test_exact_equals_full_sort_oracle(seed):
    rng = np.random.default_rng(seed)
    coll = make_collection(
        {
            "g1": [(f"x{i}", int(rng.integers(0, 1000))) for i in range(4)],
            "g2": [(f"y{i}", int(rng.integers(0, 1000))) for i in range(4)],
            "g3": [(f"z{i}", int(rng.integers(0, 1000))) for i in range(4)],
        }
    )
    ids = collection_ids(coll)
    n = len(ids)
    raw = rng.uniform(0.01, 1.0, size=(n, n))
    w = SimilarityMatrix(ids=tuple(ids), values=np.triu(raw, 1) + np.triu(raw, 1).T + np.eye(n))
    alpha = float(rng.uniform(0.05, 0.6))
    links = discover_links_exact(w, coll, alpha)
    oracle = brute_force_top_links(w, coll, alpha)
    got = {
        pair: [(l.photo_a, l.photo_b) for l in lns] for pair, lns in links.by_pair.items()
    }
    assert got == oracle
    quota = math.floor(alpha * coll.photo_count)
    for lns in links.by_pair.values():
        assert len(lns) <= quota


def test_exact_no_same_gallery_links():
    coll = make_collection(
        {"g1": [("a1", 0), ("a2", 10)], "g2": [("b1", 5), ("b2", 15)]}
    )
    w = matrix_from(collection_ids(coll), {("a1", "a2"): 0.99, ("a1", "b1"): 0.5})
    links = discover_links_exact(w, coll, alpha=1.0)
    gallery_of = {p.id: p.gallery_id for p in coll.iter_photos()}
    for lns in links.by_pair.values():
        for l in lns:
            assert gallery_of[l.photo_a] != gallery_of[l.photo_b]


# --- coverage approach --------------------------------------------------------


def test_coverage_single_pair_freezes_at_quota():
    # one gallery pair: coverage hits 100% on the first link, after which the
    # pair keeps collecting until it holds floor(alpha*N) links
    coll = make_collection(
        {
            "gA": [(f"a{i}", 10 * i) for i in range(5)],
            "gB": [(f"b{i}", 10 * i) for i in range(5)],
        }
    )
    sims = {(f"a{i}", f"b{j}"): 0.9 - 0.01 * (5 * i + j) for i in range(5) for j in range(5)}
    w = matrix_from(collection_ids(coll), sims)
    links = discover_links_coverage(w, coll, alpha=0.3)  # quota = floor(3.0) = 3
    got = links.links("gA", "gB")
    assert len(got) == 3
    assert [l.similarity for l in got] == sorted((l.similarity for l in got), reverse=True)


def test_coverage_hand_trace_three_galleries():
    # quota floor(alpha*6)=1: every pair freezes right after its first link,
    # because each new connection crosses at least one milestone
    coll = make_collection(
        {
            "gA": [("a1", 0), ("a2", 10)],
            "gB": [("b1", 5), ("b2", 15)],
            "gC": [("c1", 7), ("c2", 17)],
        }
    )
    sims = {
        ("a1", "b1"): 0.95,
        ("a1", "c1"): 0.90,
        ("b1", "c1"): 0.85,
        ("a2", "b2"): 0.80,
        ("a2", "c2"): 0.75,
        ("b2", "c2"): 0.70,
        ("a1", "b2"): 0.60,
        ("a2", "b1"): 0.55,
        ("a1", "c2"): 0.50,
        ("a2", "c1"): 0.45,
        ("b1", "c2"): 0.40,
        ("b2", "c1"): 0.35,
    }
    w = matrix_from(collection_ids(coll), sims)
    links = discover_links_coverage(w, coll, alpha=0.2)
    expect = {
        ("gA", "gB"): [("a1", "b1")],
        ("gA", "gC"): [("a1", "c1")],
        ("gB", "gC"): [("b1", "c1")],
    }
    got = {pair: [(l.photo_a, l.photo_b) for l in lns] for pair, lns in links.by_pair.items()}
    assert got == expect

    # quota 2 (alpha=0.34): milestones all fire before any pair holds 2 links,
    # so freezing only kicks in per-append after the 100% milestone
    links2 = discover_links_coverage(w, coll, alpha=0.34)
    expect2 = {
        ("gA", "gB"): [("a1", "b1"), ("a2", "b2")],
        ("gA", "gC"): [("a1", "c1"), ("a2", "c2")],
        ("gB", "gC"): [("b1", "c1"), ("b2", "c2")],
    }
    got2 = {pair: [(l.photo_a, l.photo_b) for l in lns] for pair, lns in links2.by_pair.items()}
    assert got2 == expect2


def test_coverage_dominant_pair_freezes_first():
    # one pair has all the strong links; weaker pairs still receive links afterwards
    coll = make_collection(
        {
            "g1": [("a1", 0), ("a2", 1)],
            "g2": [("b1", 0), ("b2", 1)],
            "g3": [("c1", 0), ("c2", 1)],
            "g4": [("d1", 0), ("d2", 1)],
            "g5": [("e1", 0), ("e2", 1)],
        }
    )
    sims = {("a1", "b1"): 0.99, ("a2", "b2"): 0.98, ("a1", "b2"): 0.97}
    w = matrix_from(collection_ids(coll), sims)
    links = discover_links_coverage(w, coll, alpha=0.1)  # quota = floor(1.0) = 1
    assert len(links.links("g1", "g2")) == 1  # froze at the 10% milestone
    # all other pairs got their weaker links afterwards
    assert all(len(lns) >= 1 for lns in links.by_pair.values())
    assert len(links.by_pair) == 10


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=10, deadline=None)
def test_coverage_quota_reached_on_every_connected_pair(seed):
    rng = np.random.default_rng(seed)
    coll = make_collection(
        {
            "g1": [(f"x{i}", int(rng.integers(0, 100))) for i in range(3)],
            "g2": [(f"y{i}", int(rng.integers(0, 100))) for i in range(3)],
            "g3": [(f"z{i}", int(rng.integers(0, 100))) for i in range(3)],
        }
    )
    ids = collection_ids(coll)
    n = len(ids)
    raw = rng.uniform(0.01, 1.0, size=(n, n))
    w = SimilarityMatrix(ids=tuple(ids), values=np.triu(raw, 1) + np.triu(raw, 1).T + np.eye(n))
    links = discover_links_coverage(w, coll, alpha=0.3)  # quota 2, 9 candidates per pair
    # candidates never run out before every pair freezes at >= quota links
    assert set(links.by_pair) == {("g1", "g2"), ("g1", "g3"), ("g2", "g3")}
    for lns in links.by_pair.values():
        assert len(lns) >= 2


# --- candidate offsets ----------------------------------------------------------


def test_candidate_offset_subtraction():
    links = [Link(photo_a="a", photo_b="b", similarity=0.9, implied_offset=100 - 40)]
    assert candidate_offsets(links) == [60]


def test_candidate_offsets_dedup():
    links = [
        Link(photo_a="a1", photo_b="b1", similarity=0.9, implied_offset=60),
        Link(photo_a="a2", photo_b="b2", similarity=0.5, implied_offset=60),
    ]
    assert candidate_offsets(links) == [60]


def test_candidate_offsets_ordered_by_best_similarity():
    links = [
        Link(photo_a="a1", photo_b="b1", similarity=0.3, implied_offset=10),
        Link(photo_a="a2", photo_b="b2", similarity=0.8, implied_offset=-5),
        Link(photo_a="a3", photo_b="b3", similarity=0.5, implied_offset=10),
    ]
    assert candidate_offsets(links) == [-5, 10]


@given(
    st.lists(
        st.tuples(st.floats(0.01, 1.0), st.integers(-100, 100)), min_size=1, max_size=10
    )
)
def test_candidate_offsets_cardinality(entries):
    links = [
        Link(photo_a=f"a{i}", photo_b=f"b{i}", similarity=s, implied_offset=off)
        for i, (s, off) in enumerate(entries)
    ]
    offs = candidate_offsets(links)
    assert len(offs) == len(set(offs))
    assert set(offs) == {l.implied_offset for l in links}


def test_candidate_offsets_empty():
    assert candidate_offsets([]) == []


def test_linkset_jsonl_dump():
    coll = make_collection({"g1": [("a1", 100)], "g2": [("b1", 40)]})
    w = matrix_from(collection_ids(coll), {("a1", "b1"): 0.5})
    links = discover_links_exact(w, coll, alpha=1.0)
    dump = links.dump_jsonl()
    assert '"a": "a1"' in dump and '"offset": 60' in dump
