#!/usr/bin/env python3
"""Measure how similarity-matrix time scales with photo count and MRF time with edges."""

import argparse
import time

import numpy as np

from gallerysync.collection import Photo
from gallerysync.features import VladDescriptor, similarity_matrix
from gallerysync.links import Link
from gallerysync.mrf import estimate_offset


def best_time(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dim", type=int, default=256)
    args = parser.parse_args()

    rng = np.random.default_rng(123)
    sizes = [250, 500, 1000]
    times = []
    for n in sizes:
        vals = rng.normal(size=(n, args.dim))
        descs = [VladDescriptor(photo_id=f"p{i}", values=vals[i]) for i in range(n)]
        similarity_matrix(descs)  # warm-up
        times.append(best_time(lambda d=descs: similarity_matrix(d)))
        print(f"similarity n={n:5d}: {times[-1] * 1e3:8.2f} ms")
    slope = float(np.polyfit(np.log(sizes), np.log(times), 1)[0])
    print(f"similarity-time exponent: {slope:.2f} (expect ~2)\n")

    ts = sorted(int(t) for t in rng.integers(0, 10**6, size=40))
    refs = [Photo(id=f"x{i}", gallery_id="A", timestamp=t) for i, t in enumerate(ts)]
    syncs = [Photo(id=f"y{i}", gallery_id="B", timestamp=t - 777) for i, t in enumerate(ts)]
    links = [Link(r.id, s.id, 0.5, r.timestamp - s.timestamp) for r, s in zip(refs, syncs)]
    links += [
        Link(refs[i].id, syncs[j].id, 0.4, refs[i].timestamp - syncs[j].timestamp)
        for i, j in zip(range(0, 39), range(1, 40))
    ]
    edge_counts = [4, 8, 16, 32]
    mrf_times = []
    for count in edge_counts:
        mrf_times.append(
            best_time(lambda c=count: [estimate_offset(refs, syncs, links) for _ in range(c)], 3)
        )
        print(f"MRF edges={count:3d}: {mrf_times[-1] * 1e3:8.2f} ms")
    slope = float(np.polyfit(np.log(edge_counts), np.log(mrf_times), 1)[0])
    print(f"MRF edge-count exponent: {slope:.2f} (expect ~1)")


if __name__ == "__main__":
    main()
