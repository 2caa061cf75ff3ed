#!/usr/bin/env python3
"""Sweep the noisy oracle scenario over many seeds and print aggregate scores."""

import argparse
import statistics
import tempfile
import time
from pathlib import Path

from gallerysync.collection import load_collection, load_ground_truth
from gallerysync.evaluation import evaluate
from gallerysync.pipeline import SyncConfig, synchronize
from gallerysync.synthgen import ScenarioConfig, generate


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--galleries", type=int, default=10)
    parser.add_argument("--photos", type=int, default=30)
    parser.add_argument("--noise", type=float, default=0.05)
    parser.add_argument("--jitter", type=int, default=30)
    parser.add_argument("--seeds", type=int, default=20)
    args = parser.parse_args()

    workdir = Path(tempfile.mkdtemp(prefix="noisy-"))
    config = SyncConfig(layers=("synth/flat",), encoding="raw")
    precisions, mean_errors, times = [], [], []
    for seed in range(args.seeds):
        cfg = ScenarioConfig(
            galleries=args.galleries, photos_per_gallery=args.photos,
            offset_range_s=21600, noise_sigma=args.noise, jitter_s=args.jitter, seed=seed,
        )
        scenario = generate(cfg, workdir / str(seed))
        coll = load_collection(scenario.manifest_path)
        t0 = time.perf_counter()
        result = synchronize(coll, scenario.features_dir, config)
        times.append(time.perf_counter() - t0)
        report = evaluate(result, load_ground_truth(scenario.ground_truth_path))
        errs = [e for e in report.errors.values() if e is not None]
        precisions.append(report.precision)
        mean_errors.append(statistics.mean(errs))
        print(f"seed {seed:3d}: P={report.precision:.3f}  mean dE={mean_errors[-1]:7.1f}s  "
              f"t={times[-1]:.2f}s")

    print(f"\nmean P: {statistics.mean(precisions):.3f}   "
          f"mean dE: {statistics.mean(mean_errors):.1f}s   "
          f"max time: {max(times):.2f}s")


if __name__ == "__main__":
    main()
