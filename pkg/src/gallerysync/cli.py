"""Command-line front end: sync, eval, gen, graph, and vocab subcommands."""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from .collection import load_collection, load_ground_truth
from .errors import GallerySyncError
from .evaluation import evaluate, report_json, report_text
from .features import (
    Vocabulary,
    build_vocabulary,
    canonical_layer,
    normalize_regions,
    read_region_features,
)
from .graph import build_graph, export_dot, spanning_tree
from .ioutil import write_atomic_bytes, write_atomic_text
from .mrf import PotentialParams
from .pipeline import (
    SyncConfig,
    SyncResult,
    compute_similarity,
    discover_links,
    load_layer_features,
    synchronize_matrix,
)
from .synthgen import ScenarioConfig, generate


def _default_threads() -> int:
    env = os.environ.get("GALLERY_SYNC_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise GallerySyncError(f"GALLERY_SYNC_THREADS must be an integer, got {env!r}")
    return os.cpu_count() or 1


def _load_params(args) -> PotentialParams:
    if args.params:
        try:
            raw = json.loads(Path(args.params).read_text(encoding="utf-8"))
            return PotentialParams(gamma=float(raw["gamma"]), delta=float(raw["delta"]))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise GallerySyncError(f"bad parameter file {args.params}: {exc}") from exc
    return PotentialParams(gamma=args.gamma, delta=args.delta)


def _sync_config(args) -> SyncConfig:
    return SyncConfig(
        approach=args.approach,
        alpha=args.alpha,
        layers=tuple(args.layer or ["inception3a"]),
        encoding=args.encoding,
        vocab_size=args.vocab_size,
        seed=args.seed,
        params=_load_params(args),
        adjusted_timestamps=not args.literal_dt,
        threads=args.threads if args.threads is not None else _default_threads(),
    )


def _add_sync_like_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--manifest", required=True, help="collection manifest JSON")
    p.add_argument("--features", required=True, help="directory of .gsft feature files")
    p.add_argument("--approach", choices=("exact", "coverage"), default="exact")
    p.add_argument("--alpha", type=float, default=0.1, help="link quota fraction, in (0, 1]")
    p.add_argument(
        "--layer",
        action="append",
        help="feature layer; repeat the flag to fuse several layers (default inception3a)",
    )
    p.add_argument("--encoding", choices=("vlad", "raw"), default="vlad")
    p.add_argument("--vocab-size", type=int, default=256)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--params", help="JSON file with {\"gamma\": ..., \"delta\": ...}")
    p.add_argument("--reference", help="override the manifest's reference gallery")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument(
        "--literal-dt",
        action="store_true",
        help="compare raw device timestamps in the temporal potential instead of offset-adjusted ones",
    )


def _cmd_sync(args) -> int:
    config = _sync_config(args)
    collection = load_collection(args.manifest, reference=args.reference)
    w = compute_similarity(collection, args.features, config)
    if args.links_out:
        links = discover_links(collection, w, config)
        write_atomic_text(args.links_out, links.dump_jsonl())
    result = synchronize_matrix(collection, w, config)
    if args.dot:
        links = discover_links(collection, w, config)
        graph = build_graph(links)
        tree = spanning_tree(graph, collection.reference_gallery_id)
        write_atomic_text(args.dot, export_dot(graph, tree))
    write_atomic_text(args.out, result.to_json())
    print(f"synchronized {sum(1 for s in result.status.values() if s == 'synchronized') - 1} "
          f"of {len(result.status) - 1} galleries -> {args.out}")
    return 0


def _cmd_graph(args) -> int:
    config = _sync_config(args)
    collection = load_collection(args.manifest, reference=args.reference)
    w = compute_similarity(collection, args.features, config)
    links = discover_links(collection, w, config)
    graph = build_graph(links)
    tree = spanning_tree(graph, collection.reference_gallery_id)
    write_atomic_text(args.dot, export_dot(graph, tree))
    print(f"wrote {args.dot}: {len(graph.nodes)} galleries, {len(graph.edges)} edges, "
          f"{len(tree.edges)} tree edges")
    return 0


def _cmd_eval(args) -> int:
    try:
        result = SyncResult.from_json(Path(args.pred).read_text(encoding="utf-8"))
    except (json.JSONDecodeError, KeyError) as exc:
        raise GallerySyncError(f"bad offsets file {args.pred}: {exc}") from exc
    truth = load_ground_truth(args.gt)
    report = evaluate(result, truth, max_error=args.max_error)
    sys.stdout.write(report_text(report))
    sys.stdout.write(report_json(report))
    if args.out:
        write_atomic_text(args.out, report_json(report))
    return 0


def _cmd_gen(args) -> int:
    config = ScenarioConfig(
        galleries=args.galleries,
        photos_per_gallery=args.photos,
        duration_s=args.duration,
        offset_range_s=args.offset_range,
        planted_rate=args.planted_rate,
        descriptor_dim=args.dim,
        noise_sigma=args.noise,
        jitter_s=args.jitter,
        geo_mode=args.geo,
        seed=args.seed,
    )
    scenario = generate(config, args.out)
    print(f"wrote {scenario.manifest_path}, {scenario.features_dir}/, {scenario.ground_truth_path}")
    return 0


def _cmd_vocab(args) -> int:
    layer = canonical_layer(args.layer)
    sets = []
    for path in sorted(Path(args.features).rglob("*.gsft")):
        rfs = read_region_features(path)
        if canonical_layer(rfs.layer) == layer:
            sets.append(normalize_regions(rfs))
    if not sets:
        raise GallerySyncError(f"no feature files for layer {args.layer!r} under {args.features}")
    vocab = build_vocabulary(sets, k=args.k, seed=args.seed)
    buf = io.BytesIO()
    np.savez(buf, centers=vocab.centers, layer=np.array(layer))
    write_atomic_bytes(args.out, buf.getvalue())
    print(f"wrote vocabulary of {vocab.k} words (dim {vocab.dim}) -> {args.out}")
    return 0


def load_vocabulary(path: Path | str) -> Vocabulary:
    with np.load(path) as data:
        return Vocabulary(centers=data["centers"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gallery-sync",
        description="Estimate clock offsets between photo galleries of one event.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sync = sub.add_parser("sync", help="estimate per-gallery offsets")
    _add_sync_like_options(p_sync)
    p_sync.add_argument("--out", required=True, help="output offsets JSON")
    p_sync.add_argument("--dot", help="also write the gallery graph in Graphviz DOT format")
    p_sync.add_argument("--links-out", help="debug dump of discovered links as JSON lines")
    p_sync.set_defaults(func=_cmd_sync)

    p_graph = sub.add_parser("graph", help="export the gallery graph and spanning tree as DOT")
    _add_sync_like_options(p_graph)
    p_graph.add_argument("--dot", required=True, help="output DOT path")
    p_graph.set_defaults(func=_cmd_graph)

    p_eval = sub.add_parser("eval", help="score offsets against ground truth")
    p_eval.add_argument("--pred", required=True, help="offsets JSON produced by sync")
    p_eval.add_argument("--gt", required=True, help="ground-truth offsets JSON")
    p_eval.add_argument("--max-error", type=int, default=1800)
    p_eval.add_argument("--out", help="also write the report JSON here")
    p_eval.set_defaults(func=_cmd_eval)

    p_gen = sub.add_parser("gen", help="generate a synthetic scenario with ground truth")
    p_gen.add_argument("--galleries", type=int, default=5)
    p_gen.add_argument("--photos", type=int, default=20)
    p_gen.add_argument("--duration", type=int, default=28800)
    p_gen.add_argument("--offset-range", type=int, default=21600)
    p_gen.add_argument("--planted-rate", type=float, default=0.5)
    p_gen.add_argument("--dim", type=int, default=16)
    p_gen.add_argument("--noise", type=float, default=0.0)
    p_gen.add_argument("--jitter", type=int, default=0)
    p_gen.add_argument("--geo", choices=("none", "venue", "track"), default="none")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", required=True, help="output directory")
    p_gen.set_defaults(func=_cmd_gen)

    p_vocab = sub.add_parser("vocab", help="build and save a visual vocabulary")
    p_vocab.add_argument("--features", required=True)
    p_vocab.add_argument("--layer", default="inception3a")
    p_vocab.add_argument("--k", type=int, default=256)
    p_vocab.add_argument("--seed", type=int, default=0)
    p_vocab.add_argument("--out", required=True, help="output .npz path")
    p_vocab.set_defaults(func=_cmd_vocab)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GallerySyncError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
