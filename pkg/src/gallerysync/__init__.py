"""Multi-device photo gallery synchronization.

Estimates the unknown clock offsets between photo galleries captured at the
same event: visually similar photo pairs across galleries become links, the
galleries form a weighted graph, and each spanning-tree edge is synchronized
by MAP inference over the link-implied candidate offsets.
"""

from .collection import (
    Collection,
    Gallery,
    GroundTruth,
    Photo,
    apply_offset,
    load_collection,
    load_ground_truth,
)
from .errors import (
    EstimationError,
    EvaluationError,
    FeatureError,
    GallerySyncError,
    ManifestError,
    PipelineError,
)
from .evaluation import EvalReport, evaluate, report_json, report_text
from .features import (
    RegionFeatureSet,
    SimilarityMatrix,
    VladDescriptor,
    Vocabulary,
    build_vocabulary,
    encode_vlad,
    fuse_similarities,
    normalize_regions,
    read_region_features,
    similarity_matrix,
    write_region_features,
)
from .graph import GalleryGraph, SpanningTree, build_graph, export_dot, spanning_tree, unreachable_galleries
from .links import Link, LinkSet, candidate_offsets, discover_links_coverage, discover_links_exact
from .mrf import (
    CorrespondenceSequence,
    EdgeSyncResult,
    PotentialParams,
    correspondence_sequence,
    estimate_offset,
    geo_to_sphere,
    learn_parameters,
    orthodromic_distance,
    pairwise_potential,
    pick_best_offset,
    score_sequence,
    temporal_distance,
    unary_potential,
)
from .pipeline import SyncConfig, SyncResult, corrected_timestamps, synchronize
from .synthgen import ScenarioConfig, generate

__version__ = "0.1.0"
