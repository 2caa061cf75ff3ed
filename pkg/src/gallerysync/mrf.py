"""Clock-offset estimation for one gallery pair via a chain-structured MRF.

Every link between the two galleries proposes a candidate offset (the
timestamp difference of its photos). Under a candidate offset, each
link-participating photo of the gallery being synchronized is matched to its
nearest reference photo on the shifted time axis; the resulting assignment
sequence is scored by geo unary potentials

    phi(x_k, y_k)     = exp(-gamma * D_G(x_k, y_k) / D_G_max(k))

and temporal pairwise potentials over consecutive assignments

    psi(x_i, x_{i+1}) = exp(-delta * D_T(i) / D_T_max(i))

where D_G is the great-circle distance between acquisition locations (0 when
either photo lacks geo tags) and D_T is the l1 norm of the two consecutive
time residuals. Normalizers are the per-position maxima over the candidate
set; a zero maximum means the position carries no information and the
potential is the neutral 1. The best offset maximizes the product of the
potentials, found by max-sum message passing along the chain; the state
space of every node is restricted to the candidate-offset-induced
assignments, all nodes sharing the candidate index.

Parameters theta = [gamma, delta] can be fit by maximum likelihood on edges
with known offsets: the log-linear form makes the negative log-likelihood
convex, minimized here by projected gradient descent.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import logsumexp, softmax

from .collection import Photo
from .errors import EstimationError
from .links import Link, candidate_offsets

EARTH_RADIUS_M = 6_371_000.0
PARAM_FLOOR = 1e-6
GRAD_TOL = 1e-6


@dataclass(frozen=True)
class PotentialParams:
    """Strictly positive weights of the geo (gamma) and temporal (delta) potentials."""

    gamma: float = 1.0
    delta: float = 1.0

    def __post_init__(self):
        if not (self.gamma > 0.0 and self.delta > 0.0):
            raise EstimationError(
                f"potential parameters must be positive, got gamma={self.gamma}, delta={self.delta}"
            )

    def as_array(self) -> np.ndarray:
        return np.array([self.gamma, self.delta], dtype=np.float64)


@dataclass(frozen=True)
class CorrespondenceSequence:
    """For one candidate offset: each sync photo paired with its nearest reference photo."""

    offset: int
    pairs: tuple[tuple[Photo, Photo], ...]  # (y_i sync photo, x_i assigned reference photo)


@dataclass(frozen=True)
class EdgeSyncResult:
    best_offset: int
    scores: dict[int, float]  # candidate offset -> log-score
    q: int


def geo_to_sphere(lat: float, lon: float) -> np.ndarray:
    """Cartesian point on the spherical Earth model, in meters."""
    phi = math.radians(lat)
    lam = math.radians(lon)
    r = EARTH_RADIUS_M
    return np.array(
        [r * math.cos(phi) * math.cos(lam), r * math.cos(phi) * math.sin(lam), r * math.sin(phi)]
    )


def orthodromic_distance(a: tuple[float, float] | None, b: tuple[float, float] | None) -> float:
    """Great-circle distance in meters; 0 when either location is unknown."""
    if a is None or b is None:
        return 0.0
    chord = float(np.linalg.norm(geo_to_sphere(*a) - geo_to_sphere(*b)))
    # fp noise can push the half-chord ratio just past 1 for antipodal points
    ratio = min(1.0, chord / (2.0 * EARTH_RADIUS_M))
    return 2.0 * EARTH_RADIUS_M * math.asin(ratio)


def unary_potential(
    x_photo: Photo, y_photo: Photo, params: PotentialParams, dg_max: float
) -> float:
    """Geo agreement factor in (0, 1]; neutral when the position is uninformative."""
    dg = orthodromic_distance(x_photo.geo, y_photo.geo)
    ratio = 0.0 if dg_max == 0.0 else dg / dg_max
    return math.exp(-params.gamma * ratio)


def temporal_distance(
    pair_i: tuple[Photo, Photo],
    pair_next: tuple[Photo, Photo],
    offset: int,
    adjusted: bool = True,
) -> int:
    """l1 norm of the time residuals of two consecutive correspondences.

    With *adjusted* (default) the sync-gallery timestamps are shifted by the
    candidate offset first, so a perfectly aligned candidate scores 0; the
    un-adjusted variant compares raw device clocks.
    """
    shift = offset if adjusted else 0
    (y_i, x_i), (y_n, x_n) = pair_i, pair_next
    return abs(y_i.timestamp + shift - x_i.timestamp) + abs(y_n.timestamp + shift - x_n.timestamp)


def pairwise_potential(
    pair_i: tuple[Photo, Photo],
    pair_next: tuple[Photo, Photo],
    params: PotentialParams,
    dt_max: float,
    offset: int,
    adjusted: bool = True,
) -> float:
    """Temporal alignment factor in (0, 1] for two consecutive correspondences."""
    dt = temporal_distance(pair_i, pair_next, offset, adjusted)
    ratio = 0.0 if dt_max == 0.0 else dt / dt_max
    return math.exp(-params.delta * ratio)


def correspondence_sequence(
    ref_photos: Sequence[Photo], sync_photos: Sequence[Photo], offset: int
) -> CorrespondenceSequence:
    """Assign every sync photo to the reference photo nearest to its shifted timestamp.

    Inputs are the link-participating photos of each gallery. Ties on the
    time axis resolve to the earlier reference photo.
    """
    if not ref_photos or not sync_photos:
        raise EstimationError("both galleries need at least one photo to correspond")
    refs = sorted(ref_photos, key=lambda p: (p.timestamp, p.id))
    ref_ts = [p.timestamp for p in refs]
    pairs = []
    for y in sorted(sync_photos, key=lambda p: (p.timestamp, p.id)):
        target = y.timestamp + offset
        j = bisect_left(ref_ts, target)
        if j == 0:
            x = refs[0]
        elif j == len(refs):
            x = refs[-1]
        else:
            before, after = refs[j - 1], refs[j]
            x = before if target - before.timestamp <= after.timestamp - target else after
        pairs.append((y, x))
    return CorrespondenceSequence(offset=offset, pairs=tuple(pairs))


def orient_links(
    ref_photos: Sequence[Photo], sync_photos: Sequence[Photo], links: Sequence[Link]
) -> list[Link]:
    """Flip links so photo_a is the reference-side photo of every link."""
    ref_ids = {p.id for p in ref_photos}
    sync_ids = {p.id for p in sync_photos}
    oriented = []
    for ln in links:
        if ln.photo_a in ref_ids and ln.photo_b in sync_ids:
            oriented.append(ln)
        elif ln.photo_b in ref_ids and ln.photo_a in sync_ids:
            oriented.append(ln.reversed())
        else:
            raise EstimationError(
                f"link {ln.photo_a!r}-{ln.photo_b!r} does not join the two galleries"
            )
    return oriented


def _participating(photos: Sequence[Photo], ids: set[str]) -> list[Photo]:
    return sorted((p for p in photos if p.id in ids), key=lambda p: (p.timestamp, p.id))


def geo_normalizers(sequences: Sequence[CorrespondenceSequence]) -> np.ndarray:
    """Per-position max geo distance over the candidate assignments."""
    n2 = len(sequences[0].pairs)
    out = np.zeros(n2)
    for seq in sequences:
        for k, (y, x) in enumerate(seq.pairs):
            out[k] = max(out[k], orthodromic_distance(x.geo, y.geo))
    return out


def temporal_normalizers(
    sequences: Sequence[CorrespondenceSequence], adjusted: bool = True
) -> np.ndarray:
    """Per-position max temporal distance over the candidate assignments."""
    n2 = len(sequences[0].pairs)
    out = np.zeros(max(n2 - 1, 0))
    for seq in sequences:
        for i in range(n2 - 1):
            dt = temporal_distance(seq.pairs[i], seq.pairs[i + 1], seq.offset, adjusted)
            out[i] = max(out[i], dt)
    return out


def sequence_features(
    seq: CorrespondenceSequence,
    dg_max: np.ndarray,
    dt_max: np.ndarray,
    adjusted: bool = True,
) -> tuple[float, float]:
    """Sufficient statistics (h1, h2): summed normalized geo and temporal distances."""
    h1 = 0.0
    for k, (y, x) in enumerate(seq.pairs):
        if dg_max[k] > 0.0:
            h1 += orthodromic_distance(x.geo, y.geo) / dg_max[k]
    h2 = 0.0
    for i in range(len(seq.pairs) - 1):
        if dt_max[i] > 0.0:
            dt = temporal_distance(seq.pairs[i], seq.pairs[i + 1], seq.offset, adjusted)
            h2 += dt / dt_max[i]
    return h1, h2


def score_sequence(
    seq: CorrespondenceSequence,
    params: PotentialParams,
    dg_max: np.ndarray,
    dt_max: np.ndarray,
    adjusted: bool = True,
) -> float:
    """Log of the unnormalized potential product: -gamma*h1 - delta*h2."""
    h1, h2 = sequence_features(seq, dg_max, dt_max, adjusted)
    return -params.gamma * h1 - params.delta * h2


@dataclass(frozen=True)
class EdgeProblem:
    """Candidate offsets and their assignment sequences for one gallery pair."""

    candidates: tuple[int, ...]
    sequences: tuple[CorrespondenceSequence, ...]
    dg_max: np.ndarray  # (N2,)
    dt_max: np.ndarray  # (N2-1,)
    adjusted: bool

    @property
    def q(self) -> int:
        return len(self.candidates)

    @property
    def n2(self) -> int:
        return len(self.sequences[0].pairs)


def build_edge_problem(
    ref_photos: Sequence[Photo],
    sync_photos: Sequence[Photo],
    links: Sequence[Link],
    adjusted: bool = True,
    extra_offsets: Sequence[int] = (),
) -> EdgeProblem:
    """Restrict both galleries to their link photos and lay out the candidate sequences."""
    if not links:
        raise EstimationError("no links between the two galleries")
    oriented = orient_links(ref_photos, sync_photos, links)
    x_pool = _participating(ref_photos, {ln.photo_a for ln in oriented})
    y_pool = _participating(sync_photos, {ln.photo_b for ln in oriented})
    offsets = candidate_offsets(oriented)
    for off in extra_offsets:
        if off not in offsets:
            offsets.append(off)
    sequences = tuple(correspondence_sequence(x_pool, y_pool, off) for off in offsets)
    return EdgeProblem(
        candidates=tuple(offsets),
        sequences=sequences,
        dg_max=geo_normalizers(sequences),
        dt_max=temporal_normalizers(sequences, adjusted),
        adjusted=adjusted,
    )


def _log_potential_tables(
    problem: EdgeProblem, params: PotentialParams
) -> tuple[np.ndarray, np.ndarray]:
    """Per-candidate log phi (Q, N2) and log psi (Q, N2-1) tables."""
    q, n2 = problem.q, problem.n2
    lphi = np.zeros((q, n2))
    lpsi = np.zeros((q, max(n2 - 1, 0)))
    for m, seq in enumerate(problem.sequences):
        for k, (y, x) in enumerate(seq.pairs):
            if problem.dg_max[k] > 0.0:
                dg = orthodromic_distance(x.geo, y.geo)
                lphi[m, k] = -params.gamma * (dg / problem.dg_max[k])
        for i in range(n2 - 1):
            if problem.dt_max[i] > 0.0:
                dt = temporal_distance(seq.pairs[i], seq.pairs[i + 1], seq.offset, problem.adjusted)
                lpsi[m, i] = -params.delta * (dt / problem.dt_max[i])
    return lphi, lpsi


def pick_best_offset(candidates: Sequence[int], scores: Sequence[float]) -> int:
    """Max-score candidate; ties resolve to the smallest |offset|, then the smallest offset.

    Scores within fp noise (1e-12 relative) of the maximum count as tied, so
    the choice does not depend on the summation order that produced them.
    """
    top = max(scores)
    band = 1e-12 * max(1.0, abs(top))
    tied = [off for off, s in zip(candidates, scores) if s >= top - band]
    return min(tied, key=lambda off: (abs(off), off))


def max_sum_scores(problem: EdgeProblem, params: PotentialParams) -> np.ndarray:
    """Root beliefs from leaf-to-root message passing along the chain.

    Messages are vectors over the Q candidate states; the pairwise factor
    only couples same-candidate states, so each sweep adds the incoming
    pairwise log-potential and the node's unary log-potential.
    """
    lphi, lpsi = _log_potential_tables(problem, params)
    msg = lphi[:, 0].copy()
    for i in range(1, problem.n2):
        msg += lpsi[:, i - 1]
        msg += lphi[:, i]
    return msg


def estimate_offset(
    ref_photos: Sequence[Photo],
    sync_photos: Sequence[Photo],
    links: Sequence[Link],
    params: PotentialParams | None = None,
    adjusted: bool = True,
) -> EdgeSyncResult:
    """MAP offset of the sync gallery relative to the reference gallery.

    The returned offset converts sync-gallery clock readings into the
    reference clock: ``t_sync + best_offset ~ t_ref``.
    """
    params = params or PotentialParams()
    problem = build_edge_problem(ref_photos, sync_photos, links, adjusted)
    scores = max_sum_scores(problem, params)
    best = pick_best_offset(problem.candidates, scores)
    return EdgeSyncResult(
        best_offset=best,
        scores={off: float(s) for off, s in zip(problem.candidates, scores)},
        q=problem.q,
    )


# --- maximum-likelihood fit of [gamma, delta] -------------------------------


@dataclass(frozen=True)
class TrainingInstance:
    """One training edge: statistics of the true sequence and of every candidate."""

    h_true: np.ndarray  # (2,)
    h_candidates: np.ndarray  # (Q, 2)


def training_instance(
    ref_photos: Sequence[Photo],
    sync_photos: Sequence[Photo],
    links: Sequence[Link],
    true_offset: int,
    adjusted: bool = True,
) -> TrainingInstance:
    """Statistics for one edge whose true offset is known.

    The true offset is added to the candidate set if the links did not
    already imply it, so the true sequence is always a feasible outcome.
    """
    problem = build_edge_problem(
        ref_photos, sync_photos, links, adjusted, extra_offsets=(true_offset,)
    )
    h = np.array(
        [sequence_features(s, problem.dg_max, problem.dt_max, adjusted) for s in problem.sequences]
    )
    true_idx = problem.candidates.index(true_offset)
    return TrainingInstance(h_true=h[true_idx].copy(), h_candidates=h)


def negative_log_likelihood(instances: Sequence[TrainingInstance], theta: np.ndarray) -> float:
    """Summed -log p(true sequence | observations; theta) over the training edges."""
    total = 0.0
    for inst in instances:
        energies = inst.h_candidates @ theta
        total += float(inst.h_true @ theta + logsumexp(-energies))
    return total


def nll_gradient(instances: Sequence[TrainingInstance], theta: np.ndarray) -> np.ndarray:
    """Gradient of the NLL: h(true) - E_p[h], expectation over the candidate set."""
    grad = np.zeros(2)
    for inst in instances:
        p = softmax(-(inst.h_candidates @ theta))
        grad += inst.h_true - p @ inst.h_candidates
    return grad


def learn_parameters(
    instances: Sequence[TrainingInstance],
    initial: PotentialParams | None = None,
    learning_rate: float = 1e-3,
    max_iter: int = 1000,
) -> PotentialParams:
    """Projected gradient descent on the convex NLL; theta stays >= 1e-6.

    Stops when the gradient norm drops below 1e-6 or after *max_iter* steps.
    Without training data the defaults gamma = delta = 1 apply.
    """
    if not instances:
        raise EstimationError("empty training set")
    theta = (initial or PotentialParams()).as_array()
    for _ in range(max_iter):
        grad = nll_gradient(instances, theta)
        if float(np.linalg.norm(grad)) < GRAD_TOL:
            break
        theta = np.maximum(theta - learning_rate * grad, PARAM_FLOOR)
    return PotentialParams(gamma=float(theta[0]), delta=float(theta[1]))
