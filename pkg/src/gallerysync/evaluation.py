"""Precision / accuracy / harmonic-mean scoring of synchronization results.

A gallery counts as synchronized when its estimated offset is within
``max_error`` seconds (strictly) of the ground truth. Precision is the
synchronized fraction of the non-reference galleries; accuracy is one minus
the mean normalized error over the synchronized galleries.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import TYPE_CHECKING

from .collection import GroundTruth
from .errors import EvaluationError

if TYPE_CHECKING:
    from .pipeline import SyncResult

DEFAULT_MAX_ERROR = 1800


@dataclass(frozen=True)
class EvalReport:
    m: int  # gallery count, reference included
    m_syn: int  # galleries synchronized within tolerance
    precision: float
    accuracy: float
    harmonic_mean: float
    errors: dict[str, int | None]  # per-gallery |estimate - truth|; None without an estimate
    max_error: int = DEFAULT_MAX_ERROR


def evaluate(result: "SyncResult", truth: GroundTruth, max_error: int = DEFAULT_MAX_ERROR) -> EvalReport:
    """Score *result* against *truth*; every non-reference gallery needs a truth entry."""
    if max_error <= 0:
        raise EvaluationError(f"max_error must be positive, got {max_error}")
    ref = result.reference
    if truth.offsets.get(ref, 0) != 0:
        raise EvaluationError(f"ground truth lists a nonzero offset for the reference {ref!r}")

    gallery_ids = [g for g in result.offsets if g != ref]
    errors: dict[str, int | None] = {}
    synchronized: list[int] = []
    for gid in gallery_ids:
        if gid not in truth.offsets:
            raise EvaluationError(f"ground truth is missing gallery {gid!r}")
        est = result.offsets[gid]
        if est is None:
            errors[gid] = None
            continue
        err = abs(est - truth.offsets[gid])
        errors[gid] = err
        if err < max_error:
            synchronized.append(err)

    m = len(gallery_ids) + 1
    m_syn = len(synchronized)
    precision = m_syn / (m - 1) if m > 1 else 0.0
    accuracy = 1.0 - sum(synchronized) / (m_syn * max_error) if m_syn else 0.0
    denom = precision + accuracy
    harmonic = 2.0 * precision * accuracy / denom if denom > 0.0 else 0.0
    return EvalReport(
        m=m,
        m_syn=m_syn,
        precision=precision,
        accuracy=accuracy,
        harmonic_mean=harmonic,
        errors=errors,
        max_error=max_error,
    )


def report_text(report: EvalReport) -> str:
    """Human-readable rendering; P/A/H as percentages with one decimal."""
    lines = [
        f"galleries:      {report.m}",
        f"synchronized:   {report.m_syn} of {report.m - 1}",
        f"max error:      {report.max_error} s",
        f"P: {100.0 * report.precision:.1f}",
        f"A: {100.0 * report.accuracy:.1f}",
        f"H: {100.0 * report.harmonic_mean:.1f}",
    ]
    return "\n".join(lines) + "\n"


def report_json(report: EvalReport) -> str:
    payload = {
        "m": report.m,
        "m_syn": report.m_syn,
        "precision": report.precision,
        "accuracy": report.accuracy,
        "harmonic_mean": report.harmonic_mean,
        "max_error": report.max_error,
        "errors": report.errors,
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"
