"""Per-segment road quality from anomaly density, severity and lane count."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import InvalidArgument
from .fuzzy import FisDefinition, evaluate
from .network import AnomalyRecord, NetworkSnapshot, RoadSegment

DEFAULT_DMAX_PER_KM = 40.0

SEVERITY_WEIGHTS = {"mild": 1 / 3, "moderate": 2 / 3, "severe": 1.0}

GOOD, MODERATE, POOR = "Good", "Moderate", "Poor"


def anomaly_density(
    segment: RoadSegment,
    records: Sequence[AnomalyRecord],
    d_max: float = DEFAULT_DMAX_PER_KM,
) -> float:
    """Anomalies per km scaled by ``d_max`` and capped at 1."""
    if not segment.length_m > 0:
        raise InvalidArgument(f"segment {segment.id} has zero length")
    if not d_max > 0:
        raise InvalidArgument(f"d_max must be positive, got {d_max}")
    foreign = [r.report_id for r in records if r.segment_id != segment.id]
    if foreign:
        raise InvalidArgument(f"records {foreign} do not belong to segment {segment.id}")
    per_km = len(records) / segment.length_km
    return min(per_km / d_max, 1.0)


def severity_index(records: Sequence[AnomalyRecord]) -> float:
    """Mean severity weight of ``records``; 0 for none."""
    if not records:
        return 0.0
    return sum(SEVERITY_WEIGHTS[r.severity] for r in records) / len(records)


@dataclass(frozen=True)
class SegmentFeatures:
    ra: float
    severity_index: float
    lanes: float

    def as_inputs(self) -> dict[str, float]:
        return {"ra": self.ra, "severity": self.severity_index, "lanes": self.lanes}


@dataclass(frozen=True)
class SegmentAssessment:
    segment_id: int | None
    quality_score: float
    label: str
    features: SegmentFeatures
    fis_digest: str


def segment_features(
    segment: RoadSegment,
    records: Sequence[AnomalyRecord],
    d_max: float = DEFAULT_DMAX_PER_KM,
) -> SegmentFeatures:
    return SegmentFeatures(
        ra=anomaly_density(segment, records, d_max),
        severity_index=severity_index(records),
        lanes=float(segment.lanes),
    )


def assess_segment(
    features: SegmentFeatures,
    fis: FisDefinition,
    segment_id: int | None = None,
) -> SegmentAssessment:
    score, label = evaluate(fis, features.as_inputs())
    return SegmentAssessment(
        segment_id=segment_id,
        quality_score=score,
        label=label,
        features=features,
        fis_digest=fis.digest,
    )


def assess_network(
    snapshot: NetworkSnapshot,
    fis: FisDefinition,
    d_max: float = DEFAULT_DMAX_PER_KM,
) -> dict[int, SegmentAssessment]:
    """Assessment of every segment, keyed and ordered by segment id."""
    out = {}
    for seg_id in sorted(snapshot.segments):
        seg = snapshot.segments[seg_id]
        features = segment_features(seg, snapshot.records(seg_id), d_max)
        out[seg_id] = assess_segment(features, fis, seg_id)
    return out


def labels(assessments: Mapping[int, SegmentAssessment]) -> dict[int, str]:
    return {sid: a.label for sid, a in assessments.items()}
