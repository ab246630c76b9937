"""Route scoring and ranking from average road quality, time and distance."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .assessment import SegmentAssessment
from .errors import InvalidArgument
from .fuzzy import FisDefinition, evaluate

# representative quality scores for label-only inputs
LABEL_SCORES = {"Good": 0.85, "Moderate": 0.5, "Poor": 0.15}

NOT_SUGGESTED = "NotSuggested"
MARGINALLY_SUGGESTED = "MarginallySuggested"
SUGGESTED = "Suggested"

RouteId = int | str


def route_quality_average(
    assessments: Iterable[SegmentAssessment | str | float],
    label_scores: Mapping[str, float] = LABEL_SCORES,
) -> float:
    """Unweighted mean segment quality.

    Items may be assessments, bare scores, or bare labels (looked up in
    ``label_scores``).
    """
    scores = []
    for item in assessments:
        if isinstance(item, SegmentAssessment):
            scores.append(item.quality_score)
        elif isinstance(item, str):
            if item not in label_scores:
                raise InvalidArgument(f"no score for label {item!r}")
            scores.append(label_scores[item])
        else:
            scores.append(float(item))
    if not scores:
        raise InvalidArgument("route has no segments")
    return sum(scores) / len(scores)


def normalize_candidates(candidates: Sequence[tuple[float, float]]) -> list[tuple[float, float]]:
    """``(time_ratio, dist_ratio)`` of each ``(time_min, length_km)`` against the best candidate."""
    if not candidates:
        raise InvalidArgument("no candidates to normalize")
    for t, d in candidates:
        if not (t > 0 and d > 0):
            raise InvalidArgument(f"time and length must be positive, got ({t}, {d})")
    t_min = min(t for t, _ in candidates)
    d_min = min(d for _, d in candidates)
    return [(t / t_min, d / d_min) for t, d in candidates]


@dataclass(frozen=True)
class RouteMetrics:
    route_id: RouteId
    avg_quality: float
    time_ratio: float
    dist_ratio: float
    time_min: float
    length_km: float

    def as_inputs(self) -> dict[str, float]:
        return {
            "avg_quality": self.avg_quality,
            "time_ratio": self.time_ratio,
            "dist_ratio": self.dist_ratio,
        }


def build_metrics(rows: Sequence[tuple[RouteId, float, float, float]]) -> list[RouteMetrics]:
    """Metrics from ``(route_id, avg_quality, time_min, length_km)`` rows."""
    ratios = normalize_candidates([(t, d) for _, _, t, d in rows])
    return [
        RouteMetrics(rid, q, tr, dr, t, d)
        for (rid, q, t, d), (tr, dr) in zip(rows, ratios)
    ]


@dataclass(frozen=True)
class RouteRecommendation:
    route_id: RouteId
    score: float
    level: str
    rank: int
    metrics: RouteMetrics


def id_order(route_id: RouteId) -> tuple[int, int | str]:
    # numeric ids sort numerically and ahead of textual ones
    if isinstance(route_id, int):
        return (0, route_id)
    return (0, int(route_id)) if str(route_id).isdigit() else (1, str(route_id))


def suggest_routes(metrics: Sequence[RouteMetrics], fis: FisDefinition) -> list[RouteRecommendation]:
    """Score every route and return them best first."""
    if not metrics:
        raise InvalidArgument("no routes to rank")
    scored = [(m, *evaluate(fis, m.as_inputs())) for m in metrics]
    scored.sort(
        key=lambda row: (
            -row[1],
            -row[0].avg_quality,
            row[0].time_ratio,
            row[0].dist_ratio,
            id_order(row[0].route_id),
        )
    )
    return [
        RouteRecommendation(m.route_id, score, level, rank, m)
        for rank, (m, score, level) in enumerate(scored, start=1)
    ]
