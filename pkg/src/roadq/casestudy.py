"""The bundled two-route case study: fixture paths, expected labels and a runner."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .assessment import SegmentAssessment, assess_network
from .candidates import RouteCandidate, route_metrics
from .config import assessment_fis, shipped_path, suggestion_fis
from .fuzzy import FisDefinition
from .ingest import IngestStats, ingest_reports, load_candidates, load_network, read_lines
from .network import RoadNetwork
from .suggestion import NOT_SUGGESTED, RouteRecommendation, build_metrics, suggest_routes

NETWORK_FILE = "demo_network.json"
REPORTS_FILE = "demo_reports.jsonl"
CANDIDATES_FILE = "demo_candidates.json"

# per-segment labels the two provider routes are expected to receive, in driving order
EXPECTED_LABELS = {
    1: ("Poor",) * 7 + ("Moderate", "Poor"),
    2: ("Moderate", "Moderate") + ("Good",) * 5 + ("Moderate", "Moderate", "Poor"),
}
EXPECTED_FIRST = 2
EXPECTED_LAST_LEVEL = (1, NOT_SUGGESTED)


@dataclass
class CaseStudyResult:
    network: RoadNetwork
    stats: IngestStats
    assessments: dict[int, SegmentAssessment]
    candidates: list[RouteCandidate]
    ranking: list[RouteRecommendation]
    mismatches: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches


def check(result: CaseStudyResult) -> list[str]:
    problems = []
    for cand in result.candidates:
        expected = EXPECTED_LABELS.get(cand.route_id)
        if expected is None:
            continue
        got = tuple(result.assessments[s].label for s in cand.segments)
        for pos, (want, have) in enumerate(zip(expected, got), start=1):
            if want != have:
                problems.append(f"route {cand.route_id} segment {pos}: expected {want}, got {have}")
        if len(expected) != len(got):
            problems.append(
                f"route {cand.route_id}: expected {len(expected)} segments, got {len(got)}"
            )
    first = result.ranking[0].route_id
    if first != EXPECTED_FIRST:
        problems.append(f"rank 1: expected route {EXPECTED_FIRST}, got route {first}")
    route, level = EXPECTED_LAST_LEVEL
    for rec in result.ranking:
        if rec.route_id == route and rec.level != level:
            problems.append(f"route {route} level: expected {level}, got {rec.level}")
    return problems


def rank_candidates(
    candidates: Sequence[RouteCandidate],
    assessments: Mapping[int, SegmentAssessment],
    fis: FisDefinition,
) -> list[RouteRecommendation]:
    """Compute metrics for each candidate and rank them with the suggestion system."""
    rows = []
    for cand in candidates:
        t, d, q = route_metrics(cand, assessments)
        rows.append((cand.route_id, q, t, d))
    return suggest_routes(build_metrics(rows), fis)


def run_case_study(
    assess: FisDefinition | None = None,
    suggest: FisDefinition | None = None,
) -> CaseStudyResult:
    """Ingest the bundled reports, assess every segment and rank the two provider routes."""
    assess = assess or assessment_fis()
    suggest = suggest or suggestion_fis()
    network = load_network(shipped_path(NETWORK_FILE))
    stats = ingest_reports(network, read_lines(shipped_path(REPORTS_FILE)))
    assessments = assess_network(network.snapshot(), assess)
    candidates = load_candidates(network, shipped_path(CANDIDATES_FILE))
    ranking = rank_candidates(candidates, assessments, suggest)
    result = CaseStudyResult(network, stats, assessments, candidates, ranking)
    result.mismatches = check(result)
    return result
