"""Candidate routes: shortest and k-shortest loopless paths, plus imported routes."""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Mapping, Protocol, Sequence

from .assessment import SegmentAssessment
from .errors import InvalidArgument
from .network import RoadNode, RoadSegment
from .suggestion import RouteId, route_quality_average

TIME = "time"
DISTANCE = "distance"
WEIGHTS = (TIME, DISTANCE)

INTERNAL = "Internal"
IMPORTED = "Imported"

DEFAULT_K = 3


class Graph(Protocol):
    @property
    def nodes(self) -> Mapping[int, RoadNode]: ...

    @property
    def segments(self) -> Mapping[int, RoadSegment]: ...


@dataclass(frozen=True)
class RouteCandidate:
    route_id: RouteId
    segments: tuple[int, ...]
    source: str
    time_min: float
    length_km: float


def _edge_cost(seg: RoadSegment, weight: str) -> float:
    return seg.time_min if weight == TIME else seg.length_km


def path_cost(graph: Graph, segments: Sequence[int], weight: str = TIME) -> float:
    # always summed front to back so equal paths get bit-identical costs
    total = 0.0
    for sid in segments:
        total += _edge_cost(graph.segments[sid], weight)
    return total


def path_nodes(graph: Graph, src: int, segments: Sequence[int]) -> list[int]:
    nodes = [src]
    for sid in segments:
        seg = graph.segments[sid]
        if seg.source != nodes[-1]:
            raise InvalidArgument(f"segment {sid} does not continue from node {nodes[-1]}")
        nodes.append(seg.target)
    return nodes


def _adjacency(graph: Graph) -> dict[int, list[RoadSegment]]:
    adj: dict[int, list[RoadSegment]] = {n: [] for n in graph.nodes}
    for sid in sorted(graph.segments):
        seg = graph.segments[sid]
        adj[seg.source].append(seg)
    return adj


def _check_request(graph: Graph, src: int, dst: int, weight: str) -> None:
    for node in (src, dst):
        if node not in graph.nodes:
            raise InvalidArgument(f"unknown node {node}")
    if weight not in WEIGHTS:
        raise InvalidArgument(f"weight must be one of {WEIGHTS}, got {weight!r}")


def _dijkstra(
    graph: Graph,
    adj: Mapping[int, list[RoadSegment]],
    src: int,
    dst: int,
    weight: str,
    banned_nodes: frozenset[int] = frozenset(),
    banned_segments: frozenset[int] = frozenset(),
) -> tuple[int, ...] | None:
    # labels compare as (cost, edge count, segment-id sequence); extending two
    # labels by the same edge keeps their order, so the first pop is optimal
    heap: list[tuple[float, int, tuple[int, ...], int]] = [(0.0, 0, (), src)]
    done: set[int] = set()
    while heap:
        cost, hops, seq, node = heapq.heappop(heap)
        if node in done:
            continue
        if node == dst:
            return seq
        done.add(node)
        for seg in adj[node]:
            if seg.id in banned_segments or seg.target in banned_nodes or seg.target in done:
                continue
            heapq.heappush(
                heap, (cost + _edge_cost(seg, weight), hops + 1, seq + (seg.id,), seg.target)
            )
    return None


def _candidate(graph: Graph, route_id: RouteId, segments: Sequence[int]) -> RouteCandidate:
    return RouteCandidate(
        route_id=route_id,
        segments=tuple(segments),
        source=INTERNAL,
        time_min=path_cost(graph, segments, TIME),
        length_km=path_cost(graph, segments, DISTANCE),
    )


def shortest_path(graph: Graph, src: int, dst: int, weight: str = TIME) -> RouteCandidate | None:
    """Cheapest path, preferring fewer segments and then smaller segment ids on ties."""
    _check_request(graph, src, dst, weight)
    seq = _dijkstra(graph, _adjacency(graph), src, dst, weight)
    return None if seq is None else _candidate(graph, 1, seq)


def k_shortest(
    graph: Graph, src: int, dst: int, k: int = DEFAULT_K, weight: str = TIME
) -> list[RouteCandidate]:
    """Up to ``k`` cheapest loopless paths (Yen), numbered from 1 in cost order."""
    if k < 1:
        raise InvalidArgument(f"k must be >= 1, got {k}")
    _check_request(graph, src, dst, weight)
    adj = _adjacency(graph)
    first = _dijkstra(graph, adj, src, dst, weight)
    if first is None:
        return []

    def key(seq: tuple[int, ...]) -> tuple[float, int, tuple[int, ...]]:
        return (path_cost(graph, seq, weight), len(seq), seq)

    found = [first]
    pending: list[tuple[float, int, tuple[int, ...]]] = []
    queued: set[tuple[int, ...]] = set()
    while len(found) < k:
        prev = found[-1]
        prev_nodes = path_nodes(graph, src, prev)
        for i in range(len(prev)):
            root = prev[:i]
            banned_segments = frozenset(p[i] for p in found if p[:i] == root and len(p) > i)
            banned_nodes = frozenset(prev_nodes[:i])
            spur = _dijkstra(
                graph, adj, prev_nodes[i], dst, weight, banned_nodes, banned_segments
            )
            if spur is None:
                continue
            total = root + spur
            if total not in queued:
                queued.add(total)
                heapq.heappush(pending, key(total))
        if not pending:
            break
        found.append(heapq.heappop(pending)[2])
    return [_candidate(graph, n, seq) for n, seq in enumerate(found, start=1)]


def imported_candidate(
    graph: Graph,
    route_id: RouteId,
    segments: Sequence[int],
    time_min: float | None = None,
    length_km: float | None = None,
) -> RouteCandidate:
    """A provider-supplied route; time and length default to values computed from the graph."""
    if not segments:
        raise InvalidArgument(f"route {route_id}: no segments")
    missing = [s for s in segments if s not in graph.segments]
    if missing:
        raise InvalidArgument(f"route {route_id}: unknown segment(s) {missing}")
    nodes = path_nodes(graph, graph.segments[segments[0]].source, segments)
    if len(set(nodes)) != len(nodes):
        raise InvalidArgument(f"route {route_id}: revisits a node")
    for name, value in (("time_min", time_min), ("length_km", length_km)):
        if value is not None and not value > 0:
            raise InvalidArgument(f"route {route_id}: {name} must be positive")
    return RouteCandidate(
        route_id=route_id,
        segments=tuple(segments),
        source=IMPORTED,
        time_min=path_cost(graph, segments, TIME) if time_min is None else float(time_min),
        length_km=path_cost(graph, segments, DISTANCE) if length_km is None else float(length_km),
    )


def route_metrics(
    candidate: RouteCandidate,
    assessments: Mapping[int, SegmentAssessment],
) -> tuple[float, float, float]:
    """``(time_min, length_km, avg_quality)`` of a candidate."""
    if not candidate.segments:
        raise InvalidArgument(f"route {candidate.route_id}: no segments")
    missing = [s for s in candidate.segments if s not in assessments]
    if missing:
        raise InvalidArgument(f"route {candidate.route_id}: no assessment for segment(s) {missing}")
    avg = route_quality_average(assessments[s] for s in candidate.segments)
    return candidate.time_min, candidate.length_km, avg
