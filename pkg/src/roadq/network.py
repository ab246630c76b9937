"""Directed road graph, per-segment anomaly store and map matching."""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from datetime import datetime
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

from .errors import InvalidArgument

EARTH_RADIUS_M = 6_371_000.0
DEFAULT_MATCH_THRESHOLD_M = 15.0
# distances closer than this are treated as equal when choosing a segment
TIE_TOLERANCE_M = 1e-9
LENGTH_TOLERANCE = 1e-3

ANOMALY_TYPES = ("pothole", "crack", "manhole", "speed_bump", "rough_patch")
SEVERITIES = ("mild", "moderate", "severe")

LatLon = tuple[float, float]


def check_coordinates(lat: float, lon: float) -> None:
    if not (math.isfinite(lat) and -90.0 <= lat <= 90.0):
        raise InvalidArgument(f"latitude out of range: {lat!r}")
    if not (math.isfinite(lon) and -180.0 <= lon <= 180.0):
        raise InvalidArgument(f"longitude out of range: {lon!r}")


def haversine_m(p1: LatLon, p2: LatLon) -> float:
    """Great-circle distance in meters between two (lat, lon) points."""
    check_coordinates(*p1)
    check_coordinates(*p2)
    lat1, lon1 = map(math.radians, p1)
    lat2, lon2 = map(math.radians, p2)
    h = (
        math.sin((lat2 - lat1) / 2) ** 2
        + math.cos(lat1) * math.cos(lat2) * math.sin((lon2 - lon1) / 2) ** 2
    )
    return 2 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def polyline_length_m(polyline: Sequence[LatLon]) -> float:
    return sum(haversine_m(a, b) for a, b in zip(polyline, polyline[1:]))


def point_to_edge_m(point: LatLon, a: LatLon, b: LatLon) -> float:
    """Distance from ``point`` to the edge ``a``-``b``.

    The perpendicular foot is found in a local equirectangular projection
    centred on ``point``; the distance to that foot is then measured with
    the haversine formula.
    """
    lat0, lon0 = point
    kx = math.cos(math.radians(lat0))
    ax, ay = (a[1] - lon0) * kx, a[0] - lat0
    bx, by = (b[1] - lon0) * kx, b[0] - lat0
    dx, dy = bx - ax, by - ay
    denom = dx * dx + dy * dy
    t = 0.0 if denom == 0 else min(1.0, max(0.0, -(ax * dx + ay * dy) / denom))
    foot = (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))
    return haversine_m(point, foot)


def point_to_polyline_m(point: LatLon, polyline: Sequence[LatLon]) -> float:
    return min(point_to_edge_m(point, a, b) for a, b in zip(polyline, polyline[1:]))


@dataclass(frozen=True)
class RoadNode:
    id: int
    lat: float
    lon: float

    def __post_init__(self) -> None:
        check_coordinates(self.lat, self.lon)

    @property
    def position(self) -> LatLon:
        return (self.lat, self.lon)


@dataclass(frozen=True)
class RoadSegment:
    id: int
    source: int
    target: int
    polyline: tuple[LatLon, ...]
    lanes: int = 1
    speed_kmh: float = 50.0
    length_m: float = 0.0  # 0 means "compute from the polyline"

    def __post_init__(self) -> None:
        if len(self.polyline) < 2:
            raise InvalidArgument(f"segment {self.id}: polyline needs at least 2 points")
        for lat, lon in self.polyline:
            check_coordinates(lat, lon)
        if self.lanes < 1:
            raise InvalidArgument(f"segment {self.id}: lanes must be >= 1")
        if not self.speed_kmh > 0:
            raise InvalidArgument(f"segment {self.id}: speed_kmh must be positive")
        computed = polyline_length_m(self.polyline)
        if not computed > 0:
            raise InvalidArgument(f"segment {self.id}: zero-length polyline")
        if self.length_m == 0.0:
            object.__setattr__(self, "length_m", computed)
        elif abs(self.length_m - computed) > LENGTH_TOLERANCE * computed:
            raise InvalidArgument(
                f"segment {self.id}: length_m {self.length_m} disagrees with polyline length {computed:.3f}"
            )

    @property
    def length_km(self) -> float:
        return self.length_m / 1000.0

    @property
    def time_min(self) -> float:
        return self.length_km / self.speed_kmh * 60.0


@dataclass(frozen=True)
class AnomalyRecord:
    report_id: str
    segment_id: int
    anomaly_type: str
    severity: str
    timestamp: datetime
    distance_to_segment_m: float
    lat: float
    lon: float
    device_id: str = ""

    def __post_init__(self) -> None:
        if self.anomaly_type not in ANOMALY_TYPES:
            raise InvalidArgument(f"unknown anomaly_type {self.anomaly_type!r}")
        if self.severity not in SEVERITIES:
            raise InvalidArgument(f"unknown severity {self.severity!r}")


@dataclass(frozen=True)
class NetworkSnapshot:
    """Read-only view of a network's geometry and anomaly store at one version."""

    version: int
    nodes: Mapping[int, RoadNode]
    segments: Mapping[int, RoadSegment]
    anomalies: Mapping[int, tuple[AnomalyRecord, ...]]

    def records(self, segment_id: int) -> tuple[AnomalyRecord, ...]:
        return self.anomalies.get(segment_id, ())


@dataclass
class AttachStats:
    attached: int = 0
    unmatched: int = 0
    already_present: int = 0


class RoadNetwork:
    """Road graph plus an append-only anomaly store.

    Writers are serialized by a lock; readers take a :meth:`snapshot`,
    which is never affected by later attaches.
    """

    def __init__(self, nodes: Iterable[RoadNode] = (), segments: Iterable[RoadSegment] = ()) -> None:
        self._nodes: dict[int, RoadNode] = {}
        self._segments: dict[int, RoadSegment] = {}
        for node in nodes:
            if node.id in self._nodes:
                raise InvalidArgument(f"duplicate node id {node.id}")
            self._nodes[node.id] = node
        for seg in segments:
            self.add_segment(seg)
        self._records: dict[int, list[AnomalyRecord]] = {}
        self._report_ids: set[str] = set()
        self._version = 0
        self._lock = threading.Lock()
        self.stats = AttachStats()

    def add_segment(self, seg: RoadSegment) -> None:
        if seg.id in self._segments:
            raise InvalidArgument(f"duplicate segment id {seg.id}")
        for end in (seg.source, seg.target):
            if end not in self._nodes:
                raise InvalidArgument(f"segment {seg.id} references unknown node {end}")
        self._segments[seg.id] = seg

    @property
    def version(self) -> int:
        return self._version

    @property
    def nodes(self) -> Mapping[int, RoadNode]:
        return MappingProxyType(self._nodes)

    @property
    def segments(self) -> Mapping[int, RoadSegment]:
        return MappingProxyType(self._segments)

    def records(self, segment_id: int) -> tuple[AnomalyRecord, ...]:
        return tuple(self._records.get(segment_id, ()))

    def snapshot(self) -> NetworkSnapshot:
        with self._lock:
            anomalies = {sid: tuple(recs) for sid, recs in self._records.items()}
            return NetworkSnapshot(
                version=self._version,
                nodes=MappingProxyType(dict(self._nodes)),
                segments=MappingProxyType(dict(self._segments)),
                anomalies=MappingProxyType(anomalies),
            )

    def attach_anomaly(
        self,
        report_id: str,
        lat: float,
        lon: float,
        anomaly_type: str,
        severity: str,
        timestamp: datetime,
        device_id: str = "",
        threshold_m: float = DEFAULT_MATCH_THRESHOLD_M,
    ) -> AnomalyRecord | None:
        """Map-match a report and store it; ``None`` when no segment is close enough.

        Attaching a report id that is already stored returns the stored
        record and changes nothing.
        """
        with self._lock:
            if report_id in self._report_ids:
                self.stats.already_present += 1
                for recs in self._records.values():
                    for rec in recs:
                        if rec.report_id == report_id:
                            return rec
            match = nearest_segment((lat, lon), self._segments.values(), threshold_m)
            if match is None:
                self.stats.unmatched += 1
                return None
            seg_id, dist = match
            record = AnomalyRecord(
                report_id=report_id,
                segment_id=seg_id,
                anomaly_type=anomaly_type,
                severity=severity,
                timestamp=timestamp,
                distance_to_segment_m=dist,
                lat=lat,
                lon=lon,
                device_id=device_id,
            )
            self._records.setdefault(seg_id, []).append(record)
            self._report_ids.add(report_id)
            self._version += 1
            self.stats.attached += 1
            return record

    def restore(self, records: Iterable[AnomalyRecord]) -> None:
        """Load previously stored records without re-matching them."""
        with self._lock:
            for rec in records:
                if rec.segment_id not in self._segments:
                    raise InvalidArgument(
                        f"record {rec.report_id} references unknown segment {rec.segment_id}"
                    )
                if rec.report_id in self._report_ids:
                    continue
                self._records.setdefault(rec.segment_id, []).append(rec)
                self._report_ids.add(rec.report_id)
                self._version += 1


def nearest_segment(
    point: LatLon,
    segments: Iterable[RoadSegment],
    threshold_m: float = DEFAULT_MATCH_THRESHOLD_M,
) -> tuple[int, float] | None:
    """``(segment id, distance)`` of the closest segment within ``threshold_m``."""
    check_coordinates(*point)
    best: tuple[int, float] | None = None
    for seg in sorted(segments, key=lambda s: s.id):
        d = point_to_polyline_m(point, seg.polyline)
        if best is None or d < best[1] - TIE_TOLERANCE_M:
            best = (seg.id, d)
    if best is None or best[1] > threshold_m:
        return None
    return best


def map_match(
    point: LatLon,
    network: RoadNetwork | NetworkSnapshot,
    threshold_m: float = DEFAULT_MATCH_THRESHOLD_M,
) -> int | None:
    match = nearest_segment(point, network.segments.values(), threshold_m)
    return None if match is None else match[0]
