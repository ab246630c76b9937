"""GeoJSON export of assessed segments and ranked routes.

Coordinates are written ``[lon, lat]`` as the format requires, although
everything else in the package uses ``(lat, lon)``.
"""

from __future__ import annotations

import math
from typing import Any, Mapping, Sequence

from .assessment import SegmentAssessment
from .candidates import RouteCandidate
from .network import LatLon, NetworkSnapshot
from .suggestion import RouteRecommendation

STROKES = {"Good": "green", "Moderate": "orange", "Poor": "red"}


def _line(points: Sequence[LatLon]) -> dict[str, Any]:
    return {"type": "LineString", "coordinates": [[lon, lat] for lat, lon in points]}


def _route_points(snapshot: NetworkSnapshot, candidate: RouteCandidate) -> list[LatLon]:
    points: list[LatLon] = []
    for sid in candidate.segments:
        poly = snapshot.segments[sid].polyline
        points.extend(poly[1:] if points and points[-1] == poly[0] else poly)
    return points


def export_geojson(
    snapshot: NetworkSnapshot,
    assessments: Mapping[int, SegmentAssessment],
    recommendations: Sequence[RouteRecommendation] = (),
    candidates: Sequence[RouteCandidate] = (),
) -> dict[str, Any]:
    """FeatureCollection with one feature per segment, then one per ranked route.

    Route features need the matching entry of ``candidates`` for geometry.
    """
    features = []
    for sid in sorted(snapshot.segments):
        a = assessments[sid]
        features.append({
            "type": "Feature",
            "geometry": _line(snapshot.segments[sid].polyline),
            "properties": {
                "kind": "segment",
                "segment_id": sid,
                "quality_score": round(a.quality_score, 6),
                "quality_label": a.label,
                "stroke": STROKES[a.label],
            },
        })
    by_id = {c.route_id: c for c in candidates}
    for rec in recommendations:
        features.append({
            "type": "Feature",
            "geometry": _line(_route_points(snapshot, by_id[rec.route_id])),
            "properties": {
                "kind": "route",
                "route_id": rec.route_id,
                "rank": rec.rank,
                "level": rec.level,
                "score": round(rec.score, 6),
            },
        })
    return {"type": "FeatureCollection", "features": features}


def _position_problems(pos: Any, where: str) -> list[str]:
    if not isinstance(pos, list) or len(pos) < 2:
        return [f"{where}: position must be an array of at least 2 numbers"]
    if not all(isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v) for v in pos):
        return [f"{where}: position values must be finite numbers"]
    lon, lat = pos[0], pos[1]
    problems = []
    if not -180 <= lon <= 180:
        problems.append(f"{where}: longitude {lon} out of range")
    if not -90 <= lat <= 90:
        problems.append(f"{where}: latitude {lat} out of range")
    return problems


def geojson_problems(doc: Any) -> list[str]:
    """Structural problems of a FeatureCollection of LineStrings; empty when valid."""
    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        return ["top level must be an object with type FeatureCollection"]
    if not isinstance(doc.get("features"), list):
        return ["features must be an array"]
    problems = []
    for i, feat in enumerate(doc["features"]):
        where = f"feature {i}"
        if not isinstance(feat, dict) or feat.get("type") != "Feature":
            problems.append(f"{where}: type must be Feature")
            continue
        if "properties" not in feat or not isinstance(feat["properties"], (dict, type(None))):
            problems.append(f"{where}: properties must be an object or null")
        geom = feat.get("geometry")
        if not isinstance(geom, dict) or geom.get("type") != "LineString":
            problems.append(f"{where}: geometry must be a LineString")
            continue
        coords = geom.get("coordinates")
        if not isinstance(coords, list) or len(coords) < 2:
            problems.append(f"{where}: LineString needs at least 2 positions")
            continue
        for j, pos in enumerate(coords):
            problems.extend(_position_problems(pos, f"{where}, position {j}"))
    return problems
