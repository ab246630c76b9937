"""Reading and writing the package's file formats.

Reports are JSON Lines, one object per line::

    {"device_id": "bus-7", "timestamp": "2019-06-01T08:15:02Z",
     "lat": 44.2301, "lon": -76.4862, "anomaly_type": "pothole", "severity": "severe"}

An optional ``"id"`` field names the report; without it an id is derived
from the report's content, so re-ingesting the same line is a no-op.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .candidates import RouteCandidate, imported_candidate
from .errors import ConfigError, InvalidArgument
from .network import (
    ANOMALY_TYPES,
    DEFAULT_MATCH_THRESHOLD_M,
    SEVERITIES,
    AnomalyRecord,
    RoadNetwork,
    RoadNode,
    RoadSegment,
    haversine_m,
)

DEDUP_RADIUS_M = 5.0
DEDUP_WINDOW_S = 10.0
STORE_SCHEMA_VERSION = 1

REQUIRED_FIELDS = ("device_id", "timestamp", "lat", "lon", "anomaly_type", "severity")


@dataclass(frozen=True)
class RawReport:
    device_id: str
    timestamp: datetime
    lat: float
    lon: float
    anomaly_type: str
    severity: str
    report_id: str = ""
    line: int = 0

    def __post_init__(self) -> None:
        if not self.report_id:
            object.__setattr__(self, "report_id", self._content_id())

    def _content_id(self) -> str:
        blob = json.dumps(
            [self.device_id, self.timestamp.isoformat(), self.lat, self.lon,
             self.anomaly_type, self.severity]
        )
        return hashlib.sha1(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class LineError:
    line: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line}: {self.message}"


@dataclass
class IngestStats:
    lines: int = 0
    accepted: int = 0
    rejected_invalid: int = 0
    rejected_unmatched: int = 0
    deduplicated: int = 0
    errors: list[LineError] = field(default_factory=list)

    def balanced(self) -> bool:
        total = self.accepted + self.rejected_invalid + self.rejected_unmatched + self.deduplicated
        return total == self.lines


def parse_timestamp(text: str) -> datetime:
    """ISO-8601 timestamp as an aware UTC datetime; naive values are taken as UTC."""
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is None:
        return ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def _number(doc: Mapping[str, Any], key: str) -> float:
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"{key} must be a number")
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{key} must be finite")
    return value


def parse_report(doc: Any, line: int = 0) -> RawReport:
    if not isinstance(doc, dict):
        raise ValueError("malformed record: expected an object")
    missing = [k for k in REQUIRED_FIELDS if k not in doc]
    if missing:
        raise ValueError(f"malformed record: missing {', '.join(missing)}")
    lat, lon = _number(doc, "lat"), _number(doc, "lon")
    if not -90 <= lat <= 90:
        raise ValueError("latitude out of range")
    if not -180 <= lon <= 180:
        raise ValueError("longitude out of range")
    if doc["anomaly_type"] not in ANOMALY_TYPES:
        raise ValueError(f"unknown anomaly_type {doc['anomaly_type']!r}")
    if doc["severity"] not in SEVERITIES:
        raise ValueError(f"unknown severity {doc['severity']!r}")
    if not isinstance(doc["timestamp"], str):
        raise ValueError("unparseable timestamp")
    try:
        ts = parse_timestamp(doc["timestamp"])
    except ValueError:
        raise ValueError(f"unparseable timestamp {doc['timestamp']!r}") from None
    return RawReport(
        device_id=str(doc["device_id"]),
        timestamp=ts,
        lat=lat,
        lon=lon,
        anomaly_type=doc["anomaly_type"],
        severity=doc["severity"],
        report_id=str(doc.get("id", "")),
        line=line,
    )


def parse_reports(lines: Iterable[str]) -> tuple[list[RawReport], list[LineError]]:
    """Parse JSON Lines; each bad line becomes a :class:`LineError`, blank lines are skipped."""
    reports, errors = [], []
    for n, text in enumerate(lines, start=1):
        if not text.strip():
            continue
        try:
            reports.append(parse_report(json.loads(text), n))
        except json.JSONDecodeError as exc:
            errors.append(LineError(n, f"malformed record: {exc.msg}"))
        except ValueError as exc:
            errors.append(LineError(n, str(exc)))
    return reports, errors


def dedup_reports(reports: Sequence[RawReport]) -> list[RawReport]:
    """Drop repeats of a kept report from the same device, type, place and moment.

    Reports are considered in time order (input order on equal times) and
    the earliest of a cluster is kept. The result is in that time order.
    """
    kept: list[RawReport] = []
    by_key: dict[tuple[str, str], list[RawReport]] = {}
    for rep in sorted(reports, key=lambda r: r.timestamp):
        earlier = by_key.setdefault((rep.device_id, rep.anomaly_type), [])
        if any(
            abs((rep.timestamp - k.timestamp).total_seconds()) <= DEDUP_WINDOW_S
            and haversine_m((rep.lat, rep.lon), (k.lat, k.lon)) <= DEDUP_RADIUS_M
            for k in earlier
        ):
            continue
        earlier.append(rep)
        kept.append(rep)
    return kept


def ingest_reports(
    network: RoadNetwork,
    lines: Iterable[str],
    threshold_m: float = DEFAULT_MATCH_THRESHOLD_M,
) -> IngestStats:
    """Parse, deduplicate, map-match and attach a batch of report lines."""
    lines = list(lines)
    stats = IngestStats(lines=sum(1 for t in lines if t.strip()))
    reports, errors = parse_reports(lines)
    stats.errors = errors
    stats.rejected_invalid = len(errors)
    unique = dedup_reports(reports)
    stats.deduplicated = len(reports) - len(unique)
    for rep in unique:
        before = network.stats.already_present
        rec = network.attach_anomaly(
            rep.report_id, rep.lat, rep.lon, rep.anomaly_type, rep.severity,
            rep.timestamp, rep.device_id, threshold_m,
        )
        if rec is None:
            stats.rejected_unmatched += 1
        elif network.stats.already_present > before:
            stats.deduplicated += 1
        else:
            stats.accepted += 1
    return stats


def _read_json(path: str | Path) -> Any:
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc


def read_lines(path: str | Path) -> list[str]:
    path = Path(path)
    try:
        return path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc


def network_from_doc(doc: Mapping[str, Any]) -> RoadNetwork:
    try:
        nodes = [RoadNode(int(n["id"]), float(n["lat"]), float(n["lon"])) for n in doc["nodes"]]
        segments = [
            RoadSegment(
                id=int(s["id"]),
                source=int(s["from"]),
                target=int(s["to"]),
                polyline=tuple((float(lat), float(lon)) for lat, lon in s["polyline"]),
                lanes=int(s.get("lanes", 1)),
                speed_kmh=float(s.get("speed_kmh", 50.0)),
                length_m=float(s.get("length_m", 0.0)),
            )
            for s in doc["segments"]
        ]
        return RoadNetwork(nodes, segments)
    except (KeyError, TypeError, ValueError) as exc:
        # InvalidArgument is a ValueError and carries its own message
        raise ConfigError(f"invalid network document: {exc}") from exc


def load_network(path: str | Path) -> RoadNetwork:
    return network_from_doc(_read_json(path))


def candidates_from_doc(network: RoadNetwork, doc: Mapping[str, Any]) -> list[RouteCandidate]:
    try:
        routes = doc["routes"]
        out = [
            imported_candidate(
                network,
                r["id"],
                [int(s) for s in r["segments"]],
                r.get("time_min"),
                r.get("length_km"),
            )
            for r in routes
        ]
    except (KeyError, TypeError, InvalidArgument) as exc:
        raise ConfigError(f"invalid candidates document: {exc}") from exc
    ids = [c.route_id for c in out]
    if len(set(ids)) != len(ids):
        raise ConfigError("candidate route ids are not unique")
    return out


def load_candidates(network: RoadNetwork, path: str | Path) -> list[RouteCandidate]:
    return candidates_from_doc(network, _read_json(path))


def _record_doc(rec: AnomalyRecord) -> dict[str, Any]:
    doc = asdict(rec)
    doc["timestamp"] = rec.timestamp.isoformat()
    return doc


def store_doc(network: RoadNetwork) -> dict[str, Any]:
    snap = network.snapshot()
    records = [
        _record_doc(rec) for sid in sorted(snap.anomalies) for rec in snap.anomalies[sid]
    ]
    return {"schema_version": STORE_SCHEMA_VERSION, "version": snap.version, "records": records}


def save_store(network: RoadNetwork, path: str | Path) -> None:
    Path(path).write_text(json.dumps(store_doc(network), indent=2) + "\n", encoding="utf-8")


def restore_store(network: RoadNetwork, doc: Mapping[str, Any]) -> None:
    if doc.get("schema_version") != STORE_SCHEMA_VERSION:
        raise ConfigError(f"unsupported store schema_version {doc.get('schema_version')!r}")
    try:
        records = [
            AnomalyRecord(**{**r, "timestamp": parse_timestamp(r["timestamp"])})
            for r in doc["records"]
        ]
        network.restore(records)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid anomaly store: {exc}") from exc


def load_store(network: RoadNetwork, path: str | Path) -> None:
    restore_store(network, _read_json(path))
