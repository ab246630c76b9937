from __future__ import annotations

import json
from datetime import datetime, timedelta, timezone
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from roadq.config import shipped_path
from roadq.errors import ConfigError
from roadq.ingest import (
    RawReport,
    candidates_from_doc,
    dedup_reports,
    ingest_reports,
    load_candidates,
    load_network,
    network_from_doc,
    parse_reports,
    parse_timestamp,
    read_lines,
    restore_store,
    store_doc,
)

FIXTURES = Path(__file__).parent / "fixtures"
T0 = datetime(2019, 6, 3, 7, 30, tzinfo=timezone.utc)

GOOD = {
    "device_id": "veh-01",
    "timestamp": "2019-06-03T07:30:00Z",
    "lat": 44.23,
    "lon": -76.5,
    "anomaly_type": "pothole",
    "severity": "severe",
}


def line(**changes) -> str:
    return json.dumps(GOOD | changes)


def report(device="d", kind="pothole", seconds=0.0, north_m=0.0, lat=44.23):
    return RawReport(
        device_id=device,
        timestamp=T0 + timedelta(seconds=seconds),
        lat=lat + north_m / 111_194.9,
        lon=-76.5,
        anomaly_type=kind,
        severity="mild",
    )


# --- parsing ---------------------------------------------------------------


def test_parse_well_formed_line():
    reports, errors = parse_reports([line()])
    assert errors == []
    (r,) = reports
    assert r.timestamp == T0
    assert r.line == 1
    assert len(r.report_id) == 16


def test_explicit_report_id_is_kept():
    (r,), _ = parse_reports([line(id="abc")])
    assert r.report_id == "abc"


def test_content_id_is_stable():
    (a,), _ = parse_reports([line()])
    (b,), _ = parse_reports([line()])
    (c,), _ = parse_reports([line(severity="mild")])
    assert a.report_id == b.report_id != c.report_id


def test_latitude_out_of_range_is_positioned():
    reports, errors = parse_reports([line(), line(lat=95)])
    assert len(reports) == 1
    assert errors[0].line == 2
    assert "latitude out of range" in str(errors[0])


@pytest.mark.parametrize(
    "text, message",
    [
        ("{oops", "malformed record"),
        ("[1, 2]", "malformed record"),
        (json.dumps({k: v for k, v in GOOD.items() if k != "lon"}), "missing lon"),
        (line(lon=-200), "longitude out of range"),
        (line(lat="north"), "lat must be a number"),
        (line(anomaly_type="sinkhole"), "unknown anomaly_type"),
        (line(severity="catastrophic"), "unknown severity"),
        (line(timestamp="yesterday"), "unparseable timestamp"),
        (line(timestamp=12), "unparseable timestamp"),
    ],
)
def test_bad_lines(text, message):
    reports, errors = parse_reports([text])
    assert reports == []
    assert message in errors[0].message


def test_empty_input():
    assert parse_reports([]) == ([], [])


def test_timestamps_normalised_to_utc():
    assert parse_timestamp("2019-06-03T09:30:00+02:00") == T0
    assert parse_timestamp("2019-06-03T07:30:00") == T0
    assert parse_timestamp("2019-06-03T07:30:00z") == T0


@settings(max_examples=50)
@given(st.lists(st.one_of(st.just(line()), st.just("{bad"), st.just(line(lat=-91)), st.text(max_size=20))))
def test_parse_never_aborts(lines):
    lines = [l.replace("\n", " ") for l in lines]
    reports, errors = parse_reports(lines)
    assert len(reports) + len(errors) == sum(1 for l in lines if l.strip())


# --- dedup -----------------------------------------------------------------


def test_identical_record_twice():
    assert len(dedup_reports([report(), report()])) == 1


def test_same_spot_sixty_seconds_apart():
    assert len(dedup_reports([report(), report(seconds=60)])) == 2


def test_two_devices_same_second():
    assert len(dedup_reports([report(device="a"), report(device="b")])) == 2


def test_window_edges():
    assert len(dedup_reports([report(), report(seconds=10, north_m=4.9)])) == 1
    assert len(dedup_reports([report(), report(seconds=10.5)])) == 2
    assert len(dedup_reports([report(), report(north_m=5.5)])) == 2
    assert len(dedup_reports([report(), report(kind="crack")])) == 2


def test_keeps_earliest():
    late, early = report(seconds=5), report(seconds=1)
    assert dedup_reports([late, early]) == [early]


report_strategy = st.builds(
    report,
    device=st.sampled_from(["a", "b"]),
    kind=st.sampled_from(["pothole", "crack"]),
    seconds=st.floats(0, 40),
    north_m=st.floats(0, 12),
)


@given(st.lists(report_strategy, max_size=25))
def test_dedup_idempotent(reports):
    once = dedup_reports(reports)
    assert dedup_reports(once) == once
    assert set(once) <= set(reports)


# --- ingest pipeline -------------------------------------------------------


def test_malformed_fixture_accounting(demo_network):
    lines = read_lines(FIXTURES / "ingest_malformed.jsonl")
    stats = ingest_reports(demo_network, lines)
    assert (stats.lines, stats.accepted, stats.rejected_invalid, stats.deduplicated) == (11, 9, 1, 1)
    assert stats.rejected_unmatched == 0
    assert stats.balanced()


def test_reingest_is_a_no_op(demo_network):
    lines = read_lines(FIXTURES / "ingest_malformed.jsonl")
    ingest_reports(demo_network, lines)
    version = demo_network.version
    again = ingest_reports(demo_network, lines)
    assert again.accepted == 0 and again.deduplicated == 10 and again.balanced()
    assert demo_network.version == version


def test_unmatched_reports_counted(demo_network):
    stats = ingest_reports(demo_network, [line(lat=45.0)])
    assert stats.rejected_unmatched == 1 and stats.balanced()


def test_demo_reports_accounting(demo_network):
    stats = ingest_reports(demo_network, read_lines(shipped_path("demo_reports.jsonl")))
    assert stats.balanced()
    assert (stats.rejected_invalid, stats.rejected_unmatched, stats.deduplicated) == (1, 1, 1)


# --- documents -------------------------------------------------------------


def test_store_round_trip(demo_network):
    ingest_reports(demo_network, read_lines(FIXTURES / "ingest_malformed.jsonl"))
    doc = json.loads(json.dumps(store_doc(demo_network)))
    fresh = load_network(shipped_path("demo_network.json"))
    restore_store(fresh, doc)
    assert fresh.snapshot().anomalies == demo_network.snapshot().anomalies


def test_store_schema_version_checked(demo_network):
    with pytest.raises(ConfigError, match="schema_version"):
        restore_store(demo_network, {"schema_version": 7, "records": []})


def test_network_document_errors(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_network(tmp_path / "none.json")
    with pytest.raises(ConfigError, match="invalid network"):
        network_from_doc({"nodes": [{"id": 1, "lat": 0, "lon": 0}]})
    with pytest.raises(ConfigError, match="unknown node"):
        network_from_doc({
            "nodes": [{"id": 1, "lat": 0, "lon": 0}],
            "segments": [{"id": 1, "from": 1, "to": 2, "polyline": [[0, 0], [0, 0.1]]}],
        })


def test_demo_network_shape(demo_network):
    assert len(demo_network.segments) == 19
    assert len(demo_network.nodes) == 19


def test_candidate_documents(demo_network):
    cands = load_candidates(demo_network, shipped_path("demo_candidates.json"))
    assert [(c.route_id, c.time_min, c.length_km) for c in cands] == [(1, 5.0, 1.3), (2, 7.0, 1.4)]
    with pytest.raises(ConfigError, match="not unique"):
        candidates_from_doc(demo_network, {"routes": [{"id": 1, "segments": [101]}] * 2})
    with pytest.raises(ConfigError, match="invalid candidates"):
        candidates_from_doc(demo_network, {"routes": [{"id": 1, "segments": [101, 999]}]})
    with pytest.raises(ConfigError):
        candidates_from_doc(demo_network, {})
