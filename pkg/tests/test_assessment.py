from __future__ import annotations

import math
from datetime import datetime, timezone

import numpy as np
import pytest

from roadq.assessment import (
    SegmentFeatures,
    anomaly_density,
    assess_network,
    assess_segment,
    segment_features,
    severity_index,
)
from roadq.errors import InvalidArgument
from roadq.fuzzy import classify
from roadq.network import EARTH_RADIUS_M, AnomalyRecord, RoadNetwork, RoadSegment

T0 = datetime(2021, 3, 1, tzinfo=timezone.utc)
M_PER_DEG = EARTH_RADIUS_M * math.pi / 180


def segment_of_length(meters: float, sid: int = 1) -> RoadSegment:
    return RoadSegment(sid, 1, 2, ((0.0, 0.0), (meters / M_PER_DEG, 0.0)))


def records(severities, sid: int = 1):
    return [
        AnomalyRecord(f"r{i}", sid, "pothole", s, T0, 1.0, 0.0, 0.0)
        for i, s in enumerate(severities)
    ]


def test_density_zero():
    assert anomaly_density(segment_of_length(250), []) == 0.0


def test_density_five_on_250m():
    seg = segment_of_length(250)
    assert seg.length_m == pytest.approx(250, rel=1e-12)
    assert anomaly_density(seg, records(["mild"] * 5)) == pytest.approx(0.5, rel=1e-12)


def test_density_caps_at_one():
    assert anomaly_density(segment_of_length(500), records(["mild"] * 30)) == 1.0


def test_density_scales_with_dmax():
    seg = segment_of_length(1000)
    assert anomaly_density(seg, records(["mild"] * 10), d_max=20) == pytest.approx(0.5)
    with pytest.raises(InvalidArgument):
        anomaly_density(seg, [], d_max=0)


def test_density_rejects_foreign_records():
    with pytest.raises(InvalidArgument, match="do not belong"):
        anomaly_density(segment_of_length(100), records(["mild"], sid=2))


def test_severity_index():
    assert severity_index([]) == 0.0
    assert severity_index(records(["severe"] * 4)) == 1.0
    assert severity_index(records(["mild", "severe"])) == pytest.approx(2 / 3, abs=1e-15)
    assert severity_index(records(["moderate"])) == pytest.approx(2 / 3)


@pytest.mark.parametrize(
    "ra, sev, lanes, label",
    [(0.9, 0.9, 1, "Poor"), (0.02, 0.05, 2, "Good"), (0.5, 0.5, 2, "Moderate")],
)
def test_assess_examples(assess_fis, ra, sev, lanes, label):
    a = assess_segment(SegmentFeatures(ra, sev, lanes), assess_fis, segment_id=4)
    assert a.label == label
    assert a.segment_id == 4
    assert a.fis_digest == assess_fis.digest
    assert a.label == classify(assess_fis, a.quality_score)


def test_assess_reference_scores(assess_fis):
    # frozen from the shipped configuration
    cases = {(0.9, 0.9, 1): 0.2461, (0.02, 0.05, 2): 0.7910, (0.5, 0.5, 2): 0.5000}
    for (ra, sev, lanes), score in cases.items():
        got = assess_segment(SegmentFeatures(ra, sev, lanes), assess_fis).quality_score
        assert got == pytest.approx(score, abs=1e-4)


def grid_scores(fis, n=21):
    ras = np.linspace(0, 1, n)
    sevs = np.linspace(0, 1, n)
    lanes = np.linspace(1, 4, n)
    out = np.empty((n, n, n))
    for i, r in enumerate(ras):
        for j, s in enumerate(sevs):
            for k, l in enumerate(lanes):
                out[i, j, k] = assess_segment(SegmentFeatures(r, s, l), fis).quality_score
    return out


@pytest.fixture(scope="module")
def grid(assess_fis):
    return grid_scores(assess_fis)


def test_monotone_in_density(grid):
    assert np.all(np.diff(grid, axis=0) <= 1e-12)


def test_monotone_in_severity(grid):
    assert np.all(np.diff(grid, axis=1) <= 1e-12)


def test_lane_relief(grid):
    assert np.all(np.diff(grid, axis=2) >= -1e-12)


def test_two_lanes_never_worse_than_one(assess_fis):
    for ra in np.linspace(0, 1, 11):
        for sev in np.linspace(0, 1, 11):
            one = assess_segment(SegmentFeatures(ra, sev, 1), assess_fis).quality_score
            two = assess_segment(SegmentFeatures(ra, sev, 2), assess_fis).quality_score
            assert two >= one - 1e-12


def test_empty_network(assess_fis):
    assert assess_network(RoadNetwork().snapshot(), assess_fis) == {}


def test_zero_anomaly_network_is_all_good(assess_fis, demo_network):
    result = assess_network(demo_network.snapshot(), assess_fis)
    assert len(result) == 19
    assert {a.label for a in result.values()} == {"Good"}
    for a in result.values():
        assert a.features.ra == 0 and a.features.severity_index == 0


def test_assess_network_is_pure(assess_fis, demo_network):
    seg = demo_network.segments[101]
    demo_network.attach_anomaly("x", *seg.polyline[0], "crack", "moderate", T0)
    snap = demo_network.snapshot()
    assert assess_network(snap, assess_fis) == assess_network(snap, assess_fis)


def test_segment_features_from_records():
    seg = segment_of_length(500)
    f = segment_features(seg, records(["mild", "severe", "severe", "moderate"]))
    assert f.ra == pytest.approx(4 / 0.5 / 40)
    assert f.severity_index == pytest.approx(0.75)
    assert f.lanes == 1.0
