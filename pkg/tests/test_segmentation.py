# tests/test_segmentation.py
import pytest

from config.models import SegmentationConfig
from utils.exceptions import InvalidRecordError, UnsortedPointsError
from utils.projection import PlanarPoint
from utils.segmentation import (
    Event,
    EventKind,
    detect_missing_intervals,
    extract_events,
    reconstruct_points,
    segment_trace,
)

from conftest import make_points

CFG = SegmentationConfig()
# reconstructed points are sparse, keep them in one burst
WIDE_CFG = SegmentationConfig(gap_threshold_s=1000.0)


def _kinds(trace):
    return [e.kind for e in trace.events]


def _assert_contiguous(events):
    for a, b in zip(events, events[1:]):
        assert a.end_t == pytest.approx(b.t, abs=1e-9)
        assert a.end_x == pytest.approx(b.x, abs=1e-9)
        assert a.end_y == pytest.approx(b.y, abs=1e-9)


def test_stationary_points_make_one_pause() -> None:
    trace = extract_events(make_points([(5.0, 5.0)] * 10), CFG)

    assert len(trace.events) == 1
    ev = trace.events[0]
    assert ev.kind == EventKind.PAUSE
    assert (ev.x, ev.y, ev.t, ev.dt) == (5.0, 5.0, 0.0, 90.0)
    assert trace.gaps == []


def test_straight_line_is_one_flight() -> None:
    trace = extract_events(make_points([(10.0 * i, 0.0) for i in range(11)]), CFG)

    assert _kinds(trace) == [EventKind.FLIGHT]
    ev = trace.events[0]
    assert (ev.dx, ev.dy, ev.dt) == (100.0, 0.0, 100.0)


def test_pause_flight_pause() -> None:
    coords = [(0.0, 0.0)] * 10 + [(20.0 * i, 0.0) for i in range(1, 11)] + [(200.0, 0.0)] * 10
    trace = extract_events(make_points(coords), CFG)

    assert _kinds(trace) == [EventKind.PAUSE, EventKind.FLIGHT, EventKind.PAUSE]
    _assert_contiguous(trace.events)
    first, move, last = trace.events
    assert first.t == 0.0
    assert last.end_t == 290.0
    assert (move.x, move.y) == (first.x, first.y)
    assert (move.end_x, move.end_y) == pytest.approx((last.x, last.y))
    assert move.dx > 150.0


def test_l_shape_cuts_at_the_corner() -> None:
    coords = [(20.0 * i, 0.0) for i in range(11)] + [(200.0, 20.0 * i) for i in range(1, 11)]
    trace = extract_events(make_points(coords), CFG)

    assert _kinds(trace) == [EventKind.FLIGHT, EventKind.FLIGHT]
    corner = trace.events[0].end
    assert (corner.x, corner.y) == (200.0, 0.0)
    _assert_contiguous(trace.events)


def test_detect_missing_intervals() -> None:
    points = [PlanarPoint(0.0, 0.0, 0.0), PlanarPoint(1.0, 0.0, 10.0),
              PlanarPoint(50.0, 0.0, 200.0), PlanarPoint(51.0, 0.0, 210.0)]
    gaps = detect_missing_intervals(points, CFG)

    assert len(gaps) == 1
    assert (gaps[0].t_start, gaps[0].t_end) == (10.0, 200.0)
    assert gaps[0].anchor_start == PlanarPoint(1.0, 0.0, 10.0)
    assert gaps[0].anchor_end == PlanarPoint(50.0, 0.0, 200.0)


def test_gap_between_distant_pauses_is_kept() -> None:
    points = make_points([(0.0, 0.0)] * 10) + make_points([(1000.0, 0.0)] * 10, t0=400.0)
    trace = segment_trace(points, CFG)

    assert len(trace.gaps) == 1
    gap = trace.gaps[0]
    assert (gap.t_start, gap.t_end) == (90.0, 400.0)
    assert (gap.anchor_start.x, gap.anchor_end.x) == (0.0, 1000.0)
    assert trace.merged_gaps == []


def test_gap_between_nearby_pauses_is_merged() -> None:
    points = make_points([(0.0, 0.0)] * 10) + make_points([(10.0, 0.0)] * 10, t0=400.0)
    raw = extract_events(points, CFG)
    assert len(raw.gaps) == 1

    trace = segment_trace(points, CFG)
    assert trace.gaps == []
    assert len(trace.merged_gaps) == 1
    assert len(trace.events) == 1
    merged = trace.events[0]
    assert merged.kind == EventKind.PAUSE
    assert (merged.t, merged.end_t) == (0.0, 490.0)
    # both pauses last 90 s, so the merged location is their midpoint
    assert merged.x == pytest.approx(5.0)


def test_single_point_burst_anchors_both_gaps() -> None:
    points = (make_points([(0.0, 0.0)] * 10)
              + [PlanarPoint(500.0, 0.0, 300.0)]
              + make_points([(1000.0, 0.0)] * 10, t0=600.0))
    trace = extract_events(points, CFG)

    assert len(trace.events) == 2
    assert len(trace.gaps) == 2
    assert trace.gaps[0].anchor_end == PlanarPoint(500.0, 0.0, 300.0)
    assert trace.gaps[1].anchor_start == PlanarPoint(500.0, 0.0, 300.0)


def test_duplicate_timestamps_keep_first_point() -> None:
    points = [PlanarPoint(0.0, 0.0, 0.0), PlanarPoint(900.0, 0.0, 0.0)] + make_points([(0.0, 0.0)] * 9, t0=10.0)
    trace = extract_events(points, CFG)

    assert _kinds(trace) == [EventKind.PAUSE]
    assert trace.events[0].x == 0.0


def test_unsorted_points_raise() -> None:
    points = [PlanarPoint(0.0, 0.0, 10.0), PlanarPoint(0.0, 0.0, 0.0)]
    with pytest.raises(UnsortedPointsError):
        extract_events(points, CFG)


def test_empty_input_gives_empty_trace() -> None:
    trace = segment_trace([], CFG)
    assert trace.events == [] and trace.gaps == []


def test_events_tile_the_observed_span(commuter_day) -> None:
    t0 = commuter_day[0].t
    points = [p for p in commuter_day if not 30000.0 <= p.t - t0 < 33000.0]
    trace = segment_trace(points, CFG)
    covered = sum(e.dt for e in trace.events) + sum(g.duration for g in trace.gaps)

    first, last = trace.span
    assert covered == pytest.approx(last - first, abs=1e-6)
    for e in trace.events:
        if e.kind == EventKind.PAUSE:
            assert e.dx == 0.0 and e.dy == 0.0


@pytest.mark.parametrize("coords", [
    [(10.0 * i, 0.0) for i in range(11)],
    [(20.0 * i, 0.0) for i in range(11)] + [(200.0, 20.0 * i) for i in range(1, 11)],
    [(3.0, 4.0)] * 12,
    [(0.0, 0.0)] * 10 + [(20.0 * i, 0.0) for i in range(1, 11)] + [(200.0, 0.0)] * 10,
])
def test_resegmenting_reconstructed_points_is_stable(coords) -> None:
    trace = segment_trace(make_points(coords), WIDE_CFG)
    again = segment_trace(reconstruct_points(trace), WIDE_CFG)

    assert _kinds(again) == _kinds(trace)
    for a, b in zip(trace.events, again.events):
        assert (a.x, a.y, a.t, a.dx, a.dy, a.dt) == pytest.approx((b.x, b.y, b.t, b.dx, b.dy, b.dt))


def test_observed_pause_cannot_move() -> None:
    with pytest.raises(InvalidRecordError):
        Event(EventKind.PAUSE, 0.0, 0.0, 0.0, 1.0, 0.0, 10.0)
    with pytest.raises(InvalidRecordError):
        Event(EventKind.FLIGHT, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0)
