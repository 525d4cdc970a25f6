# utils/segmentation.py
"""
Flight / pause segmentation of planar point sequences (rectangular method)
"""

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from config.models import SegmentationConfig
from utils.exceptions import InvalidRecordError, UnsortedPointsError
from utils.projection import PlanarPoint, ProjectionFrame

logger = logging.getLogger(__name__)

DISPLACEMENT_EPS = 1e-9


class EventKind(str, Enum):
    FLIGHT = 'flight'
    PAUSE = 'pause'


@dataclass(frozen=True)
class Event:
    """One flight or pause: start state (x, y, t) plus displacement (dx, dy, dt)."""
    kind: EventKind
    x: float
    y: float
    t: float
    dx: float
    dy: float
    dt: float
    observed: bool = True

    def __post_init__(self):
        if not self.dt > 0:
            raise InvalidRecordError(f"event duration must be positive, got {self.dt}")
        # imputed pauses may carry bridge drift, observed ones never move
        if self.kind == EventKind.PAUSE and self.observed and (self.dx != 0.0 or self.dy != 0.0):
            raise InvalidRecordError("observed pause with non-zero displacement")

    @property
    def is_flight(self) -> bool:
        return self.kind == EventKind.FLIGHT

    @property
    def end_x(self) -> float:
        return self.x + self.dx

    @property
    def end_y(self) -> float:
        return self.y + self.dy

    @property
    def end_t(self) -> float:
        return self.t + self.dt

    @property
    def length(self) -> float:
        return float(np.hypot(self.dx, self.dy))

    @property
    def start(self) -> PlanarPoint:
        return PlanarPoint(self.x, self.y, self.t)

    @property
    def end(self) -> PlanarPoint:
        return PlanarPoint(self.end_x, self.end_y, self.end_t)

    def position_at(self, t: float) -> Tuple[float, float]:
        """Location at time t, constant speed along the segment."""
        s = min(max((t - self.t) / self.dt, 0.0), 1.0)
        return self.x + s * self.dx, self.y + s * self.dy


@dataclass(frozen=True)
class MissingInterval:
    t_start: float
    t_end: float
    anchor_start: PlanarPoint
    anchor_end: PlanarPoint

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise InvalidRecordError("missing interval must have positive duration")

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start


@dataclass
class MobilityTrace:
    """Ordered events and missing intervals of one subject."""
    events: List[Event]
    gaps: List[MissingInterval]
    frame: Optional[ProjectionFrame] = None
    subject_id: str = ''
    merged_gaps: List[MissingInterval] = field(default_factory=list)
    t_first: Optional[float] = None
    t_last: Optional[float] = None

    @property
    def span(self) -> Tuple[float, float]:
        """Observed span (first point, last point)."""
        starts = [e.t for e in self.events[:1]] + [g.t_start for g in self.gaps[:1]]
        ends = [e.end_t for e in self.events[-1:]] + [g.t_end for g in self.gaps[-1:]]
        first = self.t_first if self.t_first is not None else min(starts, default=0.0)
        last = self.t_last if self.t_last is not None else max(ends, default=first)
        return first, last

    def timeline(self) -> List[Union[Event, MissingInterval]]:
        """Events and gaps interleaved in time order."""
        items = list(self.events) + list(self.gaps)
        return sorted(items, key=lambda item: item.t if isinstance(item, Event) else item.t_start)

    def copy_with(self, **changes) -> 'MobilityTrace':
        return replace(self, **changes)


def _as_arrays(points: Sequence[PlanarPoint]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    xs = np.array([p.x for p in points], dtype=float)
    ys = np.array([p.y for p in points], dtype=float)
    ts = np.array([p.t for p in points], dtype=float)
    return xs, ys, ts


def _check_sorted(ts: np.ndarray):
    if ts.size > 1 and np.any(np.diff(ts) < 0):
        raise UnsortedPointsError()


def _dedupe_times(xs, ys, ts):
    """Keep the first point of every run of equal timestamps."""
    if ts.size < 2:
        return xs, ys, ts
    keep = np.concatenate([[True], np.diff(ts) > 0])
    return xs[keep], ys[keep], ts[keep]


def segment_distances(px, py, ax, ay, bx, by) -> np.ndarray:
    """Distances from points (px, py) to the segment a-b."""
    vx, vy = bx - ax, by - ay
    norm2 = vx * vx + vy * vy
    if norm2 <= 0:
        return np.hypot(px - ax, py - ay)
    s = np.clip(((px - ax) * vx + (py - ay) * vy) / norm2, 0.0, 1.0)
    return np.hypot(px - (ax + s * vx), py - (ay + s * vy))


def _pause_end(xs, ys, start: int, radius: float) -> int:
    """Last index k such that every point start..k lies within radius of point start."""
    d = np.hypot(xs[start:] - xs[start], ys[start:] - ys[start])
    outside = np.nonzero(d > radius)[0]
    if outside.size == 0:
        return xs.size - 1
    return start + int(outside[0]) - 1


def _segment_burst(xs, ys, ts, cfg: SegmentationConfig) -> List[Tuple[EventKind, int, int]]:
    """Partition one burst into (kind, first index, last index) segments."""
    m = xs.size
    r = cfg.pause_radius_m

    # whole burst inside the radius is a single pause
    if np.all(np.hypot(xs - xs.mean(), ys - ys.mean()) <= r) or _pause_end(xs, ys, 0, r) == m - 1:
        return [(EventKind.PAUSE, 0, m - 1)]

    def pause_from(i: int) -> Optional[int]:
        k = _pause_end(xs, ys, i, r)
        if k > i and ts[k] - ts[i] >= cfg.min_pause_s:
            return k
        return None

    segments: List[Tuple[EventKind, int, int]] = []
    i = 0
    after_pause = False
    while i < m - 1:
        if not after_pause:
            k = pause_from(i)
            if k is not None:
                segments.append((EventKind.PAUSE, i, k))
                i = k
                after_pause = True
                continue
        after_pause = False
        j = i + 1
        while j < m - 1:
            if pause_from(j) is not None:
                break
            nxt = j + 1
            dev = segment_distances(xs[i + 1:nxt], ys[i + 1:nxt], xs[i], ys[i], xs[nxt], ys[nxt])
            if dev.size and dev.max() > r:
                # cut at the point of farthest deviation
                j = i + 1 + int(np.argmax(dev))
                break
            j = nxt
        segments.append((EventKind.FLIGHT, i, j))
        i = j
    return segments


def _events_from_segments(xs, ys, ts, segments) -> List[Event]:
    locations = []
    for kind, a, b in segments:
        if kind == EventKind.PAUSE:
            locations.append((float(xs[a:b + 1].mean()), float(ys[a:b + 1].mean())))
        else:
            locations.append(None)

    events: List[Event] = []
    for idx, (kind, a, b) in enumerate(segments):
        dt = float(ts[b] - ts[a])
        if kind == EventKind.PAUSE:
            cx, cy = locations[idx]
            events.append(Event(EventKind.PAUSE, cx, cy, float(ts[a]), 0.0, 0.0, dt))
            continue
        # flight endpoints snap to neighbouring pause centroids so events chain
        sx, sy = float(xs[a]), float(ys[a])
        ex, ey = float(xs[b]), float(ys[b])
        if idx > 0 and locations[idx - 1] is not None:
            sx, sy = locations[idx - 1]
        elif events:
            sx, sy = events[-1].end_x, events[-1].end_y
        if idx + 1 < len(segments) and locations[idx + 1] is not None:
            ex, ey = locations[idx + 1]
        events.append(Event(EventKind.FLIGHT, sx, sy, float(ts[a]), ex - sx, ey - sy, dt))
    return _normalize_run(events)


def _normalize_run(events: List[Event]) -> List[Event]:
    """Turn zero-length flights into pauses and merge adjacent pauses.

    Events must form one contiguous run.
    """
    changed = True
    while changed and events:
        changed = False
        out: List[Event] = []
        for ev in events:
            if ev.is_flight and np.hypot(ev.dx, ev.dy) <= DISPLACEMENT_EPS:
                ev = Event(EventKind.PAUSE, ev.x, ev.y, ev.t, 0.0, 0.0, ev.dt, ev.observed)
                changed = True
            if out and not ev.is_flight and not out[-1].is_flight:
                prev = out.pop()
                total = prev.dt + ev.dt
                cx = (prev.x * prev.dt + ev.x * ev.dt) / total
                cy = (prev.y * prev.dt + ev.y * ev.dt) / total
                ev = Event(EventKind.PAUSE, cx, cy, prev.t, 0.0, 0.0, total, prev.observed and ev.observed)
                changed = True
            out.append(ev)
        events = _rechain(out)
    return events


def _rechain(events: List[Event]) -> List[Event]:
    """Re-snap flight endpoints to the neighbouring pause locations."""
    out = list(events)
    for idx, ev in enumerate(out):
        if not ev.is_flight:
            continue
        sx, sy = ev.x, ev.y
        ex, ey = ev.end_x, ev.end_y
        if idx > 0:
            sx, sy = out[idx - 1].end_x, out[idx - 1].end_y
        if idx + 1 < len(out) and not out[idx + 1].is_flight:
            ex, ey = out[idx + 1].x, out[idx + 1].y
        if (sx, sy, ex, ey) != (ev.x, ev.y, ev.end_x, ev.end_y):
            out[idx] = replace(ev, x=sx, y=sy, dx=ex - sx, dy=ey - sy)
    return out


def _split_bursts(ts: np.ndarray, gap_threshold_s: float) -> List[Tuple[int, int]]:
    cuts = np.nonzero(np.diff(ts) > gap_threshold_s)[0]
    starts = np.concatenate([[0], cuts + 1])
    ends = np.concatenate([cuts, [ts.size - 1]])
    return [(int(a), int(b)) for a, b in zip(starts, ends)]


def detect_missing_intervals(points: Sequence[PlanarPoint],
                             cfg: Optional[SegmentationConfig] = None) -> List[MissingInterval]:
    """Every inter-point gap longer than the threshold, anchored on the flanking points."""
    cfg = cfg or SegmentationConfig()
    xs, ys, ts = _as_arrays(points)
    _check_sorted(ts)
    gaps = []
    for idx in np.nonzero(np.diff(ts) > cfg.gap_threshold_s)[0]:
        a, b = int(idx), int(idx) + 1
        gaps.append(MissingInterval(
            t_start=float(ts[a]), t_end=float(ts[b]),
            anchor_start=PlanarPoint(float(xs[a]), float(ys[a]), float(ts[a])),
            anchor_end=PlanarPoint(float(xs[b]), float(ys[b]), float(ts[b])),
        ))
    return gaps


def extract_events(points: Sequence[PlanarPoint], cfg: Optional[SegmentationConfig] = None,
                   frame: Optional[ProjectionFrame] = None, subject_id: str = '') -> MobilityTrace:
    """Segment a sorted point sequence into flights, pauses and missing intervals.

    Args:
        points: planar points sorted by time
        cfg: segmentation parameters
        frame: projection frame the points came from, carried on the trace
        subject_id: opaque subject label
    Returns:
        MobilityTrace whose gap anchors coincide with the adjacent event endpoints
    Raises:
        UnsortedPointsError: timestamps decrease somewhere
    """
    cfg = cfg or SegmentationConfig()
    xs, ys, ts = _as_arrays(points)
    _check_sorted(ts)
    xs, ys, ts = _dedupe_times(xs, ys, ts)
    if ts.size == 0:
        return MobilityTrace(events=[], gaps=[], frame=frame, subject_id=subject_id)

    events: List[Event] = []
    gaps: List[MissingInterval] = []
    bursts = _split_bursts(ts, cfg.gap_threshold_s)
    ends: List[PlanarPoint] = []
    starts: List[PlanarPoint] = []
    for a, b in bursts:
        if b == a:
            # single point: no event, both neighbouring gaps anchor on it
            point = PlanarPoint(float(xs[a]), float(ys[a]), float(ts[a]))
            starts.append(point)
            ends.append(point)
            continue
        segments = _segment_burst(xs[a:b + 1], ys[a:b + 1], ts[a:b + 1], cfg)
        run = _events_from_segments(xs[a:b + 1], ys[a:b + 1], ts[a:b + 1], segments)
        starts.append(run[0].start)
        ends.append(run[-1].end)
        events.extend(run)

    for k in range(len(bursts) - 1):
        gaps.append(MissingInterval(
            t_start=ends[k].t, t_end=starts[k + 1].t,
            anchor_start=ends[k], anchor_end=starts[k + 1],
        ))
    logger.debug("segmented %d points into %d events and %d gaps", ts.size, len(events), len(gaps))
    return MobilityTrace(events=events, gaps=gaps, frame=frame, subject_id=subject_id,
                         t_first=float(ts[0]), t_last=float(ts[-1]))


def _snap_anchors(timeline) -> List[MissingInterval]:
    """Recompute gap anchors from the events around each gap."""
    gaps = []
    for idx, item in enumerate(timeline):
        if isinstance(item, Event):
            continue
        start, end = item.anchor_start, item.anchor_end
        if idx > 0 and isinstance(timeline[idx - 1], Event):
            start = timeline[idx - 1].end
        if idx + 1 < len(timeline) and isinstance(timeline[idx + 1], Event):
            end = timeline[idx + 1].start
        gaps.append(replace(item, anchor_start=start, anchor_end=end))
    return gaps


def merge_pause_flanked_gaps(trace: MobilityTrace, cfg: Optional[SegmentationConfig] = None) -> MobilityTrace:
    """Absorb gaps flanked by two nearby pauses into one longer pause.

    The merged pause sits at the duration-weighted mean of the two pause
    locations; absorbed gaps are kept in ``merged_gaps`` for missing-minutes
    accounting.
    """
    cfg = cfg or SegmentationConfig()
    timeline = trace.timeline()
    merged_gaps = list(trace.merged_gaps)
    out: List[Union[Event, MissingInterval]] = []
    idx = 0
    while idx < len(timeline):
        item = timeline[idx]
        if (isinstance(item, MissingInterval) and out and isinstance(out[-1], Event)
                and idx + 1 < len(timeline) and isinstance(timeline[idx + 1], Event)):
            prev, nxt = out[-1], timeline[idx + 1]
            if (not prev.is_flight and not nxt.is_flight
                    and np.hypot(prev.x - nxt.x, prev.y - nxt.y) <= cfg.pause_merge_m):
                weight = prev.dt + nxt.dt
                cx = (prev.x * prev.dt + nxt.x * nxt.dt) / weight
                cy = (prev.y * prev.dt + nxt.y * nxt.dt) / weight
                out[-1] = Event(EventKind.PAUSE, cx, cy, prev.t, 0.0, 0.0,
                                nxt.end_t - prev.t, prev.observed and nxt.observed)
                merged_gaps.append(item)
                idx += 2
                continue
        out.append(item)
        idx += 1

    # re-chain each contiguous run of events around the moved pauses
    events: List[Event] = []
    run: List[Event] = []
    rebuilt: List[Union[Event, MissingInterval]] = []
    for item in out + [None]:
        if isinstance(item, Event):
            run.append(item)
            continue
        if run:
            chained = _rechain(run)
            events.extend(chained)
            rebuilt.extend(chained)
            run = []
        if item is not None:
            rebuilt.append(item)
    gaps = _snap_anchors(rebuilt)
    if len(merged_gaps) > len(trace.merged_gaps):
        logger.debug("merged %d pause-flanked gaps", len(merged_gaps) - len(trace.merged_gaps))
    return trace.copy_with(events=events, gaps=gaps, merged_gaps=merged_gaps)


def reconstruct_points(trace: MobilityTrace) -> List[PlanarPoint]:
    """Point sequence at every event boundary and gap anchor."""
    points = {}
    for ev in trace.events:
        points.setdefault(ev.t, ev.start)
        points.setdefault(ev.end_t, ev.end)
    for gap in trace.gaps:
        points.setdefault(gap.t_start, gap.anchor_start)
        points.setdefault(gap.t_end, gap.anchor_end)
    return [points[t] for t in sorted(points)]


def segment_trace(points: Sequence[PlanarPoint], cfg: Optional[SegmentationConfig] = None,
                  frame: Optional[ProjectionFrame] = None, subject_id: str = '') -> MobilityTrace:
    """extract_events followed by the pause-merge rule."""
    cfg = cfg or SegmentationConfig()
    return merge_pause_flanked_gaps(extract_events(points, cfg, frame, subject_id), cfg)
