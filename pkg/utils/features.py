# utils/features.py
"""
Daily mobility measures, significant locations and home estimation

Every event is treated as a straight segment traversed at constant speed, so
time-in-disc, radius of gyration and occupancy are evaluated exactly on the
segments rather than on resampled points.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial import ConvexHull, QhullError
from scipy.spatial.distance import pdist

from config.models import FeatureConfig
from config.settings import DAY_SECONDS, FEATURE_COLUMNS, HOUR_SECONDS
from utils.exceptions import MobilityError
from utils.imputer import confidence_interval
from utils.projection import PlanarPoint
from utils.segmentation import Event, MobilityTrace

logger = logging.getLogger(__name__)

TIE_EPS = 1e-9


@dataclass(frozen=True)
class SignificantLocation:
    id: int
    center: PlanarPoint
    total_pause_s: float
    is_home: bool = False


@dataclass
class DailyFeatureVector:
    """The 15 measures of one subject-day, optional (lo, hi) per measure."""
    subject_id: str
    date: str
    hometime_min: float = float('nan')
    dist_travelled_m: float = float('nan')
    rog_m: float = float('nan')
    max_diam_m: float = float('nan')
    max_home_dist_m: float = float('nan')
    sig_locs_visited: float = float('nan')
    avg_flight_len_m: float = float('nan')
    std_flight_len_m: float = float('nan')
    avg_flight_dur_s: float = float('nan')
    std_flight_dur_s: float = float('nan')
    frac_pause: float = float('nan')
    sig_loc_entropy: float = float('nan')
    mins_missing: float = float('nan')
    circdn_rtn: float = float('nan')
    wkend_day_rtn: float = float('nan')
    valid: bool = True
    weekend: bool = False
    intervals: Dict[str, Tuple[float, float]] = field(default_factory=dict)

    def measures(self) -> Dict[str, float]:
        return {name: getattr(self, name) for name in FEATURE_COLUMNS}

    def to_row(self) -> Dict[str, object]:
        row: Dict[str, object] = {'subject_id': self.subject_id, 'date': self.date}
        for name in FEATURE_COLUMNS:
            row[name] = getattr(self, name)
            if self.intervals:
                lo, hi = self.intervals.get(name, (float('nan'), float('nan')))
                row[f'{name}_lo'] = lo
                row[f'{name}_hi'] = hi
        return row


# -- time helpers ---------------------------------------------------------

def local_day_start(t: float, utc_offset_s: float = 0.0) -> float:
    """UTC epoch of the local midnight at or before t."""
    return math.floor((t + utc_offset_s) / DAY_SECONDS) * DAY_SECONDS - utc_offset_s


def day_label(day_start: float, utc_offset_s: float = 0.0) -> Tuple[str, bool]:
    """ISO date and weekend flag of the local day starting at day_start."""
    local = datetime.fromtimestamp(day_start + utc_offset_s, tz=timezone.utc)
    return local.date().isoformat(), local.weekday() >= 5


def _overlap(a0: float, a1: float, b0: float, b1: float) -> float:
    return max(0.0, min(a1, b1) - max(a0, b0))


def clip_event(ev: Event, t0: float, t1: float) -> Optional[Event]:
    """The part of ev inside [t0, t1], or None."""
    a, b = max(ev.t, t0), min(ev.end_t, t1)
    if b - a <= 0:
        return None
    if a == ev.t and b == ev.end_t:
        return ev
    xa, ya = ev.position_at(a)
    xb, yb = ev.position_at(b)
    return replace(ev, x=xa, y=ya, t=a, dx=xb - xa, dy=yb - ya, dt=b - a)


def split_days(events: Sequence[Event], utc_offset_s: float = 0.0,
               span: Optional[Tuple[float, float]] = None) -> Dict[float, List[Event]]:
    """Events clipped to local days, keyed by the day's UTC start."""
    if span is None:
        if not events:
            return {}
        span = (events[0].t, events[-1].end_t)
    days: Dict[float, List[Event]] = {}
    day = local_day_start(span[0], utc_offset_s)
    while True:
        days[day] = []
        day += DAY_SECONDS
        if day >= span[1]:
            break
    for ev in events:
        day = local_day_start(ev.t, utc_offset_s)
        while day < ev.end_t:
            piece = clip_event(ev, day, day + DAY_SECONDS)
            if piece is not None:
                days.setdefault(day, []).append(piece)
            day += DAY_SECONDS
    return dict(sorted(days.items()))


# -- geometry -------------------------------------------------------------

def time_in_disc(ev: Event, cx: float, cy: float, radius: float) -> float:
    """Seconds the event spends within radius of (cx, cy)."""
    ax, ay = ev.x - cx, ev.y - cy
    dd = ev.dx * ev.dx + ev.dy * ev.dy
    cc = ax * ax + ay * ay - radius * radius
    if dd == 0.0:
        return ev.dt if cc <= 0 else 0.0
    bb = 2.0 * (ax * ev.dx + ay * ev.dy)
    disc = bb * bb - 4.0 * dd * cc
    if disc < 0:
        return 0.0
    root = math.sqrt(disc)
    s0, s1 = (-bb - root) / (2.0 * dd), (-bb + root) / (2.0 * dd)
    return _overlap(s0, s1, 0.0, 1.0) * ev.dt


def _endpoints(events: Sequence[Event]) -> np.ndarray:
    pts = [(e.x, e.y) for e in events] + [(e.end_x, e.end_y) for e in events]
    return np.unique(np.array(pts, dtype=float), axis=0)


def max_diameter(points: np.ndarray) -> float:
    if len(points) < 2:
        return 0.0
    try:
        hull = ConvexHull(points)
        points = points[hull.vertices]
    except (QhullError, ValueError):
        pass
    return float(pdist(points).max())


def radius_of_gyration(events: Sequence[Event]) -> float:
    """Time-weighted RMS distance of the path from its time-weighted centroid."""
    if not events:
        return 0.0
    a = np.array([[e.x, e.y] for e in events], dtype=float)
    d = np.array([[e.dx, e.dy] for e in events], dtype=float)
    w = np.array([e.dt for e in events], dtype=float)
    total = w.sum()
    centroid = (w[:, None] * (a + d / 2.0)).sum(axis=0) / total
    off = a - centroid
    second = (off * off).sum(axis=1) + (off * d).sum(axis=1) + (d * d).sum(axis=1) / 3.0
    return float(math.sqrt(max((w * second).sum() / total, 0.0)))


# -- significant locations -------------------------------------------------

def _pause_table(traces: Sequence[MobilityTrace]) -> np.ndarray:
    """Rows (x, y, t, dt) of every pause; drifting pauses use their midpoint."""
    rows = [(e.x + e.dx / 2.0, e.y + e.dy / 2.0, e.t, e.dt)
            for tr in traces for e in tr.events if not e.is_flight]
    return np.array(rows, dtype=float).reshape(-1, 4)


def find_significant_locations(traces: Sequence[MobilityTrace],
                               cfg: Optional[FeatureConfig] = None) -> List[SignificantLocation]:
    """Centroid-linkage clusters of pause locations with enough dwell time.

    Ids are assigned by decreasing total pause time.
    """
    cfg = cfg or FeatureConfig()
    table = _pause_table(traces)
    if table.shape[0] == 0:
        return []
    if table.shape[0] == 1:
        labels = np.array([1])
    else:
        tree = linkage(table[:, :2], method='centroid')
        labels = fcluster(tree, t=cfg.sigloc_radius_m, criterion='distance')

    clusters = []
    for label in np.unique(labels):
        member = table[labels == label]
        total = float(member[:, 3].sum())
        if total < cfg.sigloc_min_s or total <= 0:
            continue
        cx = float(np.dot(member[:, 0], member[:, 3]) / total)
        cy = float(np.dot(member[:, 1], member[:, 3]) / total)
        clusters.append((total, cx, cy))
    clusters.sort(key=lambda c: (-c[0], c[1], c[2]))
    return [SignificantLocation(id=i, center=PlanarPoint(cx, cy), total_pause_s=total)
            for i, (total, cx, cy) in enumerate(clusters)]


def assign_location(x: float, y: float, locations: Sequence[SignificantLocation],
                    radius: float) -> Optional[int]:
    """Id of the nearest location within radius, or None."""
    best, best_d = None, radius
    for loc in locations:
        d = math.hypot(x - loc.center.x, y - loc.center.y)
        if d <= best_d:
            best, best_d = loc.id, d
    return best


def _night_seconds(t0: float, t1: float, cfg: FeatureConfig) -> float:
    offset = cfg.utc_offset_h * HOUR_SECONDS
    start_s, end_s = cfg.night_start_h * HOUR_SECONDS, cfg.night_end_h * HOUR_SECONDS
    total = 0.0
    day = local_day_start(t0, offset) - DAY_SECONDS
    while day < t1:
        if start_s < end_s:
            total += _overlap(t0, t1, day + start_s, day + end_s)
        else:
            total += _overlap(t0, t1, day + start_s, day + DAY_SECONDS + end_s)
        day += DAY_SECONDS
    return total


def estimate_home(locations: Sequence[SignificantLocation], traces: Sequence[MobilityTrace],
                  cfg: Optional[FeatureConfig] = None) -> Optional[SignificantLocation]:
    """Location with the most night-time pause; ties go to total pause time, then lowest id."""
    cfg = cfg or FeatureConfig()
    if not locations:
        return None
    night = {loc.id: 0.0 for loc in locations}
    for x, y, t, dt in _pause_table(traces):
        loc_id = assign_location(x, y, locations, cfg.sigloc_radius_m)
        if loc_id is not None:
            night[loc_id] += _night_seconds(t, t + dt, cfg)
    if max(night.values()) <= 0:
        logger.info("no night-time pauses, home falls back to the longest-dwell location")

    def rank(loc: SignificantLocation):
        return (round(night[loc.id] / TIE_EPS) * TIE_EPS, loc.total_pause_s, -loc.id)

    home = max(locations, key=rank)
    return replace(home, is_home=True)


# -- daily measures ------------------------------------------------------------

def _location_shares(events: Sequence[Event], locations, radius: float) -> Dict[Optional[int], float]:
    shares: Dict[Optional[int], float] = {}
    for ev in events:
        if ev.is_flight:
            continue
        loc_id = assign_location(ev.x + ev.dx / 2.0, ev.y + ev.dy / 2.0, locations, radius)
        shares[loc_id] = shares.get(loc_id, 0.0) + ev.dt
    return shares


def _population_stats(values: Sequence[float]) -> Tuple[float, float]:
    if not values:
        return 0.0, 0.0
    arr = np.asarray(values, dtype=float)
    return float(arr.mean()), float(arr.std()) if arr.size >= 2 else 0.0


def compute_daily_features(day_events: Sequence[Event], locations: Sequence[SignificantLocation],
                           home: Optional[SignificantLocation], cfg: Optional[FeatureConfig] = None,
                           subject_id: str = '', date: str = '', mins_missing: float = float('nan'),
                           weekend: bool = False) -> DailyFeatureVector:
    """Measures of one completed subject-day.

    Args:
        day_events: events clipped to the day, gap-free
        locations: the subject's significant locations
        home: home location, None when the subject has none
        cfg: feature parameters
        mins_missing: pre-imputation missing minutes of the day
    Returns:
        DailyFeatureVector; routine measures stay NaN until compute_study_features
    """
    cfg = cfg or FeatureConfig()
    vec = DailyFeatureVector(subject_id=subject_id, date=date, mins_missing=mins_missing, weekend=weekend)
    if not day_events:
        vec.valid = False
        return vec

    flights = [e for e in day_events if e.is_flight]
    lengths = [e.length for e in flights]
    durations = [e.dt for e in flights]
    pause_s = sum(e.dt for e in day_events if not e.is_flight)
    endpoints = _endpoints(day_events)

    vec.dist_travelled_m = float(sum(lengths))
    vec.rog_m = radius_of_gyration(day_events)
    vec.max_diam_m = max_diameter(endpoints)
    vec.avg_flight_len_m, vec.std_flight_len_m = _population_stats(lengths)
    vec.avg_flight_dur_s, vec.std_flight_dur_s = _population_stats(durations)
    vec.frac_pause = pause_s / DAY_SECONDS

    if home is not None:
        hx, hy = home.center.x, home.center.y
        vec.hometime_min = sum(time_in_disc(e, hx, hy, cfg.home_radius_m) for e in day_events) / 60.0
        vec.max_home_dist_m = float(np.hypot(endpoints[:, 0] - hx, endpoints[:, 1] - hy).max())

    shares = _location_shares(day_events, locations, cfg.sigloc_radius_m)
    vec.sig_locs_visited = float(sum(1 for k in shares if k is not None))
    total = sum(shares.values())
    if total > 0:
        p = np.array([v for v in shares.values() if v > 0]) / total
        vec.sig_loc_entropy = float(-(p * np.log(p)).sum())
    else:
        vec.sig_loc_entropy = 0.0
    return vec


# -- routine -----------------------------------------------------------------

def occupancy_matrix(day_events: Sequence[Event], day_start: float, locations: Sequence[SignificantLocation],
                     cfg: FeatureConfig) -> np.ndarray:
    """24 x (k + 1) hourly occupancy shares; rows without samples are NaN."""
    k = len(locations)
    counts = np.zeros((24, k + 1))
    step = cfg.routine_step_s
    grid = day_start + step / 2.0 + np.arange(int(DAY_SECONDS // step)) * step
    starts = np.array([e.t for e in day_events])
    for t in grid:
        idx = int(np.searchsorted(starts, t, side='right')) - 1
        if idx < 0 or day_events[idx].end_t < t:
            continue
        x, y = day_events[idx].position_at(t)
        loc_id = assign_location(x, y, locations, cfg.sigloc_radius_m)
        hour = min(int((t - day_start) // HOUR_SECONDS), 23)
        counts[hour, k if loc_id is None else loc_id] += 1
    totals = counts.sum(axis=1, keepdims=True)
    with np.errstate(invalid='ignore', divide='ignore'):
        return np.where(totals > 0, counts / totals, np.nan)


def day_similarity(p: np.ndarray, q: np.ndarray) -> float:
    """Mean over shared hourly bins of the overlap sum(min(p, q))."""
    shared = ~np.isnan(p).any(axis=1) & ~np.isnan(q).any(axis=1)
    if not shared.any():
        return float('nan')
    return float(np.minimum(p[shared], q[shared]).sum(axis=1).mean())


def _mean_or_nan(values: List[float]) -> float:
    values = [v for v in values if not math.isnan(v)]
    return float(np.mean(values)) if values else float('nan')


def missing_minutes(observed: MobilityTrace, day_start: float) -> float:
    """Minutes of the day not covered by observed events."""
    day_end = day_start + DAY_SECONDS
    first, last = observed.span
    covered_span = _overlap(first, last, day_start, day_end)
    missing = DAY_SECONDS - covered_span
    for gap in list(observed.gaps) + list(observed.merged_gaps):
        missing += _overlap(gap.t_start, gap.t_end, day_start, day_end)
    return missing / 60.0


def compute_study_features(trace: MobilityTrace, locations: Sequence[SignificantLocation],
                           home: Optional[SignificantLocation], cfg: Optional[FeatureConfig] = None,
                           observed: Optional[MobilityTrace] = None) -> List[DailyFeatureVector]:
    """Daily vectors for every local day of a completed trace, routine measures included.

    ``observed`` is the pre-imputation trace used for missing minutes; the
    completed trace itself is used when omitted.
    """
    cfg = cfg or FeatureConfig()
    offset = cfg.utc_offset_h * HOUR_SECONDS
    observed = observed or trace
    days = split_days(trace.events, offset, observed.span)
    vectors: List[DailyFeatureVector] = []
    occupancy: List[np.ndarray] = []
    for day_start, day_events in days.items():
        date, weekend = day_label(day_start, offset)
        vec = compute_daily_features(day_events, locations, home, cfg, trace.subject_id, date,
                                     missing_minutes(observed, day_start), weekend)
        vectors.append(vec)
        occupancy.append(occupancy_matrix(day_events, day_start, locations, cfg))

    n = len(vectors)
    sims = np.full((n, n), np.nan)
    for i in range(n):
        for j in range(i + 1, n):
            sims[i, j] = sims[j, i] = day_similarity(occupancy[i], occupancy[j])
    for i, vec in enumerate(vectors):
        if not vec.valid:
            continue
        others = [sims[i, j] for j in range(n) if j != i and vectors[j].valid]
        same = [sims[i, j] for j in range(n) if j != i and vectors[j].valid
                and vectors[j].weekend == vec.weekend]
        vec.circdn_rtn = _mean_or_nan(others)
        vec.wkend_day_rtn = _mean_or_nan(same)
    return vectors


def feature_intervals(vectors: Sequence[DailyFeatureVector], alpha: float) -> DailyFeatureVector:
    """Mean over replicates as the point estimate, order-statistic (lo, hi) per measure."""
    if len(vectors) < 2:
        raise MobilityError("feature intervals need at least two replicates")
    first = vectors[0]
    out = DailyFeatureVector(subject_id=first.subject_id, date=first.date, weekend=first.weekend,
                             valid=all(v.valid for v in vectors))
    for name in FEATURE_COLUMNS:
        values = np.array([getattr(v, name) for v in vectors], dtype=float)
        setattr(out, name, float(values.mean()))
        out.intervals[name] = confidence_interval(values, alpha)
    return out


def subject_feature_table(observed: MobilityTrace, completed: Sequence[MobilityTrace],
                          cfg: Optional[FeatureConfig] = None,
                          alpha: float = 0.05) -> List[DailyFeatureVector]:
    """Per-day vectors over B completed replicates of one subject.

    Significant locations and home come from the observed trace so every
    replicate shares them. A single replicate yields point values only.
    """
    cfg = cfg or FeatureConfig()
    locations = find_significant_locations([observed], cfg)
    home = estimate_home(locations, [observed], cfg)
    if home is not None:
        locations = [replace(loc, is_home=(loc.id == home.id)) for loc in locations]
    per_replicate = [compute_study_features(tr, locations, home, cfg, observed) for tr in completed]
    if len(per_replicate) == 1:
        return per_replicate[0]
    return [feature_intervals(list(day_vectors), alpha) for day_vectors in zip(*per_replicate)]
