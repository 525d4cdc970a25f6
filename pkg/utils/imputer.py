# utils/imputer.py
"""
Kernel-weighted hot-deck imputation of missing intervals

Gaps are filled by resampling observed flights and pauses, chosen with
probability proportional to their kernel weight at the current simulated
state, then bridged onto the gap anchors. Linear interpolation is the
baseline and doubles as the fallback when there is nothing to resample.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from config.settings import IMPUTATION_DEFAULTS
from utils.exceptions import MobilityError, NoDonorsError
from utils.kernels import KernelFamily, KernelSpec, weights
from utils.projection import PlanarPoint
from utils.segmentation import (
    DISPLACEMENT_EPS,
    Event,
    EventKind,
    MissingInterval,
    MobilityTrace,
    segment_distances,
)

logger = logging.getLogger(__name__)

BRIDGE_MODES = ('convex', 'additive')
TIME_EPS = 1e-9
CONTIGUITY_EPS = 1e-6


class Displacement(NamedTuple):
    dx: float
    dy: float
    dt: float


class RawEvent(NamedTuple):
    """Simulated event before bridging."""
    kind: EventKind
    dx: float
    dy: float
    dt: float


@dataclass
class EmpiricalPool:
    """Observed donor events of one subject, stored column-wise."""
    flights: List[Event]
    pauses: List[Event]
    pair_prev: np.ndarray   # B_{j-1}
    pair_cur: np.ndarray    # B_j
    pair_x: np.ndarray      # start state z_j of event j
    pair_y: np.ndarray
    pair_t: np.ndarray
    psi_fallback: bool = False
    _warned: bool = field(default=False, repr=False)

    def __post_init__(self):
        self._flight_cols = self._columns(self.flights)
        self._pause_cols = self._columns(self.pauses)

    @staticmethod
    def _columns(events: Sequence[Event]) -> np.ndarray:
        if not events:
            return np.empty((0, 6))
        return np.array([[e.x, e.y, e.t, e.dx, e.dy, e.dt] for e in events], dtype=float)

    @classmethod
    def from_trace(cls, trace: MobilityTrace) -> 'EmpiricalPool':
        observed = [e for e in trace.events if e.observed]
        flights = [e for e in observed if e.is_flight]
        pauses = [e for e in observed if not e.is_flight]
        prev, cur, xs, ys, ts = [], [], [], [], []
        for a, b in zip(observed, observed[1:]):
            # pairs never straddle a gap
            if abs(a.end_t - b.t) > CONTIGUITY_EPS:
                continue
            prev.append(a.is_flight)
            cur.append(b.is_flight)
            xs.append(b.x)
            ys.append(b.y)
            ts.append(b.t)
        return cls(
            flights=flights, pauses=pauses,
            pair_prev=np.array(prev, dtype=bool), pair_cur=np.array(cur, dtype=bool),
            pair_x=np.array(xs, dtype=float), pair_y=np.array(ys, dtype=float),
            pair_t=np.array(ts, dtype=float),
        )

    @property
    def n_f(self) -> int:
        return len(self.flights)

    @property
    def n_p(self) -> int:
        return len(self.pauses)

    def columns(self, is_flight: bool) -> np.ndarray:
        return self._flight_cols if is_flight else self._pause_cols


@dataclass
class ImputedTrajectory:
    events: List[Event]
    gap: MissingInterval
    replicate_index: int = 0
    seed: int = 0
    psi_fallback: bool = False

    @property
    def start(self) -> PlanarPoint:
        return self.events[0].start

    @property
    def end(self) -> PlanarPoint:
        return self.events[-1].end


def replicate_rng(seed: int, replicate: int, gap_index: int = 0) -> np.random.Generator:
    """PCG64 stream determined by (seed, replicate, gap index)."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(replicate), int(gap_index)]))


def estimate_psi(pool: EmpiricalPool, spec: KernelSpec, z_new: PlanarPoint) -> float:
    """Kernel-weighted probability that a flight follows a flight at z_new.

    Falls back to the global flight fraction n_f / (n_f + n_p) when the pool
    holds no flight-to-anything pairs; the pool is flagged and warns once.
    """
    mask = pool.pair_prev
    if mask.size and mask.any():
        w = weights(spec, z_new, pool.pair_x[mask], pool.pair_y[mask], pool.pair_t[mask])
        den = float(w.sum())
        if den > 0:
            return float(np.dot(w, pool.pair_cur[mask])) / den
    total = pool.n_f + pool.n_p
    if total == 0:
        raise NoDonorsError()
    pool.psi_fallback = True
    if not pool._warned:
        logger.warning("no observed flight pairs, using global flight fraction %d/%d", pool.n_f, total)
        pool._warned = True
    return pool.n_f / total


def sample_event(pool: EmpiricalPool, spec: KernelSpec, z_new: PlanarPoint, is_flight: bool,
                 rng: np.random.Generator) -> Displacement:
    """Draw one donor displacement with probability proportional to its weight at z_new."""
    cols = pool.columns(is_flight)
    if cols.shape[0] == 0:
        raise NoDonorsError(f"no donors among {'flights' if is_flight else 'pauses'}")
    w = weights(spec, z_new, cols[:, 0], cols[:, 1], cols[:, 2])
    total = float(w.sum())
    if not total > 0:
        w, total = np.ones(cols.shape[0]), float(cols.shape[0])
    idx = int(rng.choice(cols.shape[0], p=w / total))
    return Displacement(float(cols[idx, 3]), float(cols[idx, 4]), float(cols[idx, 5]))


class _NeighbourIndex:
    """Events of one trace indexed by start and end time."""

    def __init__(self, events: Sequence[Event]):
        self._by_start = sorted(events, key=lambda e: e.t)
        self._by_end = sorted(events, key=lambda e: e.end_t)
        self._starts = np.array([e.t for e in self._by_start], dtype=float)
        self._ends = np.array([e.end_t for e in self._by_end], dtype=float)

    @staticmethod
    def _lookup(times: np.ndarray, ordered: List[Event], t: float) -> Optional[Event]:
        idx = int(np.searchsorted(times, t - CONTIGUITY_EPS, side='left'))
        if idx < times.size and abs(times[idx] - t) <= CONTIGUITY_EPS:
            return ordered[idx]
        return None

    def ending_at(self, t: float) -> Optional[Event]:
        return self._lookup(self._ends, self._by_end, t)

    def starting_at(self, t: float) -> Optional[Event]:
        return self._lookup(self._starts, self._by_start, t)


def linear_interpolate(gap: MissingInterval, replicate_index: int = 0, seed: int = 0) -> ImputedTrajectory:
    """Straight constant-speed path between the anchors; a pause when they coincide."""
    a, b = gap.anchor_start, gap.anchor_end
    dx, dy = b.x - a.x, b.y - a.y
    if math.hypot(dx, dy) <= DISPLACEMENT_EPS:
        ev = Event(EventKind.PAUSE, a.x, a.y, gap.t_start, 0.0, 0.0, gap.duration, observed=False)
    else:
        ev = Event(EventKind.FLIGHT, a.x, a.y, gap.t_start, dx, dy, gap.duration, observed=False)
    return ImputedTrajectory(events=[ev], gap=gap, replicate_index=replicate_index, seed=seed)


def bridge(raw_events: Sequence[RawEvent], gap: MissingInterval, mode: str = 'convex',
           replicate_index: int = 0, seed: int = 0) -> ImputedTrajectory:
    """Pin a simulated path to the gap anchors.

    The path is evaluated at event boundaries and joined by straight lines,
    so flights stay straight. ``convex`` blends the simulated path with the end
    anchor in proportion to elapsed time, ``additive`` adds the endpoint miss
    linearly in time and leaves a path that already fits untouched.

    Args:
        raw_events: simulated events whose durations tile the gap
        gap: the missing interval
        mode: 'convex' (default) or 'additive'
    Returns:
        ImputedTrajectory starting at anchor_start and ending at anchor_end
    """
    if mode not in BRIDGE_MODES:
        raise MobilityError(f"unknown bridge mode '{mode}'")
    if not raw_events:
        return linear_interpolate(gap, replicate_index, seed)
    l0 = np.array([gap.anchor_start.x, gap.anchor_start.y])
    l1 = np.array([gap.anchor_end.x, gap.anchor_end.y])
    steps = np.array([[r.dx, r.dy] for r in raw_events], dtype=float)
    dts = np.array([r.dt for r in raw_events], dtype=float)

    cum_s = np.vstack([np.zeros(2), np.cumsum(steps, axis=0)])
    cum_t = np.concatenate([[0.0], np.cumsum(dts)])
    frac = (cum_t / gap.duration)[:, None]
    if mode == 'additive':
        path = l0 + cum_s + frac * (l1 - l0 - cum_s[-1])
    else:
        path = (1.0 - frac) * (l0 + cum_s) + frac * l1
    # exact anchors, no accumulated rounding
    path[0] = l0
    path[-1] = l1

    events = []
    for b, raw in enumerate(raw_events):
        x0, y0 = path[b]
        dx, dy = path[b + 1] - path[b]
        kind = raw.kind
        if kind == EventKind.FLIGHT and math.hypot(dx, dy) <= DISPLACEMENT_EPS:
            kind = EventKind.PAUSE
        events.append(Event(kind, float(x0), float(y0), float(gap.t_start + cum_t[b]),
                            float(dx), float(dy), float(dts[b]), observed=False))
    return ImputedTrajectory(events=events, gap=gap, replicate_index=replicate_index, seed=seed)


def join_collinear_flights(events: Sequence[Event], radius: float) -> List[Event]:
    """Merge runs of consecutive flights whose inner vertices lie within radius of the run's chord.

    This is the rectangle test segmentation applies to observed points, so a
    straight stretch stitched from several donors reads as one flight.
    """
    if radius <= 0:
        return list(events)
    out: List[Event] = []
    i = 0
    while i < len(events):
        first = events[i]
        j = i
        if first.is_flight:
            while j + 1 < len(events) and events[j + 1].is_flight:
                last = events[j + 1]
                if math.hypot(last.end_x - first.x, last.end_y - first.y) <= DISPLACEMENT_EPS:
                    break
                vx = np.array([e.end_x for e in events[i:j + 1]])
                vy = np.array([e.end_y for e in events[i:j + 1]])
                if segment_distances(vx, vy, first.x, first.y, last.end_x, last.end_y).max() > radius:
                    break
                j += 1
        if j == i:
            out.append(first)
        else:
            last = events[j]
            out.append(Event(EventKind.FLIGHT, first.x, first.y, first.t, last.end_x - first.x,
                             last.end_y - first.y, last.end_t - first.t,
                             observed=all(e.observed for e in events[i:j + 1])))
        i = j + 1
    return out


def simulate_gap(trace: MobilityTrace, gap: MissingInterval, pool: EmpiricalPool, spec: KernelSpec,
                 rng: np.random.Generator, bridge_mode: str = IMPUTATION_DEFAULTS['bridge_mode'],
                 replicate_index: int = 0, seed: int = 0,
                 join_radius_m: float = IMPUTATION_DEFAULTS['join_radius_m'],
                 neighbours: Optional[_NeighbourIndex] = None) -> ImputedTrajectory:
    """Simulate flights and pauses across one gap, then bridge them to its anchors.

    Draws stop when the next event would reach or pass the gap end; that draw
    is discarded and the last kept event is stretched to fill the gap. A pause
    is always followed by a flight, including across both gap boundaries.
    Bridged flights that line up within ``join_radius_m`` are joined.
    """
    if spec.family == KernelFamily.LI or pool.n_f == 0:
        return linear_interpolate(gap, replicate_index, seed)

    neighbours = neighbours or _NeighbourIndex(trace.events)
    before = neighbours.ending_at(gap.t_start)
    after = neighbours.starting_at(gap.t_end)
    prev_pause = before is not None and not before.is_flight
    z = PlanarPoint(gap.anchor_start.x, gap.anchor_start.y, gap.t_start)
    remaining = gap.duration
    cum = 0.0
    raw: List[RawEvent] = []
    while True:
        if prev_pause or pool.n_p == 0:
            is_flight = True
        else:
            is_flight = bool(rng.random() < estimate_psi(pool, spec, z))
        step = sample_event(pool, spec, z, is_flight, rng)
        if cum + step.dt >= remaining - TIME_EPS:
            break
        raw.append(RawEvent(EventKind.FLIGHT if is_flight else EventKind.PAUSE, *step))
        cum += step.dt
        z = PlanarPoint(z.x + step.dx, z.y + step.dy, z.t + step.dt)
        prev_pause = not is_flight

    if raw and raw[-1].kind == EventKind.PAUSE and after is not None and not after.is_flight:
        dropped = raw.pop()
        cum -= dropped.dt
    if raw:
        last = raw[-1]
        raw[-1] = last._replace(dt=last.dt + (remaining - cum))
    traj = bridge(raw, gap, bridge_mode, replicate_index, seed)
    traj.events = join_collinear_flights(traj.events, join_radius_m)
    traj.psi_fallback = pool.psi_fallback
    return traj


def _merge_adjacent_pauses(events: List[Event]) -> List[Event]:
    """Fold pauses that touch and share a location, e.g. a coincident-anchor gap next to a pause."""
    out: List[Event] = []
    for ev in events:
        if (out and not ev.is_flight and not out[-1].is_flight
                and abs(out[-1].end_t - ev.t) <= CONTIGUITY_EPS
                and ev.dx == 0.0 and ev.dy == 0.0 and out[-1].dx == 0.0 and out[-1].dy == 0.0
                and math.hypot(out[-1].x - ev.x, out[-1].y - ev.y) <= DISPLACEMENT_EPS):
            prev = out.pop()
            ev = Event(EventKind.PAUSE, prev.x, prev.y, prev.t, 0.0, 0.0, ev.end_t - prev.t,
                       prev.observed and ev.observed)
        out.append(ev)
    return out


def impute_gaps(trace: MobilityTrace, spec: KernelSpec, replicate: int, seed: int,
                pool: Optional[EmpiricalPool] = None,
                bridge_mode: str = IMPUTATION_DEFAULTS['bridge_mode'],
                join_radius_m: float = IMPUTATION_DEFAULTS['join_radius_m'],
                neighbours: Optional[_NeighbourIndex] = None) -> MobilityTrace:
    """One completed trace: every gap filled with its own deterministic stream."""
    if not trace.gaps:
        return trace.copy_with(events=list(trace.events), gaps=[])
    pool = pool if pool is not None else EmpiricalPool.from_trace(trace)
    neighbours = neighbours or _NeighbourIndex(trace.events)
    filled: List[Event] = list(trace.events)
    for gap_index, gap in enumerate(trace.gaps):
        rng = replicate_rng(seed, replicate, gap_index)
        traj = simulate_gap(trace, gap, pool, spec, rng, bridge_mode, replicate, seed,
                            join_radius_m, neighbours)
        filled.extend(traj.events)
    filled.sort(key=lambda e: e.t)
    return trace.copy_with(events=_merge_adjacent_pauses(filled), gaps=[])


def impute_trace(trace: MobilityTrace, spec: KernelSpec, replicates: int, seed: int,
                 bridge_mode: str = IMPUTATION_DEFAULTS['bridge_mode'],
                 join_radius_m: float = IMPUTATION_DEFAULTS['join_radius_m']) -> List[MobilityTrace]:
    """B completed copies of the trace; LI yields B identical copies."""
    if replicates < 1:
        raise MobilityError("replicates must be >= 1")
    if spec.family == KernelFamily.LI or not trace.gaps:
        completed = impute_gaps(trace, spec, 0, seed, bridge_mode=bridge_mode)
        return [completed.copy_with(events=list(completed.events)) for _ in range(replicates)]
    pool = EmpiricalPool.from_trace(trace)
    neighbours = _NeighbourIndex(trace.events)
    out = [impute_gaps(trace, spec, b, seed, pool, bridge_mode, join_radius_m, neighbours)
           for b in range(replicates)]
    logger.debug("imputed %d gaps x %d replicates with %s", len(trace.gaps), replicates, spec.label)
    return out


def confidence_interval(values: Sequence[float], alpha: float) -> Tuple[float, float]:
    """Order-statistic interval from B replicate values.

    lo is the ceil(alpha/2 * B)-th and hi the floor((1 - alpha/2) * B)-th
    smallest value (1-based, clamped to [1, B]).
    """
    arr = np.asarray(values, dtype=float)
    b = arr.size
    if b < 2:
        raise MobilityError("confidence interval needs at least two replicates")
    if not 0.0 < alpha < 1.0:
        raise MobilityError(f"alpha must lie in (0, 1), got {alpha}")
    if np.isnan(arr).any():
        return float('nan'), float('nan')
    ordered = np.sort(arr)
    lo = math.ceil(round(alpha / 2.0 * b, 9))
    hi = math.floor(round((1.0 - alpha / 2.0) * b, 9))
    lo = min(max(lo, 1), b)
    hi = min(max(hi, 1), b)
    if lo > hi:
        lo, hi = hi, lo
    return float(ordered[lo - 1]), float(ordered[hi - 1])
