# tests/conftest.py
"""
Shared fixtures: small hand-built traces and synthetic subjects
"""

from typing import List, Sequence, Tuple

import pytest

from config.settings import DATA_CONSTANTS
from utils.data_generator import generate_commuter_points, generate_stationary_points
from utils.projection import PlanarPoint
from utils.segmentation import Event, EventKind, MissingInterval, MobilityTrace

START = DATA_CONSTANTS['start_epoch']


def make_points(coords: Sequence[Tuple[float, float]], t0: float = 0.0, step: float = 10.0) -> List[PlanarPoint]:
    return [PlanarPoint(float(x), float(y), t0 + i * step) for i, (x, y) in enumerate(coords)]


def flight(x: float, y: float, t: float, dx: float, dy: float, dt: float) -> Event:
    return Event(EventKind.FLIGHT, x, y, t, dx, dy, dt)


def pause(x: float, y: float, t: float, dt: float) -> Event:
    return Event(EventKind.PAUSE, x, y, t, 0.0, 0.0, dt)


def chain(kinds: Sequence[str], steps: Sequence[Tuple[float, float, float]], x: float = 0.0, y: float = 0.0,
          t: float = 0.0) -> List[Event]:
    """Contiguous events from ('F' | 'P', (dx, dy, dt)) pairs; pauses ignore dx, dy."""
    events = []
    for kind, (dx, dy, dt) in zip(kinds, steps):
        if kind == 'F':
            events.append(flight(x, y, t, dx, dy, dt))
            x, y = x + dx, y + dy
        else:
            events.append(pause(x, y, t, dt))
        t += dt
    return events


def trace_with_gap(before: List[Event], after: List[Event], subject_id: str = 's') -> MobilityTrace:
    """Two contiguous runs separated by one gap anchored on their facing endpoints."""
    gap = MissingInterval(t_start=before[-1].end_t, t_end=after[0].t,
                          anchor_start=before[-1].end, anchor_end=after[0].start)
    return MobilityTrace(events=before + after, gaps=[gap], subject_id=subject_id)


@pytest.fixture
def walk_trace() -> MobilityTrace:
    """Alternating flights and pauses, a 600 s gap, more of the same."""
    kinds = ['P', 'F', 'F', 'P', 'F', 'F', 'P', 'F']
    steps = [(0, 0, 300), (50, 0, 60), (40, 30, 60), (0, 0, 200), (-30, 40, 45), (20, 20, 30),
             (0, 0, 500), (60, -10, 50)]
    before = chain(kinds, steps)
    end = before[-1]
    after = chain(kinds, steps, x=end.end_x + 200.0, y=end.end_y + 100.0, t=end.end_t + 600.0)
    return trace_with_gap(before, after)


@pytest.fixture(scope='session')
def stationary_day() -> List[PlanarPoint]:
    return generate_stationary_points(1, seed=3, location=(120.0, 80.0), noise_m=0.0)


@pytest.fixture(scope='session')
def commuter_day() -> List[PlanarPoint]:
    return generate_commuter_points(1, seed=11)


@pytest.fixture(scope='session')
def commuter_week() -> List[PlanarPoint]:
    return generate_commuter_points(7, seed=5)
