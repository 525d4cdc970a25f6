# utils/data_generator.py
"""
Synthetic GPS traces for tests, demos and desk-scale evaluation
"""

import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from config.settings import DATA_CONSTANTS, DAY_SECONDS, EARTH_RADIUS_M, HOUR_SECONDS
from utils.projection import GpsRecord, PlanarPoint

Knot = Tuple[float, float, float]  # (t, x, y)


def _polar(rng: np.random.Generator, distance_range: Tuple[float, float], origin=(0.0, 0.0)):
    r = rng.uniform(*distance_range)
    angle = rng.uniform(0.0, 2.0 * math.pi)
    return origin[0] + r * math.cos(angle), origin[1] + r * math.sin(angle)


def _travel(knots: List[Knot], target: Tuple[float, float], speed: float, rng: np.random.Generator):
    """Append a jittered trip from the last knot to target at constant speed.

    The straight line is cut into legs of roughly ``leg_s`` seconds and every
    interior waypoint is pushed sideways by a normal offset proportional to
    the leg length.
    """
    c = DATA_CONSTANTS
    t, x0, y0 = knots[-1]
    tx, ty = target
    dx, dy = tx - x0, ty - y0
    dist = math.hypot(dx, dy)
    if dist == 0:
        return
    legs = max(1, int(round(dist / (speed * c['leg_s']))))
    side = rng.normal(0.0, c['jitter_fraction'] * dist / legs, legs - 1)
    px, py = x0, y0
    for k in range(1, legs + 1):
        if k < legs:
            f = k / legs
            wx = x0 + f * dx - side[k - 1] * dy / dist
            wy = y0 + f * dy + side[k - 1] * dx / dist
        else:
            wx, wy = tx, ty
        t += math.hypot(wx - px, wy - py) / speed
        knots.append((t, wx, wy))
        px, py = wx, wy


def _stay_until(knots: List[Knot], t: float):
    last_t, x, y = knots[-1]
    if t > last_t:
        knots.append((t, x, y))


def _weekday(knots, day_start, home, work, errands, lunch, rng):
    c = DATA_CONSTANTS
    _stay_until(knots, day_start + rng.uniform(*c['leave_home_h']) * HOUR_SECONDS)
    _travel(knots, work, rng.uniform(*c['speed_mps']), rng)
    if rng.random() < c['lunch_probability']:
        _stay_until(knots, day_start + rng.uniform(11.5, 12.5) * HOUR_SECONDS)
        _travel(knots, lunch, c['walking_speed_mps'], rng)
        _stay_until(knots, knots[-1][0] + rng.uniform(*c['lunch_pause_h']) * HOUR_SECONDS)
        _travel(knots, work, c['walking_speed_mps'], rng)
    _stay_until(knots, day_start + rng.uniform(*c['leave_work_h']) * HOUR_SECONDS)
    if rng.random() < c['errand_probability']:
        _travel(knots, errands[int(rng.integers(len(errands)))], rng.uniform(*c['speed_mps']), rng)
        _stay_until(knots, knots[-1][0] + rng.uniform(*c['errand_pause_h']) * HOUR_SECONDS)
    _travel(knots, home, rng.uniform(*c['speed_mps']), rng)


def _weekend(knots, day_start, home, errands, rng):
    c = DATA_CONSTANTS
    if rng.random() >= c['weekend_outing_probability']:
        return
    _stay_until(knots, day_start + rng.uniform(*c['outing_start_h']) * HOUR_SECONDS)
    _travel(knots, errands[int(rng.integers(len(errands)))], rng.uniform(*c['speed_mps']), rng)
    _stay_until(knots, knots[-1][0] + rng.uniform(*c['outing_pause_h']) * HOUR_SECONDS)
    _travel(knots, home, rng.uniform(*c['speed_mps']), rng)


def _sample(knots: Sequence[Knot], start: float, end: float, sampling_s: float, noise_m: float,
            rng: np.random.Generator) -> List[PlanarPoint]:
    kt = np.array([k[0] for k in knots])
    kx = np.array([k[1] for k in knots])
    ky = np.array([k[2] for k in knots])
    ts = start + np.arange(int(round((end - start) / sampling_s)) + 1) * sampling_s
    xs = np.interp(ts, kt, kx) + rng.normal(0.0, noise_m, ts.size)
    ys = np.interp(ts, kt, ky) + rng.normal(0.0, noise_m, ts.size)
    return [PlanarPoint(float(x), float(y), float(t)) for x, y, t in zip(xs, ys, ts)]


def generate_commuter_points(days: int, seed: int, start: Optional[float] = None,
                             sampling_s: Optional[float] = None,
                             noise_m: Optional[float] = None) -> List[PlanarPoint]:
    """Home / work commuter with lunch walks, errands and weekend outings."""
    c = DATA_CONSTANTS
    rng = np.random.default_rng(seed)
    start = c['start_epoch'] if start is None else start
    sampling_s = sampling_s or c['sampling_s']
    noise_m = c['gps_noise_m'] if noise_m is None else noise_m

    home = (0.0, 0.0)
    work = _polar(rng, c['work_distance_m'])
    lunch = _polar(rng, c['lunch_distance_m'], work)
    errands = [_polar(rng, c['errand_distance_m']) for _ in range(2)]

    knots: List[Knot] = [(start, home[0], home[1])]
    for day in range(days):
        day_start = start + day * DAY_SECONDS
        # epoch day 0 was a Thursday
        weekday = int((day_start // DAY_SECONDS + 3) % 7) < 5
        if weekday:
            _weekday(knots, day_start, home, work, errands, lunch, rng)
        else:
            _weekend(knots, day_start, home, errands, rng)
    end = start + days * DAY_SECONDS
    _stay_until(knots, end)
    return _sample(knots, start, end, sampling_s, noise_m, rng)


def generate_stationary_points(days: float, seed: int, location: Tuple[float, float] = (0.0, 0.0),
                               start: Optional[float] = None, sampling_s: Optional[float] = None,
                               noise_m: float = 1.0) -> List[PlanarPoint]:
    """A subject who never leaves one place."""
    c = DATA_CONSTANTS
    rng = np.random.default_rng(seed)
    start = c['start_epoch'] if start is None else start
    end = start + days * DAY_SECONDS
    knots = [(start, location[0], location[1]), (end, location[0], location[1])]
    return _sample(knots, start, end, sampling_s or c['sampling_s'], noise_m, rng)


def to_records(points: Sequence[PlanarPoint], origin_lat: Optional[float] = None,
               origin_lon: Optional[float] = None) -> List[GpsRecord]:
    """Place planar points around an origin with a local equirectangular inverse."""
    lat0 = DATA_CONSTANTS['origin_lat'] if origin_lat is None else origin_lat
    lon0 = DATA_CONSTANTS['origin_lon'] if origin_lon is None else origin_lon
    cos0 = math.cos(math.radians(lat0))
    return [GpsRecord(t=p.t,
                      lat=lat0 + math.degrees(p.y / EARTH_RADIUS_M),
                      lon=lon0 + math.degrees(p.x / (EARTH_RADIUS_M * cos0)))
            for p in points]
