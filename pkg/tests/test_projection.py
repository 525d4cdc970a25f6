# tests/test_projection.py
import math

import numpy as np
import pytest
from sklearn.metrics.pairwise import haversine_distances

from config.settings import EARTH_RADIUS_M
from utils.exceptions import EmptyTraceError, InvalidRecordError, OutOfFrameError
from utils.projection import (
    GpsRecord,
    build_frame,
    frame_from_bounds,
    great_circle_distance,
    project,
    project_arrays,
    project_records,
)


def test_single_record_frame_is_degenerate() -> None:
    rec = GpsRecord(t=0.0, lat=42.0, lon=-71.0)
    frame = build_frame([rec])

    assert frame.d1 == 0.0 and frame.d2 == 0.0 and frame.d3 == 0.0
    point = project(rec, frame)
    assert (point.x, point.y, point.t) == (0.0, 0.0, 0.0)


def test_south_west_corner_is_origin() -> None:
    frame = frame_from_bounds(40.0, 41.0, -74.0, -73.0)
    x, y = project_arrays(np.array([40.0]), np.array([-74.0]), frame)
    assert x[0] == 0.0
    assert y[0] == 0.0


def test_north_south_extent_matches_meridian_arc() -> None:
    frame = frame_from_bounds(40.0, 41.0, -74.0, -74.0)
    _, y = project_arrays(np.array([41.0]), np.array([-74.0]), frame)
    assert y[0] == pytest.approx(EARTH_RADIUS_M * math.radians(1.0), rel=1e-4)


def test_planar_distance_agrees_with_haversine() -> None:
    rng = np.random.default_rng(2024)
    frame = frame_from_bounds(40.0, 41.0, -74.0, -73.0)
    lat = rng.uniform(40.0, 41.0, size=(1000, 2))
    lon = rng.uniform(-74.0, -73.0, size=(1000, 2))

    x, y = project_arrays(lat.ravel(), lon.ravel(), frame)
    x, y = x.reshape(1000, 2), y.reshape(1000, 2)
    planar = np.hypot(x[:, 0] - x[:, 1], y[:, 0] - y[:, 1])
    a = np.radians(np.column_stack([lat[:, 0], lon[:, 0]]))
    b = np.radians(np.column_stack([lat[:, 1], lon[:, 1]]))
    geodesic = np.array([haversine_distances(a[i:i + 1], b[i:i + 1])[0, 0] for i in range(1000)]) * EARTH_RADIUS_M

    rel = np.abs(planar - geodesic) / geodesic
    assert rel.max() < 0.01


def test_out_of_frame_raises() -> None:
    frame = frame_from_bounds(40.0, 41.0, -74.0, -73.0)
    with pytest.raises(OutOfFrameError):
        project(GpsRecord(t=0.0, lat=41.5, lon=-73.5), frame)


def test_project_records_builds_frame_from_bounds() -> None:
    records = [GpsRecord(t=float(i), lat=42.0 + 0.01 * i, lon=-71.0 + 0.02 * i) for i in range(5)]
    points, frame = project_records(records)

    assert frame.lat_min == pytest.approx(42.0)
    assert frame.lon_max == pytest.approx(-70.92)
    assert [p.t for p in points] == [0.0, 1.0, 2.0, 3.0, 4.0]
    assert points[0].x == 0.0 and points[0].y == 0.0
    assert all(np.diff([p.y for p in points]) > 0)


def test_empty_records_raise() -> None:
    with pytest.raises(EmptyTraceError):
        build_frame([])


@pytest.mark.parametrize("lat,lon", [(91.0, 0.0), (-90.5, 0.0), (0.0, 180.5), (float('nan'), 0.0)])
def test_invalid_coordinates_rejected(lat: float, lon: float) -> None:
    with pytest.raises(InvalidRecordError):
        GpsRecord(t=0.0, lat=lat, lon=lon)


def test_one_degree_of_latitude() -> None:
    d = great_circle_distance(40.0, -74.0, 41.0, -74.0)
    assert d == pytest.approx(EARTH_RADIUS_M * math.pi / 180.0, rel=1e-9)
