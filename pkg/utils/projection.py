# utils/projection.py
"""
Per-subject projection of latitude/longitude onto an isosceles-trapezoid plane

The frame spans the subject's bounding box. The bottom and top edges of the
trapezoid are the parallels at the southern and northern bounds, its legs are
the bounding meridians, so distortion only grows with the subject's own range
of travel.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from sklearn.metrics.pairwise import haversine_distances

from config.settings import EARTH_RADIUS_M
from utils.exceptions import EmptyTraceError, InvalidRecordError, OutOfFrameError

FRAME_TOLERANCE_DEG = 1e-9
ARCCOS_TOLERANCE = 1e-12


@dataclass(frozen=True)
class GpsRecord:
    """Raw GPS observation; t in epoch seconds."""
    t: float
    lat: float
    lon: float
    accuracy: Optional[float] = None

    def __post_init__(self):
        if not math.isfinite(self.t):
            raise InvalidRecordError(f"non-finite timestamp {self.t}")
        if not -90.0 <= self.lat <= 90.0:
            raise InvalidRecordError(f"latitude {self.lat} outside [-90, 90]")
        if not -180.0 <= self.lon <= 180.0:
            raise InvalidRecordError(f"longitude {self.lon} outside [-180, 180]")
        if self.accuracy is not None and not self.accuracy >= 0:
            raise InvalidRecordError(f"negative accuracy {self.accuracy}")


@dataclass(frozen=True)
class PlanarPoint:
    x: float
    y: float
    t: float = 0.0


@dataclass(frozen=True)
class ProjectionFrame:
    """Trapezoid frame: d1 is the leg length, d2 the top (lat_max) width, d3 the bottom width."""
    lat_min: float
    lat_max: float
    lon_min: float
    lon_max: float
    d1: float
    d2: float
    d3: float
    earth_radius: float = EARTH_RADIUS_M

    @property
    def lat_span(self) -> float:
        return self.lat_max - self.lat_min

    @property
    def lon_span(self) -> float:
        return self.lon_max - self.lon_min

    @property
    def height(self) -> float:
        """Height of the trapezoid in meters."""
        if self.d1 <= 0:
            return 0.0
        ratio = np.clip((self.d3 - self.d2) / (2.0 * self.d1), -1.0, 1.0)
        return float(self.d1 * np.sin(np.arccos(ratio)))

    def to_dict(self) -> dict:
        return {
            'lat_min': self.lat_min, 'lat_max': self.lat_max,
            'lon_min': self.lon_min, 'lon_max': self.lon_max,
            'd1': self.d1, 'd2': self.d2, 'd3': self.d3,
            'earth_radius': self.earth_radius,
        }


def build_frame(records: Sequence[GpsRecord], earth_radius: float = EARTH_RADIUS_M) -> ProjectionFrame:
    """Build the projection frame from the bounding box of a subject's records."""
    if len(records) == 0:
        raise EmptyTraceError()
    lats = np.array([r.lat for r in records], dtype=float)
    lons = np.array([r.lon for r in records], dtype=float)
    return frame_from_bounds(lats.min(), lats.max(), lons.min(), lons.max(), earth_radius)


def frame_from_bounds(lat_min: float, lat_max: float, lon_min: float, lon_max: float,
                      earth_radius: float = EARTH_RADIUS_M) -> ProjectionFrame:
    lat_span = math.radians(lat_max - lat_min)
    lon_span = math.radians(lon_max - lon_min)
    d1 = lat_span * earth_radius
    d2 = lon_span * earth_radius * math.sin(math.pi / 2 - math.radians(lat_max))
    d3 = lon_span * earth_radius * math.sin(math.pi / 2 - math.radians(lat_min))
    return ProjectionFrame(
        lat_min=float(lat_min), lat_max=float(lat_max),
        lon_min=float(lon_min), lon_max=float(lon_max),
        d1=d1, d2=max(d2, 0.0), d3=max(d3, 0.0),
        earth_radius=earth_radius,
    )


def project_arrays(lat: np.ndarray, lon: np.ndarray, frame: ProjectionFrame) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized projection of latitude/longitude arrays onto the frame.

    Args:
        lat: latitudes in degrees
        lon: longitudes in degrees, same shape as lat
        frame: frame built for the subject
    Returns:
        (x, y) arrays in meters, origin at (lat_min, lon_min)
    Raises:
        OutOfFrameError: a coordinate lies outside the frame beyond tolerance
    """
    lat = np.asarray(lat, dtype=float)
    lon = np.asarray(lon, dtype=float)
    outside = (
        (lat < frame.lat_min - FRAME_TOLERANCE_DEG) | (lat > frame.lat_max + FRAME_TOLERANCE_DEG)
        | (lon < frame.lon_min - FRAME_TOLERANCE_DEG) | (lon > frame.lon_max + FRAME_TOLERANCE_DEG)
    )
    if np.any(outside):
        raise OutOfFrameError()
    lat = np.clip(lat, frame.lat_min, frame.lat_max)
    lon = np.clip(lon, frame.lon_min, frame.lon_max)

    # w1 is the latitude fraction (trapezoid height), w2 the longitude fraction (width)
    w1 = (lat - frame.lat_min) / frame.lat_span if frame.lat_span > 0 else np.zeros_like(lat)
    w2 = (lon - frame.lon_min) / frame.lon_span if frame.lon_span > 0 else np.zeros_like(lon)

    x = w1 * (frame.d3 - frame.d2) / 2.0 + w2 * (frame.d3 * (1.0 - w1) + frame.d2 * w1)
    if frame.d1 > 0:
        ratio = (frame.d3 - frame.d2) / (2.0 * frame.d1)
        if abs(ratio) > 1.0 + ARCCOS_TOLERANCE:
            raise OutOfFrameError(f"degenerate trapezoid, arccos argument {ratio}")
        ratio = min(max(ratio, -1.0), 1.0)
        y = w1 * frame.d1 * math.sin(math.acos(ratio))
    else:
        y = np.zeros_like(w1)
    return x, y


def project(record: GpsRecord, frame: ProjectionFrame) -> PlanarPoint:
    x, y = project_arrays(np.array([record.lat]), np.array([record.lon]), frame)
    return PlanarPoint(x=float(x[0]), y=float(y[0]), t=float(record.t))


def project_records(records: Sequence[GpsRecord], frame: Optional[ProjectionFrame] = None):
    """Project a subject's records; builds the frame when none is given.

    Returns:
        (list of PlanarPoint, frame)
    """
    if frame is None:
        frame = build_frame(records)
    lat = np.array([r.lat for r in records], dtype=float)
    lon = np.array([r.lon for r in records], dtype=float)
    x, y = project_arrays(lat, lon, frame)
    points = [PlanarPoint(x=float(px), y=float(py), t=float(r.t)) for px, py, r in zip(x, y, records)]
    return points, frame


def great_circle_distance(lat1: float, lon1: float, lat2: float, lon2: float,
                          earth_radius: float = EARTH_RADIUS_M) -> float:
    """Haversine distance in meters."""
    a = np.radians([[lat1, lon1]])
    b = np.radians([[lat2, lon2]])
    return float(haversine_distances(a, b)[0, 0] * earth_radius)
