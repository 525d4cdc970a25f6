# tools/data_processing_tool.py
"""
GPS data loading tool: CSV and Geolife PLT ingestion, filtering and event CSV output
"""

import io
import logging
from pathlib import Path
from typing import Any, Dict, Iterator, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from dateutil import parser as date_parser
from dateutil import tz
from pydantic import BaseModel

from config.settings import (
    EVENT_CSV_COLUMNS,
    GPS_CSV_COLUMNS,
    PLT_COLUMNS,
    PLT_HEADER_LINES,
    SEGMENTATION_DEFAULTS,
)
from utils.exceptions import InvalidRecordError, PltFormatError
from utils.projection import GpsRecord
from utils.segmentation import Event, EventKind, MobilityTrace

logger = logging.getLogger(__name__)

EPOCH = pd.Timestamp('1970-01-01', tz='UTC')


class PltParseResult(NamedTuple):
    records: List[GpsRecord]
    malformed: int


def parse_plt(data: Union[bytes, str]) -> PltParseResult:
    """Parse one Geolife PLT file.

    Six header lines, then `lat,lon,0,altitude_ft,days_since_1899,date,time`
    per line. Lines that do not parse or fall outside the coordinate bounds
    are skipped and counted.
    """
    text = data.decode('utf-8', errors='replace') if isinstance(data, bytes) else data
    lines = text.splitlines()
    if len(lines) < PLT_HEADER_LINES:
        raise PltFormatError()
    body = [line for line in lines[PLT_HEADER_LINES:] if line.strip()]
    if not body:
        return PltParseResult([], 0)

    bad_lines = []

    def _skip(fields):
        bad_lines.append(fields)
        return None

    df = pd.read_csv(io.StringIO('\n'.join(body)), header=None, names=PLT_COLUMNS, dtype=str,
                     engine='python', on_bad_lines=_skip, skip_blank_lines=True)
    lat = pd.to_numeric(df['latitude'], errors='coerce')
    lon = pd.to_numeric(df['longitude'], errors='coerce')
    stamp = pd.to_datetime(df['date'].str.strip() + ' ' + df['time'].str.strip(),
                           format='%Y-%m-%d %H:%M:%S', utc=True, errors='coerce')
    ok = (lat.between(-90.0, 90.0) & lon.between(-180.0, 180.0) & stamp.notna()).to_numpy()
    seconds = ((stamp - EPOCH) / pd.Timedelta(seconds=1)).to_numpy()

    records = [GpsRecord(t=float(t), lat=float(a), lon=float(o))
               for t, a, o, keep in zip(seconds, lat.to_numpy(), lon.to_numpy(), ok) if keep]
    malformed = len(bad_lines) + int((~ok).sum())
    if malformed:
        logger.info("skipped %d malformed PLT lines", malformed)
    return PltParseResult(records, malformed)


def iter_geolife(root: Union[str, Path]) -> Iterator[Tuple[str, Path]]:
    """(user, plt path) over `Data/<user>/Trajectory/*.plt`, in sorted order.

    root may be the Geolife directory or its `Data` folder.
    """
    root = Path(root)
    data_dir = root / 'Data' if (root / 'Data').is_dir() else root
    for user_dir in sorted(p for p in data_dir.iterdir() if p.is_dir()):
        for plt in sorted((user_dir / 'Trajectory').glob('*.plt')):
            yield user_dir.name, plt


def _parse_timestamps(column: pd.Series) -> np.ndarray:
    """Epoch seconds when every value is numeric, ISO-8601 otherwise (naive means UTC)."""
    numeric = pd.to_numeric(column, errors='coerce')
    if numeric.notna().all():
        return numeric.to_numpy(dtype=float)
    out = np.empty(len(column))
    for i, value in enumerate(column.astype(str)):
        try:
            stamp = date_parser.isoparse(value.strip())
        except ValueError as exc:
            raise InvalidRecordError(f"row {i}: unreadable timestamp '{value}'") from exc
        if stamp.tzinfo is None:
            stamp = stamp.replace(tzinfo=tz.UTC)
        out[i] = stamp.timestamp()
    return out


def _records_from_frame(df: pd.DataFrame) -> List[GpsRecord]:
    ts = df['t'].to_numpy(dtype=float)
    lat = df['latitude'].to_numpy(dtype=float)
    lon = df['longitude'].to_numpy(dtype=float)
    acc = df['accuracy'].to_numpy(dtype=float) if 'accuracy' in df else np.full(len(df), np.nan)
    return [GpsRecord(t=float(t), lat=float(a), lon=float(o), accuracy=None if np.isnan(c) else float(c))
            for t, a, o, c in zip(ts, lat, lon, acc)]


def read_gps_csv(source: Union[str, Path, io.StringIO]) -> pd.DataFrame:
    """GPS CSV with header timestamp,latitude,longitude[,accuracy]; adds epoch column t, sorted by t."""
    df = pd.read_csv(source)
    missing = [c for c in GPS_CSV_COLUMNS[:3] if c not in df.columns]
    if missing:
        raise InvalidRecordError(f"GPS CSV is missing columns {missing}")
    df = df[[c for c in GPS_CSV_COLUMNS if c in df.columns]].copy()
    df['t'] = _parse_timestamps(df['timestamp'])
    return df.sort_values('t', kind='mergesort').reset_index(drop=True)


def write_gps_csv(records: Sequence[GpsRecord], path: Union[str, Path]):
    rows = {
        'timestamp': [r.t for r in records],
        'latitude': [r.lat for r in records],
        'longitude': [r.lon for r in records],
    }
    if any(r.accuracy is not None for r in records):
        rows['accuracy'] = [np.nan if r.accuracy is None else r.accuracy for r in records]
    pd.DataFrame(rows).to_csv(path, index=False)


def events_frame(trace: MobilityTrace) -> pd.DataFrame:
    return pd.DataFrame(
        [(trace.subject_id, e.kind.value, e.x, e.y, e.t, e.dx, e.dy, e.dt, e.observed) for e in trace.events],
        columns=EVENT_CSV_COLUMNS,
    )


def write_events_csv(trace: MobilityTrace, path: Union[str, Path]):
    events_frame(trace).to_csv(path, index=False)


def read_events_csv(path: Union[str, Path]) -> List[Event]:
    df = pd.read_csv(path)
    return [Event(EventKind(row.kind), row.x, row.y, row.t, row.dx, row.dy, row.dt, bool(row.observed))
            for row in df.itertuples(index=False)]


class GpsDataTool(BaseModel):
    name: str = "GPS Data Loading Tool"
    description: str = "Load GPS records per subject from CSV files or a Geolife PLT tree, with accuracy filtering"

    def _run(self, inputs: Sequence[str], input_format: str = 'csv',
             filters: Optional[Dict[str, Any]] = None) -> Dict[str, List[GpsRecord]]:
        """Records per subject, sorted by time.

        CSV: one subject per file (the file stem); a directory means every CSV in it.
        PLT: a directory is a Geolife tree with one subject per user, a single
        file is its own subject.
        """
        filters = filters if filters is not None else {'accuracy_limit_m': SEGMENTATION_DEFAULTS['accuracy_limit_m']}
        subjects: Dict[str, List[GpsRecord]] = {}
        for source in inputs:
            path = Path(source)
            if input_format == 'csv':
                files = sorted(path.glob('*.csv')) if path.is_dir() else [path]
                for csv_path in files:
                    df = self._apply_filters(read_gps_csv(csv_path), filters)
                    subjects[csv_path.stem] = _records_from_frame(df)
            elif input_format == 'plt':
                for subject, records in self._load_plt(path).items():
                    subjects.setdefault(subject, []).extend(records)
            else:
                raise InvalidRecordError(f"unknown input format '{input_format}'")
        for subject, records in subjects.items():
            records.sort(key=lambda r: r.t)
            logger.info("loaded %d records for %s", len(records), subject)
        return subjects

    def load_outings(self, inputs: Sequence[str], outings: Optional[Sequence[str]] = None) -> Dict[str, List[GpsRecord]]:
        """One entry per PLT file, keyed '<user>/<stem>'; an explicit outing list restricts the set."""
        wanted = set(outings) if outings else None
        out: Dict[str, List[GpsRecord]] = {}
        for source in inputs:
            path = Path(source)
            pairs = iter_geolife(path) if path.is_dir() else [(path.parent.parent.name, path)]
            for user, plt in pairs:
                key = f"{user}/{plt.stem}"
                if wanted is not None and key not in wanted:
                    continue
                out[key] = sorted(parse_plt(plt.read_bytes()).records, key=lambda r: r.t)
        if wanted is not None and len(out) < len(wanted):
            logger.warning("%d requested outings not found", len(wanted) - len(out))
        return out

    def _load_plt(self, path: Path) -> Dict[str, List[GpsRecord]]:
        if path.is_dir():
            pairs = iter_geolife(path)
        else:
            pairs = [(path.stem, path)]
        subjects: Dict[str, List[GpsRecord]] = {}
        for subject, plt in pairs:
            subjects.setdefault(subject, []).extend(parse_plt(plt.read_bytes()).records)
        return subjects

    def _apply_filters(self, df: pd.DataFrame, filters: Dict[str, Any]) -> pd.DataFrame:
        """Accuracy limit and optional [t_min, t_max] window."""
        filtered_df = df

        limit = filters.get('accuracy_limit_m')
        if limit is not None and 'accuracy' in filtered_df:
            too_coarse = filtered_df['accuracy'] > limit
            if too_coarse.any():
                logger.info("dropped %d rows with accuracy above %.0f m", int(too_coarse.sum()), limit)
            filtered_df = filtered_df[~too_coarse]

        if filters.get('t_min') is not None:
            filtered_df = filtered_df[filtered_df['t'] >= filters['t_min']]
        if filters.get('t_max') is not None:
            filtered_df = filtered_df[filtered_df['t'] <= filters['t_max']]

        return filtered_df.reset_index(drop=True)
