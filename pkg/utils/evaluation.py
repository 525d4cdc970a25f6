# utils/evaluation.py
"""
Scheduled-missingness evaluation harness

Impose an on/off duty cycle on a dense trace, impute with every method and
score the imputed measures against the measures of the undegraded trace.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, TypeVar

import numpy as np
import pandas as pd

from config.models import RunConfig, ScheduleConfig
from config.settings import (
    ERROR_TABLE_MEASURES,
    EVALUATION_DEFAULTS,
    HOME_FREE_MEASURES,
)
from utils.exceptions import ConfigurationError, TruthDensityError
from utils.features import compute_daily_features, subject_feature_table
from utils.imputer import impute_trace
from utils.kernels import KernelFamily, KernelSpec
from utils.projection import PlanarPoint
from utils.segmentation import MobilityTrace, segment_trace

logger = logging.getLogger(__name__)

AGGREGATE_ROW = 'average_abs_error'

Timed = TypeVar('Timed')  # anything with a .t in epoch seconds


@dataclass(frozen=True)
class OnOffSchedule:
    on_s: float
    off_s: float
    phase_s: float = 0.0

    def __post_init__(self):
        if not self.on_s > 0 or self.off_s < 0 or self.phase_s < 0:
            raise ConfigurationError(f"invalid schedule on={self.on_s} off={self.off_s} phase={self.phase_s}")

    @property
    def cycle(self) -> float:
        return self.on_s + self.off_s

    @property
    def retained_fraction(self) -> float:
        return self.on_s / self.cycle

    @property
    def label(self) -> str:
        return f"{self.on_s / 60:g}/{self.off_s / 60:g}"

    @classmethod
    def from_config(cls, cfg: ScheduleConfig) -> 'OnOffSchedule':
        return cls(on_s=cfg.on_minutes * 60.0, off_s=cfg.off_minutes * 60.0, phase_s=cfg.phase_s)

    @classmethod
    def parse(cls, text: str) -> 'OnOffSchedule':
        """'2/10' means 2 minutes on, 10 minutes off."""
        return cls.from_config(ScheduleConfig.parse(text))


def impose_missingness(points: Sequence[Timed], schedule: OnOffSchedule) -> List[Timed]:
    """Keep the points falling inside on-periods."""
    if not points:
        return []
    ts = np.array([p.t for p in points], dtype=float)
    keep = np.mod(ts - schedule.phase_s, schedule.cycle) < schedule.on_s
    return [p for p, k in zip(points, keep) if k]


def check_truth_density(points: Sequence[PlanarPoint], max_median_interval_s: float) -> float:
    """Median sampling interval; refuses traces too sparse to count as ground truth."""
    if len(points) < 2:
        logger.error("truth trace has %d points", len(points))
        raise TruthDensityError("truth trace needs at least two points")
    median = float(np.median(np.diff([p.t for p in points])))
    if median > max_median_interval_s:
        logger.error("truth trace median sampling interval %.1f s exceeds %.1f s", median, max_median_interval_s)
        raise TruthDensityError(
            f"median sampling interval {median:.1f} s exceeds {max_median_interval_s:.1f} s; "
            "the trace is too sparse to serve as ground truth")
    return median


def unscheduled_missingness(points: Sequence[PlanarPoint], schedule: OnOffSchedule,
                            tolerance_s: float = EVALUATION_DEFAULTS['unscheduled_tolerance_s'],
                            span: Optional[Tuple[float, float]] = None) -> float:
    """Fraction of scheduled-on time with no observation.

    On-periods are cut into tolerance-length windows; a window holding no
    observation counts as missing for its whole length. Only windows starting
    inside the span (default: first to last observation) are considered.
    """
    ts = np.sort(np.array([p.t for p in points], dtype=float))
    if span is None:
        if ts.size == 0:
            return 0.0
        span = (float(ts[0]), float(ts[-1]))
    k0 = math.floor((span[0] - schedule.phase_s) / schedule.cycle)
    k1 = math.floor((span[1] - schedule.phase_s) / schedule.cycle)
    per_on = math.ceil(schedule.on_s / tolerance_s - 1e-9)
    cycle_starts = schedule.phase_s + np.arange(k0, k1 + 1) * schedule.cycle
    offsets = np.arange(per_on) * tolerance_s
    starts = (cycle_starts[:, None] + offsets[None, :]).ravel()
    lengths = np.minimum(tolerance_s, schedule.on_s - np.tile(offsets, cycle_starts.size))
    inside = (starts >= span[0]) & (starts <= span[1])
    starts, lengths = starts[inside], lengths[inside]
    total = float(lengths.sum())
    if total <= 0:
        return 0.0
    hits = np.searchsorted(ts, starts + lengths, side='left') - np.searchsorted(ts, starts, side='left')
    return float(lengths[hits == 0].sum() / total)


def parse_method(label: str, nu: float = 1.0) -> KernelSpec:
    """'LI' or '<family>.<scale multiplier>', e.g. 'TL.20'."""
    if label == 'LI':
        return KernelSpec(family=KernelFamily.LI, nu=nu)
    family, _, mult = label.partition('.')
    try:
        return KernelSpec.from_family(family, nu=nu, scale_multiplier=float(mult) if mult else 1.0)
    except ValueError as exc:
        raise ConfigurationError(f"unknown method '{label}'") from exc


@dataclass
class ErrorTable:
    """Relative errors (percent) per measure and method.

    Each cell keeps the individual per-unit errors so tables from different
    subjects or outings merge by concatenation. Cells whose truth is near zero
    hold absolute errors and are flagged.
    """
    measures: List[str]
    methods: List[str]
    relative: Dict[Tuple[str, str], List[float]] = field(default_factory=dict)
    absolute: Dict[Tuple[str, str], List[float]] = field(default_factory=dict)

    def add(self, measure: str, method: str, estimate: float, truth: float,
            near_zero: float = EVALUATION_DEFAULTS['near_zero_truth']):
        if math.isnan(estimate) or math.isnan(truth):
            return
        if abs(truth) < near_zero:
            self.absolute.setdefault((measure, method), []).append(abs(estimate - truth))
        else:
            self.relative.setdefault((measure, method), []).append((estimate - truth) / truth * 100.0)

    def merge(self, other: 'ErrorTable') -> 'ErrorTable':
        measures = self.measures + [m for m in other.measures if m not in self.measures]
        methods = self.methods + [m for m in other.methods if m not in self.methods]
        merged = ErrorTable(measures, methods)
        for src in (self, other):
            for key, values in src.relative.items():
                merged.relative.setdefault(key, []).extend(values)
            for key, values in src.absolute.items():
                merged.absolute.setdefault(key, []).extend(values)
        return merged

    def cell(self, measure: str, method: str) -> Tuple[float, bool]:
        """(signed mean relative error, flagged); flagged cells carry mean absolute error."""
        rel = self.relative.get((measure, method))
        if rel:
            return float(np.mean(rel)), False
        absolute = self.absolute.get((measure, method))
        if absolute:
            return float(np.mean(absolute)), True
        return float('nan'), False

    def aggregate(self, method: str, measures: Optional[Iterable[str]] = None) -> float:
        """Mean |cell| over unflagged cells of one method."""
        values = []
        for measure in (measures or self.measures):
            value, flagged = self.cell(measure, method)
            if not flagged and not math.isnan(value):
                values.append(abs(value))
        return float(np.mean(values)) if values else float('nan')

    def median_abs(self, measure: str, method: str) -> float:
        rel = self.relative.get((measure, method))
        return float(np.median(np.abs(rel))) if rel else float('nan')

    def to_frame(self) -> pd.DataFrame:
        """Rows are measures plus the aggregate row, columns are methods."""
        data = {method: [self.cell(m, method)[0] for m in self.measures] + [self.aggregate(method)]
                for method in self.methods}
        return pd.DataFrame(data, index=self.measures + [AGGREGATE_ROW], columns=self.methods)

    def to_dict(self) -> dict:
        cells = {}
        for measure in self.measures:
            cells[measure] = {}
            for method in self.methods:
                value, flagged = self.cell(measure, method)
                count = len(self.relative.get((measure, method), [])) or len(self.absolute.get((measure, method), []))
                cells[measure][method] = {
                    'value': None if math.isnan(value) else value,
                    'flagged': flagged,
                    'n': count,
                }
        aggregate = {m: (None if math.isnan(self.aggregate(m)) else self.aggregate(m)) for m in self.methods}
        return {'measures': self.measures, 'methods': self.methods, 'cells': cells, AGGREGATE_ROW: aggregate}


def _fill_truth(trace: MobilityTrace) -> MobilityTrace:
    """Dense truth may still hold a few real gaps; close them with straight lines."""
    return impute_trace(trace, KernelSpec(family=KernelFamily.LI), 1, 0)[0]


def _unit_measures(trace: MobilityTrace, cfg: RunConfig) -> Dict[str, float]:
    vec = compute_daily_features(trace.events, [], None, cfg.features, trace.subject_id)
    return vec.measures()


def evaluate(truth_points: Sequence[PlanarPoint], schedule: OnOffSchedule, methods: Sequence[str],
             replicates: int, seed: int, cfg: Optional[RunConfig] = None, subject_id: str = '',
             home_free: bool = False, check_density: bool = True) -> ErrorTable:
    """Score every method against the undegraded trace.

    Args:
        truth_points: dense planar trace
        schedule: duty cycle imposed on the truth
        methods: method labels such as 'LI' or 'TL.20'
        replicates: B for stochastic methods; LI always runs once
        seed: base seed
        cfg: run configuration (segmentation, features, kernel nu, alpha)
        home_free: score an outing as one unit on the home-free measures only
    Returns:
        ErrorTable with one contribution per day (or one per outing)
    """
    cfg = cfg or RunConfig()
    if check_density:
        check_truth_density(truth_points, cfg.evaluation.truth_max_median_interval_s)
    measures = list(HOME_FREE_MEASURES if home_free else ERROR_TABLE_MEASURES)
    seg = cfg.segmentation
    truth_trace = _fill_truth(segment_trace(truth_points, seg, subject_id=subject_id))
    degraded = segment_trace(impose_missingness(truth_points, schedule), seg, subject_id=subject_id)

    if home_free:
        truth_units = {'outing': _unit_measures(truth_trace, cfg)}
    else:
        truth_units = {v.date: v.measures()
                       for v in subject_feature_table(truth_trace, [truth_trace], cfg.features)}

    table = ErrorTable(measures, list(methods))
    for label in methods:
        spec = parse_method(label, cfg.imputation.nu)
        b = replicates if spec.is_stochastic else 1
        completed = impute_trace(degraded, spec, b, seed, cfg.imputation.bridge_mode,
                                 cfg.imputation.join_radius_m)
        if home_free:
            per_rep = [_unit_measures(tr, cfg) for tr in completed]
            estimates = {'outing': {m: float(np.mean([r[m] for r in per_rep])) for m in measures}}
        else:
            estimates = {v.date: v.measures() for v in
                         subject_feature_table(degraded, completed, cfg.features, cfg.imputation.alpha)}
        for unit, truth in truth_units.items():
            if unit not in estimates:
                continue
            for measure in measures:
                table.add(measure, label, estimates[unit][measure], truth[measure],
                          EVALUATION_DEFAULTS['near_zero_truth'])
        logger.info("%s %s: mean abs error %.2f%%", subject_id or 'trace', label, table.aggregate(label))
    return table


def merge_tables(tables: Sequence[ErrorTable]) -> ErrorTable:
    return reduce(ErrorTable.merge, tables)


def evaluate_outings(outings: Sequence[Sequence[PlanarPoint]], schedule: OnOffSchedule, methods: Sequence[str],
                     replicates: int, seed: int, cfg: Optional[RunConfig] = None) -> ErrorTable:
    """Home-free evaluation of many outings, reduced into one table."""
    tables = [evaluate(points, schedule, methods, replicates, seed, cfg, subject_id=f'outing-{i}',
                       home_free=True)
              for i, points in enumerate(outings)]
    return merge_tables(tables)


def evaluate_schedules(truth_points: Sequence[PlanarPoint], schedules: Sequence[OnOffSchedule],
                       methods: Sequence[str], replicates: int, seed: int,
                       cfg: Optional[RunConfig] = None, subject_id: str = '') -> Dict[str, ErrorTable]:
    """One error table per duty cycle."""
    return {s.label: evaluate(truth_points, s, methods, replicates, seed, cfg, subject_id)
            for s in schedules}


def sensitivity_table(tables: Dict[str, ErrorTable], method: str) -> pd.DataFrame:
    """Median absolute relative error, measures x schedules, for one method."""
    labels = list(tables)
    measures = tables[labels[0]].measures if labels else []
    data = {label: [tables[label].median_abs(m, method) for m in measures] for label in labels}
    return pd.DataFrame(data, index=measures, columns=labels)
