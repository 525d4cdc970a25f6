# utils/analysis_orchestrator.py
"""
Orchestrate the command workflows: impute, features, simulate-missingness, evaluate, analytic
"""
import json
import logging
import math
from importlib import metadata
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from config.models import RunConfig
from config.settings import APP_NAME, APP_VERSION, FEATURE_COLUMNS, FEATURE_DEFINITION_VERSION
from tools.data_processing_tool import GpsDataTool, write_events_csv, write_gps_csv
from tools.imputation_tool import ImputationTool, kernel_spec
from utils.analytic import AnalyticModel, gap_curve, jittered_semicircle
from utils.data_generator import generate_commuter_points
from utils.evaluation import (
    ErrorTable,
    OnOffSchedule,
    evaluate,
    evaluate_outings,
    evaluate_schedules,
    impose_missingness,
    merge_tables,
    sensitivity_table,
    unscheduled_missingness,
)
from utils.exceptions import EmptyTraceError
from utils.projection import project_records

logger = logging.getLogger(__name__)

PACKAGES = ['numpy', 'pandas', 'scipy', 'scikit-learn', 'pydantic', 'python-dateutil']
CURVE_N_VALUES = list(range(50, 1001, 50))


def package_versions() -> Dict[str, str]:
    versions = {APP_NAME: APP_VERSION}
    for name in PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = 'unknown'
    return versions


def _clean(value):
    """JSON-safe copy: NaN becomes null, numpy scalars become Python numbers."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and math.isnan(value):
        return None
    return value


def write_json(payload: dict, path: Path):
    path.write_text(json.dumps(_clean(payload), indent=2, sort_keys=True) + '\n', encoding='utf-8')


class AnalysisOrchestrator:
    """Runs one command against a resolved RunConfig and writes its outputs"""

    def __init__(self, config: RunConfig, command: str = ''):
        self.config = config
        self.command = command
        self.out_dir = Path(config.out_dir)
        self.data_tool = GpsDataTool()
        self.imputation_tool = ImputationTool(config=config)

    def _filters(self) -> dict:
        return {'accuracy_limit_m': self.config.segmentation.accuracy_limit_m}

    def _load(self):
        if not self.config.inputs:
            raise EmptyTraceError("no input paths given")
        return self.data_tool._run(self.config.inputs, self.config.input_format, self._filters())

    def _schedule(self) -> OnOffSchedule:
        return OnOffSchedule.from_config(self.config.schedule)

    def manifest(self, extra: Optional[dict] = None) -> dict:
        """Everything needed to re-run the command; no wall-clock content."""
        cfg = self.config
        payload = {
            'command': self.command,
            'seed': cfg.imputation.seed,
            'kernel': kernel_spec(cfg).model_dump(mode='json'),
            'replicates': cfg.imputation.replicates,
            'alpha': cfg.imputation.alpha,
            'schedule': cfg.schedule.label,
            'feature_definition_version': FEATURE_DEFINITION_VERSION,
            'versions': package_versions(),
            'config': cfg.model_dump(mode='json'),
        }
        payload.update(extra or {})
        return payload

    def _prepare_out(self) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        return self.out_dir

    def run_impute(self) -> dict:
        """One event CSV per subject and replicate plus manifest.json."""
        out = self._prepare_out()
        summaries = []
        for subject_id, records in self._load().items():
            result = self.imputation_tool._run(subject_id, records)
            subject_dir = out / subject_id
            subject_dir.mkdir(parents=True, exist_ok=True)
            write_events_csv(result.observed, subject_dir / 'observed.csv')
            for b, trace in enumerate(result.completed):
                write_events_csv(trace, subject_dir / f'replicate_{b:03d}.csv')
            summaries.append(result.summary())
        manifest = self.manifest({'subjects': summaries})
        write_json(manifest, out / 'manifest.json')
        return manifest

    def run_features(self) -> pd.DataFrame:
        """features.csv: one row per subject-day, feature column order, (lo, hi) when B >= 2."""
        out = self._prepare_out()
        rows = []
        summaries = []
        for subject_id, records in self._load().items():
            result = self.imputation_tool._run(subject_id, records, with_features=True)
            rows.extend(vec.to_row() for vec in result.features)
            summaries.append(result.summary())
        columns = ['subject_id', 'date']
        for name in FEATURE_COLUMNS:
            columns.append(name)
            if self.config.imputation.replicates >= 2:
                columns.extend([f'{name}_lo', f'{name}_hi'])
        df = pd.DataFrame(rows, columns=columns)
        df.to_csv(out / 'features.csv', index=False)
        write_json(self.manifest({'subjects': summaries}), out / 'manifest.json')
        return df

    def run_simulate_missingness(self) -> dict:
        """Degraded copy of every input under the configured duty cycle."""
        out = self._prepare_out()
        schedule = self._schedule()
        subjects = []
        for subject_id, records in self._load().items():
            kept = impose_missingness(records, schedule)
            write_gps_csv(kept, out / f'{subject_id}.csv')
            subjects.append({
                'subject_id': subject_id,
                'records_in': len(records),
                'records_kept': len(kept),
                'unscheduled_missing_fraction': unscheduled_missingness(
                    records, schedule, self.config.evaluation.unscheduled_tolerance_s),
            })
            logger.info("%s: kept %d of %d records", subject_id, len(kept), len(records))
        manifest = self.manifest({'retained_fraction': schedule.retained_fraction, 'subjects': subjects})
        write_json(manifest, out / 'manifest.json')
        return manifest

    def _evaluation_units(self, synthetic: int) -> Dict[str, list]:
        """Planar truth traces keyed by subject."""
        if synthetic:
            days = self.config.evaluation.synthetic_days
            seed = self.config.imputation.seed
            return {f'synthetic-{i:03d}': generate_commuter_points(days, seed + i) for i in range(synthetic)}
        return {subject_id: project_records(records)[0] for subject_id, records in self._load().items()}

    def run_evaluate(self, synthetic: int = 0, sweep: bool = False) -> ErrorTable:
        """error_table.csv / .json over the configured methods; per-method sensitivity tables when sweeping."""
        cfg = self.config
        out = self._prepare_out()
        schedule = self._schedule()
        methods = cfg.evaluation.methods
        b, seed = cfg.imputation.replicates, cfg.imputation.seed
        synthetic = synthetic or cfg.evaluation.synthetic_subjects

        if cfg.input_format == 'plt' and not synthetic:
            outings = self.data_tool.load_outings(cfg.inputs, cfg.evaluation.outings)
            points = [project_records(records)[0] for records in outings.values() if records]
            if not points:
                raise EmptyTraceError("no outings with records found")
            table = evaluate_outings(points, schedule, methods, b, seed, cfg)
            units = list(outings)
        else:
            units_points = self._evaluation_units(synthetic)
            tables = [evaluate(points, schedule, methods, b, seed, cfg, subject_id=unit)
                      for unit, points in units_points.items()]
            table = merge_tables(tables)
            units = list(units_points)
            if sweep:
                schedules = [OnOffSchedule.parse(s) for s in cfg.evaluation.schedules]
                per_schedule = [evaluate_schedules(points, schedules, methods, b, seed, cfg, unit)
                                for unit, points in units_points.items()]
                merged = {s.label: merge_tables([p[s.label] for p in per_schedule]) for s in schedules}
                for method in methods:
                    sensitivity_table(merged, method).to_csv(
                        out / f'sensitivity_{method}.csv', index_label='measure')

        table.to_frame().to_csv(out / 'error_table.csv', index_label='measure')
        write_json(table.to_dict(), out / 'error_table.json')
        write_json(self.manifest({'units': units, 'synthetic_subjects': synthetic}), out / 'manifest.json')
        return table

    def run_analytic(self) -> pd.DataFrame:
        """analytic_gaps.csv (closed form next to Monte Carlo) and semicircle.csv."""
        grid = self.config.analytic
        out = self._prepare_out()
        n_values = CURVE_N_VALUES if grid.curve else grid.n_values
        seed = self.config.imputation.seed
        df = gap_curve(n_values, grid.theta0_values, grid.reps, seed,
                       d=grid.d, sigma_x2=grid.sigma_x2, sigma_y2=grid.sigma_y2)
        df.to_csv(out / 'analytic_gaps.csv', index=False)

        model = AnalyticModel(n=grid.semicircle_n, theta0=math.pi / 2, d=grid.d,
                              sigma_x2=grid.sigma_x2, sigma_y2=grid.sigma_y2)
        spec = kernel_spec(self.config)
        frames: List[pd.DataFrame] = [
            jittered_semicircle(model, scale, grid.missing_fractions, grid.semicircle_replicates,
                                seed, self.config.imputation.alpha, spec)
            for scale in grid.jitter_scales
        ]
        pd.concat(frames, ignore_index=True).to_csv(out / 'semicircle.csv', index=False)
        write_json(self.manifest(), out / 'manifest.json')
        return df
