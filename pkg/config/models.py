# config/models.py
"""
Typed run configuration loaded from JSON and patched by command-line flags
"""

import json
from pathlib import Path
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from config.settings import (
    ANALYTIC_DEFAULTS,
    EVALUATION_DEFAULTS,
    FEATURE_DEFAULTS,
    IMPUTATION_DEFAULTS,
    SEGMENTATION_DEFAULTS,
)


class SegmentationConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    pause_radius_m: float = Field(SEGMENTATION_DEFAULTS['pause_radius_m'], gt=0)
    min_pause_s: float = Field(SEGMENTATION_DEFAULTS['min_pause_s'], ge=0)
    gap_threshold_s: float = Field(SEGMENTATION_DEFAULTS['gap_threshold_s'], gt=0)
    pause_merge_m: float = Field(SEGMENTATION_DEFAULTS['pause_merge_m'], ge=0)
    accuracy_limit_m: Optional[float] = Field(SEGMENTATION_DEFAULTS['accuracy_limit_m'], gt=0)


class FeatureConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    home_radius_m: float = Field(FEATURE_DEFAULTS['home_radius_m'], gt=0)
    sigloc_radius_m: float = Field(FEATURE_DEFAULTS['sigloc_radius_m'], gt=0)
    sigloc_min_s: float = Field(FEATURE_DEFAULTS['sigloc_min_s'], ge=0)
    night_start_h: float = Field(FEATURE_DEFAULTS['night_start_h'], ge=0, le=24)
    night_end_h: float = Field(FEATURE_DEFAULTS['night_end_h'], ge=0, le=24)
    routine_step_s: float = Field(FEATURE_DEFAULTS['routine_step_s'], gt=0)
    utc_offset_h: float = Field(0.0, ge=-14, le=14)


class ScheduleConfig(BaseModel):
    """On/off duty cycle in minutes."""
    model_config = ConfigDict(frozen=True, extra='forbid')

    on_minutes: float = Field(EVALUATION_DEFAULTS['on_minutes'], gt=0)
    off_minutes: float = Field(EVALUATION_DEFAULTS['off_minutes'], ge=0)
    phase_s: float = Field(0.0, ge=0)

    @classmethod
    def parse(cls, text: str) -> 'ScheduleConfig':
        """Parse an 'ON/OFF' string such as '2/10'."""
        from utils.exceptions import ConfigurationError

        try:
            on, off = text.split('/')
            return cls(on_minutes=float(on), off_minutes=float(off))
        except (ValueError, ValidationError) as exc:
            raise ConfigurationError(f"bad schedule '{text}', expected ON/OFF minutes") from exc

    @property
    def label(self) -> str:
        return f"{self.on_minutes:g}/{self.off_minutes:g}"


class ImputationConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    kernel: Literal['TL', 'GL', 'GLC', 'LI'] = IMPUTATION_DEFAULTS['kernel']
    nu: float = Field(IMPUTATION_DEFAULTS['nu'], gt=0)
    scale_multiplier: float = Field(IMPUTATION_DEFAULTS['scale_multiplier'], gt=0)
    replicates: int = Field(IMPUTATION_DEFAULTS['replicates'], ge=1)
    alpha: float = Field(IMPUTATION_DEFAULTS['alpha'], gt=0, lt=1)
    seed: int = Field(IMPUTATION_DEFAULTS['seed'], ge=0, lt=2 ** 64)
    bridge_mode: Literal['convex', 'additive'] = IMPUTATION_DEFAULTS['bridge_mode']
    # 0 keeps every simulated flight separate
    join_radius_m: float = Field(IMPUTATION_DEFAULTS['join_radius_m'], ge=0)


class EvaluationConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    methods: List[str] = Field(default_factory=lambda: list(EVALUATION_DEFAULTS['methods']))
    schedules: List[str] = Field(default_factory=lambda: list(EVALUATION_DEFAULTS['sensitivity_schedules']))
    truth_max_median_interval_s: float = Field(EVALUATION_DEFAULTS['truth_max_median_interval_s'], gt=0)
    unscheduled_tolerance_s: float = Field(EVALUATION_DEFAULTS['unscheduled_tolerance_s'], gt=0)
    outings: Optional[List[str]] = None
    synthetic_subjects: int = Field(0, ge=0)
    synthetic_days: int = Field(3, ge=1)


class AnalyticGridConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    n_values: List[int] = Field(default_factory=lambda: list(ANALYTIC_DEFAULTS['n_values']))
    theta0_values: List[float] = Field(default_factory=lambda: list(ANALYTIC_DEFAULTS['theta0_values']))
    d: float = Field(ANALYTIC_DEFAULTS['d'], gt=0)
    sigma_x2: float = Field(ANALYTIC_DEFAULTS['sigma_x2'], ge=0)
    sigma_y2: float = Field(ANALYTIC_DEFAULTS['sigma_y2'], ge=0)
    reps: int = Field(ANALYTIC_DEFAULTS['reps'], ge=1)
    jitter_scales: List[float] = Field(default_factory=lambda: list(ANALYTIC_DEFAULTS['jitter_scales']))
    missing_fractions: List[float] = Field(default_factory=lambda: list(ANALYTIC_DEFAULTS['missing_fractions']))
    semicircle_n: int = Field(ANALYTIC_DEFAULTS['semicircle_n'], ge=10)
    semicircle_replicates: int = Field(ANALYTIC_DEFAULTS['semicircle_replicates'], ge=1)
    curve: bool = False

    @field_validator('n_values')
    @classmethod
    def _positive_n(cls, values):
        if any(n < 1 for n in values):
            raise ValueError("n must be >= 1")
        return values

    @field_validator('missing_fractions')
    @classmethod
    def _fractions(cls, values):
        if any(not 0.0 <= f < 1.0 for f in values):
            raise ValueError("missing fractions must lie in [0, 1)")
        return values


class RunConfig(BaseModel):
    """Everything a command needs; the manifest stores its dump."""
    model_config = ConfigDict(frozen=True, extra='forbid')

    inputs: List[str] = Field(default_factory=list)
    input_format: Literal['csv', 'plt'] = 'csv'
    out_dir: str = 'out'
    segmentation: SegmentationConfig = Field(default_factory=SegmentationConfig)
    features: FeatureConfig = Field(default_factory=FeatureConfig)
    schedule: ScheduleConfig = Field(default_factory=ScheduleConfig)
    imputation: ImputationConfig = Field(default_factory=ImputationConfig)
    evaluation: EvaluationConfig = Field(default_factory=EvaluationConfig)
    analytic: AnalyticGridConfig = Field(default_factory=AnalyticGridConfig)

    @model_validator(mode='after')
    def _check_night(self):
        if self.features.night_start_h == self.features.night_end_h:
            raise ValueError("night window is empty")
        return self

    def with_overrides(self, **overrides) -> 'RunConfig':
        """Return a copy patched with flag values; None means 'not given'."""
        from utils.exceptions import ConfigurationError

        data = self.model_dump()
        mapping = {
            'seed': ('imputation', 'seed'),
            'kernel': ('imputation', 'kernel'),
            'scale_multiplier': ('imputation', 'scale_multiplier'),
            'replicates': ('imputation', 'replicates'),
            'input_format': (None, 'input_format'),
            'out_dir': (None, 'out_dir'),
            'inputs': (None, 'inputs'),
        }
        for key, value in overrides.items():
            if value is None:
                continue
            if key == 'schedule':
                schedule = value if isinstance(value, ScheduleConfig) else ScheduleConfig.parse(value)
                data['schedule'] = schedule.model_dump()
                continue
            if key not in mapping:
                raise ConfigurationError(f"unknown override '{key}'")
            section, field = mapping[key]
            if section is None:
                data[field] = value
            else:
                data[section][field] = value
        try:
            return RunConfig.model_validate(data)
        except ValidationError as exc:
            raise ConfigurationError(str(exc)) from exc


def load_run_config(path: Optional[str] = None) -> RunConfig:
    """Load a RunConfig from a JSON file, or defaults when no path is given."""
    from utils.exceptions import ConfigurationError

    if path is None:
        return RunConfig()
    try:
        raw = json.loads(Path(path).read_text(encoding='utf-8'))
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config {path} is not valid JSON: {exc}") from exc
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as exc:
        raise ConfigurationError(f"invalid config {path}: {exc}") from exc
