# config/__init__.py
"""
Configuration package for the mobility imputation toolkit
"""
from .settings import (
    APP_NAME,
    APP_VERSION,
    FEATURE_COLUMNS,
    FEATURE_DEFINITION_VERSION,
    HOME_FREE_MEASURES,
    KERNEL_SCALES,
)
from .models import (
    AnalyticGridConfig,
    EvaluationConfig,
    FeatureConfig,
    ImputationConfig,
    RunConfig,
    ScheduleConfig,
    SegmentationConfig,
    load_run_config,
)

__all__ = [
    'APP_NAME',
    'APP_VERSION',
    'FEATURE_COLUMNS',
    'FEATURE_DEFINITION_VERSION',
    'HOME_FREE_MEASURES',
    'KERNEL_SCALES',
    'AnalyticGridConfig',
    'EvaluationConfig',
    'FeatureConfig',
    'ImputationConfig',
    'RunConfig',
    'ScheduleConfig',
    'SegmentationConfig',
    'load_run_config',
]
