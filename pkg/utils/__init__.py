# utils/__init__.py
"""
Utilities package: projection, segmentation, imputation, features, evaluation and the analytic model
"""
from .exceptions import (
    ConfigurationError,
    EmptyTraceError,
    MobilityError,
    NoDonorsError,
    OutOfFrameError,
    PltFormatError,
    TruthDensityError,
    UnsortedPointsError,
)
from .projection import GpsRecord, PlanarPoint, ProjectionFrame, build_frame, project, project_records
from .segmentation import Event, EventKind, MissingInterval, MobilityTrace, extract_events, segment_trace
from .kernels import KernelFamily, KernelSpec
from .imputer import EmpiricalPool, confidence_interval, impute_trace, simulate_gap
from .features import DailyFeatureVector, compute_study_features, subject_feature_table
from .evaluation import ErrorTable, OnOffSchedule, evaluate, impose_missingness, unscheduled_missingness
from .analytic import AnalyticModel, expected_gap_hotdeck, expected_gap_li, monte_carlo_gap
from .data_generator import generate_commuter_points, generate_stationary_points, to_records

__all__ = [
    'ConfigurationError',
    'EmptyTraceError',
    'MobilityError',
    'NoDonorsError',
    'OutOfFrameError',
    'PltFormatError',
    'TruthDensityError',
    'UnsortedPointsError',
    'GpsRecord',
    'PlanarPoint',
    'ProjectionFrame',
    'build_frame',
    'project',
    'project_records',
    'Event',
    'EventKind',
    'MissingInterval',
    'MobilityTrace',
    'extract_events',
    'segment_trace',
    'KernelFamily',
    'KernelSpec',
    'EmpiricalPool',
    'confidence_interval',
    'impute_trace',
    'simulate_gap',
    'DailyFeatureVector',
    'compute_study_features',
    'subject_feature_table',
    'ErrorTable',
    'OnOffSchedule',
    'evaluate',
    'impose_missingness',
    'unscheduled_missingness',
    'AnalyticModel',
    'expected_gap_hotdeck',
    'expected_gap_li',
    'monte_carlo_gap',
    'generate_commuter_points',
    'generate_stationary_points',
    'to_records',

    # the orchestrator imports tools, which import utils; import it from its module
    # 'AnalysisOrchestrator',
]
