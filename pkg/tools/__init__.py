# tools/__init__.py
"""
Tools package wrapping the pipeline steps for the orchestrator
"""
from .data_processing_tool import GpsDataTool, parse_plt, iter_geolife, read_gps_csv
from .imputation_tool import ImputationTool, SubjectResult, kernel_spec

__all__ = [
    'GpsDataTool',
    'parse_plt',
    'iter_geolife',
    'read_gps_csv',
    'ImputationTool',
    'SubjectResult',
    'kernel_spec',
]
