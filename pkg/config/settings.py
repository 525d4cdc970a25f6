# config/settings.py
"""
Application configuration settings
"""

APP_NAME = "mobility-imputer"
APP_VERSION = "1.0.0"

# Physical constants
EARTH_RADIUS_M = 6.371e6
DAY_SECONDS = 86400.0
HOUR_SECONDS = 3600.0

# Flight / pause segmentation (rectangular method)
SEGMENTATION_DEFAULTS = {
    'pause_radius_m': 25.0,
    'min_pause_s': 30.0,
    'gap_threshold_s': 90.0,
    'pause_merge_m': 50.0,
    'accuracy_limit_m': 51.0,
}

# Base kernel scales, multiplied by the scale multiplier of a run
KERNEL_SCALES = {
    'TL': {'c': 1.0 / 3600.0},
    'GL': {'c': 1.0 / 500.0},
    'GLC': {'c1': 1.0 / 500.0, 'c2': 1.0 / 3600.0},
}

IMPUTATION_DEFAULTS = {
    'kernel': 'TL',
    'nu': 1.0,
    'scale_multiplier': 1.0,
    'replicates': 100,
    'alpha': 0.05,
    'seed': 20180101,
    'bridge_mode': 'convex',
    'join_radius_m': 25.0,
}

FEATURE_DEFAULTS = {
    'home_radius_m': 200.0,
    'sigloc_radius_m': 200.0,
    'sigloc_min_s': 1800.0,
    'night_start_h': 0.0,
    'night_end_h': 6.0,
    'routine_step_s': 60.0,
}

EVALUATION_DEFAULTS = {
    'on_minutes': 2.0,
    'off_minutes': 10.0,
    'truth_max_median_interval_s': 10.0,
    'near_zero_truth': 1e-9,
    'unscheduled_tolerance_s': 60.0,
    'methods': ['LI', 'TL.1', 'TL.10', 'TL.20', 'GL.1', 'GL.10', 'GL.20',
                'GLC.1', 'GLC.10', 'GLC.20'],
    'sensitivity_schedules': ['1/10', '1/20', '1/30', '2/10', '2/20', '2/30'],
}

ANALYTIC_DEFAULTS = {
    'n_values': [50, 200, 800],
    'theta0_values': [0.0, 0.7853981633974483, 1.5707963267948966],
    'd': 1.0,
    'sigma_x2': 1.0,
    'sigma_y2': 1.0,
    'reps': 1000,
    'jitter_scales': [0.0, 0.1, 0.3],
    'missing_fractions': [0.0, 0.2, 0.4, 0.6, 0.8],
    'semicircle_n': 200,
    'semicircle_replicates': 100,
}

# Feature definitions are reconstructed from the measure names; bump the
# identifier whenever a definition changes.
FEATURE_DEFINITION_VERSION = "recon-1"

FEATURE_COLUMNS = [
    'hometime_min',
    'dist_travelled_m',
    'rog_m',
    'max_diam_m',
    'max_home_dist_m',
    'sig_locs_visited',
    'avg_flight_len_m',
    'std_flight_len_m',
    'avg_flight_dur_s',
    'std_flight_dur_s',
    'frac_pause',
    'sig_loc_entropy',
    'mins_missing',
    'circdn_rtn',
    'wkend_day_rtn',
]

FEATURE_LABELS = {
    'hometime_min': 'Hometime',
    'dist_travelled_m': 'DistTravelled',
    'rog_m': 'RoG',
    'max_diam_m': 'MaxDiam',
    'max_home_dist_m': 'MaxHomeDist',
    'sig_locs_visited': 'SigLocsVisited',
    'avg_flight_len_m': 'AvgFlightLen',
    'std_flight_len_m': 'StdFlightLen',
    'avg_flight_dur_s': 'AvgFlightDur',
    'std_flight_dur_s': 'StdFlightDur',
    'frac_pause': 'FracPause',
    'sig_loc_entropy': 'SigLocEntropy',
    'mins_missing': 'MinsMissing',
    'circdn_rtn': 'CircdnRtn',
    'wkend_day_rtn': 'WkEndDayRtn',
}

# Measures that need neither a home nor significant locations
HOME_FREE_MEASURES = [
    'dist_travelled_m',
    'rog_m',
    'max_diam_m',
    'avg_flight_len_m',
    'std_flight_len_m',
    'avg_flight_dur_s',
    'std_flight_dur_s',
    'frac_pause',
]

# Measures compared in error tables (mins_missing describes observation only)
ERROR_TABLE_MEASURES = [c for c in FEATURE_COLUMNS if c != 'mins_missing']

# Input / output schemas
GPS_CSV_COLUMNS = ['timestamp', 'latitude', 'longitude', 'accuracy']
EVENT_CSV_COLUMNS = ['subject_id', 'kind', 'x', 'y', 't', 'dx', 'dy', 'dt', 'observed']
PLT_COLUMNS = ['latitude', 'longitude', 'zero', 'altitude_ft', 'days', 'date', 'time']
PLT_HEADER_LINES = 6

# Synthetic commuter model
DATA_CONSTANTS = {
    'origin_lat': 42.3601,
    'origin_lon': -71.0589,
    'sampling_s': 10.0,
    'gps_noise_m': 2.0,
    'start_epoch': 1514764800.0,  # Monday 2018-01-01 00:00 UTC
    'leg_s': 60.0,
    'jitter_fraction': 0.5,
    'lunch_probability': 0.5,
    'lunch_distance_m': (300.0, 700.0),
    'lunch_pause_h': (0.5, 1.0),
    'walking_speed_mps': 1.4,
    'errand_pause_h': (0.3, 1.0),
    'outing_start_h': (10.0, 14.0),
    'outing_pause_h': (1.0, 3.0),
    'work_distance_m': (3000.0, 8000.0),
    'errand_distance_m': (800.0, 2500.0),
    'speed_mps': (1.2, 12.0),
    'leave_home_h': (7.0, 9.0),
    'leave_work_h': (16.5, 18.5),
    'errand_probability': 0.35,
    'weekend_outing_probability': 0.6,
}
