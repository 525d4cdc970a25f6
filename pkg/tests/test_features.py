# tests/test_features.py
import logging
import math

import numpy as np
import pytest

from config.models import FeatureConfig, SegmentationConfig
from config.settings import DAY_SECONDS, FEATURE_COLUMNS, HOUR_SECONDS
from utils.evaluation import OnOffSchedule, impose_missingness
from utils.features import (
    DailyFeatureVector,
    SignificantLocation,
    compute_daily_features,
    day_similarity,
    estimate_home,
    feature_intervals,
    find_significant_locations,
    max_diameter,
    missing_minutes,
    occupancy_matrix,
    radius_of_gyration,
    split_days,
    subject_feature_table,
    time_in_disc,
)
from utils.imputer import impute_trace
from utils.kernels import KernelSpec
from utils.projection import PlanarPoint
from utils.segmentation import Event, MobilityTrace, segment_trace

from conftest import START, chain, flight, pause

LENGTH_MEASURES = ['dist_travelled_m', 'rog_m', 'max_diam_m', 'max_home_dist_m',
                   'avg_flight_len_m', 'std_flight_len_m']


def test_time_in_disc_for_a_pause() -> None:
    assert time_in_disc(pause(10.0, 0.0, 0.0, 300.0), 0.0, 0.0, 50.0) == 300.0
    assert time_in_disc(pause(60.0, 0.0, 0.0, 300.0), 0.0, 0.0, 50.0) == 0.0


def test_time_in_disc_for_a_crossing_flight() -> None:
    ev = flight(-100.0, 0.0, 0.0, 200.0, 0.0, 200.0)
    assert time_in_disc(ev, 0.0, 0.0, 50.0) == pytest.approx(100.0)
    assert time_in_disc(flight(-100.0, 60.0, 0.0, 200.0, 0.0, 200.0), 0.0, 0.0, 50.0) == 0.0
    # starts inside, leaves after a quarter of the way
    assert time_in_disc(flight(0.0, 0.0, 0.0, 200.0, 0.0, 100.0), 0.0, 0.0, 50.0) == pytest.approx(25.0)


def test_radius_of_gyration_of_one_flight() -> None:
    assert radius_of_gyration([flight(0.0, 0.0, 0.0, 120.0, 0.0, 60.0)]) == pytest.approx(120.0 / math.sqrt(12.0))
    assert radius_of_gyration([pause(5.0, 5.0, 0.0, 60.0)]) == 0.0


def test_radius_of_gyration_weights_by_time() -> None:
    two = [pause(0.0, 0.0, 0.0, 300.0), pause(100.0, 0.0, 300.0, 100.0)]
    # centroid at x = 25, rms distance sqrt(0.75 * 25^2 + 0.25 * 75^2)
    assert radius_of_gyration(two) == pytest.approx(math.sqrt(0.75 * 625.0 + 0.25 * 5625.0))


def test_max_diameter() -> None:
    square = np.array([[0.0, 0.0], [10.0, 0.0], [10.0, 10.0], [0.0, 10.0], [5.0, 5.0]])
    assert max_diameter(square) == pytest.approx(math.hypot(10.0, 10.0))
    assert max_diameter(np.array([[0.0, 0.0], [3.0, 0.0], [7.0, 0.0]])) == pytest.approx(7.0)
    assert max_diameter(np.array([[1.0, 1.0]])) == 0.0


def test_events_are_split_at_midnight() -> None:
    days = split_days([flight(0.0, 0.0, START - 100.0, 200.0, 0.0, 200.0)])

    assert list(days) == [START - DAY_SECONDS, START]
    before, after = days[START - DAY_SECONDS][0], days[START][0]
    assert (before.dt, after.dt) == (100.0, 100.0)
    assert before.end_x == pytest.approx(100.0)
    assert after.x == pytest.approx(100.0)


def _day_of_two_places():
    """Home at the origin overnight, office 3 km east for longer during the day."""
    kinds = ['P', 'F', 'P', 'F', 'P']
    h = HOUR_SECONDS
    steps = [(0, 0, 7 * h), (3000, 0, h), (0, 0, 12 * h), (-3000, 0, h), (0, 0, 3 * h)]
    return MobilityTrace(events=chain(kinds, steps, t=START), gaps=[], subject_id='two')


def test_significant_locations_ranked_by_dwell() -> None:
    locations = find_significant_locations([_day_of_two_places()])

    assert [loc.id for loc in locations] == [0, 1]
    assert (locations[0].center.x, locations[0].total_pause_s) == (3000.0, 12 * HOUR_SECONDS)
    assert (locations[1].center.x, locations[1].total_pause_s) == (0.0, 10 * HOUR_SECONDS)


def test_short_stays_are_not_significant() -> None:
    trace = MobilityTrace(events=[pause(0.0, 0.0, 0.0, 600.0)], gaps=[])
    assert find_significant_locations([trace]) == []


def test_home_is_where_the_nights_are() -> None:
    trace = _day_of_two_places()
    locations = find_significant_locations([trace])
    home = estimate_home(locations, [trace])

    assert home.id == 1 and home.is_home
    assert (home.center.x, home.center.y) == (0.0, 0.0)


def test_home_without_nights_falls_back_to_dwell(caplog) -> None:
    locations = [SignificantLocation(0, PlanarPoint(0.0, 0.0), 5000.0),
                 SignificantLocation(1, PlanarPoint(900.0, 0.0), 7000.0),
                 SignificantLocation(2, PlanarPoint(0.0, 900.0), 7000.0)]
    with caplog.at_level(logging.INFO, logger='utils.features'):
        home = estimate_home(locations, [])
    assert home.id == 1
    assert 'no night-time pauses' in caplog.text
    assert estimate_home([], []) is None


def test_stationary_day(stationary_day) -> None:
    observed = segment_trace(stationary_day, SegmentationConfig(), subject_id='still')
    completed = impute_trace(observed, KernelSpec.from_family('TL'), 1, seed=0)
    (vec,) = subject_feature_table(observed, completed, FeatureConfig())

    assert vec.date == '2018-01-01' and not vec.weekend
    assert vec.hometime_min == pytest.approx(1440.0)
    assert vec.dist_travelled_m == 0.0
    assert vec.frac_pause == pytest.approx(1.0)
    assert vec.mins_missing == pytest.approx(0.0)
    assert vec.sig_locs_visited == 1.0
    assert vec.sig_loc_entropy == 0.0
    assert vec.max_home_dist_m == pytest.approx(0.0)
    # a single day has nothing to compare against
    assert math.isnan(vec.circdn_rtn) and math.isnan(vec.wkend_day_rtn)


def test_missing_minutes_under_a_duty_cycle(stationary_day) -> None:
    kept = impose_missingness(stationary_day, OnOffSchedule(120.0, 600.0))
    observed = segment_trace(kept, SegmentationConfig(), subject_id='still')

    # 120 silent stretches of 610 s between the 110 s bursts and the closing fix
    assert missing_minutes(observed, START) == pytest.approx(1220.0)
    completed = impute_trace(observed, KernelSpec.from_family('LI'), 1, seed=0)
    (vec,) = subject_feature_table(observed, completed)
    assert vec.mins_missing == pytest.approx(1220.0)
    assert vec.hometime_min == pytest.approx(1440.0)


def _random_day(rng):
    kinds, steps = [], []
    for i in range(int(rng.integers(4, 20))):
        if i % 2 == 0 or rng.random() < 0.3:
            kinds.append('F')
            steps.append((rng.normal(0.0, 400.0), rng.normal(0.0, 400.0), rng.uniform(30.0, 900.0)))
        else:
            kinds.append('P')
            steps.append((0.0, 0.0, rng.uniform(60.0, 7200.0)))
    x, y = rng.normal(0.0, 300.0, size=2)
    return chain(kinds, steps, x=float(x), y=float(y), t=START)


def _scaled(ev: Event, k: float) -> Event:
    return Event(ev.kind, ev.x * k, ev.y * k, ev.t, ev.dx * k, ev.dy * k, ev.dt)


def test_measures_scale_with_the_plane() -> None:
    rng = np.random.default_rng(17)
    cfg = FeatureConfig()
    cfg2 = FeatureConfig(home_radius_m=2 * cfg.home_radius_m, sigloc_radius_m=2 * cfg.sigloc_radius_m)
    for _ in range(100):
        events = _random_day(rng)
        centers = rng.normal(0.0, 500.0, size=(3, 2))
        locations = [SignificantLocation(i, PlanarPoint(float(cx), float(cy)), 3600.0)
                     for i, (cx, cy) in enumerate(centers)]
        locations2 = [SignificantLocation(loc.id, PlanarPoint(2 * loc.center.x, 2 * loc.center.y), 3600.0)
                      for loc in locations]

        base = compute_daily_features(events, locations, locations[0], cfg).measures()
        scaled = compute_daily_features([_scaled(e, 2.0) for e in events], locations2, locations2[0],
                                        cfg2).measures()
        for name in FEATURE_COLUMNS:
            if name in ('circdn_rtn', 'wkend_day_rtn', 'mins_missing'):
                continue
            factor = 2.0 if name in LENGTH_MEASURES else 1.0
            assert scaled[name] == pytest.approx(factor * base[name], rel=1e-9, abs=1e-9), name


def test_occupancy_of_a_stationary_day(stationary_day) -> None:
    trace = segment_trace(stationary_day, SegmentationConfig())
    locations = find_significant_locations([trace])
    occ = occupancy_matrix(trace.events, START, locations, FeatureConfig())

    assert occ.shape == (24, 2)
    np.testing.assert_allclose(occ[:, 0], 1.0)
    assert day_similarity(occ, occ) == pytest.approx(1.0)
    elsewhere = np.tile([0.0, 1.0], (24, 1))
    assert day_similarity(occ, elsewhere) == pytest.approx(0.0)


def test_similarity_ignores_unsampled_hours() -> None:
    p = np.tile([1.0, 0.0], (24, 1))
    q = p.copy()
    q[:12] = np.nan
    assert day_similarity(p, q) == pytest.approx(1.0)
    assert math.isnan(day_similarity(p, np.full((24, 2), np.nan)))


def test_routine_compares_days_of_the_same_kind(commuter_week) -> None:
    trace = segment_trace(commuter_week, SegmentationConfig(), subject_id='week')
    vectors = subject_feature_table(trace, [trace])

    assert len(vectors) == 7
    assert [v.weekend for v in vectors] == [False] * 5 + [True] * 2
    for vec in vectors:
        assert 0.0 <= vec.circdn_rtn <= 1.0
        assert 0.0 <= vec.wkend_day_rtn <= 1.0


def test_replicates_give_intervals(commuter_day) -> None:
    kept = impose_missingness(commuter_day, OnOffSchedule(120.0, 600.0))
    observed = segment_trace(kept, SegmentationConfig(), subject_id='commuter')
    completed = impute_trace(observed, KernelSpec.from_family('TL'), 20, seed=8)
    (vec,) = subject_feature_table(observed, completed, alpha=0.05)

    lo, hi = vec.intervals['dist_travelled_m']
    assert lo < hi
    row = vec.to_row()
    assert row['subject_id'] == 'commuter'
    assert 'hometime_min_lo' in row and 'hometime_min_hi' in row


def _pauses_at(centers, dwell=3600.0) -> MobilityTrace:
    events = [pause(x, y, 2 * dwell * i, dwell) for i, (x, y) in enumerate(centers)]
    return MobilityTrace(events=events, gaps=[])


def test_clustering_radius_decides_how_many_places() -> None:
    side = 150.0
    triangle = _pauses_at([(0.0, 0.0), (side, 0.0), (side / 2.0, side * math.sqrt(3.0) / 2.0)])

    assert len(find_significant_locations([triangle], FeatureConfig(sigloc_radius_m=200.0))) == 1
    assert len(find_significant_locations([triangle], FeatureConfig(sigloc_radius_m=100.0))) == 3


def test_equal_night_time_goes_to_the_longer_stay() -> None:
    h = HOUR_SECONDS
    nights = MobilityTrace(events=[pause(0.0, 0.0, START, 3 * h), pause(2000.0, 0.0, START + 3 * h, 3 * h)],
                           gaps=[])
    locations = [SignificantLocation(0, PlanarPoint(0.0, 0.0), 5 * h),
                 SignificantLocation(1, PlanarPoint(2000.0, 0.0), 8 * h)]

    home = estimate_home(locations, [nights])
    assert home.id == 1 and home.is_home


@pytest.mark.parametrize("k", [2, 4])
def test_entropy_of_equal_shares(k: int) -> None:
    share = DAY_SECONDS / k
    events = [pause(1000.0 * i, 0.0, START + i * share, share) for i in range(k)]
    locations = [SignificantLocation(i, PlanarPoint(1000.0 * i, 0.0), share) for i in range(k)]

    vec = compute_daily_features(events, locations, None)
    assert vec.sig_loc_entropy == pytest.approx(math.log(k))
    assert vec.sig_locs_visited == float(k)


def test_single_flight_day() -> None:
    events = [pause(0.0, 0.0, START, 40000.0),
              flight(0.0, 0.0, START + 40000.0, 100.0, 0.0, 100.0),
              pause(100.0, 0.0, START + 40100.0, DAY_SECONDS - 40100.0)]
    vec = compute_daily_features(events, [], None)

    assert vec.dist_travelled_m == pytest.approx(100.0)
    assert vec.avg_flight_len_m == pytest.approx(100.0)
    assert vec.std_flight_len_m == 0.0
    assert vec.avg_flight_dur_s == pytest.approx(100.0)


def test_pause_and_flight_time_cover_a_gap_free_day(commuter_day) -> None:
    trace = segment_trace(commuter_day, SegmentationConfig())
    assert trace.gaps == []
    day = split_days(trace.events)[START]

    vec = compute_daily_features(day, [], None)
    flying = sum(e.dt for e in day if e.is_flight)
    assert flying > 0
    assert vec.frac_pause * DAY_SECONDS + flying == pytest.approx(DAY_SECONDS, abs=1e-3)


def test_hundred_replicates_give_ranks_three_and_ninety_seven() -> None:
    rng = np.random.default_rng(4)
    values = rng.permutation(np.arange(1.0, 101.0)) * 10.0
    vectors = [DailyFeatureVector(subject_id='s', date='2018-01-01', dist_travelled_m=float(v)) for v in values]

    out = feature_intervals(vectors, alpha=0.05)
    assert out.intervals['dist_travelled_m'] == (30.0, 970.0)
    assert out.dist_travelled_m == pytest.approx(505.0)
