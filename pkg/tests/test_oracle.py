import numpy as np
import pytest
from scipy import integrate

from aoiviol.events import EventLog
from aoiviol.oracle import MalformedLogError, mean_age, time_above, trajectory_from_log
from aoiviol.sample_path import mean_aoi_estimate, violation_estimate


def _sawtooth(n=10):
    recs = []
    for k in range(n):
        recs += [("arrival", float(k), k), ("departure", k + 0.4, k)]
    return EventLog.from_records(recs)


def test_single_packet():
    log = EventLog.from_records([("arrival", 0.0, 0), ("departure", 0.4, 0)])
    traj = trajectory_from_log(log, end=3.0)
    assert traj.age(0.4) == pytest.approx(0.4)
    assert traj.age(2.5) == pytest.approx(2.5)
    with pytest.raises(ValueError):
        traj.age(0.1)


def test_sawtooth_trajectory():
    traj = trajectory_from_log(_sawtooth())
    assert np.allclose(traj.breakpoints[:, 1], 0.4)
    assert traj.age(3.4 - 1e-9) == pytest.approx(1.4)
    assert time_above(traj, 1.0) == pytest.approx(0.4)
    assert time_above(traj, 1.4) == 0.0
    assert mean_age(traj) == pytest.approx(0.9)


@pytest.mark.parametrize("records, match", [
    ([("departure", 0.4, 0), ("arrival", 0.5, 0)], "without an arrival|before it arrives"),
    ([("arrival", 0.0, 0), ("departure", 0.4, 1)], "without an arrival"),
    ([("arrival", 1.0, 0), ("departure", 0.4, 0)], "not sorted"),
    ([("arrival", 0.0, 0), ("arrival", 0.1, 0), ("departure", 0.4, 0)], "more than once"),
    ([("arrival", 0.0, 0), ("departure", 0.4, 0), ("departure", 0.5, 0)], "more than once"),
    ([("arrival", 0.0, 0)], "no departures"),
    ([], "empty"),
])
def test_malformed_logs(records, match):
    with pytest.raises(MalformedLogError, match=match):
        trajectory_from_log(EventLog.from_records(records))


def test_drop_target_is_system_delay(paths):
    p = paths["mm11"]
    traj = trajectory_from_log(p.event_log())
    delay = p.served_departure - p.served_arrival
    assert np.allclose(traj.breakpoints[:, 1], delay, rtol=0, atol=1e-9)


def test_oracle_matches_peak_estimators(paths):
    for name, p in paths.items():
        traj = trajectory_from_log(p.event_log(), start=p.horizon_start, end=p.horizon_end)
        assert traj.horizon == pytest.approx(p.horizon)
        for d in (0.0, 0.3, 1.0, 2.0, 4.0, 8.0):
            assert abs(time_above(traj, d) - violation_estimate(p, d).value) <= 1e-9, (name, d)
        assert abs(mean_age(traj) - mean_aoi_estimate(p).value) <= 1e-9 * mean_age(traj), name


def test_oracle_via_csv_round_trip(paths, tmp_path):
    p = paths["dse12"]
    path = tmp_path / "log.csv"
    p.event_log().write_csv(path)
    traj = trajectory_from_log(EventLog.read_csv(path), start=p.horizon_start, end=p.horizon_end)
    assert abs(time_above(traj, 3.0) - violation_estimate(p, 3.0).value) <= 1e-9


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
def test_time_above_monotone_right_continuous_and_integrates(paths):
    traj = trajectory_from_log(paths["erd11"].event_log())
    ds = np.linspace(0, 15, 301)
    vals = np.array([time_above(traj, d) for d in ds])
    assert np.all(np.diff(vals) <= 1e-15)
    d0 = 2.0
    assert time_above(traj, d0 + 1e-12) == pytest.approx(time_above(traj, d0), abs=1e-9)
    hi = float(traj.breakpoints[:, 1].max() + 40)
    area, _ = integrate.quad(lambda d: time_above(traj, d), 0, hi, limit=2000, epsabs=1e-9)
    assert area == pytest.approx(mean_age(traj), abs=1e-6)


def test_mm_oracle_long_run(mm_path):
    traj = trajectory_from_log(mm_path.event_log(), start=mm_path.horizon_start)
    assert time_above(traj, 5.0) == pytest.approx(0.0825, abs=0.004)


def test_bad_window():
    with pytest.raises(ValueError):
        trajectory_from_log(_sawtooth(), start=0.1)
    with pytest.raises(ValueError):
        time_above(trajectory_from_log(_sawtooth()), -1)
