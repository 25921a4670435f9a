"""Diagnostic schedule counts, volumes and emission ordering."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cubedsim.workload import (DiagnosticSchedule, ScheduleError,
                               c192_schedule, emission_events, make_schedule,
                               total_bytes, total_fields)


def enumerate_outputs(entries, run_hours):
    """Oracle: walk every whole period of every entry."""
    count = 0
    for field_count, period, _bytes in entries:
        k = 1
        while k * period <= run_hours + 1e-9:
            count += field_count
            k += 1
    return count


def test_c192_field_count():
    schedule = c192_schedule()
    assert total_fields(schedule) == 5329
    entries = [(e.field_count, e.period_hours, e.bytes_per_field)
               for e in schedule.entries]
    assert enumerate_outputs(entries, 48.0) == 5329


def test_c192_volume():
    schedule = c192_schedule()
    assert total_bytes(schedule) == 5329 * 78_704_252
    assert total_bytes(schedule) / 2**30 == pytest.approx(390.6, abs=0.1)


def test_single_entry_counts():
    # a 1-hourly group of 99 fields over 48 h emits 48 times
    schedule = make_schedule([(99, 1.0, 10)], 48.0)
    assert total_fields(schedule) == 99 * 48 == 4752
    assert total_bytes(schedule) == 4752 * 10


def test_first_output_is_one_period_in():
    schedule = make_schedule([(2, 12.0, 5)], 48.0)
    events = emission_events(schedule)
    assert [e.time_hours for e in events] == [12.0, 12.0, 24.0, 24.0,
                                              36.0, 36.0, 48.0, 48.0]
    assert all(e.time_hours > 0 for e in events)


def test_partial_trailing_period_is_dropped():
    schedule = make_schedule([(1, 18.0, 5)], 48.0)
    assert total_fields(schedule) == 2  # 18 h and 36 h only
    schedule = make_schedule([(1, 48.0, 5)], 48.0)
    assert total_fields(schedule) == 1  # exactly at the end of the run


def test_emission_events_are_ordered_and_indexed():
    schedule = c192_schedule()
    events = emission_events(schedule)
    assert len(events) == 5329
    assert [e.field_index for e in events] == list(range(5329))
    times = [e.time_hours for e in events]
    assert times == sorted(times)
    assert sum(e.bytes for e in events) == total_bytes(schedule)


def test_schedule_validation():
    with pytest.raises(ScheduleError):
        make_schedule([(0, 1.0, 10)], 48.0)
    with pytest.raises(ScheduleError):
        make_schedule([(1, 0.0, 10)], 48.0)
    with pytest.raises(ScheduleError):
        make_schedule([(1, 1.0, 0)], 48.0)
    with pytest.raises(ScheduleError):
        make_schedule([(1, 1.0, 10)], 0.0)


def test_max_bytes_per_field():
    schedule = make_schedule([(1, 1.0, 10), (1, 2.0, 30)], 4.0)
    assert schedule.max_bytes_per_field == 30
    assert DiagnosticSchedule(entries=(), run_hours=1.0).max_bytes_per_field == 0


@given(st.lists(st.tuples(st.integers(1, 20),
                          st.sampled_from([1.0, 2.0, 3.0, 6.0, 12.0]),
                          st.integers(1, 10**6)),
                min_size=1, max_size=5),
       st.sampled_from([6.0, 24.0, 48.0]))
@settings(max_examples=100, deadline=None)
def test_events_agree_with_totals(entries, run_hours):
    schedule = make_schedule(entries, run_hours)
    events = emission_events(schedule)
    assert len(events) == total_fields(schedule)
    assert sum(e.bytes for e in events) == total_bytes(schedule)
    assert enumerate_outputs(entries, run_hours) == total_fields(schedule)
