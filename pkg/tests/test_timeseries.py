import calendar
from collections import Counter
from datetime import date, datetime, timedelta
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from wikitrend.errors import AlignmentError, EmptyResultError, SeriesFormatError
from wikitrend.timeseries import (
    DAILY,
    HOURLY,
    MONTHLY,
    RAW_VIEWS,
    TREND_INDEX,
    TimeSeries,
    align,
    daily_to_monthly,
    format_period,
    hour_ordinal,
    hourly_to_daily,
    month_ordinal,
    parse_period,
    read_series,
    resample,
    scale_to_trend_index,
    series_from_rows,
    write_series,
)

H0 = hour_ordinal(2014, 12, 1, 0)


def local_days(start_hour, n, offset):
    """Oracle: local calendar date of every hour via datetime arithmetic."""
    base = datetime(1970, 1, 1) + timedelta(hours=start_hour)
    return [(base + timedelta(hours=i, minutes=offset)).date() for i in range(n)]


def test_daily_conservation_example():
    s = TimeSeries(HOURLY, H0, [1] * 48)
    d = hourly_to_daily(s)
    assert d.values == (24, 24)
    assert format_period(DAILY, d.start) == "2014-12-01"


def test_no_complete_day():
    s = TimeSeries(HOURLY, H0 + 12, [1] * 24)
    with pytest.raises(EmptyResultError):
        hourly_to_daily(s)


def test_jst_offset_drops_edges():
    days = local_days(H0, 48, 540)
    per_day = Counter(days)
    # hand enumeration: UTC 00-14 -> Dec 1 JST (15 h), 15-38 -> Dec 2 (24 h), 39-47 -> Dec 3 (9 h)
    assert per_day == {date(2014, 12, 1): 15, date(2014, 12, 2): 24, date(2014, 12, 3): 9}
    d = hourly_to_daily(TimeSeries(HOURLY, H0, [1] * 48), 540)
    assert d.values == (24,)
    assert format_period(DAILY, d.start) == "2014-12-02"


@pytest.mark.parametrize("offset", [-600, -330, 0, 330, 540, 840])
def test_daily_matches_datetime_oracle(offset):
    values = [(i * 7) % 13 for i in range(24 * 5 + 5)]
    days = local_days(H0 + 3, len(values), offset)
    sums, counts = Counter(), Counter(days)
    for d, v in zip(days, values):
        sums[d] += v
    expected = [sums[d] for d in sorted(sums) if counts[d] == 24]
    got = hourly_to_daily(TimeSeries(HOURLY, H0 + 3, values), offset)
    assert list(got.values) == expected
    assert date.fromordinal(got.start) == min(d for d in counts if counts[d] == 24)


def test_offset_range():
    with pytest.raises(ValueError):
        hourly_to_daily(TimeSeries(HOURLY, H0, [1] * 48), 15 * 60)


def test_monthly_examples():
    jan1 = date(2014, 1, 1).toordinal()
    assert daily_to_monthly(TimeSeries(DAILY, jan1, [2] * 31)).values == (62,)
    with pytest.raises(EmptyResultError):
        daily_to_monthly(TimeSeries(DAILY, date(2014, 1, 15).toordinal(), [1] * 40))
    for year, feb in [(2014, 28), (2012, 29)]:
        start = date(year, 1, 1).toordinal()
        n = (date(year, 4, 1) - date(year, 1, 1)).days
        m = daily_to_monthly(TimeSeries(DAILY, start, [1] * n))
        assert m.values == (31, feb, 31)
        assert m.start == month_ordinal(year, 1)


@given(
    st.integers(0, 24 * 400),
    st.lists(st.integers(0, 1000), min_size=1, max_size=24 * 80),
    st.integers(-840, 840),
)
def test_resampling_conserves_retained_hours(start, values, offset):
    s = TimeSeries(HOURLY, H0 + start, values)
    days = local_days(s.start, len(values), offset)
    counts = Counter(days)
    complete = {d for d, c in counts.items() if c == 24}
    retained = sum(v for d, v in zip(days, values) if d in complete)
    if not complete:
        with pytest.raises(EmptyResultError):
            hourly_to_daily(s, offset)
        return
    daily = hourly_to_daily(s, offset)
    assert sum(daily.values) == retained
    assert len(daily) == len(complete)

    month_len = Counter((d.year, d.month) for d in complete)
    full = {ym for ym, c in month_len.items() if c == calendar.monthrange(*ym)[1]}
    if not full:
        with pytest.raises(EmptyResultError):
            daily_to_monthly(daily)
        return
    monthly = daily_to_monthly(daily)
    kept = sum(v for d, v in zip(days, values) if d in complete and (d.year, d.month) in full)
    assert sum(monthly.values) == kept
    assert len(monthly) == len(full)


def test_resample_chain():
    start = hour_ordinal(2014, 1, 1, 0)
    s = TimeSeries(HOURLY, start, [1] * 24 * 59)
    assert resample(s, MONTHLY).values == (744, 672)
    assert resample(s, HOURLY) is s
    with pytest.raises(ValueError):
        resample(resample(s, DAILY), HOURLY)


def test_align():
    a = TimeSeries(MONTHLY, month_ordinal(2014, 1), [1, 2, 3, 4, 5, 6])
    b = TimeSeries(MONTHLY, month_ordinal(2014, 3), [9, 8, 7, 6, 5, 4, 3])
    a2, b2 = align(a, b)
    assert a2.periods() == b2.periods() == ["2014-03", "2014-04", "2014-05", "2014-06"]
    assert a2.values == (3, 4, 5, 6) and b2.values == (9, 8, 7, 6)
    assert align(a, a) == (a, a)
    assert align(b, a)[0].span == a2.span


@pytest.mark.parametrize("b_start, length", [(20, 3), (5, 1)])
def test_align_errors(b_start, length):
    a = TimeSeries(DAILY, 735000, [1] * 6)
    with pytest.raises(AlignmentError):
        align(a, TimeSeries(DAILY, 735000 + b_start, [1] * length))
    with pytest.raises(AlignmentError):
        align(a, TimeSeries(MONTHLY, 24000, [1, 2]))


@given(st.integers(0, 50), st.integers(1, 40), st.integers(0, 50), st.integers(1, 40))
def test_align_commutes(sa, na, sb, nb):
    a = TimeSeries(DAILY, 735000 + sa, [1] * na)
    b = TimeSeries(DAILY, 735000 + sb, [2] * nb)
    try:
        ab = align(a, b)
    except AlignmentError:
        with pytest.raises(AlignmentError):
            align(b, a)
        return
    ba = align(b, a)
    assert ab[0].span == ba[0].span == ab[1].span


def test_trend_index_examples():
    s = lambda v: TimeSeries(DAILY, 735000, v)  # noqa: E731
    assert scale_to_trend_index(s([5, 10, 20])).values == (25, 50, 100)
    # 100*3/7 = 300/7 = 42 + 6/7, above the half-way point
    assert Fraction(300, 7) - 42 > Fraction(1, 2)
    assert scale_to_trend_index(s([3, 7])).values == (43, 100)
    zero = scale_to_trend_index(s([0, 0]))
    assert zero.values == (0, 0) and zero.all_zero and zero.units == TREND_INDEX


def test_trend_index_rounds_half_up():
    s = TimeSeries(DAILY, 735000, [1, 200])
    assert scale_to_trend_index(s).values == (1, 100)  # 0.5 -> 1
    s = TimeSeries(DAILY, 735000, [0.5, 1.0, 2.5, 4.0])
    assert scale_to_trend_index(s).values == (13, 25, 63, 100)  # 12.5 -> 13, 62.5 -> 63


@given(st.lists(st.floats(0, 1e6), min_size=1, max_size=50))
def test_trend_index_properties(values):
    out = scale_to_trend_index(TimeSeries(DAILY, 735000, values)).values
    assert all(isinstance(v, int) and 0 <= v <= 100 for v in out)
    if max(values) > 0:
        assert 100 in out
        assert out[values.index(max(values))] == 100


def test_timeseries_invariants():
    with pytest.raises(ValueError):
        TimeSeries(DAILY, 735000, [])
    with pytest.raises(ValueError):
        TimeSeries(DAILY, 735000, [-1])
    with pytest.raises(ValueError):
        TimeSeries(DAILY, 735000, [101], TREND_INDEX)
    with pytest.raises(ValueError):
        TimeSeries("weekly", 735000, [1])


@pytest.mark.parametrize("text, res", [
    ("2014-12-12T15", HOURLY), ("2014-12-12", DAILY), ("2014-12", MONTHLY),
])
def test_period_round_trip(text, res):
    r, ordinal = parse_period(text)
    assert r == res and format_period(r, ordinal) == text


@pytest.mark.parametrize("bad", ["2014-13", "2014-02-30", "2014-12-12T24", "12/12/2014", ""])
def test_bad_periods(bad):
    with pytest.raises(SeriesFormatError):
        parse_period(bad)


def test_csv_round_trip(tmp_path):
    s = TimeSeries(HOURLY, H0, [0, 5, 12, 3], RAW_VIEWS)
    path = tmp_path / "s.csv"
    write_series(path, s, {"keyword": "Anne Hathaway"})
    text = path.read_text()
    assert text.startswith("# keyword=Anne Hathaway\nperiod,value\n2014-12-01T00,0\n")
    assert read_series(path) == s


def test_read_trends_export(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("Day,Anne Hathaway: (Japan)\r\n2014-12-01,<1\r\n2014-12-02,100\r\n\r\n", encoding="utf-8")
    s = read_series(path, units=TREND_INDEX)
    assert s.values == (0, 100) and s.resolution == DAILY


@pytest.mark.parametrize("rows", [
    [("2014-12-01", "1"), ("2014-12-03", "1")],
    [("2014-12-01", "1"), ("2014-12", "1")],
    [("2014-12-01", "x")],
    [],
])
def test_series_rows_rejected(rows):
    with pytest.raises(SeriesFormatError):
        series_from_rows(rows)
