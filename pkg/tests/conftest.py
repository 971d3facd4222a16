import numpy as np
import pytest
from datetime import date
from pathlib import Path

from eventwindow.series import load_csv, segment

FIXTURE_CSV = Path(__file__).resolve().parent.parent / "data" / "usd_idr_daily.csv"
EVENT_DATE = date(2025, 1, 20)


@pytest.fixture(scope="session")
def fixture_series():
    return load_csv(FIXTURE_CSV)


@pytest.fixture(scope="session")
def fixture_segments(fixture_series):
    return segment(fixture_series, EVENT_DATE)


@pytest.fixture(scope="session")
def pre_sample(fixture_segments):
    return fixture_segments.pre.observed()


@pytest.fixture(scope="session")
def post_sample(fixture_segments):
    return fixture_segments.post.observed()


def make_series(values, start=date(2024, 1, 1), mask=None):
    """Small helper: build an ObservationSeries on consecutive weekdays."""
    from datetime import timedelta
    from eventwindow.series import ObservationSeries

    values = np.asarray(values, dtype=float)
    dates = []
    d = start
    while len(dates) < len(values):
        if d.weekday() < 5:
            dates.append(d)
        d += timedelta(days=1)
    if mask is None:
        mask = np.isnan(values)
    return ObservationSeries(dates=tuple(dates), values=values, missing_mask=np.asarray(mask, bool))
