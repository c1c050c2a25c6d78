"""Dated market quotations and bank-rate schedules with carry-forward lookup."""

from __future__ import annotations

import csv
import io
from bisect import bisect_right
from dataclasses import dataclass
from datetime import date

from .errors import NoQuoteError, ParseError, ValidationError


@dataclass(frozen=True)
class PriceSeries:
    """Ordered quotations for one material in one currency."""

    material: str
    currency: str
    points: tuple[tuple[date, float], ...]

    def __post_init__(self):
        _check_monotone_dates([d for d, _ in self.points])
        for d, price in self.points:
            if price <= 0:
                raise ValidationError(f"price at {d.isoformat()} must be > 0")


@dataclass(frozen=True)
class RateSchedule:
    """Ordered annual bank rates; negative rates down to -5% are allowed."""

    points: tuple[tuple[date, float], ...]

    def __post_init__(self):
        _check_monotone_dates([d for d, _ in self.points])
        for d, rate in self.points:
            if not -0.05 <= rate < 1.0:
                raise ValidationError(f"rate at {d.isoformat()} must lie in [-0.05, 1)")


def _check_monotone_dates(dates: list[date]) -> None:
    for previous, current in zip(dates, dates[1:]):
        if current == previous:
            raise ValidationError(f"duplicate date {current.isoformat()}")
        if current < previous:
            raise ValidationError(f"dates not increasing at {current.isoformat()}")


def _parse_points(text: str, value_column: str) -> tuple[tuple[date, float], ...]:
    reader = csv.reader(io.StringIO(text))
    rows = list(reader)
    if not rows:
        raise ParseError("missing header row", lineno=1)
    header = [cell.strip().lower() for cell in rows[0]]
    if header != ["date", value_column]:
        raise ParseError(f"expected header 'date,{value_column}'", lineno=1)
    points: list[tuple[date, float]] = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue  # blank line
        if len(row) != 2:
            raise ParseError(f"expected 2 fields, got {len(row)}", lineno=lineno)
        raw_date, raw_value = row[0].strip(), row[1].strip()
        try:
            when = date.fromisoformat(raw_date)
        except ValueError:
            raise ParseError(f"bad ISO date {raw_date!r}", lineno=lineno) from None
        try:
            value = float(raw_value)
        except ValueError:
            raise ParseError(f"bad number {raw_value!r}", lineno=lineno) from None
        if points:
            if when == points[-1][0]:
                raise ValidationError(f"line {lineno}: duplicate date {raw_date}")
            if when < points[-1][0]:
                raise ValidationError(f"line {lineno}: dates not increasing")
        points.append((when, value))
    if not points:
        raise ValidationError("empty series: no data rows")
    return tuple(points)


def load_series(text: str, *, material: str = "", currency: str = "") -> PriceSeries:
    """Parse ``date,price`` CSV text: header required, ISO dates, strictly increasing."""
    return PriceSeries(material=material, currency=currency, points=_parse_points(text, "price"))


def load_rates(text: str) -> RateSchedule:
    """Parse ``date,rate`` CSV text with the same shape rules as load_series."""
    return RateSchedule(points=_parse_points(text, "rate"))


def serialize(series: PriceSeries) -> str:
    """Inverse of load_series: writes floats in round-tripping form."""
    lines = ["date,price"]
    lines.extend(f"{d.isoformat()},{price!r}" for d, price in series.points)
    return "\n".join(lines) + "\n"


def _lookup(points: tuple[tuple[date, float], ...], when: date, what: str) -> float:
    dates = [d for d, _ in points]
    i = bisect_right(dates, when)
    if i == 0:
        raise NoQuoteError(f"no {what} on or before {when.isoformat()}")
    return points[i - 1][1]


def quote_at(series: PriceSeries, when: date) -> float:
    """Latest quotation on or before ``when``: carry-forward steps, no interpolation."""
    return _lookup(series.points, when, f"{series.material or 'price'} quotation")


def rate_at(schedule: RateSchedule, when: date) -> float:
    """Annual rate in force on ``when`` (carry-forward)."""
    return _lookup(schedule.points, when, "bank rate")
