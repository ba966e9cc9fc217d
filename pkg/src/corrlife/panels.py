"""Price data ingestion: CSV loading, calendar alignment, log-returns.

Two CSV layouts are accepted, both UTF-8 with a header row, comma
separated, `.` decimal point and ISO-8601 dates:

* long format: ``date,ticker,close`` (one file, many tickers)
* per-ticker format: ``date,close`` (ticker taken from the filename stem)
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import date, datetime
from pathlib import Path

import numpy as np


class PriceDataError(ValueError):
    """Raised for malformed or invalid input price data."""


def _parse_date(text: str, where: str) -> date:
    try:
        return datetime.strptime(text.strip(), "%Y-%m-%d").date()
    except ValueError:
        raise PriceDataError(f"{where}: invalid date {text!r} (expected YYYY-MM-DD)") from None


def _parse_close(text: str, where: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise PriceDataError(f"{where}: invalid close {text!r}") from None
    if not math.isfinite(value) or value <= 0.0:
        raise PriceDataError(f"{where}: non-positive price {text!r}")
    return value


@dataclass(frozen=True)
class PriceSeries:
    """Closing prices of one ticker on strictly increasing trading dates."""

    ticker: str
    observations: tuple[tuple[date, float], ...]

    def __post_init__(self):
        for i, (day, close) in enumerate(self.observations):
            if close <= 0.0:
                raise PriceDataError(f"{self.ticker} @ {day}: non-positive price {close}")
            if i > 0 and day <= self.observations[i - 1][0]:
                raise PriceDataError(f"{self.ticker}: dates not strictly increasing at {day}")

    @property
    def dates(self) -> tuple[date, ...]:
        return tuple(day for day, _ in self.observations)

    @property
    def closes(self) -> tuple[float, ...]:
        return tuple(close for _, close in self.observations)

    def __len__(self) -> int:
        return len(self.observations)


@dataclass(frozen=True)
class PricePanel:
    """Rectangular matrix of closes: one row per ticker, one column per date."""

    tickers: tuple[str, ...]
    calendar: tuple[date, ...]
    closes: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "closes", np.asarray(self.closes, dtype=float))
        n, t = self.closes.shape
        if n != len(self.tickers) or t != len(self.calendar):
            raise ValueError("closes shape does not match tickers x calendar")
        if any(b <= a for a, b in zip(self.calendar, self.calendar[1:])):
            raise ValueError("calendar not strictly increasing")
        if not np.all(self.closes > 0.0):
            raise PriceDataError("panel contains non-positive prices")

    @property
    def n_tickers(self) -> int:
        return len(self.tickers)

    @property
    def n_dates(self) -> int:
        return len(self.calendar)

    def series(self, ticker: str) -> PriceSeries:
        """Project the panel back onto a single ticker."""
        row = self.closes[self.tickers.index(ticker)]
        return PriceSeries(ticker, tuple(zip(self.calendar, row.tolist())))


@dataclass(frozen=True)
class ReturnPanel:
    """Daily log-returns; each return is dated at the later of its two days."""

    tickers: tuple[str, ...]
    calendar: tuple[date, ...]
    returns: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "returns", np.asarray(self.returns, dtype=float))
        n, t = self.returns.shape
        if n != len(self.tickers) or t != len(self.calendar):
            raise ValueError("returns shape does not match tickers x calendar")
        if any(b <= a for a, b in zip(self.calendar, self.calendar[1:])):
            raise ValueError("calendar not strictly increasing")

    @property
    def n_tickers(self) -> int:
        return len(self.tickers)

    @property
    def n_returns(self) -> int:
        return len(self.calendar)

    def row(self, ticker: str) -> np.ndarray:
        return self.returns[self.tickers.index(ticker)]

    def pair_index(self, pair: tuple[str, str]) -> tuple[int, int]:
        try:
            return self.tickers.index(pair[0]), self.tickers.index(pair[1])
        except ValueError:
            raise ValueError(f"unknown ticker in pair {pair}") from None


def _series_from_rows(ticker: str, rows: list[tuple[date, float]], source: str) -> PriceSeries:
    rows.sort(key=lambda item: item[0])
    for (d1, _), (d2, _) in zip(rows, rows[1:]):
        if d1 == d2:
            raise PriceDataError(f"{source}: duplicate ({ticker}, {d1})")
    return PriceSeries(ticker, tuple(rows))


def _load_long_csv(path: Path) -> list[PriceSeries]:
    per_ticker: dict[str, list[tuple[date, float]]] = {}
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["date", "ticker", "close"]:
            raise PriceDataError(f"{path}: expected header 'date,ticker,close'")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            where = f"{path}:{lineno}"
            if len(row) != 3:
                raise PriceDataError(f"{where}: expected 3 fields, got {len(row)}")
            day = _parse_date(row[0], where)
            ticker = row[1].strip()
            if not ticker:
                raise PriceDataError(f"{where}: empty ticker")
            close = _parse_close(row[2], where)
            per_ticker.setdefault(ticker, []).append((day, close))
    return [_series_from_rows(t, rows, str(path)) for t, rows in sorted(per_ticker.items())]


def _load_ticker_csv(path: Path) -> PriceSeries:
    ticker = path.stem
    rows: list[tuple[date, float]] = []
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["date", "close"]:
            raise PriceDataError(f"{path}: expected header 'date,close'")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            where = f"{path}:{lineno}"
            if len(row) != 2:
                raise PriceDataError(f"{where}: expected 2 fields, got {len(row)}")
            rows.append((_parse_date(row[0], where), _parse_close(row[1], where)))
    if not rows:
        raise PriceDataError(f"{path}: no data rows")
    return _series_from_rows(ticker, rows, str(path))


def load_prices(source: str | Path, format: str = "auto") -> list[PriceSeries]:
    """Load one PriceSeries per ticker from a CSV file or a directory.

    format: "long" (date,ticker,close), "per-ticker" (date,close, ticker
    from the filename stem) or "auto" (directory -> per-ticker, file ->
    sniff the header).
    """
    path = Path(source)
    if not path.exists():
        raise PriceDataError(f"{path}: no such file or directory")
    if path.is_dir():
        if format == "long":
            raise PriceDataError(f"{path}: long format expects a single file, got a directory")
        files = sorted(path.glob("*.csv"))
        if not files:
            raise PriceDataError(f"{path}: no .csv files found")
        return [_load_ticker_csv(f) for f in files]
    if format == "auto":
        with path.open(newline="", encoding="utf-8") as handle:
            header = handle.readline().strip().lower()
        format = "long" if header.startswith("date,ticker") else "per-ticker"
    if format == "long":
        return _load_long_csv(path)
    if format == "per-ticker":
        return [_load_ticker_csv(path)]
    raise ValueError(f"unknown format {format!r}")


def align_panel(
    series: list[PriceSeries],
    policy: str = "intersect",
    max_gap: int = 0,
) -> PricePanel:
    """Align several price series onto one rectangular panel.

    policy "intersect" keeps exactly the trading dates present in every
    series. Policy "ffill" works on the union calendar: a missing date is
    filled with the ticker's last known close as long as the run of
    consecutive missing union dates is at most max_gap; dates that any
    ticker cannot fill are dropped for all tickers.
    """
    if len(series) < 2:
        raise ValueError("fewer than 2 series")
    tickers = tuple(s.ticker for s in series)
    if len(set(tickers)) != len(tickers):
        raise PriceDataError("duplicate tickers across series")

    if policy == "intersect":
        common = set(series[0].dates)
        for s in series[1:]:
            common &= set(s.dates)
        if not common:
            raise PriceDataError("empty intersection of trading calendars")
        calendar = tuple(sorted(common))
        closes = np.empty((len(series), len(calendar)))
        for i, s in enumerate(series):
            lookup = dict(s.observations)
            closes[i] = [lookup[day] for day in calendar]
        return PricePanel(tickers, calendar, closes)

    if policy == "ffill":
        if max_gap < 1:
            raise ValueError("forward-fill requires max_gap >= 1")
        union: set[date] = set()
        for s in series:
            union |= set(s.dates)
        candidates = sorted(union)
        values = np.full((len(series), len(candidates)), np.nan)
        for i, s in enumerate(series):
            lookup = dict(s.observations)
            last_close = None
            missing_run = 0
            for j, day in enumerate(candidates):
                close = lookup.get(day)
                if close is not None:
                    values[i, j] = close
                    last_close = close
                    missing_run = 0
                else:
                    missing_run += 1
                    if last_close is not None and missing_run <= max_gap:
                        values[i, j] = last_close
        keep = ~np.isnan(values).any(axis=0)
        if not keep.any():
            raise PriceDataError("no date is covered by every ticker after forward-fill")
        calendar = tuple(d for d, k in zip(candidates, keep) if k)
        return PricePanel(tickers, calendar, values[:, keep])

    raise ValueError(f"unknown alignment policy {policy!r}")


def log_returns(panel: PricePanel) -> ReturnPanel:
    """Log-returns ln(close[t+1]) - ln(close[t]); T dates give T-1 returns."""
    if panel.n_dates < 2:
        raise ValueError("panel needs at least 2 dates to compute returns")
    logs = np.log(panel.closes)
    return ReturnPanel(panel.tickers, panel.calendar[1:], logs[:, 1:] - logs[:, :-1])


def write_long_csv(panel: PricePanel, path: str | Path) -> None:
    """Write a price panel in the long CSV format (date,ticker,close)."""
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["date", "ticker", "close"])
        for j, day in enumerate(panel.calendar):
            for i, ticker in enumerate(panel.tickers):
                writer.writerow([day.isoformat(), ticker, repr(panel.closes[i, j])])
