"""Lifetime-of-correlation statistics over rolling correlation series.

A lifetime run is a maximal stretch of consecutive window positions whose
correlation stays on one level (strong by default). Run lengths are
reported in trading days as positions * step, so results stay comparable
across step settings.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date

import numpy as np

from .correlation import Level, RollingCorrelationSeries, classify, rolling_correlation
from .panels import ReturnPanel


@dataclass(frozen=True)
class LifetimeRun:
    """One maximal run of window positions on a single level."""

    pair: tuple[str, str]
    start_date: date
    end_date: date
    length: int  # trading days: window positions in the run * step
    censored_left: bool
    censored_right: bool

    @property
    def censored(self) -> bool:
        return self.censored_left or self.censored_right


@dataclass(frozen=True)
class LifetimeStats:
    """All runs of one pair at one window width plus their mean length."""

    pair: tuple[str, str]
    window_width: int
    runs: tuple[LifetimeRun, ...]
    mltc: float


@dataclass(frozen=True)
class PortfolioLifetime:
    """Mean and population spread of per-pair mean lifetimes inside a portfolio."""

    portfolio: str
    window_width: int
    mean: float
    stddev: float
    pair_count: int


def extract_runs(
    series: RollingCorrelationSeries,
    level: Level = Level.STRONG,
    strong_threshold: float = 0.5,
) -> list[LifetimeRun]:
    """Maximal consecutive runs classified at `level`.

    Undefined window positions never extend a run. Runs touching the first
    or last window position are flagged censored. Run length is the number
    of positions times the series step.
    """
    if not series.points:
        raise ValueError("series has no window positions")
    labels = [classify(r, strong_threshold) for _, r in series.points]
    last = len(labels) - 1
    runs: list[LifetimeRun] = []
    start = None
    for pos, label in enumerate(labels):
        if label is level and start is None:
            start = pos
        at_end = pos == last
        if start is not None and (label is not level or at_end):
            stop = pos - 1 if label is not level else pos
            runs.append(
                LifetimeRun(
                    pair=series.pair,
                    start_date=series.points[start][0],
                    end_date=series.points[stop][0],
                    length=(stop - start + 1) * series.step,
                    censored_left=start == 0,
                    censored_right=stop == last,
                )
            )
            start = None
    return runs


def mltc(runs: list[LifetimeRun], include_censored: bool = True) -> float:
    """Arithmetic mean of run lengths in trading days; 0 when there are none."""
    lengths = [run.length for run in runs if include_censored or not run.censored]
    if not lengths:
        return 0.0
    return sum(lengths) / len(lengths)


def pair_lifetime(
    panel: ReturnPanel,
    pair: tuple[str, str],
    window_width: int,
    step: int = 1,
    level: Level = Level.STRONG,
    strong_threshold: float = 0.5,
    include_censored: bool = True,
) -> LifetimeStats:
    """Rolling correlation -> runs -> mean lifetime for one pair."""
    series = rolling_correlation(panel, pair, window_width, step)
    runs = extract_runs(series, level, strong_threshold)
    return LifetimeStats(pair, window_width, tuple(runs), mltc(runs, include_censored))


def mltc_curve(
    panel: ReturnPanel,
    pair: tuple[str, str],
    window_widths: list[int],
    step: int = 1,
    level: Level = Level.STRONG,
    strong_threshold: float = 0.5,
    include_censored: bool = True,
) -> list[tuple[int, float]]:
    """Mean lifetime of one pair at each requested window width."""
    return [
        (
            width,
            pair_lifetime(panel, pair, width, step, level, strong_threshold, include_censored).mltc,
        )
        for width in window_widths
    ]


def _all_pairs(panel: ReturnPanel) -> list[tuple[str, str]]:
    tickers = panel.tickers
    return [
        (tickers[i], tickers[j])
        for i in range(len(tickers))
        for j in range(i + 1, len(tickers))
    ]


def portfolio_mltc(
    panel: ReturnPanel,
    window_width: int,
    step: int = 1,
    level: Level = Level.STRONG,
    strong_threshold: float = 0.5,
    include_censored: bool = True,
    name: str = "portfolio",
) -> PortfolioLifetime:
    """Mean lifetime over all n(n-1)/2 pairs and its population standard deviation."""
    if panel.n_tickers < 2:
        raise ValueError("need at least 2 tickers")
    values = [
        pair_lifetime(panel, pair, window_width, step, level, strong_threshold, include_censored).mltc
        for pair in _all_pairs(panel)
    ]
    arr = np.array(values)
    # pairs are the whole population, not a sample: ddof stays 0
    return PortfolioLifetime(name, window_width, float(arr.mean()), float(arr.std()), len(values))


def stddev_curve(
    panel: ReturnPanel,
    window_widths: list[int],
    step: int = 1,
    level: Level = Level.STRONG,
    strong_threshold: float = 0.5,
    include_censored: bool = True,
) -> list[tuple[int, float]]:
    """Spread of per-pair mean lifetimes at each window width."""
    return [
        (
            width,
            portfolio_mltc(panel, width, step, level, strong_threshold, include_censored).stddev,
        )
        for width in window_widths
    ]


def _censored_label(run: LifetimeRun) -> str:
    if run.censored_left and run.censored_right:
        return "both"
    if run.censored_left:
        return "left"
    if run.censored_right:
        return "right"
    return "none"


def runs_records(stats: LifetimeStats) -> list[dict]:
    """Row dicts for the runs table (CSV columns in key order)."""
    return [
        {
            "pair": f"{stats.pair[0]}-{stats.pair[1]}",
            "window_width": stats.window_width,
            "run_index": k,
            "start": run.start_date.isoformat(),
            "end": run.end_date.isoformat(),
            "length": run.length,
            "censored": _censored_label(run),
        }
        for k, run in enumerate(stats.runs)
    ]


def portfolio_records(entries: list[PortfolioLifetime]) -> list[dict]:
    """Row dicts for the portfolio curve table."""
    return [
        {
            "window_width": e.window_width,
            "mean": e.mean,
            "stddev": e.stddev,
            "pair_count": e.pair_count,
        }
        for e in entries
    ]
