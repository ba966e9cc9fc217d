"""Pearson correlations over full periods and rolling windows.

Correlation values that cannot be computed (zero-variance input) are
carried as NaN rather than raised or zeroed, so a flat price stretch in
one pair cannot poison a whole analysis. NaN maps to Level.UNDEFINED.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from pathlib import Path

import numpy as np

from .panels import ReturnPanel

log = logging.getLogger(__name__)

# |rho| may exceed 1 by at most this much before being treated as broken input
CLAMP_TOL = 1e-12

UNDEFINED = float("nan")


class Level(Enum):
    """Correlation strength bands: strong [1/2, 1], weak [0, 1/2), negative [-1, 0)."""

    STRONG = "strong"
    WEAK = "weak"
    NEGATIVE = "negative"
    UNDEFINED = "undefined"


def _clamp_rho(r: float) -> float:
    if r > 1.0:
        if r > 1.0 + CLAMP_TOL:
            raise ValueError(f"correlation {r!r} exceeds 1 beyond tolerance; broken input")
        return 1.0
    if r < -1.0:
        if r < -1.0 - CLAMP_TOL:
            raise ValueError(f"correlation {r!r} below -1 beyond tolerance; broken input")
        return -1.0
    return r


def pearson(x, y) -> float:
    """Pearson correlation of two equal-length vectors; NaN when a variance is 0.

    Computed as the covariance of the temporal deviations over the product
    of standard deviations, clamped to [-1, 1] within floating-point
    tolerance.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or y.ndim != 1 or x.size != y.size:
        raise ValueError("x and y must be 1-d vectors of the same length")
    if x.size < 2:
        raise ValueError("need at least 2 observations")
    if np.all(x == x[0]) or np.all(y == y[0]):
        return UNDEFINED
    dx = x - x.mean()
    dy = y - y.mean()
    vx = float(np.mean(dx * dx))
    vy = float(np.mean(dy * dy))
    if vx <= 0.0 or vy <= 0.0:
        return UNDEFINED
    r = float(np.mean(dx * dy)) / math.sqrt(vx * vy)
    return _clamp_rho(r)


def classify(rho: float, strong_threshold: float = 0.5) -> Level:
    """Map a correlation value onto its level; threshold itself is STRONG."""
    if math.isnan(rho):
        return Level.UNDEFINED
    if rho >= strong_threshold:
        return Level.STRONG
    if rho >= 0.0:
        return Level.WEAK
    return Level.NEGATIVE


def distance(rho: float) -> float:
    """Metric distance sqrt(2 (1 - rho)) between two stocks; 0 to 2."""
    if math.isnan(rho) or rho < -1.0 or rho > 1.0:
        raise ValueError(f"rho must lie in [-1, 1], got {rho!r}")
    return math.sqrt(2.0 * (1.0 - rho))


@dataclass(frozen=True)
class CorrelationMatrix:
    """Symmetric n x n correlation matrix with unit diagonal; NaN = undefined pair."""

    tickers: tuple[str, ...]
    rho: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "rho", np.asarray(self.rho, dtype=float))
        n = len(self.tickers)
        if self.rho.shape != (n, n):
            raise ValueError("rho must be square and match the ticker list")
        both_nan = np.isnan(self.rho) & np.isnan(self.rho.T)
        if not np.all((self.rho == self.rho.T) | both_nan):
            raise ValueError("correlation matrix not symmetric")
        if not np.all(np.diag(self.rho) == 1.0):
            raise ValueError("correlation matrix diagonal must be 1")
        finite = self.rho[~np.isnan(self.rho)]
        if finite.size and (finite.max() > 1.0 or finite.min() < -1.0):
            raise ValueError("correlation entries outside [-1, 1]")

    @property
    def n_tickers(self) -> int:
        return len(self.tickers)

    def value(self, ticker_i: str, ticker_j: str) -> float:
        return float(self.rho[self.tickers.index(ticker_i), self.tickers.index(ticker_j)])

    def iter_pairs(self):
        """Yield (ticker_i, ticker_j, rho) over the n(n-1)/2 unordered pairs."""
        n = self.n_tickers
        for i in range(n):
            for j in range(i + 1, n):
                yield self.tickers[i], self.tickers[j], float(self.rho[i, j])

    def undefined_pairs(self) -> list[tuple[str, str]]:
        return [(ti, tj) for ti, tj, r in self.iter_pairs() if math.isnan(r)]


def full_period_matrix(panel: ReturnPanel) -> CorrelationMatrix:
    """Correlation matrix over the panel's whole return history."""
    n = panel.n_tickers
    if n < 2:
        raise ValueError("need at least 2 tickers")
    if panel.n_returns < 2:
        raise ValueError("need at least 2 return observations")
    rho = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            rho[i, j] = rho[j, i] = pearson(panel.returns[i], panel.returns[j])
    matrix = CorrelationMatrix(panel.tickers, rho)
    undefined = matrix.undefined_pairs()
    if undefined:
        log.warning("correlation undefined for %d pair(s): %s", len(undefined), undefined)
    return matrix


def distance_matrix(matrix: CorrelationMatrix) -> np.ndarray:
    """Element-wise metric distance of a fully defined correlation matrix."""
    if np.isnan(matrix.rho).any():
        raise ValueError(f"matrix has undefined pairs: {matrix.undefined_pairs()}")
    return np.sqrt(2.0 * (1.0 - matrix.rho))


@dataclass(frozen=True)
class RollingCorrelationSeries:
    """Per-pair correlation sampled by a moving window of fixed width.

    Each point is (window end date, rho); windows advance by `step` return
    observations and are indexed by their end date.
    """

    pair: tuple[str, str]
    window_width: int
    step: int
    points: tuple[tuple[date, float], ...]

    @property
    def dates(self) -> tuple[date, ...]:
        return tuple(day for day, _ in self.points)

    @property
    def values(self) -> np.ndarray:
        return np.array([r for _, r in self.points], dtype=float)

    def __len__(self) -> int:
        return len(self.points)


def rolling_correlation(
    panel: ReturnPanel,
    pair: tuple[str, str],
    window_width: int,
    step: int = 1,
) -> RollingCorrelationSeries:
    """Correlation of one pair over every window position.

    Window k covers the window_width returns ending at position
    k*step + window_width - 1; there are floor((T - width)/step) + 1
    positions for a panel of T returns.
    """
    if window_width < 2:
        raise ValueError("window_width must be at least 2")
    if step < 1:
        raise ValueError("step must be at least 1")
    t_ret = panel.n_returns
    if window_width > t_ret:
        raise ValueError(f"window_width {window_width} exceeds panel length {t_ret}")
    i, j = panel.pair_index(pair)
    x = panel.returns[i]
    y = panel.returns[j]
    points = []
    for start in range(0, t_ret - window_width + 1, step):
        stop = start + window_width
        points.append((panel.calendar[stop - 1], pearson(x[start:stop], y[start:stop])))
    return RollingCorrelationSeries(pair, window_width, step, tuple(points))


def census(matrix: CorrelationMatrix, strong_threshold: float = 0.5) -> dict[str, int]:
    """Count pairs per level; values sum to n(n-1)/2."""
    counts = {level: 0 for level in Level}
    for _, _, r in matrix.iter_pairs():
        counts[classify(r, strong_threshold)] += 1
    return {level.value: counts[level] for level in Level}


def _format_value(value: float) -> str:
    return "" if math.isnan(value) else repr(value)


def write_matrix_csv(matrix: CorrelationMatrix, path: str | Path) -> None:
    """Square headered CSV; undefined entries are left empty."""
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["ticker", *matrix.tickers])
        for i, ticker in enumerate(matrix.tickers):
            writer.writerow([ticker, *(_format_value(v) for v in matrix.rho[i])])


def write_pairs_csv(
    matrix: CorrelationMatrix,
    path: str | Path,
    strong_threshold: float = 0.5,
) -> None:
    """Flat list of the n(n-1)/2 pairs with correlation and level."""
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["ticker_i", "ticker_j", "rho", "level"])
        for ti, tj, r in matrix.iter_pairs():
            writer.writerow([ti, tj, _format_value(r), classify(r, strong_threshold).value])
