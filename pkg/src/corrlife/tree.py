"""Minimum spanning trees over correlation distances and their survival.

Trees are built with Kruskal's algorithm over the complete distance graph;
equal-weight edges are broken lexicographically by ticker pair so the same
matrix always yields the same tree. Edge identity for survival statistics
is the unordered ticker pair; weights are ignored.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from datetime import date
from pathlib import Path

import numpy as np

from .correlation import CorrelationMatrix, distance_matrix, pearson
from .panels import ReturnPanel

log = logging.getLogger(__name__)


class _UnionFind:
    def __init__(self, size: int):
        self.parent = list(range(size))
        self.rank = [0] * size

    def find(self, node: int) -> int:
        root = node
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[node] != root:  # path compression
            self.parent[node], node = root, self.parent[node]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return True


@dataclass(frozen=True)
class SpanningTree:
    """Minimum spanning tree at one window position.

    Edges are (ticker_i, ticker_j, distance) with ticker_i < ticker_j;
    window_end_date and position are None/0 for full-period trees.
    """

    edges: tuple[tuple[str, str, float], ...]
    window_end_date: date | None = None
    window_width: int | None = None
    position: int = 0

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def total_weight(self) -> float:
        return float(sum(w for _, _, w in self.edges))

    def edge_pairs(self) -> frozenset[tuple[str, str]]:
        return frozenset((ti, tj) for ti, tj, _ in self.edges)


@dataclass(frozen=True)
class SurvivalCurve:
    """Mean MST edge survival ratio by lag, and the tree half-life.

    points are (lag in trading days, mean survival ratio); half_life is the
    smallest lag whose mean ratio is <= 1/2, or None when never reached.
    """

    window_width: int | None
    points: tuple[tuple[int, float], ...]
    half_life: int | None

    @property
    def lags(self) -> tuple[int, ...]:
        return tuple(lag for lag, _ in self.points)

    @property
    def ratios(self) -> np.ndarray:
        return np.array([r for _, r in self.points])


def build_mst(
    matrix: CorrelationMatrix,
    window_end_date: date | None = None,
    window_width: int | None = None,
    position: int = 0,
) -> SpanningTree:
    """Kruskal MST over the complete graph weighted by correlation distance."""
    n = matrix.n_tickers
    if n < 2:
        raise ValueError("need at least 2 tickers")
    dist = distance_matrix(matrix)  # raises on undefined entries
    candidates = []
    for i in range(n):
        for j in range(i + 1, n):
            ti, tj = sorted((matrix.tickers[i], matrix.tickers[j]))
            candidates.append((float(dist[i, j]), ti, tj, i, j))
    candidates.sort(key=lambda e: (e[0], e[1], e[2]))
    forest = _UnionFind(n)
    edges = []
    for weight, ti, tj, i, j in candidates:
        if forest.union(i, j):
            edges.append((ti, tj, weight))
            if len(edges) == n - 1:
                break
    return SpanningTree(tuple(edges), window_end_date, window_width, position)


def _window_matrix(panel: ReturnPanel, start: int, stop: int) -> CorrelationMatrix:
    n = panel.n_tickers
    rho = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            rho[i, j] = rho[j, i] = pearson(
                panel.returns[i, start:stop], panel.returns[j, start:stop]
            )
    return CorrelationMatrix(panel.tickers, rho)


def rolling_msts(panel: ReturnPanel, window_width: int, step: int = 1) -> list[SpanningTree]:
    """One MST per window position; windows with undefined pairs are skipped."""
    if window_width < 2:
        raise ValueError("window_width must be at least 2")
    if step < 1:
        raise ValueError("step must be at least 1")
    t_ret = panel.n_returns
    if window_width > t_ret:
        raise ValueError(f"window_width {window_width} exceeds panel length {t_ret}")
    if panel.n_tickers < 2:
        raise ValueError("need at least 2 tickers")
    trees = []
    skipped = []
    for position, start in enumerate(range(0, t_ret - window_width + 1, step)):
        stop = start + window_width
        end_date = panel.calendar[stop - 1]
        matrix = _window_matrix(panel, start, stop)
        if np.isnan(matrix.rho).any():
            skipped.append(end_date)
            continue
        trees.append(build_mst(matrix, end_date, window_width, position))
    if skipped:
        log.warning(
            "skipped %d window(s) with undefined correlations, ending %s",
            len(skipped),
            ", ".join(d.isoformat() for d in skipped),
        )
    return trees


def survival_curve(trees: list[SpanningTree], step: int = 1) -> SurvivalCurve:
    """Mean edge survival ratio against lag, averaged over all start positions.

    For lag tau (in window positions, reported in trading days as tau*step)
    the ratio is |edges(t0) & edges(t0+tau)| / (n-1), averaged over every
    start position where both trees exist.
    """
    if len(trees) < 2:
        raise ValueError("need at least 2 trees")
    n_edges = trees[0].n_edges
    if any(t.n_edges != n_edges for t in trees):
        raise ValueError("trees span different ticker sets")
    # encode each edge set as a bitmask over the union of observed edges
    edge_ids: dict[tuple[str, str], int] = {}
    for tree in trees:
        for pair in sorted(tree.edge_pairs()):
            if pair not in edge_ids:
                edge_ids[pair] = len(edge_ids)
    masks: dict[int, int] = {}
    for tree in trees:
        mask = 0
        for pair in tree.edge_pairs():
            mask |= 1 << edge_ids[pair]
        masks[tree.position] = mask
    positions = sorted(masks)
    lo, hi = positions[0], positions[-1]
    contiguous = len(positions) == hi - lo + 1
    ordered = [masks[p] for p in positions]

    points = []
    half_life = None
    for tau in range(0, hi - lo + 1):
        if contiguous:
            overlaps = [
                (a & b).bit_count() for a, b in zip(ordered, ordered[tau:])
            ] if tau else [n_edges] * len(ordered)
        else:
            overlaps = [
                (masks[p] & masks[p + tau]).bit_count() for p in positions if p + tau in masks
            ]
        if not overlaps:
            continue
        ratio = sum(overlaps) / (len(overlaps) * n_edges)
        lag_days = tau * step
        points.append((lag_days, ratio))
        if half_life is None and tau > 0 and ratio <= 0.5:
            half_life = lag_days
    return SurvivalCurve(trees[0].window_width, tuple(points), half_life)


def write_trees_csv(trees: list[SpanningTree], path: str | Path) -> None:
    """All windows' edges as window_end,ticker_i,ticker_j,distance rows."""
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["window_end", "ticker_i", "ticker_j", "distance"])
        for tree in trees:
            window_end = tree.window_end_date.isoformat() if tree.window_end_date else ""
            for ti, tj, weight in tree.edges:
                writer.writerow([window_end, ti, tj, repr(weight)])


def write_edgelist(tree: SpanningTree, path: str | Path) -> None:
    """Plain one-edge-per-line text format for external graph tools."""
    with Path(path).open("w", encoding="utf-8") as handle:
        for ti, tj, weight in tree.edges:
            handle.write(f"{ti} {tj} {weight!r}\n")


def survival_records(curve: SurvivalCurve) -> list[dict]:
    """Row dicts for the survival-ratio table."""
    return [{"lag": lag, "ratio": ratio} for lag, ratio in curve.points]
