"""Edge-threshold sweeps of the largest strongly-connected component."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .netcore import PositionRecord, aggregate_positions, dense_matrix, threshold_core
from .spectral import SpectralError, algebraic_connectivity

DEFAULT_GRID = (1.0, 1000.0, 500)  # millions of USD
SD_THRESHOLD = 5.5
DEFAULT_THRESHOLD = 52.0


@dataclass(frozen=True)
class CurvePoint:
    e_th: float
    n_nodes: int
    m_edges: int
    volume: float
    density: float


@dataclass(frozen=True)
class PercolationCurve:
    points: list[CurvePoint]
    scale: tuple[float, float, int]

    @property
    def thresholds(self) -> np.ndarray:
        return np.array([p.e_th for p in self.points])

    @property
    def n_nodes(self) -> np.ndarray:
        return np.array([p.n_nodes for p in self.points])

    def to_csv_rows(self) -> list[list]:
        return [["e_th", "n", "m", "volume", "density"]] + [
            [p.e_th, p.n_nodes, p.m_edges, p.volume, p.density] for p in self.points]


@dataclass(frozen=True)
class PercolationPoint:
    e_p: float | None
    criterion: tuple[float, int] = field(default=(0.1, 5))

    @property
    def found(self) -> bool:
        return self.e_p is not None


def log_grid(lo: float, hi: float, count: int) -> np.ndarray:
    if not (lo > 0 and hi > lo and count >= 2):
        raise ValueError("grid needs 0 < lo < hi and count >= 2")
    return np.geomspace(lo, hi, count)


def _records_matrix(records: Sequence[PositionRecord]):
    edges, _ = aggregate_positions(records)
    return dense_matrix(edges)


def _curve_point(ids, w, t) -> CurvePoint:
    core_ids, core = threshold_core(ids, w, t)
    n = len(core_ids)
    if n < 2:
        return CurvePoint(float(t), n, 0, 0.0, 0.0)
    m = int(np.count_nonzero(core))
    return CurvePoint(float(t), n, m, float(core.sum()), m / (n * n - n))


def percolation_scan(records: Sequence[PositionRecord],
                     grid: tuple[float, float, int] = DEFAULT_GRID) -> PercolationCurve:
    """Size, volume and density of the largest SCC at each log-spaced threshold.

    Thresholds past the disintegration point report the size of the largest
    component found (0 or 1) instead of raising.
    """
    ids, w = _records_matrix(records)
    lo, hi, count = grid
    return PercolationCurve([_curve_point(ids, w, t) for t in log_grid(lo, hi, count)],
                            (float(lo), float(hi), int(count)))


def detect_percolation_point(curve: PercolationCurve, delta: float = 0.1,
                             window: int = 5) -> PercolationPoint:
    """Largest threshold before a rapid drop in the core's node count.

    A grid point ``t_i`` qualifies when every node count up to it is at least
    ``(1 - delta) * n_0`` and the count falls by more than ``delta``
    (relative to ``n_i``) within the next ``window`` grid steps.
    """
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if window < 1:
        raise ValueError("window must be at least 1")
    n = curve.n_nodes.astype(float)
    t = curve.thresholds
    if n.size == 0 or n[0] == 0:
        return PercolationPoint(None, (delta, window))
    floor = (1 - delta) * n[0]
    running_min = np.minimum.accumulate(n)
    best = None
    last = n.size - 1
    for i in range(n.size):
        if running_min[i] < floor:
            break
        j = min(i + window, last)
        if j > i and (n[i] - n[j]) / n[i] > delta:
            best = i
    return PercolationPoint(None if best is None else float(t[best]), (delta, window))


@dataclass(frozen=True)
class IndicatorPoint:
    e_th: float
    n_nodes: int
    density: float
    lambda1: float


def indicator_sweep(records: Sequence[PositionRecord], thresholds: Sequence[float]) -> list[IndicatorPoint]:
    """Core size, edge density and algebraic connectivity across thresholds.

    ``lambda1`` is nan where no core of at least two nodes survives.
    """
    ids, w = _records_matrix(records)
    out = []
    for t in thresholds:
        p = _curve_point(ids, w, t)
        lam = float("nan")
        if p.n_nodes >= 2:
            _, core = threshold_core(ids, w, t)
            try:
                lam = algebraic_connectivity(core)
            except SpectralError:
                pass
        out.append(IndicatorPoint(float(t), p.n_nodes, p.density, lam))
    return out
