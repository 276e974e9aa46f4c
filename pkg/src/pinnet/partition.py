"""Cut metrics for graph bi-sections and random-bisection baselines."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Collection

import numpy as np

from .netcore import PinSnapshot
from .spectral import Bisection, fiedler_bisection, spectrum_summary

Z99 = 2.5758293035489004  # two-sided 99% normal quantile
METHODS = ("balanced", "uniform_size", "fiedler_like")


@dataclass(frozen=True)
class CutMetrics:
    w_cut: float
    m_cut: int
    cut_ratio: float
    f_w: float
    f_m: float
    cut_depth: float


@dataclass(frozen=True)
class BaselineReport:
    method: str
    samples: int
    mean_cut_depth: float
    sd_cut_depth: float
    ci99: tuple[float, float]
    seed: int


@dataclass(frozen=True)
class ClassificationTriple:
    lambda1: float
    f_small: float
    cut_depth: float


def _cut_from_mask(w: np.ndarray, mask: np.ndarray, volume: float, m_total: int) -> CutMetrics:
    cross = w[np.ix_(mask, ~mask)], w[np.ix_(~mask, mask)]
    w_cut = float(cross[0].sum() + cross[1].sum())
    m_cut = int(np.count_nonzero(cross[0]) + np.count_nonzero(cross[1]))
    if m_cut == 0:
        raise ValueError("disconnected bisection: no edge crosses the cut")
    k = int(mask.sum())
    f_w = w_cut / volume
    f_m = m_cut / m_total
    return CutMetrics(w_cut, m_cut, w_cut / (k * (mask.size - k)), f_w, f_m, f_w / f_m)


def cut_metrics(s: PinSnapshot, b: Bisection) -> CutMetrics:
    """Weight, ratio and depth of the cut between the two sections of ``b``.

    Crossing edges are counted in both directions.
    """
    if set(b.s_plus) | set(b.s_minus) != set(s.node_ids) or b.s_plus & b.s_minus:
        raise ValueError("bisection does not partition the snapshot's nodes")
    if not b.s_plus or not b.s_minus:
        raise ValueError("bisection has an empty section")
    mask = np.array([i in b.s_plus for i in s.node_ids])
    return _cut_from_mask(s.weights, mask, s.volume, s.n_edges)


def cut_depth_of(s: PinSnapshot, section: Collection[int]) -> float:
    """Cut depth of the bi-section ``(section, rest)``, section given by country id."""
    section = set(section)
    rest = frozenset(s.node_ids) - section
    return cut_metrics(s, Bisection(frozenset(section), rest)).cut_depth


def _sample_size(method: str, n: int, rng: np.random.Generator, fiedler_size: int | None) -> int:
    if method == "balanced":
        return n // 2
    if method == "uniform_size":
        return int(rng.integers(1, n))
    return fiedler_size


def random_baseline(s: PinSnapshot, method: str, samples: int = 10_000, seed: int = 0,
                    f_small: float | None = None, workers: int = 1) -> BaselineReport:
    """Mean cut depth of random bi-sections with a normal-approximation 99% CI.

    Sample ``i`` draws from its own generator seeded by ``(seed, i)``, so the
    report does not depend on ``workers``.
    """
    if method not in METHODS:
        raise ValueError(f"unknown baseline method {method!r}")
    if samples < 1:
        raise ValueError("samples must be positive")
    n = s.n_nodes
    fiedler_size = None
    if method == "fiedler_like":
        if f_small is None:
            f_small = fiedler_bisection(spectrum_summary(s)).f_small
        fiedler_size = max(1, min(n - 1, int(round(f_small * n))))
    w, volume, m_total = s.weights, s.volume, s.n_edges
    code = METHODS.index(method)

    def one(i: int) -> float:
        rng = np.random.default_rng([seed, code, i])
        k = _sample_size(method, n, rng, fiedler_size)
        mask = np.zeros(n, dtype=bool)
        mask[rng.choice(n, size=k, replace=False)] = True
        return _cut_from_mask(w, mask, volume, m_total).cut_depth

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            depths = np.fromiter(pool.map(one, range(samples), chunksize=256), float, samples)
    else:
        depths = np.fromiter(map(one, range(samples)), float, samples)
    mean = float(depths.mean())
    sd = float(depths.std(ddof=1)) if samples > 1 else 0.0
    half = Z99 * sd / np.sqrt(samples)
    return BaselineReport(method, samples, mean, sd, (mean - half, mean + half), seed)


def classification_triple(s: PinSnapshot) -> ClassificationTriple:
    summary = spectrum_summary(s)
    b = fiedler_bisection(summary)
    return ClassificationTriple(summary.lambda1, b.f_small, cut_metrics(s, b).cut_depth)
