"""Weighted directed networks built from bilateral position records.

Money is carried as float64 in millions of USD throughout.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

log = logging.getLogger(__name__)

ASSET_CLASSES = ("E", "LD", "SD")


class NoCoreError(ValueError):
    """Raised when a thresholded graph has no strongly-connected core."""


@dataclass(frozen=True)
class Country:
    country_id: int
    name: str
    iso_code: str
    is_ofc: bool = False


@dataclass
class CountryRegistry:
    entries: list[Country]

    def __post_init__(self):
        ids = [c.country_id for c in self.entries]
        if ids != list(range(len(ids))):
            raise ValueError("country ids must be dense 0..N-1 in entry order")
        isos = [c.iso_code for c in self.entries]
        if len(set(isos)) != len(isos):
            raise ValueError("iso codes must be unique")
        self._by_iso = {c.iso_code: c for c in self.entries}

    @classmethod
    def from_rows(cls, rows: Iterable[tuple[str, str, bool]]) -> "CountryRegistry":
        """Build from ``(iso, name, is_ofc)`` rows, assigning ids in order."""
        return cls([Country(i, name, iso, bool(ofc)) for i, (iso, name, ofc) in enumerate(rows)])

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, country_id: int) -> Country:
        return self.entries[country_id]

    def id_of(self, iso: str) -> int:
        try:
            return self._by_iso[iso].country_id
        except KeyError:
            raise KeyError(f"unknown iso code {iso!r}") from None

    def is_ofc(self, country_id: int) -> bool:
        return self.entries[country_id].is_ofc


@dataclass(frozen=True)
class PositionRecord:
    year: int
    source: int
    target: int
    position: float

    def __post_init__(self):
        if self.source == self.target:
            raise ValueError(f"self-loop record for country {self.source} in {self.year}")


@dataclass(frozen=True, eq=False)
class PinSnapshot:
    """One year's thresholded network, restricted to its largest SCC.

    ``weights[i, j]`` is the position held by ``node_ids[i]`` in ``node_ids[j]``.
    """

    year: int
    asset_class: str
    node_ids: tuple[int, ...]
    weights: np.ndarray
    threshold_applied: float
    negatives_dropped: int = 0
    raw_volume: float = float("nan")

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "node_ids", tuple(int(i) for i in self.node_ids))
        if w.shape != (len(self.node_ids), len(self.node_ids)):
            raise ValueError("weight matrix shape does not match node list")
        if np.any(np.diag(w) != 0):
            raise ValueError("self-loops are not allowed")
        if np.any(w < 0):
            raise ValueError("negative edge weights")

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def n_edges(self) -> int:
        return int(np.count_nonzero(self.weights))

    @property
    def volume(self) -> float:
        return float(self.weights.sum())

    def index_of(self, country_id: int) -> int:
        return self.node_ids.index(country_id)

    def scaled(self, factor: float) -> "PinSnapshot":
        return PinSnapshot(self.year, self.asset_class, self.node_ids, self.weights * factor,
                           self.threshold_applied * factor, self.negatives_dropped,
                           self.raw_volume * factor)


@dataclass
class NodeMeasures:
    node_ids: tuple[int, ...]
    in_degree: np.ndarray
    out_degree: np.ndarray
    in_strength: np.ndarray
    out_strength: np.ndarray
    total_degree: np.ndarray = field(init=False)
    total_strength: np.ndarray = field(init=False)

    def __post_init__(self):
        self.total_degree = self.in_degree + self.out_degree
        self.total_strength = self.in_strength + self.out_strength


def deflate(records: Sequence[PositionRecord], deflator: Mapping[int, float],
            base_year: int) -> list[PositionRecord]:
    """Restate nominal positions at constant ``base_year`` prices."""
    if base_year not in deflator:
        raise KeyError(f"deflator has no index for base year {base_year}")
    base = float(deflator[base_year])
    if base <= 0:
        raise ValueError("base-year deflator index must be positive")
    out = []
    for r in records:
        if r.year not in deflator:
            raise KeyError(f"deflator has no index for year {r.year}")
        out.append(PositionRecord(r.year, r.source, r.target, r.position * base / float(deflator[r.year])))
    return out


def strongly_connected_components(adjacency: Sequence[Sequence[int]]) -> list[list[int]]:
    """Tarjan's algorithm, iterative. ``adjacency[v]`` lists successors of v.

    Components come out in reverse topological order of the condensation.
    """
    n = len(adjacency)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] >= 0:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, pos = work[-1]
            succ = adjacency[v]
            if pos < len(succ):
                work[-1] = (v, pos + 1)
                w = succ[pos]
                if index[w] < 0:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
    return comps


def _adjacency(weights: np.ndarray) -> list[list[int]]:
    return [np.flatnonzero(row).tolist() for row in weights]


def largest_scc(weights: np.ndarray) -> list[int]:
    """Indices of the largest SCC of the digraph with nonzero ``weights``.

    Ties on size go to the larger volume, then to the lexicographically
    smaller index set.
    """
    weights = np.asarray(weights)
    if weights.shape[0] == 0:
        return []
    comps = strongly_connected_components(_adjacency(weights))

    def key(c):
        vol = float(weights[np.ix_(c, c)].sum())
        return (-len(c), -vol, c)

    return min(comps, key=key)


def aggregate_positions(records: Iterable[PositionRecord]) -> tuple[dict[tuple[int, int], float], int]:
    """Sum duplicate (source, target) records after dropping negative ones.

    Returns the edge map and the number of negative records dropped.
    """
    edges: dict[tuple[int, int], float] = defaultdict(float)
    negatives = 0
    for r in records:
        if r.position < 0:
            negatives += 1
            continue
        edges[(r.source, r.target)] += r.position
    return dict(edges), negatives


def dense_matrix(edges: Mapping[tuple[int, int], float]) -> tuple[list[int], np.ndarray]:
    """Dense weight matrix over all countries touching an edge, sorted by id."""
    ids = sorted({i for e in edges for i in e})
    pos = {c: k for k, c in enumerate(ids)}
    w = np.zeros((len(ids), len(ids)))
    for (s, t), v in edges.items():
        w[pos[s], pos[t]] = v
    return ids, w


def threshold_core(ids: Sequence[int], w: np.ndarray, e_th: float) -> tuple[list[int], np.ndarray]:
    """Zero edges below ``e_th`` and restrict to the largest SCC."""
    wt = np.where(w >= e_th, w, 0.0)
    core = largest_scc(wt)
    return [ids[k] for k in core], wt[np.ix_(core, core)]


def build_snapshot(records: Sequence[PositionRecord], e_th: float, asset_class: str = "E",
                   year: int | None = None) -> PinSnapshot:
    """Threshold one year's records and keep the largest strongly-connected component."""
    if e_th <= 0:
        raise ValueError("edge threshold must be positive")
    if asset_class not in ASSET_CLASSES:
        raise ValueError(f"unknown asset class {asset_class!r}")
    years = {r.year for r in records}
    if year is None:
        if len(years) != 1:
            raise ValueError(f"records span years {sorted(years)}; pass one year")
        year = years.pop()
    else:
        records = [r for r in records if r.year == year]
    edges, negatives = aggregate_positions(records)
    if negatives:
        log.info("dropped %d negative positions for %s %d", negatives, asset_class, year)
    ids, w = dense_matrix(edges)
    node_ids, core = threshold_core(ids, w, e_th)
    if len(node_ids) < 2:
        raise NoCoreError(f"no strongly-connected core for {asset_class} {year} at e_th={e_th:g}")
    return PinSnapshot(year, asset_class, node_ids, core, e_th, negatives, float(w.sum()))


def edge_density(s: PinSnapshot) -> float:
    n = s.n_nodes
    if n < 2:
        raise ValueError("edge density needs at least two nodes")
    return s.n_edges / (n * n - n)


def node_measures(s: PinSnapshot) -> NodeMeasures:
    w = s.weights
    nz = w != 0
    return NodeMeasures(
        node_ids=s.node_ids,
        in_degree=nz.sum(axis=0),
        out_degree=nz.sum(axis=1),
        in_strength=w.sum(axis=0),
        out_strength=w.sum(axis=1),
    )


def eccdf(values: Sequence[float]) -> list[tuple[float, float]]:
    """Complementary cumulative distribution ``P(X >= x)`` at each distinct value."""
    x = np.sort(np.asarray(values, dtype=float))
    if x.size == 0:
        raise ValueError("eccdf of an empty sample")
    distinct, first = np.unique(x, return_index=True)
    p = (x.size - first) / x.size
    return list(zip(distinct.tolist(), p.tolist()))
