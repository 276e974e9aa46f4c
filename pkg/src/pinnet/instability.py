"""Node-removal searches for groups whose deletion lifts algebraic connectivity.

A group *lifts* a year when the snapshot's algebraic connectivity is at or
below the lift level and the largest SCC left after deleting the group sits
above it. Groups of up to three nodes are enumerated; larger groups are
sampled with a two-step scheme that first ranks nodes by how often they turn
up in lifting groups and then oversamples the top of that ranking.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Collection, Iterable, Mapping, Sequence

import numpy as np

from .netcore import CountryRegistry, PinSnapshot, largest_scc
from .spectral import SpectralError, algebraic_connectivity

MIN_CORE = 3


@dataclass(frozen=True)
class LiftCriterion:
    lift_level: float = 0.5
    years: tuple[int, ...] = (2005, 2006, 2007, 2008)
    mode: str = "partial"

    def __post_init__(self):
        if self.mode not in ("partial", "complete"):
            raise ValueError(f"unknown lift mode {self.mode!r}")
        if self.lift_level <= 0:
            raise ValueError("lift level must be positive")

    def accepts(self, lifted_years: Collection[int]) -> bool:
        if self.mode == "partial":
            return len(lifted_years) > 0
        return set(self.years) <= set(lifted_years)


@dataclass
class SearchReport:
    n: int
    p_lambda: float
    ranking: list[tuple[int, float]]
    rounds: int
    seed: int
    samples: int
    p_lambda_complete: float = 0.0
    round_p: list[float] = field(default_factory=list)
    round_rankings: list[list[tuple[int, float]]] = field(default_factory=list)
    lifting_groups: list[tuple[int, ...]] = field(default_factory=list)
    occurrences_by_year: dict[int, dict[int, int]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "p_lambda": self.p_lambda,
            "p_lambda_complete": self.p_lambda_complete,
            "round_p": self.round_p,
            "ranking": [[c, f] for c, f in self.ranking],
            "samples": self.samples,
            "rounds": self.rounds,
            "seed": self.seed,
            "lifting_groups": [list(g) for g in self.lifting_groups],
        }


@dataclass(frozen=True)
class OfcQuotient:
    n: int
    f_ofc_found: float | None
    f_ofc_network: float
    q: float | None
    q_distinct: float | None = None


def _remove(s: PinSnapshot, group: Iterable[int]) -> np.ndarray:
    drop = {s.index_of(c) for c in group if c in s.node_ids}
    keep = [k for k in range(s.n_nodes) if k not in drop]
    return s.weights[np.ix_(keep, keep)]


def _lambda_of_core(w: np.ndarray) -> float | None:
    core = largest_scc(w)
    if len(core) < MIN_CORE:
        return None
    try:
        return algebraic_connectivity(w[np.ix_(core, core)])
    except SpectralError:
        # numerically split into several components
        return 0.0


def lambda_after_removal(s: PinSnapshot, group: Collection[int]) -> float | None:
    """Algebraic connectivity of the largest SCC left after deleting ``group``.

    Returns None when fewer than three mutually reachable nodes survive.
    """
    group = set(group)
    if not group:
        raise ValueError("removal group is empty")
    missing = group - set(s.node_ids)
    if missing:
        raise ValueError(f"countries {sorted(missing)} are not in the snapshot")
    if len(group) >= s.n_nodes:
        raise ValueError("removal group covers every node")
    return _lambda_of_core(_remove(s, group))


class _LiftEvaluator:
    def __init__(self, series: Sequence[PinSnapshot], crit: LiftCriterion):
        years = set(crit.years)
        self.snapshots = sorted((s for s in series if s.year in years), key=lambda s: s.year)
        if not self.snapshots:
            raise ValueError(f"no snapshots for years {sorted(years)}")
        self.crit = crit
        self.baseline = {s.year: _lambda_of_core(s.weights) for s in self.snapshots}
        self._cache: dict[frozenset, tuple[int, ...]] = {}

    @property
    def pool(self) -> list[int]:
        return sorted({c for s in self.snapshots for c in s.node_ids})

    def lifted_years(self, group: Iterable[int]) -> tuple[int, ...]:
        key = frozenset(group)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        level = self.crit.lift_level
        out = []
        for s in self.snapshots:
            base = self.baseline[s.year]
            if base is not None and base > level:
                continue
            present = [c for c in key if c in s.node_ids]
            if not present or len(present) >= s.n_nodes:
                continue
            lam = _lambda_of_core(_remove(s, present))
            if lam is not None and lam > level:
                out.append(s.year)
        hit = self._cache[key] = tuple(out)
        return hit


def exhaustive_search(series: Sequence[PinSnapshot], n_max: int,
                      crit: LiftCriterion = LiftCriterion(),
                      exclude: Collection[int] = ()) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """All groups of up to ``n_max`` nodes that meet ``crit``.

    Groups containing an already-found smaller group are skipped.
    """
    if n_max not in (1, 2, 3):
        raise ValueError("exhaustive search covers group sizes 1 to 3")
    ev = _LiftEvaluator(series, crit)
    pool = [c for c in ev.pool if c not in set(exclude)]
    found: list[tuple[tuple[int, ...], tuple[int, ...]]] = []
    found_sets: list[frozenset] = []
    for size in range(1, n_max + 1):
        new = []
        for group in combinations(pool, size):
            gs = frozenset(group)
            if any(f <= gs for f in found_sets):
                continue
            years = ev.lifted_years(group)
            if crit.accepts(years):
                new.append((group, years))
        found.extend(new)
        found_sets.extend(frozenset(g) for g, _ in new)
    return found


def _rank(counts: Mapping[int, float]) -> list[tuple[int, float]]:
    return sorted(((c, f) for c, f in counts.items() if f > 0), key=lambda cf: (-cf[1], cf[0]))


def two_step_search(series: Sequence[PinSnapshot], n: int, samples: int = 10_000, rounds: int = 5,
                    crit: LiftCriterion = LiftCriterion(), exclude: Collection[int] = (),
                    seed: int = 0, top_k: int = 10, workers: int = 1) -> SearchReport:
    """Statistical search for lifting groups of size ``n`` (4 to 10).

    Step one draws uniform ``n``-subsets from the pool and ranks nodes by
    their frequency in lifting groups. Step two draws ``ceil(n/2)`` members
    from the ``top_k`` of that ranking and the rest from the remaining pool,
    then re-ranks. Frequencies and ``p_lambda`` (the lifting fraction of step
    two) are averaged over ``rounds``. Every sample has its own generator
    seeded by ``(seed, round, step, index)``.
    """
    if not 4 <= n <= 10:
        raise ValueError("two-step search covers group sizes 4 to 10")
    ev = _LiftEvaluator(series, crit)
    excluded = set(exclude)
    pool = np.array([c for c in ev.pool if c not in excluded])
    if pool.size < n:
        raise ValueError(f"only {pool.size} nodes left in the pool for groups of {n}")
    partial = LiftCriterion(crit.lift_level, crit.years, "partial")
    complete = LiftCriterion(crit.lift_level, crit.years, "complete")
    head = math.ceil(n / 2)

    def run(draw, tag):
        def task(i):
            group = tuple(sorted(int(c) for c in draw(np.random.default_rng([seed, tag[0], tag[1], i]))))
            return group, ev.lifted_years(group)
        if workers > 1:
            with ThreadPoolExecutor(workers) as ex:
                return list(ex.map(task, range(samples), chunksize=256))
        return [task(i) for i in range(samples)]

    totals: Counter = Counter()
    round_p, round_rankings = [], []
    complete_hits = 0
    groups: set[tuple[int, ...]] = set()
    by_year: dict[int, Counter] = {s.year: Counter() for s in ev.snapshots}
    for r in range(rounds):
        first = run(lambda rng: rng.choice(pool, n, replace=False), (r, 1))
        freq1: Counter = Counter()
        for g, years in first:
            if partial.accepts(years):
                freq1.update(g)
                groups.add(g)
        order = sorted(pool.tolist(), key=lambda c: (-freq1[c], c))
        top = np.array(order[:top_k])
        k = min(head, top.size)

        def second(rng, top=top, k=k):
            chosen = rng.choice(top, k, replace=False)
            rest = np.setdiff1d(pool, chosen, assume_unique=True)
            return np.concatenate([chosen, rng.choice(rest, n - k, replace=False)])

        freq2: Counter = Counter()
        hits = 0
        for g, years in run(second, (r, 2)):
            if partial.accepts(years):
                hits += 1
                freq2.update(g)
                groups.add(g)
                for y in years:
                    by_year[y].update(g)
            if complete.accepts(years):
                complete_hits += 1
        round_p.append(hits / samples)
        round_rankings.append(_rank({c: f / samples for c, f in freq2.items()}))
        totals.update(freq2)
    ranking = _rank({c: f / (samples * rounds) for c, f in totals.items()})
    return SearchReport(
        n=n, p_lambda=float(np.mean(round_p)), ranking=ranking, rounds=rounds, seed=seed,
        samples=samples, p_lambda_complete=complete_hits / (samples * rounds), round_p=round_p,
        round_rankings=round_rankings, lifting_groups=sorted(groups),
        occurrences_by_year={y: dict(c) for y, c in by_year.items()},
    )


def ofc_share(nodes: Iterable[int], registry: CountryRegistry) -> float:
    nodes = list(nodes)
    return sum(registry.is_ofc(c) for c in nodes) / len(nodes)


def ofc_quotient(report: SearchReport, registry: CountryRegistry,
                 snapshots: Sequence[PinSnapshot]) -> OfcQuotient:
    """Over-representation of offshore centres among nodes of lifting groups.

    The found share counts node occurrences (with multiplicity) per year and
    averages over years with any occurrence; ``q_distinct`` uses distinct nodes instead.
    """
    years = sorted(report.occurrences_by_year) or sorted(s.year for s in snapshots)
    snaps = [s for s in snapshots if s.year in set(years)] or list(snapshots)
    f_net = float(np.mean([ofc_share(s.node_ids, registry) for s in snaps]))
    shares, distinct = [], []
    for y in years:
        occ = report.occurrences_by_year.get(y, {})
        total = sum(occ.values())
        if total == 0:
            continue
        shares.append(sum(c for node, c in occ.items() if registry.is_ofc(node)) / total)
        distinct.append(ofc_share(occ, registry))
    if not shares or f_net == 0:
        return OfcQuotient(report.n, None, f_net, None, None)
    f_found = float(np.mean(shares))
    return OfcQuotient(report.n, f_found, f_net, f_found / f_net, float(np.mean(distinct)) / f_net)
