"""Command-line pipeline: ``pinnet <subcommand> [--config FILE] [--set key=value ...]``.

Exit codes: 0 success, 1 input error, 2 invariant or numerical error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import DEFAULTS_VERSION, RunConfig, load_config, parse_override
from .instability import LiftCriterion, exhaustive_search, ofc_quotient, two_step_search
from .io import InputError, read_deflator, read_positions, read_registry, read_series, write_csv, write_json
from .netcore import (NoCoreError, PinSnapshot, build_snapshot, deflate, eccdf, edge_density,
                      node_measures)
from .nlsmm import (TimeSeries, WarningConfig, fit, format_month, interpolate_semiannual, month,
                    parse_month, warning_series)
from .partition import classification_triple, cut_metrics, random_baseline
from .percolation import detect_percolation_point, indicator_sweep, log_grid, percolation_scan
from .spectral import SpectralError, eigenvector_centrality, fiedler_bisection, spectrum_summary

log = logging.getLogger("pinnet")

SUBCOMMANDS = ("build", "percolate", "spectral", "baseline", "search", "fit", "warn", "distributions")


class Pipeline:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.out = Path(cfg.output)
        self.out.mkdir(parents=True, exist_ok=True)
        self._registry = None
        self._records: dict[str, list] = {}

    @property
    def meta(self) -> dict:
        return {"config_hash": self.cfg.digest(), "seed": self.cfg.seed,
                "defaults_version": DEFAULTS_VERSION, "pinnet_version": __version__}

    def write_table(self, name: str, rows) -> None:
        write_csv(self.out / name, rows)
        write_json(self.out / f"{name}.meta.json", self.meta)

    def write_report(self, name: str, body: dict) -> None:
        write_json(self.out / name, {"meta": self.meta, **body})

    @property
    def registry(self):
        if self._registry is None:
            if not self.cfg.registry:
                raise InputError("no registry file configured")
            self._registry = read_registry(self.cfg.registry)
        return self._registry

    def iso(self, ids) -> list[str]:
        return [self.registry[c].iso_code for c in sorted(ids)]

    def records(self, cls: str) -> list:
        if cls not in self._records:
            if cls not in self.cfg.positions:
                raise InputError(f"no positions file configured for class {cls}")
            recs = read_positions(self.cfg.positions[cls], self.registry)
            if self.cfg.deflator:
                try:
                    recs = deflate(recs, read_deflator(self.cfg.deflator), self.cfg.base_year)
                except KeyError as exc:
                    raise InputError(f"{self.cfg.deflator}: {exc.args[0]}") from None
            self._records[cls] = recs
        return self._records[cls]

    def classes(self) -> list[str]:
        return [c for c in ("E", "LD", "SD") if c in self.cfg.positions]

    def years(self, cls: str) -> list[int]:
        return sorted({r.year for r in self.records(cls)})

    def snapshot(self, cls: str, year: int) -> PinSnapshot:
        return build_snapshot(self.records(cls), self.cfg.e_th[cls], cls, year)

    def snapshots(self, cls: str) -> list[PinSnapshot]:
        return [self.snapshot(cls, y) for y in self.years(cls)]

    # subcommands

    def build(self):
        raw_total: dict[int, float] = {}
        snaps = {cls: self.snapshots(cls) for cls in self.classes()}
        for cls in snaps:
            for s in snaps[cls]:
                raw_total[s.year] = raw_total.get(s.year, 0.0) + s.raw_volume
        rows = [["asset_class", "year", "n_nodes", "n_edges", "density", "volume", "raw_volume",
                 "retained_fraction", "f_v", "negatives_dropped", "e_th"]]
        for cls, series in snaps.items():
            for s in series:
                rows.append([cls, s.year, s.n_nodes, s.n_edges, edge_density(s), s.volume, s.raw_volume,
                             s.volume / s.raw_volume, s.volume / raw_total[s.year],
                             s.negatives_dropped, s.threshold_applied])
        self.write_table("statistics.csv", rows)

    def percolate(self):
        p = self.cfg.percolation
        points = []
        for cls in self.classes():
            for year in self.years(cls):
                recs = [r for r in self.records(cls) if r.year == year]
                curve = percolation_scan(recs, (p.lo, p.hi, p.count))
                self.write_table(f"percolation_{cls}_{year}.csv", curve.to_csv_rows())
                pt = detect_percolation_point(curve, p.delta, p.window)
                points.append({"asset_class": cls, "year": year, "e_p": pt.e_p, "found": pt.found})
            if cls in p.sweep_classes:
                grid = log_grid(p.lo, p.hi, max(2, p.count // 10))
                rows = [["year", "e_th", "n", "density", "lambda1"]]
                for year in self.years(cls):
                    recs = [r for r in self.records(cls) if r.year == year]
                    rows += [[year, q.e_th, q.n_nodes, q.density, q.lambda1]
                             for q in indicator_sweep(recs, grid)]
                self.write_table(f"threshold_sweep_{cls}.csv", rows)
        self.write_report("percolation_points.json", {
            "criterion": {"delta": p.delta, "window": p.window},
            "grid": {"lo": p.lo, "hi": p.hi, "count": p.count}, "points": points})

    def spectral(self):
        rows = [["asset_class", "year", "n_nodes", "lambda1", "lambda2", "delta_lambda", "zero_count",
                 "f_small", "cut_ratio", "cut_depth", "small_section"]]
        sections = []
        for cls in self.classes():
            for s in self.snapshots(cls):
                summ = spectrum_summary(s)
                b = fiedler_bisection(summ)
                cm = cut_metrics(s, b)
                rows.append([cls, s.year, s.n_nodes, summ.lambda1, summ.lambda2, summ.delta_lambda,
                             summ.zero_count, b.f_small, cm.cut_ratio, cm.cut_depth,
                             ";".join(self.iso(b.small))])
                sections.append({"asset_class": cls, "year": s.year, "s_plus": self.iso(b.s_plus),
                                 "s_minus": self.iso(b.s_minus),
                                 "fiedler": dict(zip(self.iso(s.node_ids),
                                                     [float(v) for v in summ.fiedler]))})
        self.write_table("spectral.csv", rows)
        self.write_report("fiedler_sections.json", {"sections": sections})

    def baseline(self):
        rows = [["asset_class", "year", "method", "samples", "mean_cut_depth", "ci99_lo", "ci99_hi",
                 "fiedler_cut_depth", "seed"]]
        for cls in self.classes():
            for s in self.snapshots(cls):
                t = classification_triple(s)
                for method in self.cfg.baseline.methods:
                    rep = random_baseline(s, method, self.cfg.baseline.samples, self.cfg.seed,
                                          f_small=t.f_small)
                    rows.append([cls, s.year, method, rep.samples, rep.mean_cut_depth,
                                 rep.ci99[0], rep.ci99[1], t.cut_depth, rep.seed])
        self.write_table("baseline.csv", rows)

    def search(self):
        sc = self.cfg.search
        series = self.snapshots(sc.asset_class)
        crit = LiftCriterion(sc.lift_level, tuple(sc.years))
        in_years = [s for s in series if s.year in set(sc.years)]
        found = exhaustive_search(series, sc.exhaustive_max, crit)
        singles = {g[0] for g, _ in found if len(g) == 1}
        exhaustive = [{"n": len(g), "group": self.iso(g), "lifted_years": list(y)} for g, y in found]
        statistical = []
        for n in sc.sizes:
            rep = two_step_search(series, n, sc.samples, sc.rounds, crit, exclude=singles,
                                  seed=self.cfg.seed, top_k=sc.top_k, workers=sc.workers)
            q = ofc_quotient(rep, self.registry, in_years)
            body = rep.to_dict()
            body["ranking"] = [[self.registry[c].iso_code, f] for c, f in rep.ranking]
            body["lifting_groups"] = [self.iso(g) for g in rep.lifting_groups]
            body.update({"q": q.q, "q_distinct": q.q_distinct, "f_ofc_found": q.f_ofc_found,
                         "f_ofc_network": q.f_ofc_network})
            statistical.append(body)
        self.write_report("search.json", {
            "lift_level": sc.lift_level, "years": sc.years, "excluded": self.iso(singles),
            "exhaustive": exhaustive, "statistical": statistical})

    def _density(self) -> TimeSeries:
        fc = self.cfg.fit
        if fc.density_series:
            series = self._series()
            if fc.density_series not in series:
                raise InputError(f"density series {fc.density_series!r} not in {self.cfg.series}")
            rho = series[fc.density_series]
        else:
            snaps = self.snapshots(fc.density_class)
            rho = TimeSeries(tuple(month(s.year) for s in snaps),
                             np.array([edge_density(s) for s in snaps]), f"rho_{fc.density_class}")
        return interpolate_semiannual(rho) if rho.cadence == 12 else rho

    def _series(self) -> dict[str, TimeSeries]:
        if not self.cfg.series:
            raise InputError("no series file configured")
        return read_series(self.cfg.series)

    def _fits(self, names):
        fc = self.cfg.fit
        rho = self._density()
        series = self._series()
        out = {}
        for name in names:
            if name not in series:
                raise InputError(f"series {name!r} not in {self.cfg.series}")
            t_r = parse_month(fc.t_r.get(name, fc.default_t_r))
            out[name] = fit(rho, series[name], t_r, fc.dt_grid,
                            thresholds=(fc.accept, fc.conditional))
        return out

    def fit(self):
        fits = self._fits(self.cfg.fit.series)
        rows = [["date", "series_id", "observed", "fitted"]]
        for name, f in fits.items():
            rows += [[format_month(t), name, o, v] for t, o, v in
                     zip(f.fitted.months, f.observed.values.tolist(), f.fitted.values.tolist())]
        self.write_table("fit_series.csv", rows)
        self.write_report("fit.json", {"fits": [f.to_dict(name) for name, f in fits.items()]})

    def warn(self):
        wc = self.cfg.warn
        if not wc.series or not wc.rv:
            raise InputError("warn needs warn.series and warn.rv")
        f = self._fits([wc.series])[wc.series]
        series = self._series()
        if wc.rv not in series:
            raise InputError(f"reference series {wc.rv!r} not in {self.cfg.series}")
        rv = series[wc.rv]
        if rv.cadence == 12:
            rv = interpolate_semiannual(rv)
        rows_out = warning_series(f.fitted, WarningConfig(wc.f_max, rv, wc.series), f.delta_t)
        rows = [["date", "signal_date", "value", "w_th", "flag"]]
        rows += [[format_month(r.date), format_month(r.signal_date), r.value, r.w_th, int(r.flag)]
                 for r in rows_out]
        self.write_table("warnings.csv", rows)

    def distributions(self):
        rows = [["asset_class", "year", "quantity", "x", "p_ge"]]
        for cls in self.classes():
            for s in self.snapshots(cls):
                nm = node_measures(s)
                quantities = {
                    "total_strength": nm.total_strength,
                    "edge_weight": s.weights[s.weights > 0],
                    "centrality": eigenvector_centrality(s).values,
                }
                for q, vals in quantities.items():
                    rows += [[cls, s.year, q, x, p] for x, p in eccdf(vals)]
        self.write_table("distributions.csv", rows)


def run(subcommand: str, cfg: RunConfig) -> int:
    if subcommand not in SUBCOMMANDS:
        log.error("unknown subcommand %s", subcommand)
        return 1
    try:
        getattr(Pipeline(cfg), subcommand)()
    except (InputError, OSError) as exc:
        log.error("input error: %s", exc)
        return 1
    except (NoCoreError, SpectralError) as exc:
        log.error("%s", exc)
        return 2
    except (ValueError, ArithmeticError) as exc:
        log.error("invariant violated: %s", exc)
        return 2
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pinnet", description=__doc__.splitlines()[0])
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--config", help="JSON run configuration")
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                    help="override a config value, e.g. search.samples=1000")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        overrides = dict(parse_override(s) for s in args.set)
        if args.out:
            overrides["output"] = args.out
        if args.seed is not None:
            overrides["seed"] = args.seed
        cfg = load_config(args.config, overrides)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        log.error("config error: %s", exc)
        return 1
    return run(args.subcommand, cfg)


if __name__ == "__main__":
    sys.exit(main())
