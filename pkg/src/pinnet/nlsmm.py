"""Non-linear short-term memory model linking network density to derivative volumes.

The model reads

    V_D(t_n) = V_r * a_r * (rho(t_n)**g1 + rho(t_{n-1})**g2)

with ``rho`` the edge density normalized to its value at the reference date
``t_r`` and ``V_r = V_D(t_r)``. Dates are month indices
(``year * 12 + month - 1``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

DT_GRID = (12, 6, 0, -6, -12)
GAMMA_BOUNDS = (-20.0, 25.0)
GAMMA_STEP = 0.5
ACCEPT, CONDITIONAL = 0.9, 0.85
RV_MATCH_MONTHS = 3
MIN_OVERLAP = 4


def month(year: int, mon: int = 1) -> int:
    return year * 12 + mon - 1


def parse_month(text: str) -> int:
    y, m = text.strip().split("-")
    m = int(m)
    if not 1 <= m <= 12:
        raise ValueError(f"bad month in date {text!r}")
    return month(int(y), m)


def format_month(t: int) -> str:
    return f"{t // 12:04d}-{t % 12 + 1:02d}"


@dataclass(frozen=True, eq=False)
class TimeSeries:
    months: tuple[int, ...]
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "months", tuple(int(t) for t in self.months))
        v = np.array(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if len(self.months) != v.size:
            raise ValueError("dates and values differ in length")
        steps = np.diff(self.months)
        if np.any(steps <= 0):
            raise ValueError(f"dates of {self.label!r} are not strictly increasing")
        if steps.size and np.any(steps != steps[0]):
            raise ValueError(f"series {self.label!r} has non-uniform cadence")

    @classmethod
    def from_pairs(cls, pairs, label: str = "") -> "TimeSeries":
        pairs = list(pairs)
        return cls(tuple(p[0] for p in pairs), np.array([p[1] for p in pairs], dtype=float), label)

    @property
    def cadence(self) -> int | None:
        return self.months[1] - self.months[0] if len(self.months) > 1 else None

    def __len__(self):
        return len(self.months)

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.months, self.values.tolist()))

    def at(self, t: int) -> float:
        try:
            return float(self.values[self.months.index(t)])
        except ValueError:
            raise KeyError(f"{self.label or 'series'} has no value at {format_month(t)}") from None


def interpolate_semiannual(annual: TimeSeries) -> TimeSeries:
    """Insert linear midpoints between consecutive annual points."""
    if len(annual) < 2:
        raise ValueError("need at least two annual points to interpolate")
    if annual.cadence != 12:
        raise ValueError(f"expected a 12-month cadence, got {annual.cadence}")
    v = annual.values
    out = np.empty(2 * v.size - 1)
    out[0::2] = v
    out[1::2] = 0.5 * (v[:-1] + v[1:])
    start = annual.months[0]
    return TimeSeries(tuple(range(start, annual.months[-1] + 1, 6)), out, annual.label)


def model_value(a_r: float, g1: float, g2: float, rho_bar_now: float, rho_bar_prev: float,
                v_r: float = 1.0) -> float:
    if rho_bar_now <= 0 or rho_bar_prev <= 0:
        raise ValueError("normalized densities must be positive")
    return v_r * a_r * (rho_bar_now ** g1 + rho_bar_prev ** g2)


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise ValueError("pearson needs two equal-length samples of size >= 2")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0 or syy == 0:
        raise ValueError("pearson is undefined for a zero-variance sample")
    return float(np.clip((dx @ dy) / math.sqrt(sxx * syy), -1.0, 1.0))


def decide(p_r: float, accept: float = ACCEPT, conditional: float = CONDITIONAL) -> str:
    if p_r >= accept:
        return "accept"
    if p_r >= conditional:
        return "conditional"
    return "reject"


@dataclass
class DtCandidate:
    delta_t: int
    n_points: int
    objective: float
    a_r: float
    gamma1: float
    gamma2: float
    degenerate: bool
    trace: list[float] = field(default_factory=list)


@dataclass
class NlsmmFit:
    a_r: float
    gamma1: float
    gamma2: float
    m: float | None
    delta_t: int
    p_r: float
    decision: str
    reference: tuple[int, float]
    objective: float
    degenerate: bool
    fitted: TimeSeries
    observed: TimeSeries
    candidates: dict[int, DtCandidate]
    notes: list[str] = field(default_factory=list)

    def to_dict(self, series: str = "", f_gdp_ref: float | None = None) -> dict:
        return {
            "series": series or self.observed.label,
            "f_gdp_ref": f_gdp_ref,
            "a_r": self.a_r,
            "gamma1": self.gamma1,
            "gamma2": self.gamma2,
            "m": self.m,
            "delta_t": self.delta_t,
            "p_r": self.p_r,
            "decision": self.decision,
            "t_r": format_month(self.reference[0]),
            "v_r": self.reference[1],
            "objective": self.objective,
            "degenerate": self.degenerate,
            "notes": self.notes,
        }


def memory_ratio(g1: float, g2: float) -> float | None:
    if g1 < 0 or g2 < 0 or abs(g1) < 1e-9:
        return None
    return g2 / g1


def aligned_design(rho: TimeSeries, vd: TimeSeries, t_r: int, delta_t: int,
                   memory: int | None = None):
    """Observed ratios ``vd/V_r`` with the two normalized density arguments.

    ``vd(t)`` is paired with ``rho(t - delta_t)`` and ``rho(t - delta_t - memory)``;
    positive ``delta_t`` means density leads. ``memory`` defaults to the
    density cadence.
    """
    memory = rho.cadence if memory is None else memory
    r = rho.as_dict()
    rho_r = rho.at(t_r)
    v_r = vd.at(t_r)
    if rho_r <= 0 or v_r <= 0:
        raise ValueError("reference values must be positive")
    dates, y, x1, x2 = [], [], [], []
    for t, v in zip(vd.months, vd.values):
        a, b = t - delta_t, t - delta_t - memory
        if a in r and b in r:
            dates.append(t)
            y.append(v / v_r)
            x1.append(r[a] / rho_r)
            x2.append(r[b] / rho_r)
    return dates, np.array(y), np.array(x1), np.array(x2), v_r


def _closed_form(y, g):
    gg = float(g @ g)
    a = float(g @ y) / gg
    res = y - a * g
    return a, float(res @ res)


def fit_fixed_shift(y: np.ndarray, x1: np.ndarray, x2: np.ndarray,
                    bounds=GAMMA_BOUNDS, step=GAMMA_STEP, xtol: float = 1e-4) -> DtCandidate:
    """Least-squares exponents for one alignment; ``a_r`` is solved in closed form."""
    if np.any(x1 <= 0) or np.any(x2 <= 0):
        raise ValueError("normalized densities must be positive")
    norm = float(y @ y)
    grid = np.arange(bounds[0], bounds[1] + step / 2, step)
    with np.errstate(over="ignore"):
        p1 = x1[None, :] ** grid[:, None]
        p2 = x2[None, :] ** grid[:, None]
    gy = (p1 @ y)[:, None] + (p2 @ y)[None, :]
    gg = (p1 * p1).sum(1)[:, None] + 2 * p1 @ p2.T + (p2 * p2).sum(1)[None, :]
    sse = np.maximum(norm - gy * gy / gg, 0.0) / norm
    sse[~np.isfinite(sse)] = np.inf
    i, j = np.unravel_index(int(np.argmin(sse)), sse.shape)
    finite = sse[np.isfinite(sse)]
    degenerate = bool(finite.max() - finite.min() <= 1e-12 * (1.0 + finite.min()))

    def objective(g):
        with np.errstate(over="ignore", invalid="ignore"):
            model = x1 ** g[0] + x2 ** g[1]
        if not np.all(np.isfinite(model)):
            return np.inf
        return _closed_form(y, model)[1] / norm

    x0 = np.array([grid[i], grid[j]])
    trace = [objective(x0)]
    if degenerate:
        g = x0
    else:
        best = [trace[0]]

        def track(xk):
            best[0] = min(best[0], objective(xk))
            trace.append(best[0])

        res = minimize(objective, x0, method="Nelder-Mead", callback=track,
                       options={"xatol": xtol, "fatol": 1e-15, "maxiter": 4000,
                                "initial_simplex": np.array([x0, x0 + [step, 0], x0 + [0, step]])})
        g = res.x if res.fun <= trace[0] else x0
    a, sse_final = _closed_form(y, x1 ** g[0] + x2 ** g[1])
    return DtCandidate(0, y.size, sse_final / norm, a, float(g[0]), float(g[1]), degenerate, trace)


def fit(rho: TimeSeries, vd: TimeSeries, t_r: int, dt_grid: Sequence[int] = DT_GRID,
        memory: int | None = None, thresholds: tuple[float, float] = (ACCEPT, CONDITIONAL)) -> NlsmmFit:
    """Fit the model for each lead/lag shift and keep the best one.

    Shifts whose overlap has fewer than four points are skipped. The best
    shift minimizes ``||V_D - fit||^2 / ||V_D||^2`` over its own window.
    """
    candidates: dict[int, DtCandidate] = {}
    designs = {}
    notes = []
    for dt in dt_grid:
        dates, y, x1, x2, v_r = aligned_design(rho, vd, t_r, dt, memory)
        if y.size < MIN_OVERLAP:
            notes.append(f"delta_t={dt:+d}: only {y.size} overlapping points, skipped")
            continue
        c = fit_fixed_shift(y, x1, x2)
        c.delta_t = dt
        candidates[dt] = c
        designs[dt] = (dates, y, x1, x2, v_r)
    if not candidates:
        raise ValueError("no lead/lag shift leaves enough overlapping points")
    lengths = {c.n_points for c in candidates.values()}
    if len(lengths) > 1:
        notes.append("window lengths differ across delta_t "
                     f"({sorted(lengths)}); shift selection is biased towards shorter windows")
    best = min(candidates.values(), key=lambda c: c.objective)
    dates, y, x1, x2, v_r = designs[best.delta_t]
    fitted_rel = best.a_r * (x1 ** best.gamma1 + x2 ** best.gamma2)
    try:
        p_r = pearson(fitted_rel, y)
    except ValueError:
        p_r = float("nan")
    if best.degenerate:
        notes.append("objective is flat in the exponents (constant density); exponents are arbitrary")
    decision = decide(p_r, *thresholds) if np.isfinite(p_r) else "reject"
    return NlsmmFit(
        a_r=best.a_r, gamma1=best.gamma1, gamma2=best.gamma2,
        m=memory_ratio(best.gamma1, best.gamma2), delta_t=best.delta_t, p_r=p_r,
        decision=decision, reference=(t_r, v_r), objective=best.objective,
        degenerate=best.degenerate,
        fitted=TimeSeries(tuple(dates), fitted_rel * v_r, f"fit({vd.label})"),
        observed=TimeSeries(tuple(dates), y * v_r, vd.label),
        candidates=candidates, notes=notes,
    )


@dataclass(frozen=True)
class WarningConfig:
    f_max: float
    rv: TimeSeries
    derivative: str = ""

    def __post_init__(self):
        if self.f_max <= 0:
            raise ValueError("f_max must be positive")
        if np.any(self.rv.values <= 0):
            raise ValueError("reference variable must be positive everywhere")


@dataclass(frozen=True)
class WarningRow:
    date: int
    value: float
    w_th: float
    flag: bool
    signal_date: int


def _nearest(rv: TimeSeries, t: int) -> float:
    months = np.array(rv.months)
    k = int(np.argmin(np.abs(months - t)))
    if abs(months[k] - t) > RV_MATCH_MONTHS:
        raise ValueError(f"reference variable has no value within {RV_MATCH_MONTHS} months "
                         f"of {format_month(t)}")
    return float(rv.values[k])


def warning_series(vd_fit: TimeSeries, cfg: WarningConfig, delta_t: int = 0) -> list[WarningRow]:
    """Compare a fitted derivative series with ``f_max`` times the reference variable.

    A flag marks the first date of each excursion above the threshold. With
    a positive lead ``delta_t`` the signal is dated ``delta_t`` months before
    the observation it concerns.
    """
    lead = max(int(delta_t), 0)
    rows = []
    above_prev = False
    for t, v in zip(vd_fit.months, vd_fit.values):
        w_th = cfg.f_max * _nearest(cfg.rv, t)
        above = bool(v > w_th)
        rows.append(WarningRow(t, float(v), w_th, above and not above_prev, t - lead))
        above_prev = above
    return rows


def first_warning(rows: Sequence[WarningRow]) -> int | None:
    for r in rows:
        if r.flag:
            return r.signal_date
    return None


def synthetic_pair(a_r: float = 0.9, g1: float = 11.0, g2: float = 6.6, delta_t: int = 6,
                   t_r: int = month(2005), start: int = month(2002), stop: int = month(2012),
                   vd_start: int | None = None, v_r: float = 1000.0, noise: float = 0.0,
                   rng: np.random.Generator | None = None, rho0: np.ndarray | None = None):
    """Density and derivative series that follow the model exactly (up to noise).

    The density at ``t_r`` is solved for so that the model reproduces
    ``V_r`` at the reference date, which makes ``a_r`` identifiable.
    Returns ``(rho_semiannual, vd)``.
    """
    from scipy.optimize import brentq

    months = np.arange(start, stop + 1, 6)
    if rho0 is None:
        s = (months - start) / (stop - start)
        rho0 = 0.31 + 0.06 * np.sin(np.pi * 1.3 * s) ** 2 + 0.015 * np.sin(7.0 * np.pi * s)
    rho_vals = np.array(rho0, dtype=float)
    memory = 6
    idx = {int(t): k for k, t in enumerate(months)}
    ka, kb = idx[t_r - delta_t], idx[t_r - delta_t - memory]
    kr = idx[t_r]

    def bracket(c):
        vals = rho_vals.copy()
        vals[kr] = c
        return a_r * ((vals[ka] / c) ** g1 + (vals[kb] / c) ** g2) - 1.0

    if kr not in (ka, kb):
        rho_vals[kr] = brentq(bracket, 1e-3, 10.0)
    rho = TimeSeries(tuple(int(t) for t in months), rho_vals, "rho")
    rho_r = rho_vals[kr]
    first = vd_start if vd_start is not None else start + delta_t + memory if delta_t >= 0 else start + memory
    vd_months = [int(t) for t in months if t >= first and (t - delta_t) in idx and (t - delta_t - memory) in idx]
    vals = []
    for t in vd_months:
        x1 = rho_vals[idx[t - delta_t]] / rho_r
        x2 = rho_vals[idx[t - delta_t - memory]] / rho_r
        vals.append(v_r * a_r * (x1 ** g1 + x2 ** g2))
    vals = np.array(vals)
    if noise:
        rng = rng or np.random.default_rng(0)
        factors = 1.0 + noise * rng.standard_normal(vals.size)
        factors[vd_months.index(t_r)] = 1.0
        vals = vals * factors
    return rho, TimeSeries(tuple(vd_months), vals, "vd")
