import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from synth import ld_semiannual, noisy_suite
from pinnet.nlsmm import (DT_GRID, TimeSeries, WarningConfig, aligned_design, decide, first_warning,
                          fit, fit_fixed_shift, format_month, interpolate_semiannual, memory_ratio,
                          model_value, month, parse_month, pearson, synthetic_pair, warning_series)


def ts(pairs, label="s"):
    return TimeSeries.from_pairs([(parse_month(d), v) for d, v in pairs], label)


def test_month_roundtrip():
    assert month(2005, 7) == 2005 * 12 + 6
    assert format_month(parse_month("2007-01")) == "2007-01"
    with pytest.raises(ValueError):
        parse_month("2007-13")


def test_timeseries_validation():
    with pytest.raises(ValueError, match="increasing"):
        ts([("2002-01", 1.0), ("2001-01", 2.0)])
    with pytest.raises(ValueError, match="cadence"):
        ts([("2002-01", 1.0), ("2003-01", 2.0), ("2003-07", 3.0)])
    s = ts([("2002-01", 1.0), ("2002-07", 2.0)])
    assert s.cadence == 6 and s.at(month(2002, 7)) == 2.0
    with pytest.raises(KeyError, match="2009-01"):
        s.at(month(2009))


def test_interpolate_midpoint_and_constant():
    out = interpolate_semiannual(ts([("2002-01", 0.30), ("2003-01", 0.34)]))
    assert out.months == (month(2002), month(2002, 7), month(2003))
    assert out.values[1] == pytest.approx(0.32)
    const = interpolate_semiannual(ts([(f"{y}-01", 0.5) for y in range(2000, 2006)]))
    assert np.all(const.values == 0.5) and const.cadence == 6
    with pytest.raises(ValueError):
        interpolate_semiannual(ts([("2002-01", 0.3)]))
    with pytest.raises(ValueError, match="12-month"):
        interpolate_semiannual(out)


@given(st.lists(st.floats(0.01, 10.0), min_size=2, max_size=30))
def test_interpolate_roundtrip(values):
    annual = TimeSeries(tuple(month(2000 + k) for k in range(len(values))), values)
    out = interpolate_semiannual(annual)
    assert out.values[0::2].tolist() == annual.values.tolist()
    assert out.months[0::2] == annual.months


def test_model_value_examples():
    assert model_value(0.5, 3.0, 7.0, 1.0, 1.0, v_r=42.0) == 42.0
    assert model_value(1.0, 2.0, 1.0, 2.0, 3.0, v_r=10.0) == 70.0
    with pytest.raises(ValueError):
        model_value(1.0, 2.0, 1.0, 0.0, 1.0)


def test_model_value_high_precision_oracle():
    rng = np.random.default_rng(0)
    mpmath.mp.dps = 50
    for _ in range(1000):
        a, g1, g2 = rng.uniform(0.1, 2), rng.uniform(-20, 25), rng.uniform(-20, 25)
        r1, r2, v = rng.uniform(0.5, 1.5), rng.uniform(0.5, 1.5), rng.uniform(1, 1e4)
        exact = mpmath.mpf(v) * a * (mpmath.mpf(r1) ** g1 + mpmath.mpf(r2) ** g2)
        assert model_value(a, g1, g2, r1, r2, v) == pytest.approx(float(exact), rel=1e-12)


def test_pearson_examples_and_oracle():
    x = np.arange(10.0)
    assert pearson(x, 2 * x + 1) == pytest.approx(1.0, abs=1e-15)
    assert pearson(x, -x) == pytest.approx(-1.0, abs=1e-15)
    rng = np.random.default_rng(4)
    for _ in range(20):
        a, b = rng.standard_normal(50), rng.standard_normal(50)
        n = 50
        textbook = (n * (a @ b) - a.sum() * b.sum()) / np.sqrt(
            (n * (a @ a) - a.sum() ** 2) * (n * (b @ b) - b.sum() ** 2))
        assert pearson(a, b) == pytest.approx(textbook, abs=1e-12)
    with pytest.raises(ValueError, match="zero-variance"):
        pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])


def test_decision_boundaries():
    assert decide(0.9) == "accept"
    assert decide(0.8999999) == "conditional"
    assert decide(0.85) == "conditional"
    assert decide(0.8499999) == "reject"
    assert decide(1.0) == "accept" and decide(-0.3) == "reject"


def test_memory_ratio():
    assert memory_ratio(11.0, 6.6) == pytest.approx(0.6)
    assert memory_ratio(-1.0, 2.0) is None and memory_ratio(2.0, -1.0) is None
    assert memory_ratio(0.0, 2.0) is None


def test_exact_model_recovery():
    rho, vd = synthetic_pair()
    f = fit(rho, vd, month(2005))
    assert f.delta_t == 6
    for got, want in ((f.gamma1, 11.0), (f.gamma2, 6.6), (f.a_r, 0.9)):
        assert abs(got - want) <= 1e-2 * want
    assert f.p_r >= 0.999 and f.decision == "accept"
    assert f.m == pytest.approx(0.6, abs=1e-2)
    assert f.reference == (month(2005), pytest.approx(1000.0))
    assert set(f.candidates) == set(DT_GRID)


@pytest.mark.parametrize("dt", [12, 6, -6, -12])
def test_exact_recovery_each_shift(dt):
    rho, vd = synthetic_pair(g1=8.0, g2=4.0, a_r=1.2, delta_t=dt, rho0=ld_semiannual())
    f = fit(rho, vd, month(2005))
    assert f.delta_t == dt
    assert f.gamma1 == pytest.approx(8.0, abs=1e-3) and f.gamma2 == pytest.approx(4.0, abs=1e-3)


def test_reference_density_is_one():
    rho, vd = synthetic_pair()
    _, y, x1, x2, v_r = aligned_design(rho, vd, month(2005), 6)
    dates = [t for t in vd.months if t - 6 in rho.months and t - 12 in rho.months]
    k = dates.index(month(2005))
    assert y[k] == pytest.approx(1.0) and v_r == vd.at(month(2005))
    zero_shift = aligned_design(rho, vd, month(2005), 0)
    assert zero_shift[2][zero_shift[0].index(month(2005))] == 1.0


def test_noisy_suite_recovery():
    errs, dt_rate = noisy_suite(seed=0)
    assert np.median(errs) <= 0.5
    assert dt_rate >= 0.8


def test_degenerate_constant_density():
    rho = TimeSeries(tuple(range(month(2002), month(2010) + 1, 6)), np.full(17, 0.3), "rho")
    vals = 100.0 + 10.0 * np.sin(np.arange(17))
    vd = TimeSeries(rho.months, vals, "vd")
    f = fit(rho, vd, month(2005), dt_grid=(0,))
    assert f.degenerate
    assert any("flat" in n for n in f.notes)
    _, y, *_ = aligned_design(rho, vd, month(2005), 0)
    assert f.a_r == pytest.approx(y.mean() / 2, rel=1e-12)


def test_objective_trace_non_increasing():
    rho, vd = synthetic_pair(noise=0.03, rng=np.random.default_rng(1))
    for c in fit(rho, vd, month(2005)).candidates.values():
        assert len(c.trace) >= 1
        assert all(b <= a for a, b in zip(c.trace, c.trace[1:]))
        assert c.objective <= c.trace[0] + 1e-15


def test_fit_never_worse_than_truth():
    rng = np.random.default_rng(3)
    rho, vd = synthetic_pair(g1=9.0, g2=3.0, noise=0.05, rng=rng)
    _, y, x1, x2, _ = aligned_design(rho, vd, month(2005), 6)
    c = fit_fixed_shift(y, x1, x2)
    g = x1 ** 9.0 + x2 ** 3.0
    a = (g @ y) / (g @ g)
    truth = float(((y - a * g) @ (y - a * g)) / (y @ y))
    assert c.objective <= truth + 1e-12


def test_insufficient_overlap():
    rho = ts([("2005-01", 0.3), ("2005-07", 0.31), ("2006-01", 0.32)])
    vd = ts([("2005-01", 1.0), ("2005-07", 2.0), ("2006-01", 3.0)])
    with pytest.raises(ValueError, match="enough overlapping"):
        fit(rho, vd, month(2005))


def test_window_length_note():
    rho, vd = synthetic_pair()
    notes = fit(rho, vd, month(2005)).notes
    assert any("window lengths differ" in n for n in notes)


def test_reference_year_invariance_equal_exponents():
    # with g1 == g2 a new reference rescales both terms alike, so only a_r moves
    rho, vd = synthetic_pair(g1=7.0, g2=7.0, rho0=ld_semiannual())
    a = fit(rho, vd, month(2005), dt_grid=(6,))
    b = fit(rho, vd, month(2008), dt_grid=(6,))
    assert abs(a.gamma1 - b.gamma1) < 1e-3 and abs(a.gamma2 - b.gamma2) < 1e-3
    assert a.a_r != pytest.approx(b.a_r, rel=1e-3)


@pytest.mark.xfail(strict=True, reason="g1 != g2 terms rescale unequally under a new reference; "
                                       "exponents move by about 1 on this design")
def test_reference_year_invariance_within_tolerance():
    rho, vd = synthetic_pair()
    base = fit(rho, vd, month(2005))
    for year in (2004, 2006, 2007, 2008):
        other = fit(rho, vd, month(year))
        assert abs(other.gamma1 - base.gamma1) <= 0.2
        assert abs(other.gamma2 - base.gamma2) <= 0.2


def _flat_rv():
    return TimeSeries(tuple(range(month(2000), month(2012) + 1, 3)), np.full(49, 100.0), "gdp")


def test_warning_step_series_single_flag():
    months = tuple(range(month(2003), month(2010) + 1, 6))
    values = np.where(np.array(months) >= month(2006, 7), 80.0, 20.0)
    cfg = WarningConfig(0.5, _flat_rv(), "cds")
    rows = warning_series(TimeSeries(months, values), cfg)
    flags = [r for r in rows if r.flag]
    assert [r.date for r in flags] == [month(2006, 7)]
    assert flags[0].signal_date == month(2006, 7)
    assert all(r.w_th == 50.0 for r in rows)
    led = warning_series(TimeSeries(months, values), cfg, delta_t=6)
    assert first_warning(led) == month(2006, 1)
    assert first_warning(warning_series(TimeSeries(months, values), cfg, delta_t=-6)) == month(2006, 7)


def test_warning_below_threshold_never_flags():
    months = tuple(range(month(2003), month(2010) + 1, 6))
    rows = warning_series(TimeSeries(months, np.full(len(months), 10.0)), WarningConfig(0.5, _flat_rv()))
    assert not any(r.flag for r in rows) and first_warning(rows) is None


def test_warning_flags_each_excursion_onset():
    months = tuple(range(month(2003), month(2006) + 1, 6))
    values = [10.0, 60.0, 70.0, 10.0, 60.0, 10.0, 10.0]
    rows = warning_series(TimeSeries(months, values), WarningConfig(0.5, _flat_rv()))
    assert [r.flag for r in rows] == [False, True, False, False, True, False, False]


def test_warning_rv_matching_and_gaps():
    rv = ts([("2005-02", 100.0), ("2006-01", 200.0)])
    rows = warning_series(ts([("2005-01", 1.0)]), WarningConfig(0.5, rv))
    assert rows[0].w_th == 50.0
    with pytest.raises(ValueError, match="2007-01"):
        warning_series(ts([("2007-01", 1.0)]), WarningConfig(0.5, rv))


def test_warning_config_validation():
    with pytest.raises(ValueError):
        WarningConfig(0.0, _flat_rv())
    with pytest.raises(ValueError):
        WarningConfig(0.5, ts([("2005-01", -1.0), ("2005-07", 1.0)]))
