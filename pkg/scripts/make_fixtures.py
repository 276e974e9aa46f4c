"""Regenerate the bundled synthetic fixtures in src/pinnet/data/."""

from pathlib import Path

import numpy as np

from pinnet.io import write_csv, write_series
from pinnet.nlsmm import TimeSeries, month, synthetic_pair

DATA = Path(__file__).resolve().parents[1] / "src" / "pinnet" / "data"


def six_node():
    write_csv(DATA / "fixture_registry.csv", [
        ("iso", "name", "is_ofc"),
        ("AAA", "Alphaland", 0), ("BBB", "Betania", 0), ("CCC", "Cayo Isle", 1),
        ("DDD", "Deltaria", 0), ("EEE", "Epsilon", 0), ("FFF", "Fjordholm", 1),
    ])
    write_csv(DATA / "fixture_deflator.csv", [("year", "index"), (2005, 80.0), (2013, 100.0)])
    write_csv(DATA / "fixture_positions_E.csv", [
        ("year", "source_iso", "target_iso", "position_usd_millions"),
        (2005, "AAA", "BBB", 100.0), (2005, "AAA", "BBB", 20.0), (2005, "BBB", "CCC", 80.0),
        (2005, "CCC", "AAA", 60.0), (2005, "AAA", "CCC", 45.0), (2005, "BBB", "AAA", 40.0),
        (2005, "DDD", "AAA", 200.0), (2005, "AAA", "DDD", 30.0), (2005, "EEE", "FFF", 500.0),
        (2005, "FFF", "EEE", 500.0), (2005, "CCC", "BBB", -10.0),
    ])
    write_csv(DATA / "fixture_positions_nocore.csv", [
        ("year", "source_iso", "target_iso", "position_usd_millions"),
        (2005, "AAA", "BBB", 100.0), (2005, "BBB", "CCC", 100.0), (2005, "CCC", "AAA", 10.0),
    ])


def series():
    rho, vd = synthetic_pair(a_r=0.9, g1=11.0, g2=6.6, delta_t=6, t_r=month(2005))
    vd = TimeSeries(vd.months, vd.values, "NOA_CDS")
    rho = TimeSeries(rho.months, rho.values, "rho_LD")
    # reference variable rising linearly; threshold placed so the fit crosses once
    gdp = TimeSeries(vd.months, np.linspace(1800.0, 2600.0, len(vd)), "GDP_world")
    write_series(DATA / "fixture_series.csv", [rho, vd, gdp])


if __name__ == "__main__":
    six_node()
    series()
