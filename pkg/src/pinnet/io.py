"""CSV/JSON readers and writers for positions, deflators, registries and series."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .netcore import CountryRegistry, PositionRecord
from .nlsmm import TimeSeries, format_month, parse_month


class InputError(ValueError):
    """Malformed input file; the message carries path and line number."""


def _rows(path: Path, header: Sequence[str]):
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            got = [h.strip() for h in next(reader)]
        except StopIteration:
            raise InputError(f"{path}: empty file") from None
        if got != list(header):
            raise InputError(f"{path}:1: expected header {','.join(header)}, got {','.join(got)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise InputError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            yield lineno, [c.strip() for c in row]


def _num(path, lineno, text, kind=float):
    try:
        v = kind(text)
    except ValueError:
        raise InputError(f"{path}:{lineno}: cannot parse {text!r} as {kind.__name__}") from None
    if kind is float and not math.isfinite(v):
        raise InputError(f"{path}:{lineno}: non-finite value {text!r}")
    return v


def read_registry(path) -> CountryRegistry:
    rows = []
    for lineno, (iso, name, ofc) in _rows(path, ("iso", "name", "is_ofc")):
        if ofc not in ("0", "1"):
            raise InputError(f"{path}:{lineno}: is_ofc must be 0 or 1, got {ofc!r}")
        rows.append((iso, name, ofc == "1"))
    try:
        return CountryRegistry.from_rows(rows)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None


def read_positions(path, registry: CountryRegistry) -> list[PositionRecord]:
    out = []
    header = ("year", "source_iso", "target_iso", "position_usd_millions")
    for lineno, (year, src, dst, pos) in _rows(path, header):
        try:
            s, t = registry.id_of(src), registry.id_of(dst)
        except KeyError as exc:
            raise InputError(f"{path}:{lineno}: {exc.args[0]}") from None
        if s == t:
            raise InputError(f"{path}:{lineno}: self-loop position for {src}")
        out.append(PositionRecord(_num(path, lineno, year, int), s, t, _num(path, lineno, pos)))
    return out


def read_deflator(path) -> dict[int, float]:
    out = {}
    for lineno, (year, index) in _rows(path, ("year", "index")):
        y = _num(path, lineno, year, int)
        if y in out:
            raise InputError(f"{path}:{lineno}: duplicate year {y}")
        out[y] = _num(path, lineno, index)
    return out


def read_series(path) -> dict[str, TimeSeries]:
    points: dict[str, list[tuple[int, float]]] = {}
    for lineno, (date, sid, value) in _rows(path, ("date", "series_id", "value")):
        try:
            t = parse_month(date)
        except ValueError:
            raise InputError(f"{path}:{lineno}: bad date {date!r}, expected YYYY-MM") from None
        points.setdefault(sid, []).append((t, _num(path, lineno, value)))
    out = {}
    for sid, pts in points.items():
        pts.sort()
        try:
            out[sid] = TimeSeries.from_pairs(pts, sid)
        except ValueError as exc:
            raise InputError(f"{path}: series {sid}: {exc}") from None
    return out


def write_series(path, series: Iterable[TimeSeries]) -> None:
    rows = [("date", "series_id", "value")]
    for s in series:
        rows += [(format_month(t), s.label, v) for t, v in zip(s.months, s.values.tolist())]
    write_csv(path, rows)


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return "" if v is None else str(v)


def write_csv(path, rows: Iterable[Sequence]) -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in rows:
            w.writerow([_cell(v) for v in row])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (set, frozenset)):
        return sorted(_jsonable(v) for v in obj)
    return obj


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n", encoding="utf-8")
