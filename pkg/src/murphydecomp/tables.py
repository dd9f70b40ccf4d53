"""CSV ingestion and CSV/JSON emission for the command line tools.

Dialect: comma separated, UTF-8, '.' decimal point, mandatory header.
Period labels are kept as free-form strings.  Floats are written with
``repr`` so a written table parses back to the identical values.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from collections import OrderedDict
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from .decomp import ForecastSeries
from .exceptions import InputError

# aliases accepted so a simulated panel can be piped straight into decompose
_FORECAST_ALIASES = ("forecast", "mean_forecast")
_REALIZATION_ALIASES = ("realization", "y")


def _open_text(path: str):
    if path == "-":
        return sys.stdin
    return open(path, newline="", encoding="utf-8")


def read_rows(path: str):
    """Header and data rows of a CSV file (``-`` reads standard input)."""
    handle = _open_text(path)
    try:
        text = handle.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    finally:
        if handle is not sys.stdin:
            handle.close()
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise InputError("input is empty; a header row is required") from None
    header = [h.strip() for h in header]
    if len(set(header)) != len(header):
        raise InputError("duplicate column names in header", row=1)
    rows = []
    for lineno, raw in enumerate(reader, start=2):
        if not raw or all(not c.strip() for c in raw):
            continue
        if len(raw) != len(header):
            raise InputError(f"expected {len(header)} fields, found {len(raw)}", row=lineno)
        rows.append((lineno, dict(zip(header, (c.strip() for c in raw)))))
    return header, rows


def _pick(header: Sequence[str], aliases: Sequence[str], required=True) -> Optional[str]:
    for name in aliases:
        if name in header:
            return name
    if required:
        raise InputError(f"missing column; expected one of {', '.join(aliases)}")
    return None


def parse_float(value: str, row: int, column: str) -> float:
    try:
        out = float(value)
    except ValueError:
        raise InputError(f"not a number: {value!r}", row=row, column=column) from None
    if not math.isfinite(out):
        raise InputError(f"non-finite value: {value!r}", row=row, column=column)
    return out


def parse_int(value: str, row: int, column: str) -> int:
    try:
        out = int(value)
    except ValueError:
        try:
            f = float(value)
        except ValueError:
            raise InputError(f"not an integer: {value!r}", row=row, column=column) from None
        if not f.is_integer():
            raise InputError(f"not an integer: {value!r}", row=row, column=column) from None
        out = int(f)
    if out < 0:
        raise InputError(f"horizon must be non-negative, got {out}", row=row, column=column)
    return out


def read_forecast_table(path: str, tau: Optional[float] = None) -> "OrderedDict[int, ForecastSeries]":
    """Forecast/realisation pairs grouped by horizon (ascending).

    Columns: ``period``, ``forecast``, ``realization`` and optionally
    ``horizon`` (default 0) and ``tau``.  When a ``tau`` column is present
    and ``tau`` is given, only rows at that level are kept.
    """
    header, rows = read_rows(path)
    if "period" not in header:
        raise InputError("missing column 'period'")
    fcol = _pick(header, _FORECAST_ALIASES)
    ycol = _pick(header, _REALIZATION_ALIASES)
    has_h = "horizon" in header
    has_tau = "tau" in header

    parsed = []
    seen = set()
    for lineno, rec in rows:
        period = rec["period"]
        if period == "":
            raise InputError("empty period label", row=lineno, column="period")
        h = parse_int(rec["horizon"], lineno, "horizon") if has_h else 0
        t = parse_float(rec["tau"], lineno, "tau") if has_tau else None
        key = (period, h, t)
        if key in seen:
            raise InputError(f"duplicate key (period={period}, horizon={h}, tau={t})", row=lineno)
        seen.add(key)
        parsed.append((lineno, period, h, t, parse_float(rec[fcol], lineno, fcol), parse_float(rec[ycol], lineno, ycol)))

    if has_tau:
        levels = sorted({p[3] for p in parsed})
        if tau is None:
            if len(levels) > 1:
                raise InputError(f"input holds several tau levels {levels}; select one with --tau")
        else:
            parsed = [p for p in parsed if abs(p[3] - tau) <= 1e-12]
            if not parsed:
                raise InputError(f"no rows with tau={tau}")

    groups: Dict[int, List] = {}
    for _, period, h, _, x, y in parsed:
        groups.setdefault(h, []).append((period, x, y))
    out = OrderedDict()
    for h in sorted(groups):
        recs = groups[h]
        out[h] = ForecastSeries(
            tuple(r[0] for r in recs), h, [r[1] for r in recs], [r[2] for r in recs]
        )
    return out


def read_realizations(path: str):
    """``(periods, values)`` from a table with ``period`` and ``realization``."""
    header, rows = read_rows(path)
    if "period" not in header:
        raise InputError("missing column 'period'")
    ycol = _pick(header, _REALIZATION_ALIASES + ("value",))
    periods, values = [], []
    for lineno, rec in rows:
        periods.append(rec["period"])
        values.append(parse_float(rec[ycol], lineno, ycol))
    if len(set(periods)) != len(periods):
        raise InputError("period labels must be unique")
    return periods, values


def read_boe_table(path: str):
    """Rows ``(lineno, period, horizon, mu, sigma, xi)``."""
    header, rows = read_rows(path)
    for col in ("period", "horizon", "mu", "sigma", "xi"):
        if col not in header:
            raise InputError(f"missing column {col!r}")
    out = []
    seen = set()
    for lineno, rec in rows:
        h = parse_int(rec["horizon"], lineno, "horizon")
        key = (rec["period"], h)
        if key in seen:
            raise InputError(f"duplicate key (period={key[0]}, horizon={h})", row=lineno)
        seen.add(key)
        out.append((
            lineno,
            rec["period"],
            h,
            parse_float(rec["mu"], lineno, "mu"),
            parse_float(rec["sigma"], lineno, "sigma"),
            parse_float(rec["xi"], lineno, "xi"),
        ))
    return out


def _plain(v):
    # numpy scalars would otherwise print as e.g. np.float64(...)
    if isinstance(v, np.generic):
        return v.item()
    return v


def _cell(v):
    v = _plain(v)
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return str(v)


def _json_value(v):
    v = _plain(v)
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def render_csv(columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_cell(v) for v in r])
    return buf.getvalue()


def render_json(columns: Sequence[str], rows: Iterable[Sequence], metadata: dict, key: str = "rows") -> str:
    records = [{c: _json_value(v) for c, v in zip(columns, r)} for r in rows]
    return json.dumps({"metadata": metadata, key: records}, indent=2) + "\n"


def write_text(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
